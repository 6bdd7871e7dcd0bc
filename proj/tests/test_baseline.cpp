// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvecwe/errors.hpp"
#include "cvecwe/hashing.hpp"
#include "cvecwe/logreg.hpp"
#include "cvecwe/model_io.hpp"
#include "cvecwe/pipeline.hpp"
#include "cvecwe/tokenizer.hpp"
#include "cvecwe/vectorizer.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cvecwe;

namespace {

using Tokens = std::vector<std::string>;

CweId C(std::uint32_t n) { return CweId(n); }

TokenizerConfig single_letters() {
    TokenizerConfig cfg;
    cfg.min_token_length = 1;
    return cfg;
}

std::vector<CweId> labels(std::size_t n) {
    std::vector<CweId> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(C(static_cast<std::uint32_t>(100 + i)));
    return out;
}

SparseVector random_sparse(std::mt19937_64& rng, std::size_t features) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    SparseVector v;
    for (std::uint32_t f = 0; f < features; ++f) {
        if (rng() % 2) v.push_back({f, w(rng)});
    }
    if (v.empty()) v.push_back({0, 0.5});
    return v;
}

LinearModel random_model(std::mt19937_64& rng, std::size_t classes, std::size_t features, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    LinearModel m(labels(classes), features);
    for (auto& w : m.weights) w = n(rng);
    for (auto& b : m.bias) b = n(rng);
    return m;
}

struct Corpus {
    std::vector<SplitEntry> entries;
    VectorizerModel vectorizer;
    std::vector<SparseVector> x;
    std::vector<std::size_t> y;
    std::vector<CweId> classes;
};

Corpus synthetic_corpus() {
    Corpus c;
    c.entries = parse_split_jsonl(fixtures::read_fixture("synthetic_5class_200.jsonl"));
    std::vector<std::string> docs;
    for (const auto& e : c.entries) docs.push_back(e.description);
    c.vectorizer = fit_vectorizer(docs, VectorizerConfig{});
    std::map<CweId, std::size_t> index;
    for (const auto& e : c.entries) index.emplace(e.label, 0);
    for (auto& [label, i] : index) {
        i = c.classes.size();
        c.classes.push_back(label);
    }
    for (const auto& e : c.entries) {
        c.x.push_back(c.vectorizer.transform(e.description));
        c.y.push_back(index.at(e.label));
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------- tokenizer

TEST(Tokenize, UnigramsThenBigrams) {
    EXPECT_EQ(tokenize("SQL injection in login.php", TokenizerConfig{}),
              (Tokens{"sql", "injection", "in", "login", "php", "sql injection", "injection in", "in login", "login php"}));
}

TEST(Tokenize, EmptyAndPunctuationOnly) {
    EXPECT_TRUE(tokenize("", TokenizerConfig{}).empty());
    EXPECT_TRUE(tokenize(" ... --- !!! ", TokenizerConfig{}).empty());
}

TEST(Tokenize, NumbersKeptRegardlessOfLength) {
    EXPECT_EQ(tokenize("CVE-2024-1234", TokenizerConfig{}), (Tokens{"cve", "2024", "1234", "cve 2024", "2024 1234"}));
    EXPECT_EQ(split_words("a 7 b2 x", TokenizerConfig{}), (Tokens{"7", "b2"}));
}

TEST(Tokenize, UnicodeLettersAndLowercasing) {
    EXPECT_EQ(split_words("Ünïcode ÜBER Привет мир — δοκιμή 日本語", TokenizerConfig{}),
              (Tokens{"ünïcode", "über", "привет", "мир", "δοκιμή", "日本語"}));
    TokenizerConfig keep_case;
    keep_case.lowercase = false;
    EXPECT_EQ(split_words("SQL Injection", keep_case), (Tokens{"SQL", "Injection"}));
}

TEST(Tokenize, NgramRangeIsConfigurable) {
    TokenizerConfig uni;
    uni.ngram_max = 1;
    EXPECT_EQ(tokenize("heap overflow bug", uni), (Tokens{"heap", "overflow", "bug"}));
    TokenizerConfig tri;
    tri.ngram_min = 2;
    tri.ngram_max = 3;
    EXPECT_EQ(tokenize("heap overflow bug", tri), (Tokens{"heap overflow", "overflow bug", "heap overflow bug"}));
}

TEST(Tokenize, InvalidUtf8DoesNotCrash) {
    const std::string bad = "ok \xff\xfe broken \xc3 tail";
    const auto t = split_words(bad, TokenizerConfig{});
    EXPECT_EQ(t.front(), "ok");
    EXPECT_EQ(t.back(), "tail");
}

// ---------------------------------------------------------------- vectorizer

TEST(FitVectorizer, DocumentFrequencyAndIdf) {
    VectorizerConfig cfg;
    cfg.tokenizer = single_letters();
    cfg.tokenizer.ngram_max = 1;
    const auto v = fit_vectorizer({"a b", "a c"}, cfg);
    EXPECT_EQ(v.terms(), (Tokens{"a", "b", "c"}));
    EXPECT_DOUBLE_EQ(v.idf()[0], 1.0);
    EXPECT_DOUBLE_EQ(v.idf()[1], std::log(3.0 / 2.0) + 1.0);
    EXPECT_DOUBLE_EQ(v.idf()[2], std::log(3.0 / 2.0) + 1.0);
}

TEST(FitVectorizer, CapKeepsLexicographicallySmallestOnTies) {
    VectorizerConfig cfg;
    cfg.tokenizer = single_letters();
    cfg.tokenizer.ngram_max = 1;
    cfg.max_features = 2;
    EXPECT_EQ(fit_vectorizer({"c b a"}, cfg).terms(), (Tokens{"a", "b"}));
    // Higher df beats lexicographic order.
    EXPECT_EQ(fit_vectorizer({"z y", "z x", "a"}, cfg).terms(), (Tokens{"a", "z"}));
}

TEST(FitVectorizer, ErrorsOnEmptyInput) {
    EXPECT_THROW(fit_vectorizer({}, VectorizerConfig{}), ValidationError);
    EXPECT_THROW(fit_vectorizer({"", " - ", "x"}, VectorizerConfig{}), ValidationError);
}

TEST(FitVectorizer, FiveDocFixtureMatchesOracle) {
    const std::vector<std::string> docs{"Heap overflow in parser allows remote code execution",
                                        "SQL injection in login form",
                                        "Remote attackers exploit heap overflow via crafted image",
                                        "Cross site scripting in login page",
                                        "SQL injection and cross site scripting in admin panel"};
    const VectorizerConfig cfg;
    const auto v = fit_vectorizer(docs, cfg);
    std::vector<Tokens> tokenized;
    for (const auto& d : docs) tokenized.push_back(tokenize(d, cfg.tokenizer));
    const auto expected = oracle::idf(tokenized);
    ASSERT_EQ(v.num_features(), expected.size());
    std::size_t i = 0;
    for (const auto& [term, idf] : expected) {
        EXPECT_EQ(v.terms()[i], term);
        EXPECT_NEAR(v.idf()[i], idf, 1e-15) << term;
        ++i;
    }
}

TEST(Transform, HandComputedWeights) {
    VectorizerConfig cfg;
    cfg.tokenizer = single_letters();
    cfg.tokenizer.ngram_max = 1;
    const auto v = fit_vectorizer({"a b", "a c", "a a b"}, cfg);
    // N = 3; df(a) = 3, df(b) = 2, df(c) = 1.
    const double idf_a = 1.0, idf_b = std::log(4.0 / 3.0) + 1.0;
    const auto x = v.transform("a a b");
    ASSERT_EQ(x.size(), 2u);
    const double norm = std::hypot(2 * idf_a, idf_b);
    EXPECT_EQ(x[0].index, 0u);
    EXPECT_NEAR(x[0].weight, 2 * idf_a / norm, 1e-15);
    EXPECT_EQ(x[1].index, 1u);
    EXPECT_NEAR(x[1].weight, idf_b / norm, 1e-15);
}

TEST(Transform, EmptyAndSingleTerm) {
    const auto v = fit_vectorizer({"heap overflow", "stack overflow"}, VectorizerConfig{});
    EXPECT_TRUE(v.transform("nothing known here").empty());
    EXPECT_TRUE(v.transform("").empty());
    const auto x = v.transform("heap");
    ASSERT_EQ(x.size(), 1u);
    EXPECT_DOUBLE_EQ(x[0].weight, 1.0);
}

TEST(Transform, NormIsOneAndIndicesIncrease) {
    const auto c = synthetic_corpus();
    for (const auto& x : c.x) {
        ASSERT_FALSE(x.empty());
        EXPECT_NEAR(l2_norm(x), 1.0, 1e-9);
        for (std::size_t i = 1; i < x.size(); ++i) EXPECT_LT(x[i - 1].index, x[i].index);
        for (const auto& e : x) EXPECT_NE(e.weight, 0.0);
    }
}

TEST(VectorizerModelInvariants, RejectsBadIdf) {
    EXPECT_THROW(VectorizerModel(TokenizerConfig{}, 10, {"a"}, {0.0}), ValidationError);
    EXPECT_THROW(VectorizerModel(TokenizerConfig{}, 10, {"a"}, {NAN}), ValidationError);
    EXPECT_THROW(VectorizerModel(TokenizerConfig{}, 10, {"a", "b"}, {1.0}), ValidationError);
}

// ---------------------------------------------------------------- softmax / ranking

TEST(Softmax, SumsToOneAndIsStable) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 50.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> z(1 + rng() % 8);
        for (auto& v : z) v = n(rng);
        const auto p = softmax(z);
        double sum = 0.0;
        for (double v : p) {
            EXPECT_TRUE(std::isfinite(v));
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    const auto big = softmax(std::vector<double>{1000.0, 1000.0});
    EXPECT_DOUBLE_EQ(big[0], 0.5);
}

TEST(PredictRanked, ZeroModelIsUniformInClassOrder) {
    const LinearModel m(labels(4), 3);
    const auto r = predict_ranked(m, {{1, 0.7}}, 4);
    ASSERT_EQ(r.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(r[i].cwe, m.class_labels[i]);
        EXPECT_DOUBLE_EQ(r[i].probability, 0.25);
    }
}

TEST(PredictRanked, DominatingBias) {
    LinearModel m(labels(3), 2);
    m.bias = {0.0, 10.0, 0.0};
    const auto r = predict_ranked(m, {}, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].cwe, m.class_labels[1]);
    EXPECT_NEAR(r[0].probability, 1.0, 1e-4);
    EXPECT_THROW(predict_ranked(m, {}, 4), ValidationError);
}

TEST(PredictRanked, MatchesExhaustiveOracle) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 100; ++t) {
        const std::size_t classes = 2 + rng() % 6, features = 1 + rng() % 6;
        const auto m = random_model(rng, classes, features);
        const auto x = random_sparse(rng, features);
        // Oracle: dense logits, exp-normalize, repeated argmax with lowest index on ties.
        std::vector<double> z(classes);
        for (std::size_t c = 0; c < classes; ++c) {
            z[c] = m.bias[c];
            for (const auto& e : x) z[c] += m.weight(c, e.index) * e.weight;
        }
        double mx = z[0];
        for (double v : z) mx = std::max(mx, v);
        double s = 0.0;
        for (double v : z) s += std::exp(v - mx);
        std::vector<bool> used(classes, false);
        const std::size_t k = 1 + rng() % classes;
        const auto r = predict_ranked(m, x, k);
        ASSERT_EQ(r.size(), k);
        double total = 0.0;
        for (std::size_t rank = 0; rank < k; ++rank) {
            std::size_t best = classes;
            for (std::size_t c = 0; c < classes; ++c) {
                if (!used[c] && (best == classes || z[c] > z[best])) best = c;
            }
            used[best] = true;
            EXPECT_EQ(r[rank].cwe, m.class_labels[best]);
            EXPECT_NEAR(r[rank].probability, std::exp(z[best] - mx) / s, 1e-12);
            total += r[rank].probability;
        }
        EXPECT_LE(total, 1.0 + 1e-12);
    }
}

TEST(PredictRanked, ShiftInvariance) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
        auto m = random_model(rng, 5, 4);
        const auto x = random_sparse(rng, 4);
        const auto before = predict_ranked(m, x, 5);
        const double shift = std::normal_distribution<double>(0.0, 100.0)(rng);
        for (auto& b : m.bias) b += shift;  // adds the same constant to every logit
        const auto after = predict_ranked(m, x, 5);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_EQ(before[i].cwe, after[i].cwe);
            EXPECT_NEAR(before[i].probability, after[i].probability, 1e-9);
        }
    }
}

// ---------------------------------------------------------------- training

TEST(Gradient, MatchesCentralFiniteDifferences) {
    std::mt19937_64 rng(314);
    const double l2 = 0.01, h = 1e-6;
    for (int point = 0; point < 10; ++point) {
        auto m = random_model(rng, 3, 5, 0.5);
        std::vector<SparseVector> x;
        std::vector<std::size_t> y;
        for (int i = 0; i < 12; ++i) {
            x.push_back(random_sparse(rng, 5));
            y.push_back(rng() % 3);
        }
        const LabeledSet data{x, y};
        EXPECT_NEAR(objective(m, data, l2), oracle::objective(m, x, y, l2), 1e-12);
        const auto g = gradient(m, data, l2);
        double max_rel = 0.0;
        const auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = oracle::objective(m, x, y, l2);
            param = saved - h;
            const double down = oracle::objective(m, x, y, l2);
            param = saved;
            const double numeric = (up - down) / (2 * h);
            max_rel = std::max(max_rel, std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic)));
        };
        for (std::size_t i = 0; i < m.weights.size(); ++i) check(m.weights[i], g.weights[i]);
        for (std::size_t i = 0; i < m.bias.size(); ++i) check(m.bias[i], g.bias[i]);
        EXPECT_LT(max_rel, 1e-4) << "point " << point;
    }
}

TEST(Train, SeparableToySetReachesFullAccuracy) {
    const std::vector<SparseVector> x{{{0, 1.0}}, {{0, 0.9}, {1, 0.1}}, {{1, 1.0}}, {{0, 0.1}, {1, 0.9}}};
    const std::vector<std::size_t> y{0, 0, 1, 1};
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 2;
    const auto r = train_logreg({x, y}, labels(2), cfg);
    EXPECT_EQ(top1_accuracy(r.model, {x, y}), 1.0);
    EXPECT_LT(r.epoch_objective.back(), r.epoch_objective.front());
    EXPECT_EQ(r.epochs_run, 200u);
}

TEST(Train, SyntheticFiveClassCorpus) {
    const auto c = synthetic_corpus();
    ASSERT_EQ(c.x.size(), 200u);
    ASSERT_EQ(c.classes.size(), 5u);
    const auto r = train_logreg({c.x, c.y}, c.classes, TrainConfig{});
    EXPECT_GE(top1_accuracy(r.model, {c.x, c.y}), 0.95);
    r.model.check_invariants();
}

TEST(Train, EarlyStoppingKeepsBestEpoch) {
    const auto c = synthetic_corpus();
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.early_stop_patience = 2;
    const auto r = train_logreg({c.x, c.y}, c.classes, cfg, LabeledSet{c.x, c.y});
    ASSERT_EQ(r.epoch_val_top1.size(), r.epochs_run);
    EXPECT_LE(r.epochs_run, 50u);
    ASSERT_GE(r.best_epoch, 1u);
    const double best = *std::max_element(r.epoch_val_top1.begin(), r.epoch_val_top1.end());
    EXPECT_EQ(r.epoch_val_top1[r.best_epoch - 1], best);
    EXPECT_EQ(top1_accuracy(r.model, {c.x, c.y}), best);
    EXPECT_LE(r.epochs_run, r.best_epoch + cfg.early_stop_patience);
}

TEST(Train, DivergenceIsReported) {
    const auto c = synthetic_corpus();
    TrainConfig cfg;
    cfg.learning_rate = 1e306;
    cfg.l2_lambda = 0.0;
    try {
        train_logreg({c.x, c.y}, c.classes, cfg);
        FAIL() << "diverging run accepted";
    } catch (const TrainingError& e) {
        EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos) << e.what();
    }
}

TEST(Train, ConfigValidation) {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = TrainConfig{};
    cfg.l2_lambda = -1.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    const std::vector<SparseVector> x{{{0, 1.0}}};
    const std::vector<std::size_t> y{3};
    EXPECT_THROW(train_logreg({x, y}, labels(2), TrainConfig{}), ValidationError);
    EXPECT_THROW(train_logreg({{}, {}}, labels(2), TrainConfig{}), ValidationError);
}

TEST(Train, DeterministicDigestPerSeed) {
    const auto c = synthetic_corpus();
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 5;
    const auto digest = [&](std::uint64_t seed) {
        cfg.seed = seed;
        auto r = train_logreg({c.x, c.y}, c.classes, cfg);
        return sha256_hex(serialize_model({c.vectorizer, std::move(r.model)}));
    };
    EXPECT_EQ(digest(42), digest(42));
    EXPECT_NE(digest(42), digest(43));
}

// ---------------------------------------------------------------- model container

TEST(ModelIo, RoundTripIsExact) {
    std::mt19937_64 rng(4);
    const auto c = synthetic_corpus();
    auto m = random_model(rng, c.classes.size(), c.vectorizer.num_features());
    m.class_labels = c.classes;
    const BaselineModel model{c.vectorizer, m};
    const auto bytes = serialize_model(model);
    EXPECT_EQ(bytes.substr(0, 8), std::string("CVECWEM\0", 8));
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(back.classifier.class_labels, m.class_labels);
    EXPECT_EQ(back.classifier.weights, m.weights);
    EXPECT_EQ(back.classifier.bias, m.bias);
    EXPECT_EQ(back.vectorizer.terms(), c.vectorizer.terms());
    EXPECT_EQ(back.vectorizer.idf(), c.vectorizer.idf());
    EXPECT_EQ(back.vectorizer.tokenizer(), c.vectorizer.tokenizer());
    EXPECT_EQ(serialize_model(back), bytes);
}

TEST(ModelIo, CorruptInputRejected) {
    const auto c = synthetic_corpus();
    const auto bytes = serialize_model({c.vectorizer, LinearModel(c.classes, c.vectorizer.num_features())});
    EXPECT_THROW(deserialize_model("garbage"), ParseError);
    EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 3)), ParseError);
    EXPECT_THROW(deserialize_model(bytes + "x"), ParseError);
    auto wrong_version = bytes;
    wrong_version[8] = 9;
    EXPECT_THROW(deserialize_model(wrong_version), ParseError);
}

// SPDX-License-Identifier: Apache-2.0
//
// cvecwe: CVE -> CWE dataset construction, TF-IDF baseline, and evaluation.
// Exit codes: 0 success, 1 validation/contract failure, 2 I/O failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "cvecwe/config.hpp"
#include "cvecwe/corpus.hpp"
#include "cvecwe/errors.hpp"
#include "cvecwe/hashing.hpp"
#include "cvecwe/logreg.hpp"
#include "cvecwe/metrics.hpp"
#include "cvecwe/model_io.hpp"
#include "cvecwe/pipeline.hpp"
#include "cvecwe/taxonomy.hpp"
#include "cvecwe/text_util.hpp"
#include "cvecwe/vectorizer.hpp"

#ifndef CVECWE_VERSION
#define CVECWE_VERSION "0.0.0"
#endif
#ifndef CVECWE_BUILD_ID
#define CVECWE_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using namespace cvecwe;
using ojson = nlohmann::ordered_json;

namespace {

void log_line(const std::string& msg) { std::cerr << "cvecwe: " << msg << "\n"; }

// Options shared by every subcommand.
struct CommonFlags {
    std::string config;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool strict = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* output_opt = nullptr;
    CLI::Option* strict_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON run config (default: $" + std::string(kConfigEnvVar) + ")");
        seed_opt = cmd->add_option("--seed", seed, "Seed for every random choice");
        output_opt = cmd->add_option("--output-dir", output_dir, "Directory for output files");
        strict_opt = cmd->add_flag("--strict", strict, "Reject unknown fields in record-jsonl input");
    }

    RunConfig load() const {
        std::string path = config;
        if (path.empty()) {
            if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
        }
        RunConfig cfg;
        if (!path.empty()) cfg = parse_run_config(text::read_file(path));
        if (seed_opt->count()) cfg.seed = seed;
        cfg.train.seed = cfg.seed;
        if (output_opt->count()) cfg.paths.output_dir = output_dir;
        if (strict_opt->count()) cfg.strict = strict;
        return cfg;
    }
};

fs::path ensure_output_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.paths.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory: " + dir.string());
    return dir;
}

// Writes the file and returns its SHA-256.
std::string emit(const fs::path& path, const std::string& content) {
    text::write_file(path.string(), content);
    return sha256_hex(content);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

template <typename T>
void override_if(CLI::Option* opt, const T& value, T& target) {
    if (opt && opt->count()) target = value;
}

ojson agreement_json(const AgreementStats& s) {
    ojson j;
    j["n_total"] = s.n_total;
    j["n_both"] = s.n_both;
    // Rates rounded to 4 decimals; null when no record carries both labels.
    j["exact_rate"] = s.exact_rate ? ojson(round_to(*s.exact_rate, 4)) : ojson(nullptr);
    j["hierarchy_rate"] = s.hierarchy_rate ? ojson(round_to(*s.hierarchy_rate, 4)) : ojson(nullptr);
    ojson counts = ojson::object();
    for (Agreement a : kAllAgreements) counts[std::string(to_string(a))] = s.counts.at(a);
    j["counts"] = std::move(counts);
    return j;
}

CweTaxonomy load_taxonomy(const RunConfig& cfg) {
    require_existing("taxonomy", cfg.paths.taxonomy);
    return parse_taxonomy(text::read_file(cfg.paths.taxonomy), taxonomy_format_from_string(cfg.paths.taxonomy_format));
}

std::vector<CveRecord> load_records(const RunConfig& cfg) {
    require_existing("records", cfg.paths.records);
    FeedOptions opts;
    opts.strict = cfg.strict;
    auto parsed = parse_feed(text::read_file(cfg.paths.records), FeedFormat::RecordJsonl, opts);
    for (const auto& w : parsed.warnings) log_line("warning: " + w);
    if (!parsed.rejects.empty()) log_line("warning: " + std::to_string(parsed.rejects.size()) + " record(s) rejected");
    return std::move(parsed.records);
}

std::vector<MergedRecord> load_merged(const RunConfig& cfg, const CweTaxonomy& taxonomy) {
    auto records = load_records(cfg);
    require_existing("AI label file", cfg.paths.ai_labels);
    const auto ai = parse_ai_labels(text::read_file(cfg.paths.ai_labels));
    return merge_labels(records, ai, taxonomy, cfg.equivalence_depth);
}

// ---------------------------------------------------------------- ingest

struct IngestCmd {
    CommonFlags common;
    std::vector<std::string> inputs;
    std::string format;
    std::size_t min_length = 0;
    CLI::Option* format_opt = nullptr;
    CLI::Option* min_length_opt = nullptr;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("ingest", "Parse feeds, drop duplicates and insufficient descriptions");
        common.attach(cmd);
        cmd->add_option("--input,-i", inputs, "Feed file(s); overrides paths.feeds");
        format_opt = cmd->add_option("--format", format, "nvd-json-2 or record-jsonl");
        min_length_opt = cmd->add_option("--min-length", min_length, "Minimum description length in code points");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        if (!inputs.empty()) cfg.paths.feeds = inputs;
        override_if(format_opt, format, cfg.paths.feed_format);
        override_if(min_length_opt, min_length, cfg.filter.min_length);
        if (cfg.paths.feeds.empty()) throw ValidationError("no feed inputs given");
        for (const auto& f : cfg.paths.feeds) require_existing("feed", f);
        const FeedFormat fmt = feed_format_from_string(cfg.paths.feed_format);

        FeedOptions opts;
        opts.strict = cfg.strict;
        std::vector<CveRecord> all;
        std::vector<Reject> rejects;
        std::size_t warnings = 0;
        for (const auto& f : cfg.paths.feeds) {
            auto parsed = parse_feed(text::read_file(f), fmt, opts);
            for (const auto& w : parsed.warnings) log_line("warning: " + f + ": " + w);
            warnings += parsed.warnings.size();
            for (auto& r : parsed.rejects) {
                if (cfg.paths.feeds.size() > 1) r.reason = f + ": " + r.reason;
                rejects.push_back(std::move(r));
            }
            all.insert(all.end(), std::make_move_iterator(parsed.records.begin()), std::make_move_iterator(parsed.records.end()));
        }
        const std::size_t parsed_count = all.size();
        const auto unique = deduplicate(all);
        const auto filtered = filter_insufficient(unique, cfg.filter);

        const fs::path dir = ensure_output_dir(cfg);
        const std::string digest = emit(dir / "records.jsonl", export_record_jsonl(filtered.kept));
        emit(dir / "rejects.json", export_rejects_json(rejects));

        std::map<int, std::size_t> per_year;
        std::size_t labeled = 0;
        for (const auto& r : filtered.kept) {
            ++per_year[r.year];
            if (r.nvd_cwe) ++labeled;
        }
        ojson years = ojson::object();
        for (const auto& [y, n] : per_year) years[std::to_string(y)] = n;
        ojson summary;
        summary["schema"] = "cvecwe-ingest-summary/1";
        summary["config_digest"] = config_digest(cfg);
        summary["parsed"] = parsed_count;
        summary["rejected"] = rejects.size();
        summary["warnings"] = warnings;
        summary["duplicates_removed"] = parsed_count - unique.size();
        summary["dropped_insufficient"] = filtered.dropped.size();
        summary["kept"] = filtered.kept.size();
        summary["kept_with_nvd_cwe"] = labeled;
        summary["per_year"] = std::move(years);
        summary["records_digest"] = digest;
        emit(dir / "ingest_summary.json", dump(summary));
        std::cout << "ingested " << filtered.kept.size() << " record(s) (" << parsed_count << " parsed, "
                  << parsed_count - unique.size() << " duplicate(s), " << filtered.dropped.size()
                  << " insufficient, " << rejects.size() << " rejected) -> " << (dir / "records.jsonl").string() << "\n";
    }
};

// ---------------------------------------------------------------- build-splits

struct SplitsCmd {
    CommonFlags common;
    std::string records, ai, taxonomy, taxonomy_format, vocabulary;
    std::vector<std::string> banned;
    double eval_fraction = 0, val_share = 0;
    int depth = 1;
    CLI::Option *records_opt{}, *ai_opt{}, *tax_opt{}, *taxfmt_opt{}, *vocab_opt{}, *banned_opt{}, *eval_opt{},
        *val_opt{}, *depth_opt{};

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("build-splits", "Merge labels, decontaminate, and write train/val/test");
        common.attach(cmd);
        records_opt = cmd->add_option("--records", records, "record-jsonl from ingest");
        ai_opt = cmd->add_option("--ai-labels", ai, "AI label JSONL");
        tax_opt = cmd->add_option("--taxonomy", taxonomy, "CWE taxonomy file");
        taxfmt_opt = cmd->add_option("--taxonomy-format", taxonomy_format, "edge-csv or cwe-xml-subset");
        vocab_opt = cmd->add_option("--vocabulary", vocabulary, "Target classes, one CWE id per line");
        banned_opt = cmd->add_option("--banned", banned, "Banned CVE id list(s)");
        eval_opt = cmd->add_option("--eval-fraction", eval_fraction, "Share of the exact pool for val+test");
        val_opt = cmd->add_option("--val-share", val_share, "Val share of the eval reserve");
        depth_opt = cmd->add_option("--depth", depth, "Hierarchy equivalence depth");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        override_if(records_opt, records, cfg.paths.records);
        override_if(ai_opt, ai, cfg.paths.ai_labels);
        override_if(tax_opt, taxonomy, cfg.paths.taxonomy);
        override_if(taxfmt_opt, taxonomy_format, cfg.paths.taxonomy_format);
        override_if(vocab_opt, vocabulary, cfg.paths.vocabulary);
        override_if(banned_opt, banned, cfg.paths.banned_ids);
        override_if(eval_opt, eval_fraction, cfg.eval_fraction);
        override_if(val_opt, val_share, cfg.val_share);
        override_if(depth_opt, depth, cfg.equivalence_depth);
        require_existing("records", cfg.paths.records);
        require_existing("AI label file", cfg.paths.ai_labels);
        require_existing("taxonomy", cfg.paths.taxonomy);
        require_existing("vocabulary", cfg.paths.vocabulary);
        for (const auto& b : cfg.paths.banned_ids) require_existing("banned id list", b);

        SplitConfig split;
        split.seed = cfg.seed;
        split.eval_fraction = cfg.eval_fraction;
        split.val_share = cfg.val_share;
        split.equivalence_depth = cfg.equivalence_depth;
        split.vocabulary = parse_vocabulary(text::read_file(cfg.paths.vocabulary));
        split.validate();

        const CweTaxonomy tax = load_taxonomy(cfg);
        const auto merged = load_merged(cfg, tax);
        const auto stats = agreement_stats(merged);

        std::vector<std::string> banned_ids;
        for (const auto& b : cfg.paths.banned_ids) {
            auto ids = parse_banned_ids(text::read_file(b));
            banned_ids.insert(banned_ids.end(), ids.begin(), ids.end());
        }
        const auto decon = decontaminate(merged, banned_ids);
        const auto splits = build_splits(decon.clean, split);

        const fs::path dir = ensure_output_dir(cfg);
        ojson digests;
        digests["train.jsonl"] = emit(dir / "train.jsonl", export_split_jsonl(splits.train));
        digests["val.jsonl"] = emit(dir / "val.jsonl", export_split_jsonl(splits.val));
        digests["test.jsonl"] = emit(dir / "test.jsonl", export_split_jsonl(splits.test));

        std::map<std::string, std::size_t> reasons;
        for (const auto& e : splits.excluded) {
            const auto colon = e.reason.find(':');
            ++reasons[e.reason.rfind("label ", 0) == 0 ? "label outside vocabulary" : e.reason.substr(0, colon)];
        }
        ojson summary;
        summary["schema"] = "cvecwe-split-summary/1";
        summary["config_digest"] = config_digest(cfg);
        summary["config"] = {{"seed", split.seed},
                             {"eval_fraction", split.eval_fraction},
                             {"val_share", split.val_share},
                             {"equivalence_depth", split.equivalence_depth},
                             {"vocabulary_size", split.vocabulary.size()},
                             {"hash_rule", "u = top53(splitmix64(fnv1a64(cve_id) ^ splitmix64(seed))) / 2^53"}};
        summary["sizes"] = {{"train", splits.train.size()},
                            {"val", splits.val.size()},
                            {"test", splits.test.size()},
                            {"total", splits.train.size() + splits.val.size() + splits.test.size()},
                            {"excluded", splits.excluded.size()}};
        summary["excluded_reasons"] = reasons;
        summary["agreement"] = agreement_json(stats);
        summary["decontamination"] = {{"banned_ids", banned_ids.size()},
                                      {"removed", decon.removed.size()},
                                      {"not_found", decon.not_found.size()},
                                      {"not_found_ids", decon.not_found}};
        summary["digests"] = std::move(digests);
        emit(dir / "split_summary.json", dump(summary));

        if (splits.train.empty() && splits.val.empty() && splits.test.empty()) {
            log_line("warning: every split is empty (removed " + std::to_string(decon.removed.size()) + " banned record(s))");
        }
        std::cout << "train " << splits.train.size() << ", val " << splits.val.size() << ", test " << splits.test.size()
                  << ", excluded " << splits.excluded.size() << ", decontaminated " << decon.removed.size() << "\n";
        if (stats.exact_rate) {
            std::cout << "agreement over " << stats.n_both << " doubly-labeled: exact " << round_to(*stats.exact_rate, 4)
                      << ", hierarchy " << round_to(*stats.hierarchy_rate, 4) << "\n";
        } else {
            std::cout << "agreement: undefined (no doubly-labeled records)\n";
        }
    }
};

// ---------------------------------------------------------------- train-baseline

struct TrainCmd {
    CommonFlags common;
    std::string train_path, val_path, model_out;
    std::size_t epochs = 0, batch = 0, patience = 0, max_features = 0;
    double lr = 0, l2 = 0;
    CLI::Option *epochs_opt{}, *batch_opt{}, *patience_opt{}, *features_opt{}, *lr_opt{}, *l2_opt{};

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("train-baseline", "Fit the TF-IDF + logistic regression baseline");
        common.attach(cmd);
        cmd->add_option("--train", train_path, "Training split (default: <output-dir>/train.jsonl)");
        cmd->add_option("--val", val_path, "Validation split for early stopping");
        cmd->add_option("--model-out", model_out, "Model path (default: <output-dir>/model.bin)");
        epochs_opt = cmd->add_option("--epochs", epochs, "Maximum epochs (default 30)");
        batch_opt = cmd->add_option("--batch-size", batch, "Mini-batch size (default 256)");
        patience_opt = cmd->add_option("--patience", patience, "Epochs without val improvement before stopping (default 3)");
        features_opt = cmd->add_option("--max-features", max_features, "TF-IDF vocabulary cap (default 50000)");
        lr_opt = cmd->add_option("--learning-rate", lr, "Fixed learning rate (default 0.5)");
        l2_opt = cmd->add_option("--l2", l2, "L2 penalty on weights (default 1e-6)");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        override_if(epochs_opt, epochs, cfg.train.epochs);
        override_if(batch_opt, batch, cfg.train.batch_size);
        override_if(patience_opt, patience, cfg.train.early_stop_patience);
        override_if(features_opt, max_features, cfg.vectorizer.max_features);
        override_if(lr_opt, lr, cfg.train.learning_rate);
        override_if(l2_opt, l2, cfg.train.l2_lambda);
        cfg.train.validate();
        const fs::path dir = ensure_output_dir(cfg);
        const std::string train_file = train_path.empty() ? (dir / "train.jsonl").string() : train_path;
        require_existing("training split", train_file);
        if (!val_path.empty()) require_existing("validation split", val_path);

        const auto train = parse_split_jsonl(text::read_file(train_file));
        if (train.empty()) throw ValidationError("training split is empty: " + train_file);
        const auto val = val_path.empty() ? std::vector<SplitEntry>{} : parse_split_jsonl(text::read_file(val_path));

        std::set<CweId> label_set;
        for (const auto& e : train) label_set.insert(e.label);
        for (const auto& e : val) label_set.insert(e.label);
        const std::vector<CweId> labels(label_set.begin(), label_set.end());
        std::map<CweId, std::size_t> class_index;
        for (std::size_t i = 0; i < labels.size(); ++i) class_index[labels[i]] = i;

        std::vector<std::string> docs;
        docs.reserve(train.size());
        for (const auto& e : train) docs.push_back(e.description);
        VectorizerModel vec = fit_vectorizer(docs, cfg.vectorizer);

        const auto encode = [&](const std::vector<SplitEntry>& entries, std::vector<SparseVector>& x, std::vector<std::size_t>& y) {
            x.reserve(entries.size());
            y.reserve(entries.size());
            for (const auto& e : entries) {
                x.push_back(vec.transform(e.description));
                y.push_back(class_index.at(e.label));
            }
        };
        std::vector<SparseVector> x_train, x_val;
        std::vector<std::size_t> y_train, y_val;
        encode(train, x_train, y_train);
        encode(val, x_val, y_val);

        std::optional<LabeledSet> val_set;
        if (!val.empty()) val_set = LabeledSet{x_val, y_val};
        TrainResult result = train_logreg(LabeledSet{x_train, y_train}, labels, cfg.train, val_set);
        // Features that never occur keep zero weights; pad to the vocabulary width.
        if (result.model.num_features < vec.num_features()) {
            LinearModel padded(labels, vec.num_features());
            for (std::size_t c = 0; c < labels.size(); ++c) {
                for (std::size_t f = 0; f < result.model.num_features; ++f) padded.weight(c, f) = result.model.weight(c, f);
            }
            padded.bias = result.model.bias;
            result.model = std::move(padded);
        }

        const BaselineModel model{std::move(vec), std::move(result.model)};
        const std::string bytes = serialize_model(model);
        const fs::path model_file = model_out.empty() ? dir / "model.bin" : fs::path(model_out);
        const std::string digest = emit(model_file, bytes);

        const double train_top1 = top1_accuracy(model.classifier, LabeledSet{x_train, y_train});
        ojson summary;
        summary["schema"] = "cvecwe-train-summary/1";
        summary["config_digest"] = config_digest(cfg);
        summary["model_file"] = model_file.filename().string();
        summary["model_digest"] = digest;
        summary["num_classes"] = labels.size();
        summary["num_features"] = model.vectorizer.num_features();
        summary["train_samples"] = train.size();
        summary["val_samples"] = val.size();
        summary["epochs_run"] = result.epochs_run;
        summary["best_epoch"] = result.best_epoch;
        summary["epoch_objective"] = result.epoch_objective;
        summary["epoch_val_top1"] = result.epoch_val_top1;
        summary["train_top1"] = train_top1;
        if (!val.empty()) summary["val_top1"] = top1_accuracy(model.classifier, *val_set);
        emit(dir / "train_summary.json", dump(summary));
        std::cout << "trained " << labels.size() << " classes x " << model.vectorizer.num_features() << " features, "
                  << result.epochs_run << " epoch(s), train top-1 " << train_top1 << ", model " << model_file.string()
                  << " sha256 " << digest << "\n";
    }
};

// ---------------------------------------------------------------- predict

struct PredictCmd {
    CommonFlags common;
    std::string model_path, input, output;
    std::size_t top_k = 5;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("predict", "Rank CWE classes for each input description");
        common.attach(cmd);
        cmd->add_option("--model", model_path, "Model file (default: <output-dir>/model.bin)");
        cmd->add_option("--input", input, "JSONL with cve_id and description")->required();
        cmd->add_option("--output", output, "Predictions path (default: <output-dir>/predictions.jsonl)");
        cmd->add_option("--top-k", top_k, "Ranked entries per line (1-10)")->check(CLI::Range(1, 10));
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        const fs::path dir = ensure_output_dir(cfg);
        const std::string model_file = model_path.empty() ? (dir / "model.bin").string() : model_path;
        require_existing("model", model_file);
        require_existing("input", input);
        const BaselineModel model = deserialize_model(text::read_file(model_file));
        const std::size_t k = std::min(top_k, model.classifier.num_classes());

        std::string out;
        std::size_t count = 0;
        for (const auto& line : text::split_lines(text::read_file(input))) {
            if (text::trim(line.text).empty()) continue;
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line.text.begin(), line.text.end());
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(std::string("malformed JSON: ") + e.what(), line.number, line.offset);
            }
            if (!obj.is_object() || !obj.contains("cve_id") || !obj["cve_id"].is_string() || !obj.contains("description") ||
                !obj["description"].is_string()) {
                throw ParseError("input line needs string fields cve_id and description", line.number, line.offset);
            }
            const auto ranked = predict_ranked(model.classifier, model.vectorizer.transform(obj["description"].get<std::string>()), k);
            std::vector<ScoredLabel> scored;
            for (const auto& r : ranked) scored.push_back({r.cwe, r.probability});
            append_prediction_line(out, obj["cve_id"].get<std::string>(), scored);
            ++count;
        }
        const fs::path out_file = output.empty() ? dir / "predictions.jsonl" : fs::path(output);
        emit(out_file, out);
        std::cout << "wrote " << count << " prediction(s) -> " << out_file.string() << "\n";
    }
};

// ---------------------------------------------------------------- evaluate

struct EvaluateCmd {
    CommonFlags common;
    std::string predictions, gold, taxonomy, taxonomy_format;
    std::vector<std::size_t> ks;
    double alpha = 0.05;
    int depth = 1;
    CLI::Option *tax_opt{}, *taxfmt_opt{}, *alpha_opt{}, *depth_opt{};

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
        common.attach(cmd);
        cmd->add_option("--predictions", predictions, "predictions-jsonl")->required();
        cmd->add_option("--gold", gold, "gold-jsonl (or a split file)")->required();
        tax_opt = cmd->add_option("--taxonomy", taxonomy, "Taxonomy for hierarchy-aware scoring");
        taxfmt_opt = cmd->add_option("--taxonomy-format", taxonomy_format, "edge-csv or cwe-xml-subset");
        cmd->add_option("--k", ks, "Top-k cutoffs (repeatable)");
        alpha_opt = cmd->add_option("--alpha", alpha, "1 - confidence level");
        depth_opt = cmd->add_option("--depth", depth, "Hierarchy equivalence depth");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        override_if(tax_opt, taxonomy, cfg.paths.taxonomy);
        override_if(taxfmt_opt, taxonomy_format, cfg.paths.taxonomy_format);
        override_if(alpha_opt, alpha, cfg.eval.alpha);
        override_if(depth_opt, depth, cfg.eval.depth);
        if (!ks.empty()) cfg.eval.ks = ks;
        require_existing("predictions", predictions);
        require_existing("gold labels", gold);

        const auto preds = parse_predictions_jsonl(text::read_file(predictions));
        const auto labels = parse_gold_jsonl(text::read_file(gold));
        const CweTaxonomy tax = cfg.paths.taxonomy.empty() ? CweTaxonomy{} : load_taxonomy(cfg);
        const EvalReport report = evaluate(preds, labels, tax, cfg.eval);

        const fs::path dir = ensure_output_dir(cfg);
        emit(dir / "report.json", report_to_json(report));
        const std::string table = render_report_table(report);
        emit(dir / "report.txt", table);
        std::cout << table;
    }
};

// ---------------------------------------------------------------- sample-disagreements

struct SampleCmd {
    CommonFlags common;
    std::string records, ai, taxonomy, output;
    std::size_t n = 100;
    int depth = 1;
    CLI::Option *records_opt{}, *ai_opt{}, *tax_opt{}, *depth_opt{};

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("sample-disagreements", "Draw a review worksheet of label disagreements");
        common.attach(cmd);
        records_opt = cmd->add_option("--records", records, "record-jsonl from ingest");
        ai_opt = cmd->add_option("--ai-labels", ai, "AI label JSONL");
        tax_opt = cmd->add_option("--taxonomy", taxonomy, "CWE taxonomy (edge-csv unless configured)");
        depth_opt = cmd->add_option("--depth", depth, "Hierarchy equivalence depth");
        cmd->add_option("-n,--count", n, "Rows to sample");
        cmd->add_option("--output", output, "CSV path (default: <output-dir>/disagreements.csv)");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        override_if(records_opt, records, cfg.paths.records);
        override_if(ai_opt, ai, cfg.paths.ai_labels);
        override_if(tax_opt, taxonomy, cfg.paths.taxonomy);
        override_if(depth_opt, depth, cfg.equivalence_depth);
        const CweTaxonomy tax = load_taxonomy(cfg);
        const auto merged = load_merged(cfg, tax);
        const auto rows = sample_disagreements(merged, n, cfg.seed);
        const fs::path dir = ensure_output_dir(cfg);
        const fs::path out_file = output.empty() ? dir / "disagreements.csv" : fs::path(output);
        emit(out_file, export_worksheet_csv(rows));
        std::cout << "sampled " << rows.size() << " disagreement(s) -> " << out_file.string() << "\n";
    }
};

// ---------------------------------------------------------------- taxonomy-check

struct TaxonomyCmd {
    CommonFlags common;
    std::string taxonomy, taxonomy_format, vocabulary, export_path;
    CLI::Option *tax_opt{}, *taxfmt_opt{}, *vocab_opt{};

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("taxonomy-check", "Validate a taxonomy and vocabulary; optionally export edge-csv");
        common.attach(cmd);
        tax_opt = cmd->add_option("--taxonomy", taxonomy, "Taxonomy file");
        taxfmt_opt = cmd->add_option("--taxonomy-format", taxonomy_format, "edge-csv or cwe-xml-subset");
        vocab_opt = cmd->add_option("--vocabulary", vocabulary, "Vocabulary to check against the taxonomy");
        cmd->add_option("--export", export_path, "Write canonical edge-csv here");
        cmd->callback([this] { run(); });
    }

    void run() {
        RunConfig cfg = common.load();
        override_if(tax_opt, taxonomy, cfg.paths.taxonomy);
        override_if(taxfmt_opt, taxonomy_format, cfg.paths.taxonomy_format);
        override_if(vocab_opt, vocabulary, cfg.paths.vocabulary);
        const CweTaxonomy tax = load_taxonomy(cfg);
        std::cout << "nodes " << tax.size() << ", ChildOf edges " << tax.edge_count() << ", acyclic\n";
        if (!export_path.empty()) emit(export_path, export_edge_csv(tax));
        if (cfg.paths.vocabulary.empty()) return;
        require_existing("vocabulary", cfg.paths.vocabulary);
        const auto vocab = parse_vocabulary(text::read_file(cfg.paths.vocabulary));
        const auto missing = validate_vocabulary(tax, vocab);
        std::cout << "vocabulary " << vocab.size() << " entries, " << missing.size() << " missing from taxonomy\n";
        if (!missing.empty()) {
            std::string list;
            for (CweId id : missing) list += " " + id.str();
            throw ValidationError("vocabulary entries absent from taxonomy:" + list);
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CVE to CWE dataset, baseline, and evaluation toolkit"};
    app.set_version_flag("--version", std::string("cvecwe ") + CVECWE_VERSION + " (build " + CVECWE_BUILD_ID + ")");
    app.require_subcommand(1);

    IngestCmd ingest;
    SplitsCmd splits;
    TrainCmd train;
    PredictCmd predict;
    EvaluateCmd evaluate_cmd;
    SampleCmd sample;
    TaxonomyCmd taxonomy;
    ingest.attach(app);
    splits.attach(app);
    train.attach(app);
    predict.attach(app);
    evaluate_cmd.attach(app);
    sample.attach(app);
    taxonomy.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const IoError& e) {
        log_line(std::string("error: ") + e.what());
        return 2;
    } catch (const Error& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    }
    return 0;
}

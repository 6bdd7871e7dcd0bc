// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvecwe/errors.hpp"
#include "cvecwe/hashing.hpp"

namespace cvecwe {

LinearModel::LinearModel(std::vector<CweId> labels, std::size_t features)
    : class_labels(std::move(labels)),
      num_features(features),
      weights(class_labels.size() * features, 0.0),
      bias(class_labels.size(), 0.0) {}

std::vector<double> LinearModel::logits(const SparseVector& x) const {
    std::vector<double> out(bias);
    for (std::size_t c = 0; c < num_classes(); ++c) {
        const double* row = weights.data() + c * num_features;
        double s = 0.0;
        for (const auto& e : x) s += row[e.index] * e.weight;
        out[c] += s;
    }
    return out;
}

void LinearModel::check_invariants() const {
    if (weights.size() != num_classes() * num_features || bias.size() != num_classes()) {
        throw ValidationError("linear model dimensions are inconsistent");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(weights.begin(), weights.end(), finite) || !std::all_of(bias.begin(), bias.end(), finite)) {
        throw ValidationError("linear model has non-finite parameters");
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<RankedLabel> predict_ranked(const LinearModel& m, const SparseVector& x, std::size_t k) {
    if (k > m.num_classes()) throw ValidationError("top-k exceeds the number of classes");
    const auto p = softmax(m.logits(x));
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<RankedLabel> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({m.class_labels[order[i]], p[order[i]]});
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be positive and finite");
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw ValidationError("l2_lambda must be >= 0");
    if (learning_rate * l2_lambda >= 1.0) throw ValidationError("learning_rate * l2_lambda must be < 1");
    if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
    if (epochs == 0) throw ValidationError("epochs must be >= 1");
}

namespace {

// Weights are held as scale * v so the l2 shrink of every step is O(1).
struct ParamView {
    const double* v;
    double scale;
    const double* bias;
    std::size_t classes;
    std::size_t features;
};

ParamView view_of(const LinearModel& m) {
    return {m.weights.data(), 1.0, m.bias.data(), m.num_classes(), m.num_features};
}

void logits_into(const ParamView& p, const SparseVector& x, std::vector<double>& out) {
    out.assign(p.bias, p.bias + p.classes);
    for (std::size_t c = 0; c < p.classes; ++c) {
        const double* row = p.v + c * p.features;
        double s = 0.0;
        for (const auto& e : x) s += row[e.index] * e.weight;
        out[c] += p.scale * s;
    }
}

// Sums per-sample cross-entropy gradients in sample order. Weight gradients
// live in feature-major columns so only touched features need clearing.
class BatchAccumulator {
public:
    BatchAccumulator(std::size_t classes, std::size_t features)
        : classes_(classes), columns_(classes * features, 0.0), touched_flag_(features, 0), bias_(classes, 0.0) {}

    void add(const ParamView& p, const SparseVector& x, std::size_t label) {
        logits_into(p, x, scratch_);
        const double mx = *std::max_element(scratch_.begin(), scratch_.end());
        double sum = 0.0;
        for (double v : scratch_) sum += std::exp(v - mx);
        const double log_z = mx + std::log(sum);
        loss_ += log_z - scratch_[label];
        for (double& v : scratch_) v = std::exp(v - log_z);
        scratch_[label] -= 1.0;  // now p - onehot

        for (std::size_t c = 0; c < classes_; ++c) bias_[c] += scratch_[c];
        for (const auto& e : x) {
            if (!touched_flag_[e.index]) {
                touched_flag_[e.index] = 1;
                touched_.push_back(e.index);
            }
            double* col = columns_.data() + static_cast<std::size_t>(e.index) * classes_;
            for (std::size_t c = 0; c < classes_; ++c) col[c] += scratch_[c] * e.weight;
        }
        ++count_;
    }

    void reset() {
        for (std::uint32_t f : touched_) {
            std::fill_n(columns_.begin() + static_cast<std::ptrdiff_t>(f * classes_), classes_, 0.0);
            touched_flag_[f] = 0;
        }
        touched_.clear();
        std::fill(bias_.begin(), bias_.end(), 0.0);
        loss_ = 0.0;
        count_ = 0;
    }

    double loss_sum() const { return loss_; }
    std::size_t count() const { return count_; }
    const std::vector<std::uint32_t>& touched() const { return touched_; }
    const double* column(std::uint32_t f) const { return columns_.data() + static_cast<std::size_t>(f) * classes_; }
    const std::vector<double>& bias_grad() const { return bias_; }

private:
    std::size_t classes_;
    std::vector<double> columns_;
    std::vector<std::uint8_t> touched_flag_;
    std::vector<std::uint32_t> touched_;
    std::vector<double> bias_;
    std::vector<double> scratch_;
    double loss_ = 0.0;
    std::size_t count_ = 0;
};

void check_data(const LabeledSet& data, std::size_t classes, std::size_t features) {
    if (data.x.size() != data.y.size()) throw ValidationError("feature and label counts differ");
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        if (data.y[i] >= classes) throw ValidationError("class index out of range at sample " + std::to_string(i));
        std::int64_t prev = -1;
        for (const auto& e : data.x[i]) {
            if (e.index >= features) throw ValidationError("feature index out of range at sample " + std::to_string(i));
            if (static_cast<std::int64_t>(e.index) <= prev) throw ValidationError("sparse indices not increasing at sample " + std::to_string(i));
            prev = e.index;
        }
    }
}

std::size_t infer_features(const LabeledSet& data) {
    std::size_t f = 0;
    for (const auto& x : data.x) {
        if (!x.empty()) f = std::max<std::size_t>(f, x.back().index + 1);
    }
    return f;
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double top1_accuracy(const LinearModel& m, const LabeledSet& data) {
    if (data.x.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (argmax(m.logits(data.x[i])) == data.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.x.size());
}

double objective(const LinearModel& m, const LabeledSet& data, double l2_lambda) {
    check_data(data, m.num_classes(), m.num_features);
    if (data.x.empty()) throw ValidationError("objective needs at least one sample");
    BatchAccumulator acc(m.num_classes(), m.num_features);
    const auto view = view_of(m);
    for (std::size_t i = 0; i < data.x.size(); ++i) acc.add(view, data.x[i], data.y[i]);
    return acc.loss_sum() / static_cast<double>(data.x.size()) + 0.5 * l2_lambda * squared_norm(m.weights);
}

Gradient gradient(const LinearModel& m, const LabeledSet& data, double l2_lambda) {
    check_data(data, m.num_classes(), m.num_features);
    if (data.x.empty()) throw ValidationError("gradient needs at least one sample");
    BatchAccumulator acc(m.num_classes(), m.num_features);
    const auto view = view_of(m);
    for (std::size_t i = 0; i < data.x.size(); ++i) acc.add(view, data.x[i], data.y[i]);

    const double inv_n = 1.0 / static_cast<double>(data.x.size());
    Gradient g;
    g.weights.resize(m.weights.size());
    for (std::size_t k = 0; k < m.weights.size(); ++k) g.weights[k] = l2_lambda * m.weights[k];
    for (std::uint32_t f : acc.touched()) {
        const double* col = acc.column(f);
        for (std::size_t c = 0; c < m.num_classes(); ++c) g.weights[c * m.num_features + f] += col[c] * inv_n;
    }
    g.bias.resize(m.num_classes());
    for (std::size_t c = 0; c < m.num_classes(); ++c) g.bias[c] = acc.bias_grad()[c] * inv_n;
    return g;
}

TrainResult train_logreg(const LabeledSet& train, const std::vector<CweId>& class_labels, const TrainConfig& cfg,
                         std::optional<LabeledSet> val) {
    cfg.validate();
    if (train.x.empty()) throw ValidationError("training set is empty");
    if (class_labels.empty()) throw ValidationError("no classes to train");
    std::size_t features = infer_features(train);
    if (val) features = std::max(features, infer_features(*val));
    const std::size_t classes = class_labels.size();
    check_data(train, classes, features);
    if (val) check_data(*val, classes, features);

    std::vector<double> v(classes * features, 0.0);
    std::vector<double> bias(classes, 0.0);
    double scale = 1.0;
    const double decay = 1.0 - cfg.learning_rate * cfg.l2_lambda;

    const auto materialize = [&] {
        LinearModel m(class_labels, features);
        for (std::size_t k = 0; k < v.size(); ++k) m.weights[k] = scale * v[k];
        m.bias = bias;
        return m;
    };

    std::vector<std::size_t> order(train.x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMixRng rng(cfg.seed);
    BatchAccumulator acc(classes, features);

    TrainResult result;
    std::optional<LinearModel> best;
    double best_val = -1.0;
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            acc.reset();
            const ParamView view{v.data(), scale, bias.data(), classes, features};
            for (std::size_t i = start; i < end; ++i) acc.add(view, train.x[order[i]], train.y[order[i]]);
            if (!std::isfinite(acc.loss_sum())) {
                throw TrainingError("non-finite loss in epoch " + std::to_string(epoch) + " (batch starting at " +
                                    std::to_string(start) + "); learning rate " + std::to_string(cfg.learning_rate) +
                                    " is probably too high");
            }
            epoch_loss += acc.loss_sum();

            const double m = static_cast<double>(end - start);
            scale *= decay;
            const double coef = cfg.learning_rate / (m * scale);
            for (std::uint32_t f : acc.touched()) {
                const double* col = acc.column(f);
                for (std::size_t c = 0; c < classes; ++c) v[c * features + f] -= coef * col[c];
            }
            for (std::size_t c = 0; c < classes; ++c) bias[c] -= cfg.learning_rate / m * acc.bias_grad()[c];
            if (scale < 1e-6) {
                for (double& w : v) w *= scale;
                scale = 1.0;
            }
        }
        const double reg = 0.5 * cfg.l2_lambda * scale * scale * squared_norm(v);
        const double obj = epoch_loss / static_cast<double>(order.size()) + reg;
        if (!std::isfinite(obj)) {
            throw TrainingError("non-finite objective after epoch " + std::to_string(epoch) + "; learning rate " +
                                std::to_string(cfg.learning_rate) + " is probably too high");
        }
        result.epoch_objective.push_back(obj);
        result.epochs_run = epoch;

        if (!val) continue;
        LinearModel current = materialize();
        const double acc_val = top1_accuracy(current, *val);
        result.epoch_val_top1.push_back(acc_val);
        if (acc_val > best_val) {
            best_val = acc_val;
            best = std::move(current);
            result.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.early_stop_patience) {
            break;
        }
    }

    if (best) {
        result.model = std::move(*best);
    } else {
        result.model = materialize();
        result.best_epoch = result.epochs_run;
    }
    try {
        result.model.check_invariants();
    } catch (const ValidationError& e) {
        throw TrainingError(std::string("training diverged: ") + e.what());
    }
    return result;
}

}  // namespace cvecwe

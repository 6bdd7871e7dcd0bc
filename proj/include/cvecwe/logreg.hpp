// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cvecwe/cwe_id.hpp"
#include "cvecwe/vectorizer.hpp"

namespace cvecwe {

// Multinomial logistic regression. weights is row-major
// [num_classes x num_features].
struct LinearModel {
    std::vector<CweId> class_labels;
    std::size_t num_features = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    LinearModel() = default;
    LinearModel(std::vector<CweId> labels, std::size_t features);

    std::size_t num_classes() const noexcept { return class_labels.size(); }
    double& weight(std::size_t cls, std::size_t feature) { return weights[cls * num_features + feature]; }
    double weight(std::size_t cls, std::size_t feature) const { return weights[cls * num_features + feature]; }

    std::vector<double> logits(const SparseVector& x) const;
    void check_invariants() const;
};

// Numerically stable softmax (max-shifted).
std::vector<double> softmax(std::span<const double> logits);

struct RankedLabel {
    CweId cwe;
    double probability;
};

// Top-k classes by softmax probability; ties keep class_labels order.
std::vector<RankedLabel> predict_ranked(const LinearModel& m, const SparseVector& x, std::size_t k);

struct TrainConfig {
    double l2_lambda = 1e-6;
    std::size_t epochs = 30;
    std::size_t batch_size = 256;
    double learning_rate = 0.5;
    std::uint64_t seed = 42;
    std::size_t early_stop_patience = 3;

    void validate() const;
};

struct LabeledSet {
    std::span<const SparseVector> x;
    std::span<const std::size_t> y;
};

struct TrainResult {
    LinearModel model;
    std::vector<double> epoch_objective;  // per epoch: mean pre-update batch loss + l2 term
    std::vector<double> epoch_val_top1;   // empty without validation data
    std::size_t best_epoch = 0;           // 1-based epoch whose parameters were kept
    std::size_t epochs_run = 0;
};

// Mini-batch gradient descent on mean softmax cross-entropy plus
// (l2_lambda / 2) * ||weights||^2 (bias unregularized), fixed learning rate,
// sample order reshuffled each epoch from cfg.seed. With validation data the
// parameters of the best-val-top-1 epoch are kept and training stops after
// early_stop_patience epochs without improvement. Throws TrainingError if the
// loss becomes non-finite.
TrainResult train_logreg(const LabeledSet& train, const std::vector<CweId>& class_labels, const TrainConfig& cfg,
                         std::optional<LabeledSet> val = std::nullopt);

// Full-data objective and its analytic gradient, computed with the same
// per-sample accumulation the trainer uses.
double objective(const LinearModel& m, const LabeledSet& data, double l2_lambda);

struct Gradient {
    std::vector<double> weights;  // same layout as LinearModel::weights
    std::vector<double> bias;
};

Gradient gradient(const LinearModel& m, const LabeledSet& data, double l2_lambda);

double top1_accuracy(const LinearModel& m, const LabeledSet& data);

}  // namespace cvecwe

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpr/types.hpp"

namespace vpr {

/// Per-feature linear [0,1] scaling fitted on training scores. Values
/// outside the training range map outside [0,1]; nothing is clipped. A
/// constant feature maps to 0.
struct MinMaxScaler {
    Eigen::Vector2d min = Eigen::Vector2d::Zero();
    Eigen::Vector2d max = Eigen::Vector2d::Zero();

    Eigen::Vector2d transform(const Eigen::Vector2d& x) const;
};

MinMaxScaler fit_scaler(const std::vector<Eigen::Vector2d>& train_scores);

struct SvmConfig {
    double learning_rate = 0.1; // scaled by 1/sqrt(epoch+1)
    double l1_lambda = 1e-4;
    int max_iters = 1000; // one iteration = one pass over shuffled data
    std::uint64_t seed = 0;
};

/// Linear accept/reject boundary over two scaled scores. Decision is
/// sign(w.x + b); exact zero rejects (a false accept is the costly case).
struct SVMModel {
    Eigen::Vector2d weights = Eigen::Vector2d::Zero();
    double bias = 0.0;
    SvmConfig config;
    double final_objective = 0.0; // mean hinge + lambda * |w|_1
};

/// Hinge-loss SGD with an L1 penalty on the weights (bias unpenalized).
/// Shuffle order is fixed by the seed, so training is bit-reproducible.
/// labels are +1 (correct match) / -1 (incorrect).
SVMModel train_linear_svm(const std::vector<Eigen::Vector2d>& features,
                          const std::vector<int>& labels, const SvmConfig& config);

enum class Decision { Accept, Reject };

Decision svm_decide(const SVMModel& model, const Eigen::Vector2d& scaled_features);

/// Fraction of decisions that agree with the labels (+1 expects Accept).
double classification_accuracy(const std::vector<Decision>& decisions,
                               const std::vector<int>& labels);

double svm_objective(const SVMModel& model, const std::vector<Eigen::Vector2d>& features,
                     const std::vector<int>& labels);

/// Text round-trip for cross-dataset runs: weights, bias and scaler bounds.
void save_model(const std::string& path, const SVMModel& model, const MinMaxScaler& scaler);
std::pair<SVMModel, MinMaxScaler> load_model(const std::string& path);

} // namespace vpr

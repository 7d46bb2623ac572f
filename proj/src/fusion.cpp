#include "vpr/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace vpr {

Eigen::Vector2d MinMaxScaler::transform(const Eigen::Vector2d& x) const {
    Eigen::Vector2d out;
    for (int f = 0; f < 2; ++f) {
        const double range = max(f) - min(f);
        out(f) = range > 0.0 ? (x(f) - min(f)) / range : 0.0;
    }
    return out;
}

MinMaxScaler fit_scaler(const std::vector<Eigen::Vector2d>& train_scores) {
    if (train_scores.empty()) {
        throw Error(ErrorCode::EmptyTrainingSet, "scaler needs at least one sample");
    }
    MinMaxScaler scaler;
    scaler.min = train_scores.front();
    scaler.max = train_scores.front();
    for (const auto& s : train_scores) {
        scaler.min = scaler.min.cwiseMin(s);
        scaler.max = scaler.max.cwiseMax(s);
    }
    return scaler;
}

double svm_objective(const SVMModel& model, const std::vector<Eigen::Vector2d>& features,
                     const std::vector<int>& labels) {
    double hinge = 0.0;
    for (size_t i = 0; i < features.size(); ++i) {
        const double margin = labels[i] * (model.weights.dot(features[i]) + model.bias);
        hinge += std::max(0.0, 1.0 - margin);
    }
    hinge /= static_cast<double>(features.size());
    return hinge + model.config.l1_lambda * model.weights.lpNorm<1>();
}

SVMModel train_linear_svm(const std::vector<Eigen::Vector2d>& features,
                          const std::vector<int>& labels, const SvmConfig& config) {
    if (features.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(features.size()) + " features vs " +
                        std::to_string(labels.size()) + " labels");
    }
    if (features.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training samples");
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            has_pos = true;
        } else if (labels[i] == -1) {
            has_neg = true;
        } else {
            throw Error(ErrorCode::InvalidConfig,
                        "labels must be +1 or -1, got " + std::to_string(labels[i]));
        }
        if (!features[i].allFinite()) {
            throw Error(ErrorCode::NonFiniteValue,
                        "non-finite feature at sample " + std::to_string(i));
        }
    }
    if (!has_pos || !has_neg) {
        throw Error(ErrorCode::SingleClassTraining, "training data contains a single class");
    }

    SVMModel model;
    model.config = config;

    std::mt19937_64 rng(config.seed);
    std::vector<size_t> order(features.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < config.max_iters; ++epoch) {
        const double eta = config.learning_rate / std::sqrt(static_cast<double>(epoch + 1));
        std::shuffle(order.begin(), order.end(), rng);
        for (const size_t i : order) {
            const double y = static_cast<double>(labels[i]);
            const double margin = y * (model.weights.dot(features[i]) + model.bias);
            if (margin < 1.0) {
                model.weights += eta * y * features[i];
                model.bias += eta * y;
            }
            // Proximal L1 step: shrink toward zero, clamp at zero. The bias
            // is not penalized.
            const double shrink = eta * config.l1_lambda;
            for (int j = 0; j < 2; ++j) {
                const double w = model.weights(j);
                model.weights(j) = std::copysign(std::max(0.0, std::abs(w) - shrink), w);
            }
        }
    }

    model.final_objective = svm_objective(model, features, labels);
    return model;
}

Decision svm_decide(const SVMModel& model, const Eigen::Vector2d& scaled_features) {
    const double score = model.weights.dot(scaled_features) + model.bias;
    return score > 0.0 ? Decision::Accept : Decision::Reject;
}

double classification_accuracy(const std::vector<Decision>& decisions,
                               const std::vector<int>& labels) {
    if (decisions.size() != labels.size() || decisions.empty()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(decisions.size()) + " decisions vs " +
                        std::to_string(labels.size()) + " labels");
    }
    size_t hits = 0;
    for (size_t i = 0; i < decisions.size(); ++i) {
        const bool accept = decisions[i] == Decision::Accept;
        if (accept == (labels[i] == 1)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void save_model(const std::string& path, const SVMModel& model, const MinMaxScaler& scaler) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "vpr-svm-model v1\n";
    out << "weights " << fmt(model.weights(0)) << " " << fmt(model.weights(1)) << "\n";
    out << "bias " << fmt(model.bias) << "\n";
    out << "scaler_min " << fmt(scaler.min(0)) << " " << fmt(scaler.min(1)) << "\n";
    out << "scaler_max " << fmt(scaler.max(0)) << " " << fmt(scaler.max(1)) << "\n";
}

std::pair<SVMModel, MinMaxScaler> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "vpr-svm-model v1") {
        throw Error(ErrorCode::ParseError, "unrecognized model header in " + path);
    }
    SVMModel model;
    MinMaxScaler scaler;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "weights") {
            is >> model.weights(0) >> model.weights(1);
        } else if (key == "bias") {
            is >> model.bias;
        } else if (key == "scaler_min") {
            is >> scaler.min(0) >> scaler.min(1);
        } else if (key == "scaler_max") {
            is >> scaler.max(0) >> scaler.max(1);
        } else if (!key.empty()) {
            throw Error(ErrorCode::ParseError, "unknown model field '" + key + "'");
        }
        if (is.fail()) throw Error(ErrorCode::ParseError, "bad model line: " + line);
    }
    return {model, scaler};
}

} // namespace vpr

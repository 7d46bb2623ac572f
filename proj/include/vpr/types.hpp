#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpr/errors.hpp"

namespace vpr {

/// A set of fixed-dimension feature vectors with stable string identifiers.
/// Row i of `values` is the descriptor for `ids[i]`.
struct DescriptorSet {
    std::vector<std::string> ids;
    Eigen::MatrixXd values; // N x D

    Eigen::Index size() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

/// 2D or 3D spatial coordinates (meters, shared global frame), one row per id.
struct PoseSet {
    std::vector<std::string> ids;
    Eigen::MatrixXd coords; // N x (2|3)

    Eigen::Index size() const { return coords.rows(); }
    Eigen::Index dim() const { return coords.cols(); }
};

/// Descriptors joined with poses over an identical id set. Construct through
/// validate_map; rows of both members are aligned (same id per row index).
struct VPRMap {
    DescriptorSet descriptors;
    PoseSet poses;

    Eigen::Index size() const { return descriptors.size(); }
};

/// Per-query ranked retrieval result: neighbor ids, exact Euclidean feature
/// distances (nondecreasing, ties by ascending id), and neighbor poses.
struct RankedMatches {
    std::string query_id;
    std::vector<std::string> reference_ids;
    Eigen::VectorXd distances; // K
    Eigen::MatrixXd poses;     // K x pose_dim

    Eigen::Index size() const { return distances.size(); }

    /// First k neighbors (k must not exceed size()).
    RankedMatches head(Eigen::Index k) const;
};

enum class Method { L2, PA, SUE, SUE_DC, External };

std::string method_name(Method m);

/// One uncertainty score for one query. Higher score = more uncertain.
/// Confidence-polarity channels keep the raw confidence in gv_confidence and
/// expose the negated value as the score.
struct UncertaintyRecord {
    std::string query_id;
    Method method = Method::External;
    std::string channel; // method name; ingest name for external channels
    double score = 0.0;
    std::optional<double> gv_confidence;
};

/// Correctness verdict for one query's best match. `correct` is always
/// consistent with the stored poses and threshold (inclusive boundary).
struct GroundTruthLabel {
    std::string query_id;
    bool correct = false;
    Eigen::VectorXd query_pose;
    Eigen::VectorXd matched_pose;
    double threshold_m = 0.0;
};

/// Joins descriptors and poses into a map. Collects *all* problems before
/// failing: duplicate ids, id set mismatches, dimension inconsistencies and
/// non-finite values, reported sorted by id so the error text is stable.
VPRMap validate_map(DescriptorSet descriptors, PoseSet poses);

} // namespace vpr

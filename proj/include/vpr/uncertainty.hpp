#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vpr/types.hpp"

namespace vpr {

enum class Weighting { Exponential, Uniform };

/// Knobs for the spatial-spread score. alpha is the feature-distance decay
/// (1/feature-distance units); uniform weighting behaves like alpha = 0.
struct SueConfig {
    double alpha = 350.0;
    int k_neighbors = 10;
    Weighting weighting = Weighting::Exponential;
};

/// Weighted first and second moments of the matched reference poses.
/// weights sum to 1, covariance is exactly symmetric by construction and
/// trace equals the sum of its diagonal.
struct WeightedPoseSummary {
    Eigen::VectorXd weights;
    Eigen::VectorXd mean;       // meters
    Eigen::MatrixXd covariance; // meters^2
    double trace = 0.0;         // the uncertainty score s_q
};

/// Distance of each reference to its k-th nearest neighbor in pose space.
/// z is zero only for references whose position is duplicated at least k
/// times; such references carry zero prior mass under compensation.
struct PoseDensity {
    int k = 1;
    std::vector<std::string> ids;
    Eigen::VectorXd z; // meters, aligned with ids

    double z_for(const std::string& reference_id) const;

    /// Wraps precomputed per-reference distances (z must be nonnegative).
    static PoseDensity from_values(std::vector<std::string> ids, Eigen::VectorXd z, int k);

private:
    friend PoseDensity pose_density(const PoseSet&, int);
    std::unordered_map<std::string, double> lookup_;
};

/// Feature distance of the best match: the classic retrieval uncertainty.
double score_l2(const RankedMatches& matches);

/// Ratio d1/d2 of the two best feature distances, in [0, 1]. A zero second
/// distance means exact duplicates and returns 1 (maximal ambiguity).
double score_pa(const RankedMatches& matches);

/// Normalized exponential-decay weights over ranked distances. Computed with
/// the shift exp(-alpha * (d_i - d_min)) so large alpha*d cannot underflow
/// the whole vector; identical to the unshifted form after normalization.
Eigen::VectorXd sue_weights(const Eigen::Ref<const Eigen::VectorXd>& distances,
                            const SueConfig& config);

/// Weighted mean/covariance of the matched poses and the trace score.
/// The covariance uses the population normalizer (weights sum to 1, no
/// sample correction). A single neighbor yields a zero score.
WeightedPoseSummary sue_score(const RankedMatches& matches, const SueConfig& config);

/// Per-neighbor match probabilities: sue_weights with an optional
/// per-neighbor prior multiplied in before normalization.
Eigen::VectorXd posterior_match_belief(
    const RankedMatches& matches, const SueConfig& config,
    const std::optional<Eigen::VectorXd>& prior = std::nullopt);

/// Exact k-th nearest neighbor distance in pose space per reference, self
/// excluded. Requires more references than k.
PoseDensity pose_density(const PoseSet& poses, int k);

/// sue_score with weights multiplied by z^2 before normalization, imposing
/// a uniform spatial prior on the query location. Every matched reference
/// must be covered by `density`; if all matched references have z = 0 the
/// prior mass vanishes and ZeroWeightSum is raised.
WeightedPoseSummary sue_score_density_compensated(const RankedMatches& matches,
                                                  const PoseDensity& density,
                                                  const SueConfig& config);

} // namespace vpr

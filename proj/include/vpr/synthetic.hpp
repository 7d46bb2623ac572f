#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpr/evaluation.hpp"
#include "vpr/types.hpp"

namespace vpr {

enum class QuerySpatialMode { MatchReferenceDensity, Uniform };

/// Deterministic synthetic-world recipe. Places sit on a square grid
/// (spacing place_spacing_m); each place owns a disc of references around
/// its center. Places in the same aliasing group share one descriptor
/// prototype (drawn on the unit sphere with a minimum pairwise separation),
/// so group members are indistinguishable in feature space up to noise.
/// Every output is a pure function of the seed.
struct WorldConfig {
    std::uint64_t seed = 0;
    int n_places = 0;
    std::vector<int> refs_per_place;          // one entry per place
    std::vector<std::vector<int>> aliasing_groups; // partition of 0..n_places-1
    int descriptor_dim = 0;
    double descriptor_noise_sigma = 0.0;
    std::vector<double> pose_spread_m;        // disc radius per place
    double place_spacing_m = 100.0;
    int query_count = 0;
    QuerySpatialMode query_spatial_mode = QuerySpatialMode::MatchReferenceDensity;
    double prototype_min_separation = 0.5;    // L2 distance between prototypes
};

WorldConfig world_config_from_json(const std::string& json_text);
WorldConfig world_config_from_json_file(const std::string& path);

struct SyntheticWorld {
    VPRMap map;
    DescriptorSet query_descriptors;
    PoseSet query_poses;
    // bookkeeping for tests and reports
    Eigen::MatrixXd place_centers; // n_places x 2
    std::vector<int> reference_place;
    std::vector<int> query_place;
    std::vector<int> group_of_place;
};

/// Validates the partition, then samples prototypes, references and queries
/// from a single seeded stream. Query descriptors come from the query
/// place's group prototype plus the same isotropic noise as references.
SyntheticWorld generate_world(const WorldConfig& config);

/// Test oracle for the weighted pose moments: direct double loops with
/// extended-precision accumulation, no shared code with the scoring path.
/// weights need not be normalized; their sum must be positive.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> oracle_weighted_moments(
    const Eigen::Ref<const Eigen::MatrixXd>& poses,
    const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Test oracle for the precision-recall sweep: re-counts the accepted set
/// from scratch at every distinct threshold, no incremental state.
PRCurve oracle_pr(const std::vector<double>& scores, const std::vector<bool>& correct);

} // namespace vpr

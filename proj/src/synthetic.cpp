#include "vpr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vpr {

namespace {

using nlohmann::json;

std::vector<int> int_or_list(const json& j, const char* key, int n, bool positive) {
    std::vector<int> out;
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
        out.assign(static_cast<size_t>(n), v.get<int>());
    } else if (v.is_array()) {
        out = v.get<std::vector<int>>();
    } else {
        throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be an int or a list");
    }
    if (static_cast<int>(out.size()) != n) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(key) + " must have one entry per place");
    }
    for (int x : out) {
        if (positive && x < 1) {
            throw Error(ErrorCode::InvalidConfig, std::string(key) + " entries must be >= 1");
        }
    }
    return out;
}

std::vector<double> double_or_list(const json& j, const char* key, int n) {
    std::vector<double> out;
    const auto& v = j.at(key);
    if (v.is_number()) {
        out.assign(static_cast<size_t>(n), v.get<double>());
    } else if (v.is_array()) {
        out = v.get<std::vector<double>>();
    } else {
        throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be a number or a list");
    }
    if (static_cast<int>(out.size()) != n) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(key) + " must have one entry per place");
    }
    for (double x : out) {
        if (!(x > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, std::string(key) + " entries must be > 0");
        }
    }
    return out;
}

std::string padded_id(const char* prefix, int i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s%06d", prefix, i);
    return buf;
}

// Groups may omit places; every unmentioned place becomes its own group.
// Duplicates and out-of-range indices are partition errors.
std::vector<std::vector<int>> complete_partition(const std::vector<std::vector<int>>& groups,
                                                 int n_places) {
    std::vector<int> owner(static_cast<size_t>(n_places), -1);
    for (size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) {
            throw Error(ErrorCode::InvalidPartition, "aliasing group " + std::to_string(g) +
                                                         " is empty");
        }
        for (int p : groups[g]) {
            if (p < 0 || p >= n_places) {
                throw Error(ErrorCode::InvalidPartition,
                            "place " + std::to_string(p) + " is out of range");
            }
            if (owner[static_cast<size_t>(p)] != -1) {
                throw Error(ErrorCode::InvalidPartition,
                            "place " + std::to_string(p) + " appears in two groups");
            }
            owner[static_cast<size_t>(p)] = static_cast<int>(g);
        }
    }
    std::vector<std::vector<int>> complete = groups;
    for (int p = 0; p < n_places; ++p) {
        if (owner[static_cast<size_t>(p)] == -1) complete.push_back({p});
    }
    return complete;
}

} // namespace

WorldConfig world_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("world config: ") + e.what());
    }
    try {
        WorldConfig config;
        config.seed = j.value("seed", std::uint64_t{0});
        config.n_places = j.at("n_places").get<int>();
        if (config.n_places < 1) {
            throw Error(ErrorCode::InvalidConfig, "n_places must be >= 1");
        }
        config.refs_per_place = int_or_list(j, "refs_per_place", config.n_places, true);
        if (j.contains("aliasing_groups")) {
            config.aliasing_groups = j.at("aliasing_groups").get<std::vector<std::vector<int>>>();
        }
        config.descriptor_dim = j.at("descriptor_dim").get<int>();
        config.descriptor_noise_sigma = j.at("descriptor_noise_sigma").get<double>();
        config.pose_spread_m = double_or_list(j, "pose_spread_m", config.n_places);
        config.place_spacing_m = j.value("place_spacing_m", 100.0);
        config.query_count = j.at("query_count").get<int>();
        const std::string mode = j.value("query_spatial_mode", "match_reference_density");
        if (mode == "match_reference_density") {
            config.query_spatial_mode = QuerySpatialMode::MatchReferenceDensity;
        } else if (mode == "uniform") {
            config.query_spatial_mode = QuerySpatialMode::Uniform;
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown query_spatial_mode '" + mode + "'");
        }
        config.prototype_min_separation = j.value("prototype_min_separation", 0.5);
        return config;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("world config: ") + e.what());
    }
}

WorldConfig world_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return world_config_from_json(os.str());
}

SyntheticWorld generate_world(const WorldConfig& config) {
    if (config.n_places < 1) throw Error(ErrorCode::InvalidConfig, "n_places must be >= 1");
    if (config.descriptor_dim < 1) {
        throw Error(ErrorCode::InvalidConfig, "descriptor_dim must be >= 1");
    }
    if (config.descriptor_noise_sigma < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "descriptor_noise_sigma must be >= 0");
    }
    if (config.query_count < 1) throw Error(ErrorCode::InvalidConfig, "query_count must be >= 1");
    if (static_cast<int>(config.refs_per_place.size()) != config.n_places ||
        static_cast<int>(config.pose_spread_m.size()) != config.n_places) {
        throw Error(ErrorCode::InvalidConfig, "per-place lists must match n_places");
    }

    const auto groups = complete_partition(config.aliasing_groups, config.n_places);

    SyntheticWorld world;
    world.group_of_place.assign(static_cast<size_t>(config.n_places), -1);
    for (size_t g = 0; g < groups.size(); ++g) {
        for (int p : groups[g]) world.group_of_place[static_cast<size_t>(p)] = static_cast<int>(g);
    }

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Group prototypes on the unit sphere, rejection-sampled to keep a
    // minimum pairwise separation so distinct groups stay distinguishable.
    const int dim = config.descriptor_dim;
    Eigen::MatrixXd prototypes(static_cast<Eigen::Index>(groups.size()), dim);
    int attempts = 0;
    for (Eigen::Index g = 0; g < prototypes.rows(); ++g) {
        while (true) {
            if (++attempts > 100000) {
                throw Error(ErrorCode::InvalidConfig,
                            "cannot place " + std::to_string(groups.size()) +
                                " prototypes at separation " +
                                std::to_string(config.prototype_min_separation));
            }
            Eigen::VectorXd candidate(dim);
            for (Eigen::Index d = 0; d < dim; ++d) candidate(d) = normal(rng);
            const double norm = candidate.norm();
            if (norm == 0.0) continue;
            candidate /= norm;
            bool ok = true;
            for (Eigen::Index h = 0; h < g && ok; ++h) {
                ok = (prototypes.row(h).transpose() - candidate).norm() >=
                     config.prototype_min_separation;
            }
            if (ok) {
                prototypes.row(g) = candidate;
                break;
            }
        }
    }

    // Place centers on a square grid.
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.n_places))));
    world.place_centers.resize(config.n_places, 2);
    for (int p = 0; p < config.n_places; ++p) {
        world.place_centers(p, 0) = config.place_spacing_m * (p % cols);
        world.place_centers(p, 1) = config.place_spacing_m * (p / cols);
    }

    const auto disc_point = [&](int place) {
        const double radius = config.pose_spread_m[static_cast<size_t>(place)] *
                              std::sqrt(unit(rng));
        const double angle = 2.0 * M_PI * unit(rng);
        Eigen::Vector2d point = world.place_centers.row(place);
        point.x() += radius * std::cos(angle);
        point.y() += radius * std::sin(angle);
        return point;
    };
    const auto noisy_descriptor = [&](int place) {
        Eigen::VectorXd f = prototypes.row(world.group_of_place[static_cast<size_t>(place)]);
        for (Eigen::Index d = 0; d < dim; ++d) {
            f(d) += config.descriptor_noise_sigma * normal(rng);
        }
        return f;
    };

    int total_refs = 0;
    for (int c : config.refs_per_place) total_refs += c;

    DescriptorSet ref_desc;
    PoseSet ref_poses;
    ref_desc.values.resize(total_refs, dim);
    ref_poses.coords.resize(total_refs, 2);
    world.reference_place.reserve(static_cast<size_t>(total_refs));
    int row = 0;
    for (int p = 0; p < config.n_places; ++p) {
        for (int r = 0; r < config.refs_per_place[static_cast<size_t>(p)]; ++r) {
            const std::string id = padded_id("r", row);
            ref_desc.ids.push_back(id);
            ref_poses.ids.push_back(id);
            ref_poses.coords.row(row) = disc_point(p).transpose();
            ref_desc.values.row(row) = noisy_descriptor(p).transpose();
            world.reference_place.push_back(p);
            ++row;
        }
    }
    world.map = validate_map(std::move(ref_desc), std::move(ref_poses));

    // Query placement: either mimic the reference density (draw a reference
    // slot uniformly) or spread evenly over places.
    std::uniform_int_distribution<int> place_pick(0, config.n_places - 1);
    std::uniform_int_distribution<int> ref_pick(0, total_refs - 1);

    world.query_descriptors.values.resize(config.query_count, dim);
    world.query_poses.coords.resize(config.query_count, 2);
    world.query_place.reserve(static_cast<size_t>(config.query_count));
    for (int q = 0; q < config.query_count; ++q) {
        const int place = config.query_spatial_mode == QuerySpatialMode::Uniform
                              ? place_pick(rng)
                              : world.reference_place[static_cast<size_t>(ref_pick(rng))];
        const std::string id = padded_id("q", q);
        world.query_descriptors.ids.push_back(id);
        world.query_poses.ids.push_back(id);
        world.query_poses.coords.row(q) = disc_point(place).transpose();
        world.query_descriptors.values.row(q) = noisy_descriptor(place).transpose();
        world.query_place.push_back(place);
    }
    return world;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> oracle_weighted_moments(
    const Eigen::Ref<const Eigen::MatrixXd>& poses,
    const Eigen::Ref<const Eigen::VectorXd>& weights) {
    const Eigen::Index n = poses.rows();
    const Eigen::Index dim = poses.cols();
    if (weights.size() != n) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(weights.size()) + " weights for " + std::to_string(n) +
                        " poses");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights(i) < 0.0) {
            throw Error(ErrorCode::InvalidConfig, "weights must be nonnegative");
        }
    }

    long double total = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) total += static_cast<long double>(weights(i));
    if (!(total > 0.0L)) throw Error(ErrorCode::ZeroWeightSum, "weights sum to zero");

    Eigen::VectorXd mean(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        long double acc = 0.0L;
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += static_cast<long double>(weights(i)) * static_cast<long double>(poses(i, d));
        }
        mean(d) = static_cast<double>(acc / total);
    }

    Eigen::MatrixXd cov(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            long double acc = 0.0L;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += static_cast<long double>(weights(i)) *
                       static_cast<long double>(poses(i, a) - mean(a)) *
                       static_cast<long double>(poses(i, b) - mean(b));
            }
            cov(a, b) = static_cast<double>(acc / total);
        }
    }
    return {mean, cov};
}

PRCurve oracle_pr(const std::vector<double>& scores, const std::vector<bool>& correct) {
    if (scores.size() != correct.size() || scores.empty()) {
        throw Error(ErrorCode::LengthMismatch, "scores and labels disagree");
    }
    size_t total_correct = 0;
    for (bool c : correct) {
        if (c) ++total_correct;
    }
    if (total_correct == 0) throw Error(ErrorCode::NoPositives, "no positive labels");

    std::set<double> thresholds(scores.begin(), scores.end());
    PRCurve curve;
    double ap_sum = 0.0;
    for (const double value : thresholds) {
        size_t accepted = 0, accepted_correct = 0, at_value_correct = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] <= value) {
                ++accepted;
                if (correct[i]) ++accepted_correct;
            }
            if (scores[i] == value && correct[i]) ++at_value_correct;
        }
        PRPoint point;
        point.threshold = value;
        point.precision = static_cast<double>(accepted_correct) / static_cast<double>(accepted);
        point.recall =
            static_cast<double>(accepted_correct) / static_cast<double>(total_correct);
        curve.points.push_back(point);
        ap_sum += static_cast<double>(at_value_correct) * point.precision;
    }
    curve.auc = ap_sum / static_cast<double>(total_correct);
    return curve;
}

} // namespace vpr

#include "vpr/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace vpr {

namespace {

// Moments from already-normalized weights. The covariance accumulates the
// upper triangle and mirrors it, so symmetry is exact rather than within
// rounding of two independent dot products.
WeightedPoseSummary moments_from_weights(const Eigen::MatrixXd& poses,
                                         Eigen::VectorXd weights) {
    const Eigen::Index k = poses.rows();
    const Eigen::Index dim = poses.cols();

    WeightedPoseSummary out;
    out.mean = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.mean += weights(i) * poses.row(i).transpose();
    }

    out.covariance = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd centered = poses.row(i).transpose() - out.mean;
        for (Eigen::Index a = 0; a < dim; ++a) {
            for (Eigen::Index b = a; b < dim; ++b) {
                out.covariance(a, b) += weights(i) * centered(a) * centered(b);
            }
        }
    }
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = a + 1; b < dim; ++b) {
            out.covariance(b, a) = out.covariance(a, b);
        }
    }

    out.trace = out.covariance.trace();
    out.weights = std::move(weights);
    return out;
}

} // namespace

PoseDensity PoseDensity::from_values(std::vector<std::string> ids, Eigen::VectorXd z, int k) {
    if (static_cast<Eigen::Index>(ids.size()) != z.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(ids.size()) + " ids for " + std::to_string(z.size()) +
                        " distances");
    }
    if ((z.array() < 0.0).any()) {
        throw Error(ErrorCode::InvalidConfig, "density distances must be nonnegative");
    }
    PoseDensity density;
    density.k = k;
    density.ids = std::move(ids);
    density.z = std::move(z);
    for (size_t i = 0; i < density.ids.size(); ++i) {
        if (!density.lookup_.emplace(density.ids[i], density.z(static_cast<Eigen::Index>(i)))
                 .second) {
            throw Error(ErrorCode::DuplicateId, "duplicate id '" + density.ids[i] + "'");
        }
    }
    return density;
}

double PoseDensity::z_for(const std::string& reference_id) const {
    const auto it = lookup_.find(reference_id);
    if (it == lookup_.end()) {
        throw Error(ErrorCode::MissingDensity, "no density entry for '" + reference_id + "'");
    }
    return it->second;
}

double score_l2(const RankedMatches& matches) {
    if (matches.size() < 1) throw Error(ErrorCode::EmptyMatches, "no neighbors");
    return matches.distances(0);
}

double score_pa(const RankedMatches& matches) {
    if (matches.size() < 2) {
        throw Error(ErrorCode::NeedTwoNeighbors,
                    "ratio score needs two neighbors, got " + std::to_string(matches.size()));
    }
    const double d1 = matches.distances(0);
    const double d2 = matches.distances(1);
    if (d2 == 0.0) return 1.0; // exact duplicates: maximal ambiguity
    return d1 / d2;
}

Eigen::VectorXd sue_weights(const Eigen::Ref<const Eigen::VectorXd>& distances,
                            const SueConfig& config) {
    const Eigen::Index k = distances.size();
    if (k < 1) throw Error(ErrorCode::EmptyMatches, "no distances");
    if (config.weighting == Weighting::Uniform || config.alpha == 0.0) {
        return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    }
    if (config.alpha < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "alpha must be nonnegative");
    }
    // The first (smallest) shifted weight is exp(0) = 1, so the sum can
    // never vanish no matter how large alpha * d gets.
    const double shift = distances.minCoeff();
    Eigen::VectorXd w = (-config.alpha * (distances.array() - shift)).exp();
    return w / w.sum();
}

WeightedPoseSummary sue_score(const RankedMatches& matches, const SueConfig& config) {
    if (matches.size() < 1) throw Error(ErrorCode::EmptyMatches, "no neighbors");
    return moments_from_weights(matches.poses, sue_weights(matches.distances, config));
}

Eigen::VectorXd posterior_match_belief(const RankedMatches& matches, const SueConfig& config,
                                       const std::optional<Eigen::VectorXd>& prior) {
    Eigen::VectorXd likelihood = sue_weights(matches.distances, config);
    if (!prior) return likelihood;
    if (prior->size() != likelihood.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "prior has " + std::to_string(prior->size()) + " entries for " +
                        std::to_string(likelihood.size()) + " neighbors");
    }
    if ((prior->array() < 0.0).any()) {
        throw Error(ErrorCode::InvalidConfig, "prior entries must be nonnegative");
    }
    Eigen::VectorXd posterior = likelihood.array() * prior->array();
    const double total = posterior.sum();
    if (total <= 0.0) throw Error(ErrorCode::ZeroWeightSum, "prior removes all posterior mass");
    return posterior / total;
}

PoseDensity pose_density(const PoseSet& poses, int k) {
    const Eigen::Index n = poses.size();
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "density k must be positive");
    if (n <= k) {
        throw Error(ErrorCode::KTooLarge,
                    "density k=" + std::to_string(k) + " with only " + std::to_string(n) +
                        " references");
    }

    PoseDensity density;
    density.k = k;
    density.ids = poses.ids;
    density.z.resize(n);
    std::vector<double> dists;
    dists.reserve(static_cast<size_t>(n) - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        dists.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.push_back((poses.coords.row(j) - poses.coords.row(i)).norm());
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        density.z(i) = dists[static_cast<size_t>(k - 1)];
        density.lookup_[poses.ids[static_cast<size_t>(i)]] = density.z(i);
    }
    return density;
}

WeightedPoseSummary sue_score_density_compensated(const RankedMatches& matches,
                                                  const PoseDensity& density,
                                                  const SueConfig& config) {
    if (matches.size() < 1) throw Error(ErrorCode::EmptyMatches, "no neighbors");
    Eigen::VectorXd weights = sue_weights(matches.distances, config);
    for (Eigen::Index i = 0; i < matches.size(); ++i) {
        const double z = density.z_for(matches.reference_ids[static_cast<size_t>(i)]);
        weights(i) *= z * z;
    }
    const double total = weights.sum();
    if (total <= 0.0) {
        throw Error(ErrorCode::ZeroWeightSum,
                    "all matched references sit at duplicated positions (z = 0)");
    }
    weights /= total;
    return moments_from_weights(matches.poses, std::move(weights));
}

} // namespace vpr

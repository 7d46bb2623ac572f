#include "vpr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vpr {

RetrievalIndex::RetrievalIndex(const VPRMap& map, bool l2_normalize)
    : l2_normalize_(l2_normalize),
      ids_(map.descriptors.ids),
      features_(map.descriptors.values.transpose()),
      poses_(map.poses.coords) {
    if (l2_normalize_) {
        for (Eigen::Index i = 0; i < features_.cols(); ++i) {
            const double norm = features_.col(i).norm();
            if (norm > 0.0) features_.col(i) /= norm;
        }
    }
    squared_norms_ = features_.colwise().squaredNorm();
}

RankedMatches RetrievalIndex::query(const std::string& query_id,
                                    const Eigen::Ref<const Eigen::VectorXd>& descriptor,
                                    Eigen::Index k) const {
    if (descriptor.size() != dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query has dimension " + std::to_string(descriptor.size()) +
                        ", map has " + std::to_string(dim()));
    }
    if (k < 1 || k > size()) {
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(k) + " with " + std::to_string(size()) +
                        " references");
    }

    Eigen::VectorXd q = descriptor;
    if (l2_normalize_) {
        const double norm = q.norm();
        if (norm > 0.0) q /= norm;
    }

    // Exact distances for every reference; sqrt before ordering so that the
    // sort key is the reported distance itself.
    Eigen::VectorXd dist(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        dist(i) = std::sqrt((features_.col(i) - q).squaredNorm());
    }

    std::vector<Eigen::Index> order(static_cast<size_t>(size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto better = [&](Eigen::Index a, Eigen::Index b) {
        if (dist(a) != dist(b)) return dist(a) < dist(b);
        return ids_[static_cast<size_t>(a)] < ids_[static_cast<size_t>(b)];
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);

    RankedMatches out;
    out.query_id = query_id;
    out.reference_ids.reserve(static_cast<size_t>(k));
    out.distances.resize(k);
    out.poses.resize(k, poses_.cols());
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index i = order[static_cast<size_t>(r)];
        out.reference_ids.push_back(ids_[static_cast<size_t>(i)]);
        out.distances(r) = dist(i);
        out.poses.row(r) = poses_.row(i);
    }
    return out;
}

std::vector<RankedMatches> RetrievalIndex::batch(const DescriptorSet& queries,
                                                 Eigen::Index k) const {
    std::vector<RankedMatches> out;
    out.reserve(static_cast<size_t>(queries.size()));
    for (Eigen::Index i = 0; i < queries.size(); ++i) {
        out.push_back(query(queries.ids[static_cast<size_t>(i)], queries.values.row(i), k));
    }
    return out;
}

} // namespace vpr

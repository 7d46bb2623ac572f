#pragma once

#include <vector>

#include "vpr/types.hpp"

namespace vpr {

/// Exact brute-force K-nearest-neighbor search over a map in L2 distance.
/// Immutable after construction and safe to share across threads.
///
/// No approximate structure is used: every downstream uncertainty score
/// consumes the exact ranked distances, so the search must be exact too.
class RetrievalIndex {
public:
    /// Builds the index. With l2_normalize set, reference descriptors (and
    /// later every query) are scaled to unit norm first; zero vectors are
    /// left untouched.
    explicit RetrievalIndex(const VPRMap& map, bool l2_normalize = false);

    Eigen::Index size() const { return ids_.size(); }
    Eigen::Index dim() const { return features_.rows(); }
    bool l2_normalized() const { return l2_normalize_; }

    /// Per-reference squared descriptor norms (after optional normalization).
    const Eigen::VectorXd& squared_norms() const { return squared_norms_; }

    /// Exact top-k: distances nondecreasing, ties broken by ascending
    /// reference id. Distances are plain Euclidean norms, not squared.
    RankedMatches query(const std::string& query_id,
                        const Eigen::Ref<const Eigen::VectorXd>& descriptor,
                        Eigen::Index k) const;

    /// One RankedMatches per query, in input order, each identical to a
    /// standalone query() call.
    std::vector<RankedMatches> batch(const DescriptorSet& queries, Eigen::Index k) const;

private:
    bool l2_normalize_;
    std::vector<std::string> ids_;
    Eigen::MatrixXd features_; // D x N, one column per reference
    Eigen::MatrixXd poses_;    // N x pose_dim
    Eigen::VectorXd squared_norms_;
};

inline RetrievalIndex build_index(const VPRMap& map, bool l2_normalize = false) {
    return RetrievalIndex(map, l2_normalize);
}

inline RankedMatches query_knn(const RetrievalIndex& index, const std::string& query_id,
                               const Eigen::Ref<const Eigen::VectorXd>& descriptor,
                               Eigen::Index k) {
    return index.query(query_id, descriptor, k);
}

inline std::vector<RankedMatches> batch_retrieve(const RetrievalIndex& index,
                                                 const DescriptorSet& queries,
                                                 Eigen::Index k) {
    return index.batch(queries, k);
}

} // namespace vpr

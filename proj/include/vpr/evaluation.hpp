#pragma once

#include <string>
#include <vector>

#include "vpr/types.hpp"

namespace vpr {

struct PRPoint {
    double threshold = 0.0; // distinct score value; ties share one point
    double precision = 0.0;
    double recall = 0.0;
};

/// Precision-recall sweep over an acceptance threshold on uncertainty
/// scores. Queries are accepted lowest-score-first; recall is against the
/// number of correctly matched queries.
struct PRCurve {
    std::vector<PRPoint> points;
    double auc = 0.0; // average precision over tie blocks
};

/// Labels each query's best match: correct iff the Euclidean distance
/// between the query pose and the top-1 pose is at most threshold_m
/// (boundary inclusive). Output order follows `best_matches`.
std::vector<GroundTruthLabel> label_retrievals(const PoseSet& query_poses,
                                               const std::vector<RankedMatches>& best_matches,
                                               double threshold_m);

/// Builds the curve by sweeping ascending score values. Tied scores are
/// processed as one block: at each distinct value the accepted set is every
/// query scoring at or below it. AUC is the average-precision sum
/// (block_correct * block_precision) / total_correct.
PRCurve pr_curve(const std::vector<double>& scores, const std::vector<bool>& correct);

double auc_pr(const PRCurve& curve);

struct MethodAuc {
    std::string method;
    double auc = 0.0;
};

/// AUC-PR per method, sorted by AUC descending then method name. All
/// methods must cover exactly the labelled query set.
std::vector<MethodAuc> compare_methods(
    const std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>>& records,
    const std::vector<GroundTruthLabel>& labels);

} // namespace vpr

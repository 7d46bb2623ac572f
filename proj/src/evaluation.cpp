#include "vpr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace vpr {

std::vector<GroundTruthLabel> label_retrievals(const PoseSet& query_poses,
                                               const std::vector<RankedMatches>& best_matches,
                                               double threshold_m) {
    if (threshold_m <= 0.0) {
        throw Error(ErrorCode::InvalidConfig, "correctness threshold must be positive");
    }
    std::map<std::string, Eigen::Index> pose_row;
    for (Eigen::Index i = 0; i < query_poses.size(); ++i) pose_row[query_poses.ids[i]] = i;

    std::vector<GroundTruthLabel> labels;
    labels.reserve(best_matches.size());
    for (const auto& matches : best_matches) {
        if (matches.size() < 1) {
            throw Error(ErrorCode::EmptyMatches, "query '" + matches.query_id + "'");
        }
        const auto it = pose_row.find(matches.query_id);
        if (it == pose_row.end()) {
            throw Error(ErrorCode::MissingQueryPose,
                        "no ground-truth pose for query '" + matches.query_id + "'");
        }
        GroundTruthLabel label;
        label.query_id = matches.query_id;
        label.query_pose = query_poses.coords.row(it->second);
        label.matched_pose = matches.poses.row(0);
        label.threshold_m = threshold_m;
        label.correct = (label.matched_pose - label.query_pose).norm() <= threshold_m;
        labels.push_back(std::move(label));
    }
    return labels;
}

PRCurve pr_curve(const std::vector<double>& scores, const std::vector<bool>& correct) {
    if (scores.size() != correct.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(scores.size()) + " scores vs " +
                        std::to_string(correct.size()) + " labels");
    }
    if (scores.empty()) throw Error(ErrorCode::NoPositives, "no queries");
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error(ErrorCode::NonFiniteScore, "score is not finite");
    }
    const size_t total_correct =
        static_cast<size_t>(std::count(correct.begin(), correct.end(), true));
    if (total_correct == 0) {
        throw Error(ErrorCode::NoPositives, "no correctly matched query in the label set");
    }

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    PRCurve curve;
    size_t accepted = 0;
    size_t accepted_correct = 0;
    double ap_sum = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        const double value = scores[order[i]];
        size_t block_size = 0;
        size_t block_correct = 0;
        while (i < order.size() && scores[order[i]] == value) {
            ++block_size;
            if (correct[order[i]]) ++block_correct;
            ++i;
        }
        accepted += block_size;
        accepted_correct += block_correct;
        PRPoint point;
        point.threshold = value;
        point.precision = static_cast<double>(accepted_correct) / static_cast<double>(accepted);
        point.recall =
            static_cast<double>(accepted_correct) / static_cast<double>(total_correct);
        curve.points.push_back(point);
        ap_sum += static_cast<double>(block_correct) * point.precision;
    }
    curve.auc = ap_sum / static_cast<double>(total_correct);
    return curve;
}

double auc_pr(const PRCurve& curve) {
    if (curve.points.empty()) throw Error(ErrorCode::InvalidConfig, "empty curve");
    return curve.auc;
}

std::vector<MethodAuc> compare_methods(
    const std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>>& records,
    const std::vector<GroundTruthLabel>& labels) {
    std::map<std::string, bool> label_by_query;
    for (const auto& label : labels) label_by_query[label.query_id] = label.correct;
    if (label_by_query.size() != labels.size()) {
        throw Error(ErrorCode::DuplicateQueryId, "duplicate query in label set");
    }

    std::vector<MethodAuc> table;
    table.reserve(records.size());
    for (const auto& [name, recs] : records) {
        std::map<std::string, double> score_by_query;
        for (const auto& rec : recs) {
            if (!score_by_query.emplace(rec.query_id, rec.score).second) {
                throw Error(ErrorCode::DuplicateQueryId,
                            "method '" + name + "' scores query '" + rec.query_id + "' twice");
            }
        }
        if (score_by_query.size() != label_by_query.size()) {
            throw Error(ErrorCode::QueryCoverageMismatch,
                        "method '" + name + "' covers " +
                            std::to_string(score_by_query.size()) + " of " +
                            std::to_string(label_by_query.size()) + " queries");
        }
        std::vector<double> scores;
        std::vector<bool> correct;
        scores.reserve(labels.size());
        correct.reserve(labels.size());
        for (const auto& label : labels) {
            const auto it = score_by_query.find(label.query_id);
            if (it == score_by_query.end()) {
                throw Error(ErrorCode::QueryCoverageMismatch,
                            "method '" + name + "' is missing query '" + label.query_id + "'");
            }
            scores.push_back(it->second);
            correct.push_back(label.correct);
        }
        table.push_back({name, pr_curve(scores, correct).auc});
    }

    std::sort(table.begin(), table.end(), [](const MethodAuc& a, const MethodAuc& b) {
        if (a.auc != b.auc) return a.auc > b.auc;
        return a.method < b.method;
    });
    return table;
}

} // namespace vpr

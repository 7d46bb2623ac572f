#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vpr/evaluation.hpp"
#include "vpr/synthetic.hpp"

using namespace vpr;

namespace {

RankedMatches best_match(const std::string& query_id, Eigen::Vector2d pose) {
    RankedMatches m;
    m.query_id = query_id;
    m.reference_ids = {"ref"};
    m.distances = Eigen::VectorXd::Constant(1, 0.5);
    m.poses.resize(1, 2);
    m.poses.row(0) = pose.transpose();
    return m;
}

PoseSet query_at_origin(const std::string& id) {
    PoseSet set;
    set.ids = {id};
    set.coords = Eigen::MatrixXd::Zero(1, 2);
    return set;
}

struct RandomInstance {
    std::vector<double> scores;
    std::vector<bool> correct;
};

RandomInstance random_instance(std::mt19937& rng, int max_n) {
    std::uniform_int_distribution<int> size_dist(1, max_n);
    std::uniform_real_distribution<double> score_dist(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> duplicate(0, 3);
    RandomInstance inst;
    const int n = size_dist(rng);
    for (int i = 0; i < n; ++i) {
        // quantized scores force plenty of exact ties
        double s = score_dist(rng);
        if (duplicate(rng) == 0) s = std::round(s * 8.0) / 8.0;
        inst.scores.push_back(s);
        inst.correct.push_back(coin(rng) == 1);
    }
    if (std::none_of(inst.correct.begin(), inst.correct.end(), [](bool b) { return b; })) {
        inst.correct[static_cast<size_t>(rng() % inst.correct.size())] = true;
    }
    return inst;
}

bool curves_identical(const PRCurve& a, const PRCurve& b) {
    if (a.points.size() != b.points.size() || a.auc != b.auc) return false;
    for (size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].threshold != b.points[i].threshold) return false;
        if (a.points[i].precision != b.points[i].precision) return false;
        if (a.points[i].recall != b.points[i].recall) return false;
    }
    return true;
}

} // namespace

TEST_CASE("labels respect the inclusive distance boundary") {
    const double threshold = 25.0;
    auto labels = label_retrievals(query_at_origin("q"), {best_match("q", {0, 24})}, threshold);
    CHECK(labels[0].correct);
    labels = label_retrievals(query_at_origin("q"), {best_match("q", {0, 26})}, threshold);
    CHECK_FALSE(labels[0].correct);
    labels = label_retrievals(query_at_origin("q"), {best_match("q", {0, 25})}, threshold);
    CHECK(labels[0].correct);
}

TEST_CASE("labelling requires a pose for every query") {
    try {
        label_retrievals(query_at_origin("other"), {best_match("q", {0, 0})}, 25.0);
        FAIL("expected MissingQueryPose");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingQueryPose);
    }
}

TEST_CASE("perfect separator reaches AUC 1") {
    const PRCurve curve = pr_curve({0.1, 0.2}, {true, false});
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].precision == 1.0);
    CHECK(curve.points[0].recall == 1.0);
    CHECK(curve.points[1].precision == 0.5);
    CHECK(curve.points[1].recall == 1.0);
    CHECK(curve.auc == 1.0);
}

TEST_CASE("inverted separator on a balanced pair scores one half") {
    const PRCurve curve = pr_curve({0.2, 0.1}, {true, false});
    CHECK(curve.auc == 0.5);
    CHECK(curves_identical(curve, oracle_pr({0.2, 0.1}, {true, false})));
}

TEST_CASE("all-correct labels give AUC 1 regardless of scores") {
    CHECK(pr_curve({0.9, 0.1, 0.5}, {true, true, true}).auc == 1.0);
}

TEST_CASE("single correct query scores 1") {
    CHECK(pr_curve({0.42}, {true}).auc == 1.0);
}

TEST_CASE("degenerate inputs raise structured errors") {
    try {
        pr_curve({0.1, 0.2}, {false, false});
        FAIL("expected NoPositives");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoPositives);
    }
    try {
        pr_curve({std::nan(""), 0.2}, {true, false});
        FAIL("expected NonFiniteScore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteScore);
    }
}

TEST_CASE("curve and AUC equal the exhaustive oracle exactly") {
    std::mt19937 rng(51);
    for (int trial = 0; trial < 300; ++trial) {
        const RandomInstance inst = random_instance(rng, 200);
        const PRCurve mine = pr_curve(inst.scores, inst.correct);
        const PRCurve oracle = oracle_pr(inst.scores, inst.correct);
        CHECK(curves_identical(mine, oracle));
        CHECK(auc_pr(mine) == oracle.auc);
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    std::mt19937 rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        const RandomInstance inst = random_instance(rng, 120);
        const double base = pr_curve(inst.scores, inst.correct).auc;
        std::vector<double> affine, cubic;
        for (double s : inst.scores) {
            affine.push_back(3.0 * s + 2.0);
            cubic.push_back(s * s * s);
        }
        CHECK(pr_curve(affine, inst.correct).auc == base);
        CHECK(pr_curve(cubic, inst.correct).auc == base);
    }
}

TEST_CASE("flipping labels and negating scores agrees with the oracle") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        RandomInstance inst = random_instance(rng, 80);
        std::vector<double> negated;
        std::vector<bool> flipped;
        for (size_t i = 0; i < inst.scores.size(); ++i) {
            negated.push_back(-inst.scores[i]);
            flipped.push_back(!inst.correct[i]);
        }
        if (std::none_of(flipped.begin(), flipped.end(), [](bool b) { return b; })) continue;
        CHECK(pr_curve(negated, flipped).auc == oracle_pr(negated, flipped).auc);
    }
}

TEST_CASE("tied scores make the curve permutation invariant") {
    std::mt19937 rng(54);
    for (int trial = 0; trial < 50; ++trial) {
        RandomInstance inst = random_instance(rng, 60);
        const PRCurve base = pr_curve(inst.scores, inst.correct);

        std::vector<size_t> perm(inst.scores.size());
        std::iota(perm.begin(), perm.end(), size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> scores;
        std::vector<bool> correct;
        for (size_t i : perm) {
            scores.push_back(inst.scores[i]);
            correct.push_back(inst.correct[i]);
        }
        CHECK(curves_identical(base, pr_curve(scores, correct)));
    }
}

namespace {

std::vector<UncertaintyRecord> records_for(const std::string& channel,
                                           const std::vector<GroundTruthLabel>& labels,
                                           const std::vector<double>& scores) {
    std::vector<UncertaintyRecord> out;
    for (size_t i = 0; i < labels.size(); ++i) {
        UncertaintyRecord rec;
        rec.query_id = labels[i].query_id;
        rec.channel = channel;
        rec.score = scores[i];
        out.push_back(rec);
    }
    return out;
}

} // namespace

TEST_CASE("compare_methods ranks a perfect method first") {
    std::vector<GroundTruthLabel> labels;
    std::mt19937 rng(55);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 40; ++i) {
        GroundTruthLabel label;
        label.query_id = "q" + std::to_string(i);
        label.correct = coin(rng) == 1;
        labels.push_back(label);
    }
    labels[0].correct = true;
    labels[1].correct = false;

    std::vector<double> perfect, noise;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& label : labels) {
        perfect.push_back(label.correct ? 0.0 + unif(rng) * 0.4 : 0.6 + unif(rng) * 0.4);
        noise.push_back(unif(rng));
    }

    const auto table = compare_methods({{"perfect", records_for("perfect", labels, perfect)},
                                        {"noise", records_for("noise", labels, noise)}},
                                       labels);
    REQUIRE(table.size() == 2);
    CHECK(table[0].method == "perfect");
    CHECK(table[0].auc == 1.0);
}

TEST_CASE("identical score lists produce identical AUCs, ties sorted by name") {
    std::vector<GroundTruthLabel> labels(3);
    labels[0] = {"a", true, {}, {}, 25.0};
    labels[1] = {"b", false, {}, {}, 25.0};
    labels[2] = {"c", true, {}, {}, 25.0};
    const std::vector<double> scores{0.1, 0.9, 0.2};
    const auto table = compare_methods({{"zeta", records_for("zeta", labels, scores)},
                                        {"alpha", records_for("alpha", labels, scores)}},
                                       labels);
    REQUIRE(table.size() == 2);
    CHECK(table[0].auc == table[1].auc);
    CHECK(table[0].method == "alpha");
    CHECK(table[1].method == "zeta");
}

TEST_CASE("a method missing one query is a coverage mismatch") {
    std::vector<GroundTruthLabel> labels(2);
    labels[0] = {"a", true, {}, {}, 25.0};
    labels[1] = {"b", false, {}, {}, 25.0};
    auto records = records_for("m", labels, {0.1, 0.2});
    records.pop_back();
    try {
        compare_methods({{"m", records}}, labels);
        FAIL("expected QueryCoverageMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::QueryCoverageMismatch);
    }
}

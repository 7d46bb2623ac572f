#include "vpr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vpr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Method method_from_string(const std::string& s) {
    if (s == "l2") return Method::L2;
    if (s == "pa") return Method::PA;
    if (s == "sue") return Method::SUE;
    if (s == "sue_dc") return Method::SUE_DC;
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + s + "'");
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).string();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
        m = 0.5 * (m + values[mid - 1]);
    }
    return m;
}

} // namespace

RunManifest manifest_from_json(const std::string& json_text, const std::string& base_dir) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
    try {
        RunManifest m;
        m.reference_descriptors = resolve(base_dir, j.at("reference_descriptors").get<std::string>());
        m.reference_poses = resolve(base_dir, j.at("reference_poses").get<std::string>());
        m.query_descriptors = resolve(base_dir, j.at("query_descriptors").get<std::string>());
        m.query_poses = resolve(base_dir, j.at("query_poses").get<std::string>());
        m.l2_normalize = j.value("l2_normalize", false);
        m.correctness_threshold_m = j.value("correctness_threshold_m", 25.0);
        m.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
        m.seed = j.value("seed", std::uint64_t{0});

        if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
            throw Error(ErrorCode::InvalidConfig, "manifest needs a nonempty methods list");
        }
        for (const auto& jm : j.at("methods")) {
            MethodSpec spec;
            spec.method = method_from_string(jm.at("method").get<std::string>());
            spec.name = jm.value("name", method_name(spec.method));
            spec.sue.alpha = jm.value("alpha", 350.0);
            spec.sue.k_neighbors = jm.value("k", 10);
            const std::string weighting = jm.value("weighting", std::string("exponential"));
            if (weighting == "exponential") {
                spec.sue.weighting = Weighting::Exponential;
            } else if (weighting == "uniform") {
                spec.sue.weighting = Weighting::Uniform;
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown weighting '" + weighting + "'");
            }
            spec.density_k = jm.value("density_k", 1);
            m.methods.push_back(std::move(spec));
        }
        if (j.contains("external_scores")) {
            for (const auto& je : j.at("external_scores")) {
                ExternalChannelSpec spec;
                spec.name = je.at("name").get<std::string>();
                spec.path = resolve(base_dir, je.at("path").get<std::string>());
                const std::string polarity = je.value("polarity", std::string("uncertainty"));
                if (polarity == "uncertainty") {
                    spec.polarity = ScorePolarity::Uncertainty;
                } else if (polarity == "confidence") {
                    spec.polarity = ScorePolarity::Confidence;
                } else {
                    throw Error(ErrorCode::InvalidConfig, "unknown polarity '" + polarity + "'");
                }
                m.external_scores.push_back(std::move(spec));
            }
        }

        std::set<std::string> names;
        for (const auto& spec : m.methods) {
            if (!names.insert(spec.name).second) {
                throw Error(ErrorCode::InvalidConfig, "duplicate channel name '" + spec.name + "'");
            }
        }
        for (const auto& spec : m.external_scores) {
            if (!names.insert(spec.name).second) {
                throw Error(ErrorCode::InvalidConfig, "duplicate channel name '" + spec.name + "'");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("manifest: ") + e.what());
    }
}

RunManifest manifest_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return manifest_from_json(os.str(), fs::path(path).parent_path().string());
}

std::string manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["reference_descriptors"] = m.reference_descriptors;
    j["reference_poses"] = m.reference_poses;
    j["query_descriptors"] = m.query_descriptors;
    j["query_poses"] = m.query_poses;
    j["l2_normalize"] = m.l2_normalize;
    j["correctness_threshold_m"] = m.correctness_threshold_m;
    j["methods"] = ordered_json::array();
    for (const auto& spec : m.methods) {
        ordered_json jm;
        jm["name"] = spec.name;
        jm["method"] = method_name(spec.method);
        jm["alpha"] = spec.sue.alpha;
        jm["k"] = spec.sue.k_neighbors;
        jm["weighting"] = spec.sue.weighting == Weighting::Uniform ? "uniform" : "exponential";
        jm["density_k"] = spec.density_k;
        j["methods"].push_back(jm);
    }
    j["external_scores"] = ordered_json::array();
    for (const auto& spec : m.external_scores) {
        ordered_json je;
        je["name"] = spec.name;
        je["path"] = spec.path;
        je["polarity"] = spec.polarity == ScorePolarity::Confidence ? "confidence" : "uncertainty";
        j["external_scores"].push_back(je);
    }
    j["output_dir"] = m.output_dir;
    j["seed"] = m.seed;
    return j.dump(2) + "\n";
}

namespace {

// Retrieval depth a method consumes; -1 is resolved to the map size.
Eigen::Index needed_k(const MethodSpec& spec, Eigen::Index n_refs) {
    switch (spec.method) {
        case Method::L2: return 1;
        case Method::PA: return 2;
        case Method::SUE:
        case Method::SUE_DC: {
            const int k = spec.sue.k_neighbors;
            if (k == -1) return n_refs;
            if (k < 1) {
                throw Error(ErrorCode::InvalidConfig,
                            "method '" + spec.name + "' has k=" + std::to_string(k));
            }
            if (k > n_refs) {
                throw Error(ErrorCode::KTooLarge,
                            "method '" + spec.name + "' wants k=" + std::to_string(k) +
                                " of " + std::to_string(n_refs) + " references");
            }
            return k;
        }
        case Method::External: break;
    }
    throw Error(ErrorCode::InvalidConfig, "method '" + spec.name + "' cannot be computed");
}

} // namespace

EvaluationResult evaluate_data(
    const VPRMap& map, const DescriptorSet& query_descriptors, const PoseSet& query_poses,
    const std::vector<MethodSpec>& methods,
    const std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>>& external_records,
    bool l2_normalize, double correctness_threshold_m) {
    if (methods.empty() && external_records.empty()) {
        throw Error(ErrorCode::InvalidConfig, "nothing to evaluate");
    }
    if (query_descriptors.ids != query_poses.ids) {
        throw Error(ErrorCode::IdMismatch, "query descriptor and pose ids disagree");
    }

    Eigen::Index retrieval_k = 1;
    for (const auto& spec : methods) {
        retrieval_k = std::max(retrieval_k, needed_k(spec, map.size()));
    }

    const RetrievalIndex index(map, l2_normalize);
    const auto matches = index.batch(query_descriptors, retrieval_k);

    EvaluationResult result;
    result.labels = label_retrievals(query_poses, matches, correctness_threshold_m);

    // Pose densities, one per distinct smoothing k actually used.
    std::map<int, PoseDensity> densities;
    for (const auto& spec : methods) {
        if (spec.method == Method::SUE_DC && !densities.count(spec.density_k)) {
            densities.emplace(spec.density_k, pose_density(map.poses, spec.density_k));
        }
    }

    using clock = std::chrono::steady_clock;
    for (const auto& spec : methods) {
        const Eigen::Index k = needed_k(spec, map.size());
        std::vector<UncertaintyRecord> records;
        records.reserve(matches.size());
        std::vector<double> times_ms;
        times_ms.reserve(matches.size());
        for (const auto& match : matches) {
            const RankedMatches sliced =
                k == match.size() ? match : match.head(k);
            const auto start = clock::now();
            double score = 0.0;
            switch (spec.method) {
                case Method::L2: score = score_l2(sliced); break;
                case Method::PA: score = score_pa(sliced); break;
                case Method::SUE: score = sue_score(sliced, spec.sue).trace; break;
                case Method::SUE_DC:
                    score = sue_score_density_compensated(sliced, densities.at(spec.density_k),
                                                          spec.sue)
                                .trace;
                    break;
                case Method::External:
                    throw Error(ErrorCode::InvalidConfig, "external channels come from files");
            }
            const auto stop = clock::now();
            times_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
            UncertaintyRecord rec;
            rec.query_id = match.query_id;
            rec.method = spec.method;
            rec.channel = spec.name;
            rec.score = score;
            records.push_back(std::move(rec));
        }
        result.records.emplace_back(spec.name, std::move(records));
        result.timings.push_back({spec.name, median_of(std::move(times_ms))});
    }
    for (const auto& [name, records] : external_records) {
        result.records.emplace_back(name, records);
    }

    result.auc_table = compare_methods(result.records, result.labels);
    for (const auto& [name, records] : result.records) {
        std::map<std::string, double> by_query;
        for (const auto& rec : records) by_query[rec.query_id] = rec.score;
        std::vector<double> scores;
        std::vector<bool> correct;
        for (const auto& label : result.labels) {
            scores.push_back(by_query.at(label.query_id));
            correct.push_back(label.correct);
        }
        result.curves.emplace(name, pr_curve(scores, correct));
    }
    return result;
}

EvaluationResult run_evaluation(const RunManifest& manifest) {
    const VPRMap map = validate_map(load_descriptors(manifest.reference_descriptors),
                                    load_poses(manifest.reference_poses));
    const DescriptorSet query_descriptors = load_descriptors(manifest.query_descriptors);
    const PoseSet query_poses = load_poses(manifest.query_poses);

    std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>> external;
    for (const auto& spec : manifest.external_scores) {
        external.emplace_back(spec.name,
                              load_external_scores(spec.path, spec.name, spec.polarity));
    }

    EvaluationResult result =
        evaluate_data(map, query_descriptors, query_poses, manifest.methods, external,
                      manifest.l2_normalize, manifest.correctness_threshold_m);
    write_evaluation_outputs(manifest, result);
    return result;
}

void write_evaluation_outputs(const RunManifest& manifest, const EvaluationResult& result) {
    const fs::path dir(manifest.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

    write_text_file((dir / "run_manifest.json").string(), manifest_to_json(manifest));

    std::string auc_csv = "method,auc_pr\n";
    ordered_json auc_json = ordered_json::array();
    for (const auto& row : result.auc_table) {
        auc_csv += row.method + "," + fmt(row.auc) + "\n";
        ordered_json jr;
        jr["method"] = row.method;
        jr["auc_pr"] = row.auc;
        auc_json.push_back(jr);
    }
    write_text_file((dir / "auc_report.csv").string(), auc_csv);
    write_text_file((dir / "auc_report.json").string(), auc_json.dump(2) + "\n");

    for (const auto& [name, curve] : result.curves) {
        std::string csv = "threshold,precision,recall\n";
        for (const auto& point : curve.points) {
            csv += fmt(point.threshold) + "," + fmt(point.precision) + "," +
                   fmt(point.recall) + "\n";
        }
        write_text_file((dir / ("pr_" + name + ".csv")).string(), csv);
    }

    std::string scores_csv = "query_id,correct";
    for (const auto& [name, records] : result.records) scores_csv += "," + name;
    scores_csv += "\n";
    for (size_t i = 0; i < result.labels.size(); ++i) {
        scores_csv += result.labels[i].query_id;
        scores_csv += result.labels[i].correct ? ",1" : ",0";
        for (const auto& [name, records] : result.records) {
            scores_csv += "," + fmt(records[i].score);
        }
        scores_csv += "\n";
    }
    write_text_file((dir / "scores.csv").string(), scores_csv);

    std::string timing_csv = "method,median_ms\n";
    for (const auto& timing : result.timings) {
        timing_csv += timing.name + "," + fmt(timing.median_ms) + "\n";
    }
    write_text_file((dir / "timing.csv").string(), timing_csv);
}

namespace {

std::vector<double> channel_scores(const EvaluationResult& result, const std::string& name) {
    for (const auto& [channel, records] : result.records) {
        if (channel != name) continue;
        std::map<std::string, double> by_query;
        for (const auto& rec : records) by_query[rec.query_id] = rec.score;
        std::vector<double> scores;
        scores.reserve(result.labels.size());
        for (const auto& label : result.labels) {
            const auto it = by_query.find(label.query_id);
            if (it == by_query.end()) {
                throw Error(ErrorCode::QueryCoverageMismatch,
                            "channel '" + name + "' is missing query '" + label.query_id + "'");
            }
            scores.push_back(it->second);
        }
        return scores;
    }
    throw Error(ErrorCode::InvalidConfig, "no channel named '" + name + "'");
}

std::vector<int> svm_labels(const EvaluationResult& result) {
    std::vector<int> labels;
    labels.reserve(result.labels.size());
    for (const auto& label : result.labels) labels.push_back(label.correct ? 1 : -1);
    return labels;
}

struct TrainedChannel {
    SVMModel model;
    MinMaxScaler scaler;
};

TrainedChannel train_on(const std::vector<Eigen::Vector2d>& raw, const std::vector<int>& labels,
                        const SvmConfig& svm) {
    TrainedChannel out;
    out.scaler = fit_scaler(raw);
    std::vector<Eigen::Vector2d> scaled;
    scaled.reserve(raw.size());
    for (const auto& x : raw) scaled.push_back(out.scaler.transform(x));
    out.model = train_linear_svm(scaled, labels, svm);
    return out;
}

double apply_accuracy(const TrainedChannel& trained, const std::vector<Eigen::Vector2d>& raw,
                      const std::vector<int>& labels, std::vector<Decision>* decisions_out) {
    std::vector<Decision> decisions;
    decisions.reserve(raw.size());
    for (const auto& x : raw) {
        decisions.push_back(svm_decide(trained.model, trained.scaler.transform(x)));
    }
    const double accuracy = classification_accuracy(decisions, labels);
    if (decisions_out) *decisions_out = std::move(decisions);
    return accuracy;
}

std::vector<Eigen::Vector2d> pair_features(const std::vector<double>& a,
                                           const std::vector<double>& b) {
    std::vector<Eigen::Vector2d> out;
    out.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i], b[i]);
    return out;
}

} // namespace

FuseResult fuse_channels(const EvaluationResult& train, const EvaluationResult& test,
                         const FuseOptions& options) {
    const auto train_unc = channel_scores(train, options.uncertainty_channel);
    const auto train_conf = channel_scores(train, options.confidence_channel);
    const auto test_unc = channel_scores(test, options.uncertainty_channel);
    const auto test_conf = channel_scores(test, options.confidence_channel);
    const auto train_labels = svm_labels(train);
    const auto test_labels = svm_labels(test);

    const std::vector<double> zeros_train(train_unc.size(), 0.0);
    const std::vector<double> zeros_test(test_unc.size(), 0.0);

    FuseResult result;
    const auto fused = train_on(pair_features(train_unc, train_conf), train_labels, options.svm);
    result.model = fused.model;
    result.scaler = fused.scaler;
    result.fused_accuracy = apply_accuracy(fused, pair_features(test_unc, test_conf),
                                           test_labels, &result.decisions);

    const auto unc_only =
        train_on(pair_features(train_unc, zeros_train), train_labels, options.svm);
    result.uncertainty_only_accuracy =
        apply_accuracy(unc_only, pair_features(test_unc, zeros_test), test_labels, nullptr);

    const auto conf_only =
        train_on(pair_features(train_conf, zeros_train), train_labels, options.svm);
    result.confidence_only_accuracy =
        apply_accuracy(conf_only, pair_features(test_conf, zeros_test), test_labels, nullptr);
    return result;
}

void write_fusion_outputs(const std::string& output_dir, const FuseOptions& options,
                          const EvaluationResult& test, const FuseResult& result) {
    const fs::path dir(output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

    save_model((dir / "model.txt").string(), result.model, result.scaler);

    std::string accuracy_csv = "features,accuracy\n";
    accuracy_csv += options.uncertainty_channel + "+" + options.confidence_channel + "," +
                    fmt(result.fused_accuracy) + "\n";
    accuracy_csv += options.uncertainty_channel + "," + fmt(result.uncertainty_only_accuracy) +
                    "\n";
    accuracy_csv += options.confidence_channel + "," + fmt(result.confidence_only_accuracy) +
                    "\n";
    write_text_file((dir / "accuracy.csv").string(), accuracy_csv);

    const auto test_unc = channel_scores(test, options.uncertainty_channel);
    const auto test_conf = channel_scores(test, options.confidence_channel);
    std::string decisions_csv = "query_id," + options.uncertainty_channel + "," +
                                options.confidence_channel + ",decision,correct\n";
    for (size_t i = 0; i < test.labels.size(); ++i) {
        decisions_csv += test.labels[i].query_id;
        decisions_csv += "," + fmt(test_unc[i]) + "," + fmt(test_conf[i]);
        decisions_csv +=
            result.decisions[i] == Decision::Accept ? ",accept" : ",reject";
        decisions_csv += test.labels[i].correct ? ",1" : ",0";
        decisions_csv += "\n";
    }
    write_text_file((dir / "decisions.csv").string(), decisions_csv);
}

std::vector<SweepRow> sweep_grid(const VPRMap& map, const DescriptorSet& query_descriptors,
                                 const PoseSet& query_poses, const std::vector<int>& k_grid,
                                 const std::vector<double>& alpha_grid, bool l2_normalize,
                                 double correctness_threshold_m) {
    if (k_grid.empty() || alpha_grid.empty()) {
        throw Error(ErrorCode::InvalidConfig, "sweep grids must be nonempty");
    }
    Eigen::Index max_k = 1;
    for (int k : k_grid) {
        if (k < 1 || k > map.size()) {
            throw Error(ErrorCode::KTooLarge, "sweep k=" + std::to_string(k) + " with " +
                                                  std::to_string(map.size()) + " references");
        }
        max_k = std::max<Eigen::Index>(max_k, k);
    }

    const RetrievalIndex index(map, l2_normalize);
    const auto matches = index.batch(query_descriptors, max_k);
    const auto labels = label_retrievals(query_poses, matches, correctness_threshold_m);
    std::vector<bool> correct;
    correct.reserve(labels.size());
    for (const auto& label : labels) correct.push_back(label.correct);

    std::vector<SweepRow> rows;
    for (int k : k_grid) {
        for (double alpha : alpha_grid) {
            SueConfig config;
            config.alpha = alpha;
            config.k_neighbors = k;
            config.weighting = Weighting::Exponential;
            std::vector<double> scores;
            scores.reserve(matches.size());
            for (const auto& match : matches) {
                const RankedMatches sliced =
                    static_cast<Eigen::Index>(k) == match.size() ? match : match.head(k);
                scores.push_back(sue_score(sliced, config).trace);
            }
            rows.push_back({k, alpha, pr_curve(scores, correct).auc});
        }
    }
    return rows;
}

void write_sweep_outputs(const std::string& output_dir, const std::vector<SweepRow>& rows) {
    const fs::path dir(output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
    std::string csv = "k,alpha,auc_pr\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.k) + "," + fmt(row.alpha) + "," + fmt(row.auc) + "\n";
    }
    write_text_file((dir / "sweep.csv").string(), csv);
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidPartition:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::BadMagic:
        case ErrorCode::TruncatedPayload:
        case ErrorCode::ParseError:
        case ErrorCode::MixedDimensions:
        case ErrorCode::DuplicateQueryId:
            return 3;
        default:
            return 4;
    }
}

} // namespace vpr

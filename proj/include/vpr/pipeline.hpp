#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpr/evaluation.hpp"
#include "vpr/fusion.hpp"
#include "vpr/io.hpp"
#include "vpr/retrieval.hpp"
#include "vpr/types.hpp"
#include "vpr/uncertainty.hpp"

namespace vpr {

/// One scoring method row in a run. `sue.k_neighbors` may be -1 to mean
/// "all references", resolved once the map size is known.
struct MethodSpec {
    std::string name;
    Method method = Method::SUE;
    SueConfig sue;
    int density_k = 1; // pose-density smoothing for sue_dc
};

struct ExternalChannelSpec {
    std::string name;
    std::string path;
    ScorePolarity polarity = ScorePolarity::Uncertainty;
};

/// Everything needed to rerun an evaluation. Serialized next to the outputs
/// so a result directory carries its own provenance; identical manifests and
/// inputs produce byte-identical outputs (timing file aside).
struct RunManifest {
    std::string reference_descriptors;
    std::string reference_poses;
    std::string query_descriptors;
    std::string query_poses;
    bool l2_normalize = false;
    double correctness_threshold_m = 25.0;
    std::vector<MethodSpec> methods;
    std::vector<ExternalChannelSpec> external_scores;
    std::string output_dir;
    std::uint64_t seed = 0;
};

/// Paths inside the manifest are resolved against the manifest's directory.
RunManifest manifest_from_json_file(const std::string& path);
RunManifest manifest_from_json(const std::string& json_text, const std::string& base_dir);
std::string manifest_to_json(const RunManifest& manifest);

struct MethodTiming {
    std::string name;
    double median_ms = 0.0; // median per-query scoring time
};

struct EvaluationResult {
    std::vector<GroundTruthLabel> labels; // query order
    // per-channel scores aligned with `labels` (methods first, then externals)
    std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>> records;
    std::vector<MethodAuc> auc_table;
    std::map<std::string, PRCurve> curves;
    std::vector<MethodTiming> timings;
};

/// In-memory evaluation: retrieval at the maximum depth any method needs,
/// ground-truth labelling, per-method scoring (timed), PR curves and the
/// ranked AUC table.
EvaluationResult evaluate_data(const VPRMap& map, const DescriptorSet& query_descriptors,
                               const PoseSet& query_poses,
                               const std::vector<MethodSpec>& methods,
                               const std::vector<std::pair<std::string, std::vector<UncertaintyRecord>>>&
                                   external_records,
                               bool l2_normalize, double correctness_threshold_m);

/// File-driven evaluation per the manifest; returns the result after
/// writing all report files into the manifest's output directory.
EvaluationResult run_evaluation(const RunManifest& manifest);

void write_evaluation_outputs(const RunManifest& manifest, const EvaluationResult& result);

struct FuseOptions {
    std::string uncertainty_channel; // e.g. "sue"
    std::string confidence_channel;  // e.g. "gv"
    SvmConfig svm;
};

struct FuseResult {
    SVMModel model;
    MinMaxScaler scaler;
    double fused_accuracy = 0.0;
    double uncertainty_only_accuracy = 0.0;
    double confidence_only_accuracy = 0.0;
    std::vector<Decision> decisions; // test query order
};

/// Fits the scaler and SVM on the train result's channels, applies them to
/// the test result. Single-channel accuracies train the same SVM on that
/// channel alone (second feature held at zero) so every threshold is
/// SVM-selected.
FuseResult fuse_channels(const EvaluationResult& train, const EvaluationResult& test,
                         const FuseOptions& options);

void write_fusion_outputs(const std::string& output_dir, const FuseOptions& options,
                          const EvaluationResult& test, const FuseResult& result);

struct SweepRow {
    int k = 0;
    double alpha = 0.0;
    double auc = 0.0;
};

/// AUC-PR of the spatial-spread score over a (k, alpha) grid. Retrieval runs
/// once at the largest k.
std::vector<SweepRow> sweep_grid(const VPRMap& map, const DescriptorSet& query_descriptors,
                                 const PoseSet& query_poses, const std::vector<int>& k_grid,
                                 const std::vector<double>& alpha_grid, bool l2_normalize,
                                 double correctness_threshold_m);

void write_sweep_outputs(const std::string& output_dir, const std::vector<SweepRow>& rows);

/// Exit-code classes for the CLI: 0 success, 2 configuration, 3 file
/// parsing, 4 data consistency, 1 anything else.
int exit_code_for(ErrorCode code);

} // namespace vpr

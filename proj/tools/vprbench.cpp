#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vpr/io.hpp"
#include "vpr/pipeline.hpp"
#include "vpr/synthetic.hpp"

namespace {

namespace fs = std::filesystem;

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    const vpr::WorldConfig config = vpr::world_config_from_json_file(config_path);
    const vpr::SyntheticWorld world = vpr::generate_world(config);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw vpr::Error(vpr::ErrorCode::IoError, "cannot create " + out_dir);

    vpr::save_descriptors((fs::path(out_dir) / "refs.desc.bin").string(), world.map.descriptors);
    vpr::save_poses((fs::path(out_dir) / "refs.poses.csv").string(), world.map.poses);
    vpr::save_descriptors((fs::path(out_dir) / "queries.desc.bin").string(),
                          world.query_descriptors);
    vpr::save_poses((fs::path(out_dir) / "queries.poses.csv").string(), world.query_poses);

    std::cout << "wrote " << world.map.size() << " references and "
              << world.query_descriptors.size() << " queries to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& manifest_path) {
    const vpr::RunManifest manifest = vpr::manifest_from_json_file(manifest_path);
    const vpr::EvaluationResult result = vpr::run_evaluation(manifest);
    for (const auto& row : result.auc_table) {
        std::printf("%-16s auc_pr=%.6f\n", row.method.c_str(), row.auc);
    }
    std::cout << "reports written to " << manifest.output_dir << "\n";
    return 0;
}

int cmd_fuse(const std::string& train_path, const std::string& test_path,
             const vpr::FuseOptions& options, const std::string& out_dir) {
    const vpr::RunManifest train_manifest = vpr::manifest_from_json_file(train_path);
    const vpr::RunManifest test_manifest = vpr::manifest_from_json_file(test_path);
    const vpr::EvaluationResult train = vpr::run_evaluation(train_manifest);
    const vpr::EvaluationResult test = vpr::run_evaluation(test_manifest);

    const vpr::FuseResult result = vpr::fuse_channels(train, test, options);
    vpr::write_fusion_outputs(out_dir, options, test, result);

    std::printf("%s+%s accuracy=%.6f\n", options.uncertainty_channel.c_str(),
                options.confidence_channel.c_str(), result.fused_accuracy);
    std::printf("%-16s accuracy=%.6f\n", options.uncertainty_channel.c_str(),
                result.uncertainty_only_accuracy);
    std::printf("%-16s accuracy=%.6f\n", options.confidence_channel.c_str(),
                result.confidence_only_accuracy);
    std::cout << "fusion outputs written to " << out_dir << "\n";
    return 0;
}

int cmd_sweep(const std::string& manifest_path, const std::vector<int>& k_grid,
              const std::vector<double>& alpha_grid) {
    const vpr::RunManifest manifest = vpr::manifest_from_json_file(manifest_path);
    const vpr::VPRMap map = vpr::validate_map(
        vpr::load_descriptors(manifest.reference_descriptors),
        vpr::load_poses(manifest.reference_poses));
    const vpr::DescriptorSet query_descriptors =
        vpr::load_descriptors(manifest.query_descriptors);
    const vpr::PoseSet query_poses = vpr::load_poses(manifest.query_poses);

    const auto rows = vpr::sweep_grid(map, query_descriptors, query_poses, k_grid, alpha_grid,
                                      manifest.l2_normalize, manifest.correctness_threshold_m);
    vpr::write_sweep_outputs(manifest.output_dir, rows);

    // Plateau check at the reference decay value: deeper retrieval should
    // not hurt once the low-rank neighbors stop contributing.
    const auto find_auc = [&](int k, double alpha) -> const vpr::SweepRow* {
        for (const auto& row : rows) {
            if (row.k == k && row.alpha == alpha) return &row;
        }
        return nullptr;
    };
    const vpr::SweepRow* deep = find_auc(10, 350.0);
    const vpr::SweepRow* shallow = find_auc(1, 350.0);
    if (deep && shallow) {
        std::printf("plateau check: auc(k=10,alpha=350)=%.6f %s auc(k=1,alpha=350)=%.6f\n",
                    deep->auc, deep->auc >= shallow->auc ? ">=" : "<", shallow->auc);
    }
    std::cout << "sweep written to " << manifest.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark tooling for image-matching uncertainty estimation over "
                 "precomputed descriptors and reference poses"};
    app.require_subcommand(1);

    std::string synth_config, synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a world config");
    synth->add_option("--config", synth_config, "world config JSON")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    std::string eval_manifest;
    auto* evaluate = app.add_subcommand("evaluate", "Score methods and write PR/AUC reports");
    evaluate->add_option("--manifest", eval_manifest, "run manifest JSON")->required();

    std::string fuse_train, fuse_test, fuse_out;
    vpr::FuseOptions fuse_options;
    fuse_options.uncertainty_channel = "sue";
    fuse_options.confidence_channel = "gv";
    auto* fuse = app.add_subcommand("fuse", "Train an accept/reject classifier on two channels");
    fuse->add_option("--train", fuse_train, "training run manifest")->required();
    fuse->add_option("--test", fuse_test, "evaluation run manifest")->required();
    fuse->add_option("--uncertainty", fuse_options.uncertainty_channel,
                     "uncertainty channel name");
    fuse->add_option("--confidence", fuse_options.confidence_channel,
                     "confidence channel name");
    fuse->add_option("--out", fuse_out, "output directory")->required();
    fuse->add_option("--learning-rate", fuse_options.svm.learning_rate, "SGD base step");
    fuse->add_option("--l1-lambda", fuse_options.svm.l1_lambda, "L1 penalty strength");
    fuse->add_option("--epochs", fuse_options.svm.max_iters, "training passes");
    fuse->add_option("--seed", fuse_options.svm.seed, "shuffle seed");

    std::string sweep_manifest;
    std::vector<int> k_grid{1, 2, 5, 10, 20};
    std::vector<double> alpha_grid{0.0, 50.0, 200.0, 350.0, 500.0};
    auto* sweep = app.add_subcommand("sweep", "AUC over a (k, alpha) grid");
    sweep->add_option("--manifest", sweep_manifest, "run manifest JSON")->required();
    sweep->add_option("--k-grid", k_grid, "neighbor counts");
    sweep->add_option("--alpha-grid", alpha_grid, "decay values");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_config, synth_out);
        if (evaluate->parsed()) return cmd_evaluate(eval_manifest);
        if (fuse->parsed()) return cmd_fuse(fuse_train, fuse_test, fuse_options, fuse_out);
        if (sweep->parsed()) return cmd_sweep(sweep_manifest, k_grid, alpha_grid);
    } catch (const vpr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vpr::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
    const char* bin = std::getenv("VPRBENCH_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "VPRBENCH_BIN must point at the vprbench binary");
    return bin;
}

int run(const std::string& command) {
    const int status = std::system((command + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("vpr_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), (path + " should exist"));
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const char* kWorldJson = R"({
  "seed": 21,
  "n_places": 9,
  "refs_per_place": 6,
  "aliasing_groups": [[0, 1], [2, 3]],
  "descriptor_dim": 24,
  "descriptor_noise_sigma": 0.004,
  "pose_spread_m": 5.0,
  "place_spacing_m": 100.0,
  "query_count": 240,
  "query_spatial_mode": "match_reference_density"
})";

std::string manifest_json(const std::string& extra_channels, const std::string& out_dir) {
    std::ostringstream os;
    os << R"({
  "reference_descriptors": "data/refs.desc.bin",
  "reference_poses": "data/refs.poses.csv",
  "query_descriptors": "data/queries.desc.bin",
  "query_poses": "data/queries.poses.csv",
  "correctness_threshold_m": 25.0,
  "methods": [
    {"name": "sue", "method": "sue", "alpha": 350.0, "k": 10},
    {"name": "l2", "method": "l2"}
  ])";
    os << extra_channels;
    os << ",\n  \"output_dir\": \"" << out_dir << "\"\n}";
    return os.str();
}

std::map<std::string, double> read_auc_table(const std::string& path) {
    std::ifstream in(path);
    std::map<std::string, double> table;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        table[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return table;
}

// queries.poses.csv holds the query ids in file order
std::vector<std::string> query_ids(const std::string& poses_csv) {
    std::ifstream in(poses_csv);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ids.push_back(line.substr(0, line.find(',')));
    }
    return ids;
}

} // namespace

TEST_CASE("synth writes four deterministic files") {
    TempDir tmp("synth");
    write_text(tmp.file("world.json"), kWorldJson);
    const std::string bin = cli_binary();

    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                tmp.file("a")) == 0);
    for (const char* name :
         {"refs.desc.bin", "refs.poses.csv", "queries.desc.bin", "queries.poses.csv"}) {
        CHECK(fs::exists(fs::path(tmp.file("a")) / name));
    }
    CHECK(std::distance(fs::directory_iterator(tmp.file("a")), fs::directory_iterator{}) == 4);

    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                tmp.file("b")) == 0);
    for (const char* name :
         {"refs.desc.bin", "refs.poses.csv", "queries.desc.bin", "queries.poses.csv"}) {
        CHECK(read_text((fs::path(tmp.file("a")) / name).string()) ==
              read_text((fs::path(tmp.file("b")) / name).string()));
    }
}

TEST_CASE("synth rejects a broken partition with a config exit code") {
    TempDir tmp("badpart");
    std::string world = kWorldJson;
    world.replace(world.find("[[0, 1], [2, 3]]"), 16, "[[0, 1], [1, 2]]");
    write_text(tmp.file("world.json"), world);

    const int status = std::system((cli_binary() + " synth --config " + tmp.file("world.json") +
                                    " --out " + tmp.file("x") + " 2> " + tmp.file("err.txt"))
                                       .c_str());
    CHECK(WEXITSTATUS(status) == 2);
    const std::string err = read_text(tmp.file("err.txt"));
    CHECK(err.find("place 1") != std::string::npos);
}

TEST_CASE("evaluate orders sue >= l2 >= random noise") {
    TempDir tmp("order");
    // Non-aliased world with heavy descriptor noise: mismatches come from
    // noisy queries, which is exactly what the best-match distance detects.
    write_text(tmp.file("world.json"), R"({
      "seed": 77,
      "n_places": 9,
      "refs_per_place": 6,
      "descriptor_dim": 24,
      "descriptor_noise_sigma": 0.09,
      "pose_spread_m": 5.0,
      "place_spacing_m": 100.0,
      "query_count": 600,
      "query_spatial_mode": "match_reference_density"
    })");
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);

    // an uninformative external channel: seeded noise per query
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::ostringstream noise;
    noise << "query_id,score\n";
    for (const auto& id : query_ids((tmp.path / "data" / "queries.poses.csv").string())) {
        noise << id << "," << unif(rng) << "\n";
    }
    write_text(tmp.file("random.csv"), noise.str());

    write_text(tmp.file("manifest.json"),
               manifest_json(",\n  \"external_scores\": [{\"name\": \"random\", \"path\": "
                             "\"random.csv\", \"polarity\": \"uncertainty\"}]",
                             "out"));
    REQUIRE(run(bin + " evaluate --manifest " + tmp.file("manifest.json")) == 0);

    const auto table = read_auc_table((tmp.path / "out" / "auc_report.csv").string());
    REQUIRE(table.count("sue"));
    REQUIRE(table.count("l2"));
    REQUIRE(table.count("random"));
    CHECK(table.at("sue") >= table.at("l2"));
    CHECK(table.at("l2") >= table.at("random"));
}

TEST_CASE("missing inputs and parse failures use distinct exit codes") {
    TempDir tmp("exits");
    write_text(tmp.file("world.json"), kWorldJson);
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);

    // manifest referencing a pose file that does not exist
    std::string manifest = manifest_json("", "out");
    manifest.replace(manifest.find("data/refs.poses.csv"), 19, "data/missing.csv");
    write_text(tmp.file("missing.json"), manifest);
    CHECK(run(bin + " evaluate --manifest " + tmp.file("missing.json")) == 2);

    // corrupt the pose file: same manifest, parse failure
    write_text(tmp.file("manifest.json"), manifest_json("", "out"));
    write_text((tmp.path / "data" / "refs.poses.csv").string(), "r0,1,notanumber\n");
    CHECK(run(bin + " evaluate --manifest " + tmp.file("manifest.json")) == 3);
}

TEST_CASE("evaluate outputs are byte-identical across reruns") {
    TempDir tmp("determinism");
    write_text(tmp.file("world.json"), kWorldJson);
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);

    write_text(tmp.file("m1.json"), manifest_json("", "out1"));
    write_text(tmp.file("m2.json"), manifest_json("", "out2"));
    REQUIRE(run(bin + " evaluate --manifest " + tmp.file("m1.json")) == 0);
    REQUIRE(run(bin + " evaluate --manifest " + tmp.file("m2.json")) == 0);

    size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path / "out1")) {
        const std::string name = entry.path().filename().string();
        if (name == "timing.csv" || name == "run_manifest.json") continue;
        CHECK(read_text(entry.path().string()) ==
              read_text((tmp.path / "out2" / name).string()));
        ++compared;
    }
    CHECK(compared >= 4);
}

TEST_CASE("fuse reports fused and single-channel accuracies and a reusable model") {
    TempDir tmp("fuse");
    write_text(tmp.file("world.json"), kWorldJson);
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);

    // correctness-correlated confidence channel: high at places with a
    // nearby best match, noisy otherwise; derived from an evaluation pass
    write_text(tmp.file("m0.json"), manifest_json("", "out0"));
    REQUIRE(run(bin + " evaluate --manifest " + tmp.file("m0.json")) == 0);
    std::ifstream scores((tmp.path / "out0" / "scores.csv").string());
    std::string line;
    std::getline(scores, line);
    std::mt19937 rng(9);
    std::normal_distribution<double> jitter(0.0, 40.0);
    std::ostringstream gv;
    gv << "query_id,score\n";
    while (std::getline(scores, line)) {
        const auto first = line.find(',');
        const std::string qid = line.substr(0, first);
        const bool correct = line[first + 1] == '1';
        gv << qid << "," << std::max(0.0, (correct ? 150.0 : 40.0) + jitter(rng)) << "\n";
    }
    write_text(tmp.file("gv.csv"), gv.str());

    const std::string channels =
        ",\n  \"external_scores\": [{\"name\": \"gv\", \"path\": \"gv.csv\", "
        "\"polarity\": \"confidence\"}]";
    write_text(tmp.file("train.json"), manifest_json(channels, "out_train"));
    write_text(tmp.file("test.json"), manifest_json(channels, "out_test"));
    REQUIRE(run(bin + " fuse --train " + tmp.file("train.json") + " --test " +
                tmp.file("test.json") + " --uncertainty sue --confidence gv --out " +
                (tmp.path / "fused").string()) == 0);

    const std::string accuracy = read_text((tmp.path / "fused" / "accuracy.csv").string());
    CHECK(accuracy.find("sue+gv,") != std::string::npos);
    CHECK(accuracy.find("\nsue,") != std::string::npos);
    CHECK(accuracy.find("\ngv,") != std::string::npos);
    CHECK(fs::exists(tmp.path / "fused" / "model.txt"));
    CHECK(fs::exists(tmp.path / "fused" / "decisions.csv"));
}

TEST_CASE("fuse fails cleanly when training labels are single-class") {
    TempDir tmp("oneclass");
    // a world with no aliasing and tight noise: every match is correct
    std::string world = kWorldJson;
    const std::string groups_line = "\"aliasing_groups\": [[0, 1], [2, 3]],";
    world.erase(world.find(groups_line), groups_line.size());
    write_text(tmp.file("world.json"), world);
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);

    std::ostringstream gv;
    gv << "query_id,score\n";
    for (const auto& id : query_ids((tmp.path / "data" / "queries.poses.csv").string())) {
        gv << id << ",100\n";
    }
    write_text(tmp.file("gv.csv"), gv.str());
    const std::string channels =
        ",\n  \"external_scores\": [{\"name\": \"gv\", \"path\": \"gv.csv\", "
        "\"polarity\": \"confidence\"}]";
    write_text(tmp.file("train.json"), manifest_json(channels, "out_train"));
    write_text(tmp.file("test.json"), manifest_json(channels, "out_test"));
    CHECK(run(bin + " fuse --train " + tmp.file("train.json") + " --test " +
              tmp.file("test.json") + " --uncertainty sue --confidence gv --out " +
              (tmp.path / "fused").string()) == 4);
}

TEST_CASE("sweep emits the full grid and the plateau holds") {
    TempDir tmp("sweep");
    write_text(tmp.file("world.json"), kWorldJson);
    const std::string bin = cli_binary();
    REQUIRE(run(bin + " synth --config " + tmp.file("world.json") + " --out " +
                (tmp.path / "data").string()) == 0);
    write_text(tmp.file("manifest.json"), manifest_json("", "out"));
    REQUIRE(run(bin + " sweep --manifest " + tmp.file("manifest.json")) == 0);

    std::ifstream in((tmp.path / "out" / "sweep.csv").string());
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,alpha,auc_pr");
    double auc_k1 = -1.0, auc_k10 = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream fields(line);
        std::string k, alpha, auc;
        std::getline(fields, k, ',');
        std::getline(fields, alpha, ',');
        std::getline(fields, auc, ',');
        if (k == "1" && alpha == "350") auc_k1 = std::stod(auc);
        if (k == "10" && alpha == "350") auc_k10 = std::stod(auc);
    }
    CHECK(rows == 25);
    REQUIRE(auc_k1 >= 0.0);
    REQUIRE(auc_k10 >= 0.0);
    CHECK(auc_k10 >= auc_k1);
}

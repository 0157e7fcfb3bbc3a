#include <gtest/gtest.h>

#include "distgen/experiment.hpp"
#include "distgen/scene.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace distgen;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("distgen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(DISTGEN_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() +
                                " 2>" + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
        return path(name);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    std::string fnn_config(const std::string& out, const std::string& extra = "") const {
        return write("fnn.json", R"({"dataset": "theta_l", "size": 16, "replicas": 2, "seed": 5,
            "output_dir": ")" + out + R"(",
            "machine": {"kind": "fnn", "layer_sizes": [2, 4, 1], "iterations": 2000,
                        "snapshot_iterations": [1000, 2000])" + extra + "}}");
    }

    fs::path dir_;
};

std::vector<std::string> tree(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out.push_back(fs::relative(e.path(), root).string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Sha256, KnownDigests) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(Cli, GenDataWritesBuiltins) {
    ASSERT_EQ(run("gen-data theta_c " + path("c.pgm")), 0);
    EXPECT_EQ(load_pgm(path("c.pgm")), std::get<ImageGrid>(builtin_dataset("theta_c")));
    ASSERT_EQ(run("gen-data mask " + path("m.pgm") + " --size 32"), 0);
    EXPECT_EQ(mask_from_image(load_pgm(path("m.pgm"))), builtin_mask(32));
}

TEST_F(Cli, GenDataFromSceneJson) {
    const std::string scene = write("s.json", scene_to_json(builtin_scene("theta_l")));
    ASSERT_EQ(run("gen-data " + scene + " " + path("s.pgm")), 0);
    EXPECT_EQ(load_pgm(path("s.pgm")), std::get<ImageGrid>(builtin_dataset("theta_l")));
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("gen-data theta_q " + path("x.pgm")), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("run " + path("missing.json")), 2);
    EXPECT_FALSE(fs::exists(path("x.pgm")));
}

TEST_F(Cli, FnnRunWritesTreeAndManifest) {
    const std::string out = path("out");
    ASSERT_EQ(run("run --quiet " + fnn_config(out)), 0) << slurp(path("stderr.txt"));
    const std::vector<std::string> expected{
        "0/1000/hyperplanes.pgm", "0/1000/model.txt", "0/1000/surface.pgm", "0/2000/hyperplanes.pgm",
        "0/2000/model.txt",       "0/2000/surface.pgm", "1/1000/hyperplanes.pgm", "1/1000/model.txt",
        "1/1000/surface.pgm",     "1/2000/hyperplanes.pgm", "1/2000/model.txt", "1/2000/surface.pgm",
        "manifest.json",          "metrics.csv"};
    EXPECT_EQ(tree(out), expected);

    const auto manifest = nlohmann::json::parse(slurp(fs::path(out) / "manifest.json"));
    EXPECT_EQ(manifest.at("seed"), 5);
    EXPECT_EQ(manifest.at("config_sha256"), sha256_hex(slurp(path("fnn.json"))));
    ASSERT_EQ(manifest.at("files").size(), expected.size() - 1);
    for (const auto& f : manifest.at("files")) {
        EXPECT_EQ(f.at("sha256"), sha256_hex(slurp(fs::path(out) / f.at("path").get<std::string>())));
    }

    const std::string csv = slurp(fs::path(out) / "metrics.csv");
    EXPECT_EQ(csv.rfind("replica,iteration,train_mse,test_mse,train_count,test_count\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

    // The saved model reproduces the saved surface.
    const NetworkParams net = load_network(fs::path(out) / "1/2000/model.txt");
    const ImageGrid surface =
        eval_grid([&](double a, double b) { return predict(net, a, b); }, 16, 16, Viewport::data());
    EXPECT_EQ(encode_pgm(surface), encode_pgm(load_pgm(fs::path(out) / "1/2000/surface.pgm")));
}

TEST_F(Cli, RunsAreReproducibleAndSeedOverrideTakesEffect) {
    const std::string cfg = fnn_config(path("a"));
    ASSERT_EQ(run("run --quiet " + cfg), 0);
    ASSERT_EQ(run("run --quiet --out " + path("b") + " " + cfg), 0);
    ASSERT_EQ(run("run --quiet --seed 6 --out " + path("c") + " " + cfg), 0);
    for (const auto& f : tree(path("a"))) {
        if (f == "manifest.json") {
            continue;
        }
        EXPECT_EQ(slurp(fs::path(path("a")) / f), slurp(fs::path(path("b")) / f)) << f;
    }
    EXPECT_EQ(slurp(fs::path(path("a")) / "manifest.json"), slurp(fs::path(path("b")) / "manifest.json"));
    EXPECT_NE(slurp(fs::path(path("a")) / "0/2000/model.txt"), slurp(fs::path(path("c")) / "0/2000/model.txt"));
    // Replica 1 of seed 5 is replica 0 of seed 6.
    EXPECT_EQ(slurp(fs::path(path("a")) / "1/2000/model.txt"), slurp(fs::path(path("c")) / "0/2000/model.txt"));
}

TEST_F(Cli, ConfigErrorsExitTwoAndWriteNothing) {
    const std::string out = path("out");
    EXPECT_EQ(run("run " + fnn_config(out, R"(, "momentum": 0.9)")), 2);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_NE(slurp(path("stderr.txt")).find("momentum"), std::string::npos);
    EXPECT_EQ(run("run " + write("bad.json", "{\"machine\": {\"kind\": \"fnn\"")), 2);
    EXPECT_EQ(run("run " + write("bad2.json", R"({"machine": {"kind": "rbf"}})")), 2);
}

TEST_F(Cli, SolverIterationCapExitsFour) {
    const std::string cfg = write("svm.json", R"({"dataset": "theta_l", "size": 16, "replicas": 1,
        "output_dir": ")" + path("o") + R"(", "machine": {"kind": "nusvc", "gamma": 30, "max_iterations": 1,
        "epsilon": 1e-9}})");
    EXPECT_EQ(run("run " + cfg), 4);
    EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(Cli, IoFailureMidRunRemovesEarlierFiles) {
    const std::string out = path("out");
    fs::create_directories(out);
    // Replica 1's directory is blocked by a regular file.
    write("out/1", "occupied");
    EXPECT_EQ(run("run --quiet " + fnn_config(out)), 3);
    EXPECT_EQ(tree(out), std::vector<std::string>{"1"});
    EXPECT_EQ(slurp(fs::path(out) / "1"), "occupied");
}

TEST_F(Cli, SvmRunAndRender) {
    const std::string out = path("svm");
    const std::string cfg = write("svm.json", R"({"dataset": "theta_l", "size": 16, "replicas": 1,
        "output_dir": ")" + out + R"(", "machine": {"kind": "nusvc", "nu": 0.2, "gamma": 30, "cost": 3}})");
    ASSERT_EQ(run("run --quiet " + cfg), 0) << slurp(path("stderr.txt"));
    std::string model;
    for (const auto& f : tree(out)) {
        if (f.ends_with("model.txt")) {
            model = (fs::path(out) / f).string();
        }
    }
    ASSERT_FALSE(model.empty());
    EXPECT_EQ(slurp(model).rfind("NUSVC 1\n", 0), 0u);

    ASSERT_EQ(run("render " + model + " binary " + path("b.pgm") + " --width 16 --height 16"), 0);
    const std::string dir = fs::path(model).parent_path().string();
    EXPECT_EQ(slurp(path("b.pgm")), slurp(dir + "/binary.pgm"));
    ASSERT_EQ(run("render " + model + " surface " + path("s.pgm") + " --width 16 --height 16"), 0);
    EXPECT_EQ(slurp(path("s.pgm")), slurp(dir + "/surface.pgm"));
    EXPECT_EQ(run("render " + model + " hyperplanes " + path("h.pgm")), 2);
}

TEST_F(Cli, SvmInfeasibleNuExitsFour) {
    const std::string cfg = write("svm.json", R"({"dataset": "theta_l", "size": 16, "replicas": 1,
        "output_dir": ")" + path("o") + R"(", "machine": {"kind": "nusvc", "nu": 0.95, "gamma": 30}})");
    EXPECT_EQ(run("run " + cfg), 4);
    EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(Cli, RenderFnnKinds) {
    ASSERT_EQ(run("run --quiet " + fnn_config(path("out"))), 0);
    const std::string model = path("out/0/2000/model.txt");
    ASSERT_EQ(run("render " + model + " hyperplanes " + path("h.pgm") + " --width 40 --height 30 --opacity 0.5"), 0);
    const ImageGrid h = load_pgm(path("h.pgm"));
    EXPECT_EQ(h.width(), 40u);
    EXPECT_EQ(h.height(), 30u);
    ASSERT_EQ(run("render " + model + " surface " + path("s.pgm") + " --viewport -1 1 -1 1"), 0);
    EXPECT_EQ(run("render " + model + " binary " + path("b.pgm")), 2);
    EXPECT_EQ(run("render " + model + " contour " + path("b.pgm")), 2);
    EXPECT_EQ(run("render " + path("nope.txt") + " surface " + path("b.pgm")), 3);
    ASSERT_EQ(run("render mask distance-map " + path("d.pgm")), 0);
    EXPECT_EQ(load_pgm(path("d.pgm")).at(0, 0), -0.5);
}

TEST_F(Cli, MetricsTableAndCsv) {
    ASSERT_EQ(run("gen-data theta_l " + path("truth.pgm")), 0);
    ASSERT_EQ(run("gen-data theta_c " + path("other.pgm")), 0);
    ASSERT_EQ(run("metrics " + path("truth.pgm") + " " + path("other.pgm") + " --truth " + path("truth.pgm") +
                  " --csv " + path("m.csv")),
              0);
    const std::string table = slurp(path("stdout.txt"));
    EXPECT_EQ(table.rfind("machine", 0), 0u);
    EXPECT_NE(table.find("truth "), std::string::npos);
    const std::string csv = slurp(path("m.csv"));
    EXPECT_NE(csv.find("truth,0,0,"), std::string::npos) << csv;
    EXPECT_EQ(run("metrics " + path("truth.pgm") + " --truth " + path("absent.pgm")), 3);
}

// End-to-end tests of the ricescope binary: exit codes, files written and
// agreement with the library.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ricescope/report.hpp"
#include "ricescope/synthgen.hpp"
#include "ricescope/weigh.hpp"

namespace fs = std::filesystem;
using namespace ricescope;

namespace {

const std::string kCli = RICESCOPE_CLI;
const std::string kData = RICESCOPE_DATA_DIR;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("ricescope_cli_" + std::string(info->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Runs the binary; stdout and stderr land in out_ and err_.
    int run(const std::string& args) {
        const std::string cmd = kCli + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        out_ = slurp(path("stdout.txt"));
        err_ = slurp(path("stderr.txt"));
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

    std::string calibrate_samples() {
        EXPECT_EQ(run("calibrate --table " + kData + "/calibration_samples.csv --out " + path("cal.json")), 0) << err_;
        return path("cal.json");
    }

    fs::path dir_;
    std::string out_, err_;
};

TEST_F(Cli, CalibrateFromTableMatchesPrintedDensities) {
    const auto cal = load_density_table(calibrate_samples());
    const std::pair<KernelProperty, double> printed[] = {
        {KernelProperty::SO, 5.32e-6}, {KernelProperty::PC, 5.42e-6}, {KernelProperty::MC, 5.31e-6},
        {KernelProperty::YC, 5.03e-6}, {KernelProperty::SP, 4.93e-6}, {KernelProperty::BR, 5.23e-6}};
    for (auto [p, rho] : printed) EXPECT_NEAR(cal[p] / rho, 1.0, 0.01) << to_cstr(p);
    EXPECT_NE(out_.find("1227"), std::string::npos);
}

TEST_F(Cli, CalibrateRejectsMissingTypeAndZeroWeight) {
    const std::string five =
        "--sample SO:1 --sample PC:1 --sample MC:1 --sample YC:1 --sample SP:1 "
        "--area-override SO:100 --area-override PC:100 --area-override MC:100 --area-override YC:100 "
        "--area-override SP:100 ";
    EXPECT_EQ(run("calibrate " + five + "--out " + path("c.json")), 2);
    EXPECT_NE(err_.find("MISSING_TYPE"), std::string::npos) << err_;
    EXPECT_FALSE(fs::exists(path("c.json")));

    EXPECT_EQ(run("calibrate " + five + "--sample BR:0 --area-override BR:100 --out " + path("c.json")), 2);
    EXPECT_NE(err_.find("NONPOSITIVE_INPUT"), std::string::npos) << err_;
}

TEST_F(Cli, CalibrateMeasuresSampleImages) {
    write("spec.json", R"({"frequencies": {"SO": 1, "PC": 0, "MC": 0, "YC": 0, "SP": 0, "BR": 0},
                           "dualProbability": 0, "minKernels": 20, "maxKernels": 20})");
    ASSERT_EQ(run("synth --out-dir " + path("so") + " --spec " + path("spec.json") + " --seed 11"), 0) << err_;
    const auto gt = load_ground_truth(path("so/scene_0000.gt.json"));
    double area = 0;
    for (const auto& k : gt.kernels) area += static_cast<double>(k.area);

    ASSERT_EQ(run("calibrate --sample SO:2.5:" + path("so/scene_0000.png") +
                  " --sample PC:1 --sample MC:1 --sample YC:1 --sample SP:1 --sample BR:1"
                  " --area-override PC:1e5 --area-override MC:1e5 --area-override YC:1e5"
                  " --area-override SP:1e5 --area-override BR:1e5 --scale-tag lab --out " +
                  path("cal.json")),
              0)
        << err_;
    const auto cal = load_density_table(path("cal.json"));
    EXPECT_DOUBLE_EQ(cal[KernelProperty::SO], 2.5 / area);
    EXPECT_EQ(cal.scale_tag, "lab");
}

TEST_F(Cli, AnalyzeWithOracleDetectionsReproducesGroundTruth) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 21 --oracle-detections"), 0) << err_;
    ASSERT_EQ(run("analyze " + path("s/scene_0000.png") + " --calibration " + cal_path + " --color " +
                  path("s/scene_0000.color.json") + " --gray " + path("s/scene_0000.gray.json") +
                  " --set backend=external --out " + path("r.json") + " --overlay " + path("o.png")),
              0)
        << err_;
    const auto got = read_report(path("r.json")).report;
    const auto want = ground_truth_report(load_ground_truth(path("s/scene_0000.gt.json")),
                                          load_density_table(cal_path));
    EXPECT_EQ(got.ratio, want.ratio);
    EXPECT_EQ(got.type_weight, want.type_weight);
    EXPECT_EQ(got.kernels.size(), want.kernels.size());
    EXPECT_TRUE(got.unresolved.empty());
    EXPECT_TRUE(fs::exists(path("o.png")));
}

TEST_F(Cli, BackendIsTransparentToTheReport) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 33 --oracle-detections"), 0) << err_;
    const std::string img = path("s/scene_0000.png");
    ASSERT_EQ(run("analyze " + img + " --calibration " + cal_path + " --out " + path("a.json") + " --save-color " +
                  path("c.json") + " --save-gray " + path("g.json")),
              0)
        << err_;
    ASSERT_EQ(run("analyze " + img + " --calibration " + cal_path + " --color " + path("c.json") + " --gray " +
                  path("g.json") + " --out " + path("b.json")),
              0)
        << err_;
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, ReportEchoesEffectiveConfig) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 3 --min-kernels 5 --max-kernels 5"), 0) << err_;
    ASSERT_EQ(run("analyze " + path("s/scene_0000.png") + " --calibration " + cal_path +
                  " --set fusion.iouThreshold=0.6 --out " + path("r.json")),
              0)
        << err_;
    const auto file = read_report(path("r.json"));
    EXPECT_DOUBLE_EQ(file.config["fusion"]["iouThreshold"].get<double>(), 0.6);
    EXPECT_EQ(file.config["calibration"], cal_path);
}

TEST_F(Cli, ConfigurationErrorsExitTwo) {
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 4 --min-kernels 3 --max-kernels 3"), 0) << err_;
    const std::string img = path("s/scene_0000.png");
    EXPECT_EQ(run("analyze " + img + " --out " + path("r.json")), 2);
    EXPECT_NE(err_.find("CONFIG_ERROR"), std::string::npos) << err_;
    EXPECT_EQ(run("analyze " + img + " --calibration " + path("nope.json") + " --out " + path("r.json")), 2);
    EXPECT_FALSE(fs::exists(path("r.json")));

    const auto cal_path = calibrate_samples();
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --set fusion.bogus=1 --out " + path("r.json")),
              2);
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --set backend=external --out " + path("r.json")),
              2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, SchemaErrorsExitThree) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 4 --min-kernels 3 --max-kernels 3 --oracle-detections"),
              0)
        << err_;
    const std::string img = path("s/scene_0000.png");
    // gray file handed in as the colour branch
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --color " + path("s/scene_0000.gray.json") +
                  " --out " + path("r.json")),
              3);
    EXPECT_NE(err_.find("BRANCH_MISMATCH"), std::string::npos) << err_;

    write("big.json", R"({"image": "x.png", "width": 1280, "height": 960, "branch": "COLOR",
                          "detections": [{"bbox": [1270, 950, 20, 20], "labels": ["SP"], "confidence": 0.9}]})");
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --color " + path("big.json") + " --out " +
                  path("r.json")),
              3);
    EXPECT_NE(err_.find("OUT_OF_BOUNDS_BOX"), std::string::npos) << err_;

    write("small.json", R"({"image": "x.png", "width": 640, "height": 480, "branch": "COLOR", "detections": []})");
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --color " + path("small.json") + " --out " +
                  path("r.json")),
              3);
    EXPECT_NE(err_.find("DIMENSION_MISMATCH"), std::string::npos) << err_;

    write("bad.json", "{ not json");
    EXPECT_EQ(run("analyze " + img + " --calibration " + cal_path + " --gray " + path("bad.json") + " --out " +
                  path("r.json")),
              3);
}

TEST_F(Cli, EmptySceneAndUnresolvedLimit) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --seed 1 --min-kernels 0 --max-kernels 0"), 0) << err_;
    const std::string img = path("s/scene_0000.png");
    ASSERT_EQ(run("analyze " + img + " --calibration " + cal_path + " --out " + path("r.json")), 0) << err_;
    const auto empty = read_report(path("r.json")).report;
    EXPECT_TRUE(empty.kernels.empty());
    EXPECT_EQ(empty.total_weight, 0.0);
    for (double r : empty.ratio) EXPECT_EQ(r, 0.0);

    write("c.json", R"({"image": "x.png", "width": 1280, "height": 960, "branch": "COLOR",
                        "detections": [{"bbox": [100, 100, 30, 20], "labels": ["SP"], "confidence": 0.9}]})");
    const std::string with_box = "analyze " + img + " --calibration " + cal_path + " --color " + path("c.json");
    EXPECT_EQ(run(with_box + " --max-unresolved 0 --out " + path("u.json")), 1);
    EXPECT_EQ(read_report(path("u.json")).report.unresolved.size(), 1u);
    EXPECT_EQ(run(with_box + " --max-unresolved 1 --out " + path("u.json")), 0) << err_;
}

TEST_F(Cli, SynthIsDeterministic) {
    ASSERT_EQ(run("synth --out-dir " + path("a") + " --count 2 --seed 9 --oracle-detections"), 0) << err_;
    ASSERT_EQ(run("synth --out-dir " + path("b") + " --count 2 --seed 9 --oracle-detections"), 0) << err_;
    for (const char* f : {"scene_0000.png", "scene_0000.gt.json", "scene_0001.png", "scene_0001.color.json",
                          "scene_0001.gray.json"})
        EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
    // scene i is generated with seed + i
    ASSERT_EQ(run("synth --out-dir " + path("c") + " --seed 10"), 0);
    EXPECT_EQ(slurp(path("a/scene_0001.gt.json")), slurp(path("c/scene_0000.gt.json")));
}

TEST_F(Cli, EvaluateWritesCsv) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("synth --out-dir " + path("s") + " --count 2 --seed 40"), 0) << err_;
    std::string pairs;
    for (const char* stem : {"scene_0000", "scene_0001"}) {
        const std::string report = path(std::string(stem) + ".json");
        ASSERT_EQ(run("analyze " + path("s/" + std::string(stem) + ".png") + " --calibration " + cal_path +
                      " --out " + report),
                  0)
            << err_;
        pairs += " --report " + report + " --truth " + path("s/" + std::string(stem) + ".gt.json");
    }
    ASSERT_EQ(run("evaluate" + pairs + " --out " + path("m.csv")), 0) << err_;
    const auto csv = slurp(path("m.csv"));
    EXPECT_EQ(csv.rfind("type,tp,fp,fn,precision,recall,f1,mean_error_pp,max_error_pp\n", 0), 0u);
    EXPECT_NE(csv.find("\nSO,"), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);

    EXPECT_EQ(run("evaluate --report " + path("scene_0000.json") + pairs), 2);
}

TEST_F(Cli, CompareDensityWritesCsv) {
    const auto cal_path = calibrate_samples();
    ASSERT_EQ(run("compare-density --groups " + kData + "/sample_groups.csv --calibration " + cal_path + " --out " +
                  path("d.csv")),
              0)
        << err_;
    const auto csv = slurp(path("d.csv"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 18);
    EXPECT_EQ(csv.rfind("group,type,accurate_pct,area_pct,estimated_pct,area_rel_error,estimated_rel_error\n", 0), 0u);
    // SO groups use the SO density in both modes
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    std::vector<std::string> cells;
    std::stringstream cs(line);
    for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[1], "SO");
    EXPECT_EQ(cells[3], cells[4]);
}

} // namespace

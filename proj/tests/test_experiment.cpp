#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dcar/errors.hpp"
#include "dcar/experiment.hpp"
#include "dcar/fbp.hpp"
#include "dcar/io.hpp"
#include "dcar/metrics.hpp"

using namespace dcar;
namespace fs = std::filesystem;

namespace {

fs::path scratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dcar_test_experiment" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A small, fast scenario: 32x32 grid of 5 mm pixels, 100 bins of 4 mm.
std::string smallConfig(const std::string& method, const std::string& extra = "",
                        const std::string& range = R"({"start_deg": 0, "end_deg": 120})") {
  return R"({
  "geometry": {"sid_mm": 600, "sdd_mm": 1200, "n_bins": 100, "bin_size_mm": 4,
               "start_deg": 0, "end_deg": 210, "step_deg": 3},
  "grid": {"nx": 32, "ny": 32, "dx_mm": 5, "dy_mm": 5},
  "phantom": {"kind": "ellipses",
              "ellipses": [{"center_mm": [0, 0], "axes_mm": [60, 45], "rotation_deg": 0, "delta_mu": 0.02},
                           {"center_mm": [15, 10], "axes_mm": [12, 12], "rotation_deg": 0, "delta_mu": 0.004}]},
  "measured_range": )" + range + R"(,
  "method": ")" + method + "\"" + extra + "\n}\n";
}

const std::string kPrior = R"(,
  "prior": {"kind": "oracle-corrupted",
            "corruptions": [{"center_mm": [-15, 5], "axes_mm": [10, 10], "rotation_deg": 0, "offset_hu": -300}]},
  "solver": {"outer_iterations": 4})";

fs::path writeConfig(const fs::path& dir, const std::string& name,
                     const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

int runCli(const std::string& args) {
  const std::string cmd = std::string(DCAR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::Fbp, Method::SartWtv, Method::Dcar})
    CHECK(parseMethod(methodName(m)) == m);
  CHECK_THROWS(parseMethod("art"));
}

TEST_CASE("parse errors for malformed configs") {
  CHECK_NOTHROW(parseExperimentConfig(smallConfig("fbp")));
  CHECK_THROWS_AS(parseExperimentConfig("{ not json"), ConfigParseError);
  CHECK_THROWS_AS(parseExperimentConfig(R"({"grid": {"nx": 8, "ny": 8, "dx_mm": 1, "dy_mm": 1}})"),
                  ConfigParseError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", R"(, "solver": {"e_1": 0.01})")),
                  ConfigParseError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", R"(, "colour": 1)")),
                  ConfigParseError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", R"(, "solver": {"e1": "small"})")),
                  ConfigParseError);
}

TEST_CASE("validation errors for out-of-range values") {
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", R"(, "solver": {"lambda": 2.5})")),
                  ValidationError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("dcar")), ValidationError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", "", R"({"start_deg": 100, "end_deg": 20})")),
                  ValidationError);
  CHECK_THROWS_AS(parseExperimentConfig(smallConfig("fbp", R"(, "noise": {"enabled": true, "i0": -5})")),
                  ValidationError);
}

TEST_CASE("defaults and dump round-trip") {
  const ExperimentConfig sart = parseExperimentConfig(smallConfig("sart-wtv"));
  CHECK(sart.solver.outerIterations == 100);
  const ExperimentConfig d = parseExperimentConfig(smallConfig("dcar", kPrior));
  CHECK(d.solver.outerIterations == 4);
  CHECK(d.solver.e1 == 0.001);
  CHECK(d.solver.e2 == 0.5);
  const ExperimentConfig again = parseExperimentConfig(dumpExperimentConfig(d));
  CHECK(dumpExperimentConfig(again) == dumpExperimentConfig(d));
}

TEST_CASE("fbp run matches the direct library call and writes artifacts") {
  const fs::path dir = scratchDir("fbp");
  ExperimentConfig c = parseExperimentConfig(smallConfig("fbp"));
  c.outputDir = dir / "out";
  const ExperimentOutput out = runExperiment(c);

  const FanBeamGeometry g = c.geometry.build();
  const auto part = partitionAngles(g, 0, 120);
  const ImageGrid truth = buildPhantom(c);
  const ImageGrid direct =
      fbpReconstruct(forwardProject(truth, g, part.measured), g, part.measured, c.grid);
  CHECK(out.summary.rmseHu == rmseHu(direct, truth, c.exportBlock.scale));
  CHECK(out.summary.fbpRmseHu == out.summary.rmseHu);
  for (const char* f : {"ground_truth.raw", "ground_truth.png", "measured_sino.raw",
                        "fbp.raw", "reconstruction.raw", "reconstruction.png",
                        "summary.json"})
    CHECK(fs::exists(dir / "out" / f));
  CHECK_FALSE(fs::exists(dir / "out" / "report.csv"));
}

TEST_CASE("CLI exit statuses") {
  const fs::path dir = scratchDir("cli");
  CHECK(runCli("run " + writeConfig(dir, "ok.json", smallConfig("fbp")).string() +
               " -o " + (dir / "ok").string()) == kExitOk);

  const fs::path missing = writeConfig(dir, "missing.json",
      R"({"grid": {"nx": 8, "ny": 8, "dx_mm": 1, "dy_mm": 1}, "method": "fbp"})");
  CHECK(runCli("run " + missing.string() + " -o " + (dir / "missing").string()) ==
        kExitConfigParse);
  CHECK_FALSE(fs::exists(dir / "missing"));

  CHECK(runCli("run " + writeConfig(dir, "bad.json", smallConfig("fbp", R"(, "solver": {"lambda": 3})")).string()) ==
        kExitValidation);
  CHECK(runCli("run " + (dir / "nowhere.json").string()) == kExitIo);
  CHECK(runCli("frobnicate") == kExitConfigParse);

  // Pipeline subcommands chained through files.
  const fs::path cfg = dir / "ok.json";
  CHECK(runCli("phantom -c " + cfg.string() + " -o " + (dir / "truth.raw").string()) == 0);
  CHECK(runCli("project -c " + cfg.string() + " -i " + (dir / "truth.raw").string() +
               " -o " + (dir / "m.raw").string()) == 0);
  CHECK(runCli("noise -i " + (dir / "m.raw").string() + " -o " + (dir / "n.raw").string() +
               " --seed 3") == 0);
  CHECK(runCli("fbp -c " + cfg.string() + " -s " + (dir / "m.raw").string() + " -o " +
               (dir / "f.raw").string()) == 0);
  const std::string dcarCfg =
      writeConfig(dir, "d.json", smallConfig("dcar", kPrior)).string();
  CHECK(runCli("dcar -c " + dcarCfg + " -s " + (dir / "m.raw").string() + " -p " +
               (dir / "f.raw").string() + " -o " + (dir / "d.raw").string() + " -r " +
               (dir / "truth.raw").string() + " --report " + (dir / "r.csv").string()) == 0);
  CHECK(fs::exists(dir / "r.csv"));
  CHECK(runCli("metrics -i " + (dir / "d.raw").string() + " -r " +
               (dir / "truth.raw").string()) == 0);
  CHECK(runCli("export-png -i " + (dir / "d.raw").string() + " -o " +
               (dir / "d.png").string() + " --window -200 200") == 0);
  CHECK(fs::exists(dir / "d.png"));
  // A prior on the wrong grid is a validation failure.
  io::writeImage(dir / "small.raw", ImageGrid(GridSpec{8, 8, 5, 5}));
  CHECK(runCli("dcar -c " + dcarCfg + " -s " + (dir / "m.raw").string() + " -p " +
               (dir / "small.raw").string() + " -o " + (dir / "x.raw").string()) ==
        kExitValidation);
}

TEST_CASE("dcar reruns are bit-identical") {
  const fs::path dir = scratchDir("rerun");
  const std::string text = smallConfig(
      "dcar", kPrior + std::string(R"(, "noise": {"enabled": true, "i0": 100000, "seed": 5})"));
  const fs::path cfg = writeConfig(dir, "c.json", text);
  // Same output directory both times, so the echoed config matches too.
  REQUIRE(runCli("run " + cfg.string() + " -o " + (dir / "b").string()) == 0);
  fs::rename(dir / "b", dir / "a");
  REQUIRE(runCli("run " + cfg.string() + " -o " + (dir / "b").string()) == 0);
  for (const char* f : {"reconstruction.raw", "prior.raw", "measured_sino.raw",
                        "report.csv", "summary.json", "reconstruction.png"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}

TEST_CASE("compare") {
  CHECK_THROWS_AS(compareExperiments({}), ValidationError);

  const ExperimentConfig fbp = parseExperimentConfig(smallConfig("fbp"));
  const ExperimentConfig dcar = parseExperimentConfig(smallConfig("dcar", kPrior));
  const auto rows = compareExperiments({fbp, dcar});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "fbp");
  CHECK(rows[1].method == "dcar");

  ExperimentConfig other = fbp;
  other.phantom.ellipses[1].delta = 0.005;
  CHECK_THROWS_AS(compareExperiments({fbp, other}), ValidationError);

  const auto single = compareExperiments({dcar});
  const RunSummary s = runExperiment(dcar).summary;
  CHECK(single[0].rmseHu == s.rmseHu);
  CHECK(single[0].measuredResidualRms == s.measuredResidualRms);
  CHECK(single[0].iterations == s.iterations);
  CHECK(formatSummaryTable(single) == formatSummaryTable({s}));
}

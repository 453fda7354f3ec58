// Batch front-end for the limited-angle reconstruction toolkit.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcar/errors.hpp"
#include "dcar/experiment.hpp"
#include "dcar/fbp.hpp"
#include "dcar/io.hpp"
#include "dcar/metrics.hpp"
#include "dcar/simulate.hpp"
#include "dcar/solver.hpp"

namespace fs = std::filesystem;
using namespace dcar;

namespace {

/// Geometry indices of the sinogram's rows; every angle must exist in the
/// geometry.
std::vector<std::size_t> subsetFor(const Sinogram& sino,
                                   const FanBeamGeometry& geometry) {
  std::vector<std::size_t> subset;
  std::size_t g = 0;
  for (double a : sino.anglesDeg) {
    while (g < geometry.angleCount() && geometry.anglesDeg[g] < a - 1e-6) ++g;
    if (g == geometry.angleCount() || std::abs(geometry.anglesDeg[g] - a) > 1e-6)
      throw ValidationError("sinogram angle " + std::to_string(a) +
                            " is not part of the configured geometry");
    subset.push_back(g++);
  }
  return subset;
}

void printSummary(const RunSummary& s) {
  std::cout << formatSummaryTable({s});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limited-angle CT reconstruction: FBP, SART+wTV and DCAR"};
  app.require_subcommand(1);

  std::string configPath, outDir, outPath, imagePath, sinoPath, priorPath,
      referencePath, reportPath, range = "measured";
  std::vector<std::string> configPaths;
  double i0 = 1e5, muWater = 0.02;
  std::uint64_t seed = 0;
  std::vector<double> window{-1000.0, 1000.0};

  auto* run = app.add_subcommand("run", "Simulate, reconstruct and evaluate one experiment");
  run->add_option("config", configPath, "Experiment config (JSON)")->required();
  run->add_option("-o,--output-dir", outDir, "Override output_dir");

  auto* compare = app.add_subcommand("compare", "Run several configs and tabulate them");
  compare->add_option("configs", configPaths, "Experiment configs")->required();
  compare->add_option("-o,--out", outPath, "Write the table to this CSV file");

  auto* phantom = app.add_subcommand("phantom", "Render the configured phantom");
  phantom->add_option("-c,--config", configPath)->required();
  phantom->add_option("-o,--out", outPath)->required();

  auto* project = app.add_subcommand("project", "Forward project an image");
  project->add_option("-c,--config", configPath)->required();
  project->add_option("-i,--image", imagePath)->required();
  project->add_option("-o,--out", outPath)->required();
  project->add_option("--range", range, "measured | unmeasured | all")
      ->check(CLI::IsMember({"measured", "unmeasured", "all"}));

  auto* noise = app.add_subcommand("noise", "Add Poisson noise to a sinogram");
  noise->add_option("-i,--in", sinoPath)->required();
  noise->add_option("-o,--out", outPath)->required();
  noise->add_option("--i0", i0, "Photons per bin before attenuation");
  noise->add_option("--seed", seed);

  auto* fbp = app.add_subcommand("fbp", "Ram-Lak fan-beam FBP");
  fbp->add_option("-c,--config", configPath)->required();
  fbp->add_option("-s,--sino", sinoPath)->required();
  fbp->add_option("-o,--out", outPath)->required();

  auto* dcarCmd = app.add_subcommand("dcar", "DCAR reconstruction from measured data and a prior");
  dcarCmd->add_option("-c,--config", configPath)->required();
  dcarCmd->add_option("-s,--sino", sinoPath, "Measured sinogram")->required();
  dcarCmd->add_option("-p,--prior", priorPath, "Prior image")->required();
  dcarCmd->add_option("-o,--out", outPath)->required();
  dcarCmd->add_option("-r,--reference", referencePath);
  dcarCmd->add_option("--report", reportPath, "Per-iteration CSV report");

  auto* metrics = app.add_subcommand("metrics", "RMSE in HU between two images");
  metrics->add_option("-i,--image", imagePath)->required();
  metrics->add_option("-r,--reference", referencePath)->required();
  metrics->add_option("--mu-water", muWater);

  auto* png = app.add_subcommand("export-png", "16-bit windowed PNG of an image");
  png->add_option("-i,--image", imagePath)->required();
  png->add_option("-o,--out", outPath)->required();
  png->add_option("--window", window, "Low and high HU")->expected(2);
  png->add_option("--mu-water", muWater);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; any real usage error counts as a parse error.
    return app.exit(e) == 0 ? kExitOk : kExitConfigParse;
  }

  try {
    if (*run) {
      ExperimentConfig c = loadExperimentConfig(configPath);
      if (!outDir.empty()) c.outputDir = outDir;
      printSummary(runExperiment(c).summary);
    } else if (*compare) {
      std::vector<ExperimentConfig> configs;
      for (const auto& p : configPaths) configs.push_back(loadExperimentConfig(p));
      const std::string table = formatSummaryTable(compareExperiments(configs));
      std::cout << table;
      if (!outPath.empty()) io::writeText(outPath, table);
    } else if (*phantom) {
      const ExperimentConfig c = loadExperimentConfig(configPath);
      io::writeImage(outPath, buildPhantom(c));
    } else if (*project) {
      const ExperimentConfig c = loadExperimentConfig(configPath);
      const FanBeamGeometry g = c.geometry.build();
      const AngularPartition p =
          partitionAngles(g, c.measuredStartDeg, c.measuredEndDeg);
      const auto subset = range == "measured"     ? p.measured
                          : range == "unmeasured" ? p.unmeasured
                                                  : allAngles(g);
      const ImageGrid image = io::readImage(imagePath, c.exportBlock.scale);
      io::writeSinogram(outPath, forwardProject(image, g, subset));
    } else if (*noise) {
      io::writeSinogram(outPath, addPoissonNoise(io::readSinogram(sinoPath), {i0, seed}));
    } else if (*fbp) {
      const ExperimentConfig c = loadExperimentConfig(configPath);
      const FanBeamGeometry g = c.geometry.build();
      const Sinogram sino = io::readSinogram(sinoPath);
      io::writeImage(outPath, fbpReconstruct(sino, g, subsetFor(sino, g), c.grid));
    } else if (*dcarCmd) {
      const ExperimentConfig c = loadExperimentConfig(configPath);
      const FanBeamGeometry g = c.geometry.build();
      const AngularPartition p =
          partitionAngles(g, c.measuredStartDeg, c.measuredEndDeg);
      const Sinogram sino = io::readSinogram(sinoPath);
      checkSinogram(sino, g, p.measured);
      PriorContext ctx{&sino, &g, &p, c.grid, nullptr, c.exportBlock.scale};
      const ImageGrid prior = resolvePrior({PriorKind::File, priorPath, {}}, ctx);
      std::optional<ImageGrid> reference;
      if (!referencePath.empty())
        reference = io::readImage(referencePath, c.exportBlock.scale);
      const ReconResult r = dcarReconstruct(sino, prior, g, p, c.solver,
                                            reference ? &*reference : nullptr);
      io::writeImage(outPath, r.image);
      if (!reportPath.empty()) io::writeText(reportPath, formatReportCsv(r.report));
      if (reference)
        std::cout << "rmse_hu," << rmseHu(r.image, *reference, c.exportBlock.scale)
                  << '\n';
    } else if (*metrics) {
      const HuScale scale{muWater};
      const ImageGrid a = io::readImage(imagePath, scale);
      const ImageGrid b = io::readImage(referencePath, scale);
      std::cout << "rmse_hu," << rmseHu(a, b, scale) << '\n';
    } else if (*png) {
      const HuScale scale{muWater};
      io::writePng(outPath, io::readImage(imagePath, scale), scale, window[0],
                   window[1]);
    }
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigParse;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

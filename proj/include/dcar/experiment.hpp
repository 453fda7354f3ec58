#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"
#include "dcar/prior.hpp"
#include "dcar/simulate.hpp"
#include "dcar/solver.hpp"

namespace dcar {

struct GeometryBlock {
  double sid = 600.0;
  double sdd = 1200.0;
  int nBins = 310;
  double binSize = 2.0;
  double startDeg = 0.0;
  double endDeg = 210.0;
  double stepDeg = 1.0;

  FanBeamGeometry build() const;
};

enum class PhantomKind { Ellipses, SheppLogan, Abdomen, Random, File };

struct PhantomBlock {
  PhantomKind kind = PhantomKind::Abdomen;
  std::vector<EllipseSpec> ellipses;
  std::uint64_t seed = 0;
  std::string path;
  double radiusMm = 100.0;  // shepp-logan
};

struct NoiseBlock {
  bool enabled = false;
  double i0 = 1e5;
  std::uint64_t seed = 0;
};

enum class Method { Fbp, SartWtv, Dcar };

struct ExportBlock {
  HuScale scale;
  double windowLowHu = -1000.0;
  double windowHighHu = 1000.0;
};

struct ExperimentConfig {
  GeometryBlock geometry;
  GridSpec grid;
  PhantomBlock phantom;
  NoiseBlock noise;
  double measuredStartDeg = 30.0;
  double measuredEndDeg = 150.0;
  PriorSource prior;
  bool hasPrior = false;
  DcarConfig solver;
  Method method = Method::Dcar;
  std::filesystem::path outputDir;
  ExportBlock exportBlock;

  void validate() const;
};

/// Parses the JSON experiment format. Unknown keys, missing required blocks
/// and wrong types raise ConfigParseError; out-of-range values raise
/// ValidationError. Relative file paths resolve against baseDir.
ExperimentConfig parseExperimentConfig(const std::string& text,
                                       const std::filesystem::path& baseDir = {});
ExperimentConfig loadExperimentConfig(const std::filesystem::path& path);

/// The resolved config as JSON text; parseExperimentConfig accepts it back.
std::string dumpExperimentConfig(const ExperimentConfig& config);

std::string methodName(Method method);
Method parseMethod(const std::string& name);

struct RunSummary {
  std::string method;
  double rmseHu = 0.0;
  double priorRmseHu = std::nan("");  // dcar only
  double fbpRmseHu = 0.0;
  double measuredResidualRms = 0.0;
  double measuredResidualMaxAbs = 0.0;
  double measuredFractionAboveE1 = 0.0;
  int iterations = 0;
};

struct ExperimentOutput {
  ImageGrid groundTruth;
  Sinogram measured;
  ImageGrid reconstruction;
  std::optional<ImageGrid> prior;
  ReconReport report;
  RunSummary summary;
};

/// Ground truth image described by the phantom block.
ImageGrid buildPhantom(const ExperimentConfig& config);

/// phantom -> project -> (noise) -> method -> metrics. Writes artifacts when
/// config.outputDir is non-empty.
ExperimentOutput runExperiment(const ExperimentConfig& config);

/// Runs each config and returns one summary row per config, in order.
std::vector<RunSummary> compareExperiments(
    const std::vector<ExperimentConfig>& configs);

std::string formatReportCsv(const ReconReport& report);
std::string formatSummaryTable(const std::vector<RunSummary>& rows);
std::string summaryJson(const ExperimentConfig& config,
                        const RunSummary& summary);

/// CLI exit statuses.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfigParse = 2,
  kExitValidation = 3,
  kExitIo = 4,
  kExitNumeric = 5,
};

}  // namespace dcar

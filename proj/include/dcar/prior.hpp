#pragma once

#include <string>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"
#include "dcar/projector.hpp"
#include "dcar/simulate.hpp"

namespace dcar {

/// An ellipse perturbation of the ground truth, offset given in HU.
struct Corruption {
  double cx = 0.0, cy = 0.0;
  double ax = 1.0, ay = 1.0;
  double rotationDeg = 0.0;
  double offsetHu = 0.0;
};

enum class PriorKind { File, Zero, LimitedFbp, OracleCorrupted };

struct PriorSource {
  PriorKind kind = PriorKind::Zero;
  std::string path;                     // File
  std::vector<Corruption> corruptions;  // OracleCorrupted
};

/// Everything a prior provider may look at.
struct PriorContext {
  const Sinogram* measured = nullptr;  // rows = partition.measured
  const FanBeamGeometry* geometry = nullptr;
  const AngularPartition* partition = nullptr;
  GridSpec grid;
  const ImageGrid* groundTruth = nullptr;  // OracleCorrupted only
  HuScale scale;
};

ImageGrid resolvePrior(const PriorSource& source, const PriorContext& context);

PriorKind parsePriorKind(const std::string& name);
std::string priorKindName(PriorKind kind);

}  // namespace dcar

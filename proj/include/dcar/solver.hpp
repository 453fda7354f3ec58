#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"
#include "dcar/projector.hpp"

namespace dcar {

/// Backtracking settings for the wTV gradient descent. The trial step starts
/// at initialStep times the image dynamic range, applied along the gradient
/// scaled to unit max-norm.
struct LineSearch {
  double initialStep = 1.0;
  double shrink = 0.5;
  double sufficientDecrease = 1e-4;
  int maxBacktracks = 20;
};

struct DcarConfig {
  double e1 = 0.001;  // measured-data tolerance, line-integral units
  double e2 = 0.5;    // prior-projection tolerance, line-integral units
  double lambda = 0.8;
  double epsilonHu = 5.0;
  int outerIterations = 50;
  int tvStepsPerOuter = 5;
  LineSearch lineSearch;
  bool enforceNonnegativity = true;
  HuScale scale;

  void validate() const;
};

/// Smoothing inside the gradient magnitude, mm^-1.
inline constexpr double kGradientSmoothing = 1e-8;

inline double softThreshold(double x, double tau) {
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x < 0.0 ? -mag : mag;
}

struct WtvState {
  GridSpec grid;
  std::vector<double> weights;
};

/// Smoothed forward-difference gradient magnitude per pixel. The last
/// column/row replicates its neighbour, so its difference is zero.
std::vector<double> gradientMagnitude(const ImageGrid& image);

WtvState wtvWeights(const ImageGrid& image, double epsilonHu,
                    const HuScale& scale);
double wtvValue(const ImageGrid& image, const WtvState& state);
/// Analytic gradient of wtvValue with the weights held fixed.
ImageGrid wtvGradient(const ImageGrid& image, const WtvState& state);

struct DescentTrace {
  std::vector<double> values;  // wtvValue before the first step, then after each
  int skippedSteps = 0;
};

ImageGrid wtvDescent(const ImageGrid& image, const WtvState& state,
                     const LineSearch& lineSearch, int steps,
                     DescentTrace* trace = nullptr);

/// Precomputed row and per-angle column sums for one geometry and grid.
class SystemSums {
 public:
  SystemSums(const FanBeamGeometry& geometry, const GridSpec& grid);

  std::span<const double> rays(std::size_t angleIndex) const;
  std::span<const double> pixels(std::size_t angleIndex) const;

 private:
  int nBins_;
  std::size_t nPixels_;
  std::vector<double> rays_;
  std::vector<double> pixels_;
};

/// Projections a sweep fits to: measured rows, and optionally prior rows.
struct SweepTargets {
  const Sinogram* measured = nullptr;     // rows = partition.measured
  const Sinogram* priorProjections = nullptr;  // rows = partition.unmeasured
};

/// One soft-thresholded SART pass over every angle that has a target, in
/// ascending angle order. Without prior projections unmeasured angles are
/// skipped.
ImageGrid sartSweep(const ImageGrid& image, const SweepTargets& targets,
                    const FanBeamGeometry& geometry,
                    const AngularPartition& partition, const DcarConfig& config,
                    const SystemSums* sums = nullptr);

struct IterationRecord {
  int iteration = 0;
  double measuredResidualRms = 0.0;
  double priorResidualRms = 0.0;  // NaN without a prior term
  double wtvValue = 0.0;
  double rmseHu = std::nan("");   // NaN without a reference
  DescentTrace descent;
};

struct ReconReport {
  std::vector<IterationRecord> iterations;
};

struct ReconResult {
  ImageGrid image;
  ReconReport report;
};

ReconResult dcarReconstruct(const Sinogram& measured, const ImageGrid& prior,
                            const FanBeamGeometry& geometry,
                            const AngularPartition& partition,
                            const DcarConfig& config,
                            const ImageGrid* reference = nullptr);

/// SART + wTV from a zero image using the measured term only.
ReconResult sartWtvBaseline(const Sinogram& measured, const GridSpec& grid,
                            const FanBeamGeometry& geometry,
                            const AngularPartition& partition,
                            const DcarConfig& config,
                            const ImageGrid* reference = nullptr);

}  // namespace dcar

#include "dcar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcar/errors.hpp"
#include "dcar/metrics.hpp"

namespace dcar {

void DcarConfig::validate() const {
  if (!(e1 >= 0.0)) throw ValidationError("solver.e1 must be >= 0");
  if (!(e2 >= 0.0)) throw ValidationError("solver.e2 must be >= 0");
  if (!(lambda >= 0.0 && lambda < 2.0))
    throw ValidationError("solver.lambda must lie in [0, 2)");
  if (!(epsilonHu > 0.0)) throw ValidationError("solver.epsilon_hu must be > 0");
  if (outerIterations < 0)
    throw ValidationError("solver.outer_iterations must be >= 0");
  if (tvStepsPerOuter < 1)
    throw ValidationError("solver.tv_steps_per_outer must be >= 1");
  if (!(lineSearch.initialStep > 0.0))
    throw ValidationError("solver.line_search.initial_step must be > 0");
  if (!(lineSearch.shrink > 0.0 && lineSearch.shrink < 1.0))
    throw ValidationError("solver.line_search.shrink must lie in (0, 1)");
  if (!(lineSearch.sufficientDecrease > 0.0 &&
        lineSearch.sufficientDecrease < 1.0))
    throw ValidationError(
        "solver.line_search.sufficient_decrease must lie in (0, 1)");
  if (lineSearch.maxBacktracks < 0)
    throw ValidationError("solver.line_search.max_backtracks must be >= 0");
  scale.validate();
}

std::vector<double> gradientMagnitude(const ImageGrid& image) {
  const int nx = image.nx(), ny = image.ny();
  std::vector<double> mag(image.size());
  const double d2 = kGradientSmoothing * kGradientSmoothing;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double f = image(ix, iy);
      const double gx = ix + 1 < nx ? image(ix + 1, iy) - f : 0.0;
      const double gy = iy + 1 < ny ? image(ix, iy + 1) - f : 0.0;
      mag[image.index(ix, iy)] = std::sqrt(gx * gx + gy * gy + d2);
    }
  }
  return mag;
}

WtvState wtvWeights(const ImageGrid& image, double epsilonHu,
                    const HuScale& scale) {
  if (!(epsilonHu > 0.0)) throw ValidationError("epsilonHu must be > 0");
  scale.validate();
  const double eps = scale.deltaToMu(epsilonHu);
  WtvState state{image.spec(), gradientMagnitude(image)};
  for (double& w : state.weights) w = 1.0 / (w + eps);
  return state;
}

namespace {

void checkState(const ImageGrid& image, const WtvState& state) {
  if (!(image.spec() == state.grid) || state.weights.size() != image.size())
    throw ValidationError("wTV weights were computed on a different grid");
}

}  // namespace

double wtvValue(const ImageGrid& image, const WtvState& state) {
  checkState(image, state);
  const std::vector<double> mag = gradientMagnitude(image);
  double sum = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) sum += state.weights[i] * mag[i];
  return sum;
}

ImageGrid wtvGradient(const ImageGrid& image, const WtvState& state) {
  checkState(image, state);
  const int nx = image.nx(), ny = image.ny();
  const std::vector<double> mag = gradientMagnitude(image);
  const auto& w = state.weights;
  ImageGrid grad(image.spec());
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t j = image.index(ix, iy);
      const double f = image[j];
      double g = 0.0;
      // Own term: N_j depends on f_j through both forward differences.
      double own = 0.0;
      if (ix + 1 < nx) own += image(ix + 1, iy) - f;
      if (iy + 1 < ny) own += image(ix, iy + 1) - f;
      g -= w[j] * own / mag[j];
      // Neighbours whose forward difference ends at f_j.
      if (ix > 0) {
        const std::size_t l = j - 1;
        g += w[l] * (f - image[l]) / mag[l];
      }
      if (iy > 0) {
        const std::size_t d = j - static_cast<std::size_t>(nx);
        g += w[d] * (f - image[d]) / mag[d];
      }
      grad[j] = g;
    }
  }
  return grad;
}

ImageGrid wtvDescent(const ImageGrid& image, const WtvState& state,
                     const LineSearch& lineSearch, int steps,
                     DescentTrace* trace) {
  if (steps < 1) throw ValidationError("wtvDescent: steps must be >= 1");
  ImageGrid current = image;
  double value = wtvValue(current, state);
  if (trace) {
    trace->values.assign(1, value);
    trace->skippedSteps = 0;
  }
  for (int step = 0; step < steps; ++step) {
    const ImageGrid grad = wtvGradient(current, state);
    double gmax = 0.0, gnorm2 = 0.0;
    for (double g : grad.values()) {
      gmax = std::max(gmax, std::abs(g));
      gnorm2 += g * g;
    }
    const double range = current.maxValue() - current.minValue();
    bool accepted = false;
    if (gmax > 0.0 && range > 0.0) {
      const double slope = gnorm2 / gmax;  // <grad, grad / gmax>
      double t = lineSearch.initialStep * range;
      ImageGrid trial(current.spec());
      for (int b = 0; b <= lineSearch.maxBacktracks; ++b) {
        for (std::size_t i = 0; i < trial.size(); ++i)
          trial[i] = current[i] - t * grad[i] / gmax;
        const double trialValue = wtvValue(trial, state);
        if (trialValue <= value - lineSearch.sufficientDecrease * t * slope) {
          current = std::move(trial);
          value = trialValue;
          accepted = true;
          break;
        }
        t *= lineSearch.shrink;
      }
    }
    if (trace) {
      trace->values.push_back(value);
      if (!accepted) ++trace->skippedSteps;
    }
  }
  return current;
}

SystemSums::SystemSums(const FanBeamGeometry& geometry, const GridSpec& grid)
    : nBins_(geometry.nBins), nPixels_(grid.size()) {
  const std::size_t nAngles = geometry.angleCount();
  rays_.resize(nAngles * nBins_);
  pixels_.resize(nAngles * nPixels_);
  const ImageGrid ones(grid, 1.0);
  for (std::size_t a = 0; a < nAngles; ++a) {
    detail::forwardProjectAngle(
        ones, geometry, a,
        std::span<double>(rays_).subspan(a * nBins_, nBins_));
    const ImageGrid p = pixelSums(geometry, a, grid);
    std::copy(p.values().begin(), p.values().end(),
              pixels_.begin() + static_cast<std::ptrdiff_t>(a * nPixels_));
  }
}

std::span<const double> SystemSums::rays(std::size_t angleIndex) const {
  return std::span<const double>(rays_).subspan(angleIndex * nBins_, nBins_);
}

std::span<const double> SystemSums::pixels(std::size_t angleIndex) const {
  return std::span<const double>(pixels_).subspan(angleIndex * nPixels_,
                                                  nPixels_);
}

ImageGrid sartSweep(const ImageGrid& image, const SweepTargets& targets,
                    const FanBeamGeometry& geometry,
                    const AngularPartition& partition, const DcarConfig& config,
                    const SystemSums* sums) {
  config.validate();
  partition.validate(geometry);
  if (!targets.measured)
    throw ValidationError("sartSweep: measured projections are required");
  checkSinogram(*targets.measured, geometry, partition.measured);
  if (targets.priorProjections)
    checkSinogram(*targets.priorProjections, geometry, partition.unmeasured);

  std::optional<SystemSums> localSums;
  if (!sums) sums = &localSums.emplace(geometry, image.spec());

  // Row of each geometry angle inside its target sinogram, and its threshold.
  struct AngleTarget {
    std::span<const double> row;
    double tolerance;
  };
  std::vector<std::optional<AngleTarget>> plan(geometry.angleCount());
  for (std::size_t r = 0; r < partition.measured.size(); ++r)
    plan[partition.measured[r]] = AngleTarget{targets.measured->row(r), config.e1};
  if (targets.priorProjections)
    for (std::size_t r = 0; r < partition.unmeasured.size(); ++r)
      plan[partition.unmeasured[r]] =
          AngleTarget{targets.priorProjections->row(r), config.e2};

  ImageGrid current = image;
  ImageGrid correction(image.spec());
  std::vector<double> projection(geometry.nBins);
  std::vector<double> residual(geometry.nBins);

  for (std::size_t a = 0; a < geometry.angleCount(); ++a) {
    if (!plan[a]) continue;
    detail::forwardProjectAngle(current, geometry, a, projection);
    const auto rays = sums->rays(a);
    bool any = false;
    for (int k = 0; k < geometry.nBins; ++k) {
      double r = softThreshold(plan[a]->row[k] - projection[k], plan[a]->tolerance);
      r = rays[k] > 0.0 ? r / rays[k] : 0.0;
      residual[k] = r;
      any = any || r != 0.0;
    }
    if (!any) continue;

    std::fill(correction.values().begin(), correction.values().end(), 0.0);
    detail::backProjectAngleAdd(residual, geometry, a, correction);
    const auto pixels = sums->pixels(a);
    for (std::size_t j = 0; j < current.size(); ++j) {
      if (pixels[j] > 0.0) current[j] += config.lambda * correction[j] / pixels[j];
      if (config.enforceNonnegativity && current[j] < 0.0) current[j] = 0.0;
    }
    if (!current.allFinite())
      throw NumericError("non-finite value after SART update at angle " +
                         std::to_string(geometry.anglesDeg[a]) + " deg");
  }
  return current;
}

namespace {

ReconResult iterate(ImageGrid image, const SweepTargets& targets,
                    const FanBeamGeometry& geometry,
                    const AngularPartition& partition, const DcarConfig& config,
                    const ImageGrid* reference) {
  config.validate();
  partition.validate(geometry);
  checkSinogram(*targets.measured, geometry, partition.measured);
  if (reference && !(reference->spec() == image.spec()))
    throw ValidationError("reference image does not match the grid");

  ReconResult result{image, {}};
  if (config.outerIterations == 0) return result;

  const SystemSums sums(geometry, image.spec());
  for (int it = 0; it < config.outerIterations; ++it) {
    image = sartSweep(image, targets, geometry, partition, config, &sums);
    const WtvState state = wtvWeights(image, config.epsilonHu, config.scale);
    IterationRecord record;
    record.iteration = it + 1;
    image = wtvDescent(image, state, config.lineSearch, config.tvStepsPerOuter,
                       &record.descent);
    if (config.enforceNonnegativity)
      for (double& v : image.values()) v = std::max(v, 0.0);
    if (!image.allFinite())
      throw NumericError("non-finite value after wTV descent in iteration " +
                         std::to_string(it + 1));

    record.wtvValue = wtvValue(image, state);
    record.measuredResidualRms =
        residualStats(image, *targets.measured, geometry, partition.measured).rms;
    record.priorResidualRms =
        targets.priorProjections
            ? residualStats(image, *targets.priorProjections, geometry,
                            partition.unmeasured)
                  .rms
            : std::nan("");
    if (reference) record.rmseHu = rmseHu(image, *reference, config.scale);
    result.report.iterations.push_back(std::move(record));
  }
  result.image = std::move(image);
  return result;
}

}  // namespace

ReconResult dcarReconstruct(const Sinogram& measured, const ImageGrid& prior,
                            const FanBeamGeometry& geometry,
                            const AngularPartition& partition,
                            const DcarConfig& config,
                            const ImageGrid* reference) {
  config.validate();
  partition.validate(geometry);
  if (!prior.allFinite()) throw NumericError("prior image is not finite");
  const Sinogram priorProjections =
      forwardProject(prior, geometry, partition.unmeasured);
  const SweepTargets targets{&measured,
                             partition.unmeasured.empty() ? nullptr
                                                          : &priorProjections};
  return iterate(prior, targets, geometry, partition, config, reference);
}

ReconResult sartWtvBaseline(const Sinogram& measured, const GridSpec& grid,
                            const FanBeamGeometry& geometry,
                            const AngularPartition& partition,
                            const DcarConfig& config,
                            const ImageGrid* reference) {
  const SweepTargets targets{&measured, nullptr};
  return iterate(ImageGrid(grid), targets, geometry, partition, config,
                 reference);
}

}  // namespace dcar

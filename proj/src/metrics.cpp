#include "dcar/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dcar/errors.hpp"

namespace dcar {

EvalMask::EvalMask(GridSpec grid, std::vector<bool> include)
    : grid_(grid), include_(std::move(include)) {
  grid_.validate();
  if (include_.size() != grid_.size())
    throw ValidationError("mask size does not match grid");
  count_ = static_cast<std::size_t>(
      std::count(include_.begin(), include_.end(), true));
  if (count_ == 0) throw ValidationError("mask includes no pixels");
}

double rmseHu(const ImageGrid& image, const ImageGrid& reference,
              const HuScale& scale, const EvalMask* mask) {
  scale.validate();
  if (!(image.spec() == reference.spec()))
    throw ValidationError("rmseHu: image shapes differ");
  if (mask && !(mask->grid() == image.spec()))
    throw ValidationError("rmseHu: mask shape differs");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (mask && !mask->includes(i)) continue;
    // HU differences have no water offset.
    const double d = 1000.0 * (image[i] - reference[i]) / scale.muWater;
    sum += d * d;
    ++n;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

ResidualStats sinogramResidualStats(const Sinogram& sino, const Sinogram& other,
                                    double threshold) {
  if (sino.values.size() != other.values.size() || sino.nBins != other.nBins)
    throw ValidationError("residual: sinogram shapes differ");
  ResidualStats stats;
  if (sino.values.empty()) return stats;
  double sum = 0.0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < sino.values.size(); ++i) {
    const double r = sino.values[i] - other.values[i];
    sum += r * r;
    stats.maxAbs = std::max(stats.maxAbs, std::abs(r));
    if (std::abs(r) > threshold) ++above;
  }
  const auto n = static_cast<double>(sino.values.size());
  stats.rms = std::sqrt(sum / n);
  stats.fractionAbove = static_cast<double>(above) / n;
  return stats;
}

ResidualStats residualStats(const ImageGrid& image, const Sinogram& sino,
                            const FanBeamGeometry& geometry,
                            std::span<const std::size_t> angleSubset,
                            double threshold) {
  checkSinogram(sino, geometry, angleSubset);
  return sinogramResidualStats(sino, forwardProject(image, geometry, angleSubset),
                               threshold);
}

}  // namespace dcar

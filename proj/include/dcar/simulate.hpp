#pragma once

#include <cstdint>
#include <vector>

#include "dcar/grid.hpp"
#include "dcar/projector.hpp"

namespace dcar {

struct EllipseSpec {
  double cx = 0.0, cy = 0.0;  // mm
  double ax = 1.0, ay = 1.0;  // semi-axes, mm
  double rotationDeg = 0.0;
  double delta = 0.0;  // additive attenuation, mm^-1

  void validate() const;
  bool contains(double x, double y) const;
};

/// Sum of deltas of all ellipses containing each pixel center.
ImageGrid renderPhantom(const std::vector<EllipseSpec>& specs,
                        const GridSpec& grid);

/// Modified Shepp-Logan (Toft) ellipses with unit-disk coordinates scaled by
/// radiusMm and intensities multiplied by muScale.
std::vector<EllipseSpec> sheppLoganSpecs(double radiusMm, double muScale = 0.02);

/// Fixed abdomen-like slice: water body, fat rim, liver, kidneys, spine,
/// aorta and a low-contrast lesion.
std::vector<EllipseSpec> abdomenSpecs();

/// Ellipses of a random abdomen-like slice, deterministic in seed.
std::vector<EllipseSpec> randomAbdomenSpecs(std::uint64_t seed);

/// randomAbdomenSpecs rendered and clamped to [0, 0.06] mm^-1.
ImageGrid randomAbdomenPhantom(std::uint64_t seed, const GridSpec& grid = {});

struct NoiseModel {
  double i0 = 1e5;  // photons per bin before attenuation
  std::uint64_t seed = 0;

  void validate() const;
};

/// Poisson counts N ~ Poisson(i0 exp(-p)), p' = -ln(max(N,1)/i0). Each ray
/// draws from a generator keyed by (seed, angle row, bin), so the result does
/// not depend on traversal order.
Sinogram addPoissonNoise(const Sinogram& sino, const NoiseModel& model);

}  // namespace dcar

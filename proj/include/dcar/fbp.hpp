#pragma once

#include <span>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"
#include "dcar/projector.hpp"

namespace dcar {

/// Spatial-domain band-limited ramp kernel; taps[i] is offset i - halfWidth.
struct RampFilter {
  double spacing = 1.0;  // mm
  std::vector<double> taps;

  int halfWidth() const { return static_cast<int>(taps.size() / 2); }
  double tap(int offset) const { return taps[offset + halfWidth()]; }
};

/// Ram-Lak kernel with 2*nBins-1 taps (enough for a linear convolution of a
/// full detector row).
RampFilter ramLakKernel(int nBins, double binSize);

/// Flat-detector fan-beam FBP with cosine pre-weighting, Ram-Lak filtering
/// and 1/U^2 distance weighting. Arcs shorter than 360 deg are scaled by
/// 180/arc (clamped to [0.5, 1]) in place of short-scan weights.
ImageGrid fbpReconstruct(const Sinogram& sino, const FanBeamGeometry& geometry,
                         std::span<const std::size_t> angleSubset,
                         const GridSpec& grid);

}  // namespace dcar

#include "dcar/fbp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dcar/errors.hpp"

namespace dcar {

RampFilter ramLakKernel(int nBins, double binSize) {
  if (nBins <= 0) throw ValidationError("ramLakKernel: nBins must be positive");
  if (!(binSize > 0.0))
    throw ValidationError("ramLakKernel: binSize must be positive");
  RampFilter filter;
  filter.spacing = binSize;
  const int half = nBins - 1;
  filter.taps.assign(2 * half + 1, 0.0);
  const double b2 = binSize * binSize;
  for (int k = -half; k <= half; ++k) {
    double v = 0.0;
    if (k == 0) {
      v = 1.0 / (4.0 * b2);
    } else if (k % 2 != 0) {
      const double d = std::numbers::pi * k;
      v = -1.0 / (d * d * b2);
    }
    filter.taps[k + half] = v;
  }
  return filter;
}

ImageGrid fbpReconstruct(const Sinogram& sino, const FanBeamGeometry& geometry,
                         std::span<const std::size_t> angleSubset,
                         const GridSpec& grid) {
  checkSinogram(sino, geometry, angleSubset);
  grid.validate();
  const int nBins = geometry.nBins;
  const std::size_t nAngles = angleSubset.size();
  if (nAngles == 0) return ImageGrid(grid);

  // Rebin the detector to the isocenter plane.
  const double mag = geometry.sid / geometry.sdd;
  const double isoBin = geometry.binSize * mag;
  const RampFilter kernel = ramLakKernel(nBins, isoBin);

  double stepDeg = 1.0;
  if (nAngles > 1) {
    stepDeg = (geometry.anglesDeg[angleSubset.back()] -
               geometry.anglesDeg[angleSubset.front()]) /
              static_cast<double>(nAngles - 1);
  } else if (geometry.angleCount() > 1) {
    stepDeg = (geometry.anglesDeg.back() - geometry.anglesDeg.front()) /
              static_cast<double>(geometry.angleCount() - 1);
  }
  const double arcDeg = stepDeg * static_cast<double>(nAngles);
  const double redundancy = std::clamp(180.0 / arcDeg, 0.5, 1.0);
  const double dBeta = stepDeg * std::numbers::pi / 180.0;

  std::vector<double> cosine(nBins);
  for (int k = 0; k < nBins; ++k) {
    const double u = geometry.binCenter(k) * mag;
    cosine[k] = geometry.sid / std::hypot(geometry.sid, u);
  }

  // Filtered rows, scaled so backprojection only needs 1/U^2.
  Sinogram filtered = sino;
  const double rowScale = isoBin * dBeta * redundancy;
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < nAngles; ++a) {
    const auto in = sino.row(a);
    auto out = filtered.row(a);
    std::vector<double> weighted(nBins);
    for (int k = 0; k < nBins; ++k) weighted[k] = in[k] * cosine[k];
    for (int k = 0; k < nBins; ++k) {
      double acc = 0.0;
      for (int m = 0; m < nBins; ++m) acc += weighted[m] * kernel.tap(k - m);
      out[k] = acc * rowScale;
    }
  }

  ImageGrid image(grid);
  auto values = image.values();
  for (std::size_t a = 0; a < nAngles; ++a) {
    const double beta =
        geometry.anglesDeg[angleSubset[a]] * std::numbers::pi / 180.0;
    const double c = std::cos(beta), s = std::sin(beta);
    const auto row = filtered.row(a);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double y = grid.y(iy);
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = grid.x(ix);
        const double depth = geometry.sid - (x * c + y * s);
        if (depth <= 0.0) continue;
        const double lateral = -x * s + y * c;
        const double fk =
            geometry.binIndex(lateral * geometry.sdd / depth);
        const double fl = std::floor(fk);
        const int k0 = static_cast<int>(fl);
        if (k0 < -1 || k0 >= nBins) continue;
        const double w = fk - fl;
        double v = 0.0;
        if (k0 >= 0) v += (1.0 - w) * row[k0];
        if (k0 + 1 < nBins) v += w * row[k0 + 1];
        const double U = depth / geometry.sid;
        values[static_cast<std::size_t>(iy) * grid.nx + ix] += v / (U * U);
      }
    }
  }
  return image;
}

}  // namespace dcar

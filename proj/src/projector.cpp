#include "dcar/projector.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dcar/errors.hpp"

namespace dcar {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct AngleFrame {
  double c, s;       // source direction
  double sx, sy;     // source position
  double dx0, dy0;   // detector center
};

AngleFrame frameFor(const FanBeamGeometry& g, std::size_t angleIndex) {
  const double beta = g.anglesDeg[angleIndex] * kDegToRad;
  AngleFrame f;
  f.c = std::cos(beta);
  f.s = std::sin(beta);
  f.sx = g.sid * f.c;
  f.sy = g.sid * f.s;
  f.dx0 = -(g.sdd - g.sid) * f.c;
  f.dy0 = -(g.sdd - g.sid) * f.s;
  return f;
}

void checkFieldOfView(const FanBeamGeometry& geometry, const GridSpec& grid) {
  grid.validate();
  const double halfDiagonal =
      0.5 * std::hypot(grid.nx * grid.dx, grid.ny * grid.dy);
  if (!(halfDiagonal < geometry.sid))
    throw ValidationError(
        "image grid extends past the source orbit (half diagonal " +
        std::to_string(halfDiagonal) + " mm >= sid)");
}

void checkSubset(const FanBeamGeometry& geometry,
                 std::span<const std::size_t> subset) {
  for (std::size_t idx : subset)
    if (idx >= geometry.angleCount())
      throw ValidationError("angle index " + std::to_string(idx) +
                            " out of range");
}

}  // namespace

Sinogram::Sinogram(int nBins_, double binSize_, std::vector<double> angles,
                   double fill)
    : nBins(nBins_),
      binSize(binSize_),
      anglesDeg(std::move(angles)),
      values(anglesDeg.size() * static_cast<std::size_t>(nBins_), fill) {
  if (nBins <= 0 || !(binSize > 0.0))
    throw ValidationError("sinogram: nBins and binSize must be positive");
}

Sinogram makeSinogram(const FanBeamGeometry& geometry,
                      std::span<const std::size_t> angleSubset, double fill) {
  checkSubset(geometry, angleSubset);
  std::vector<double> angles;
  angles.reserve(angleSubset.size());
  for (std::size_t idx : angleSubset) angles.push_back(geometry.anglesDeg[idx]);
  return Sinogram(geometry.nBins, geometry.binSize, std::move(angles), fill);
}

void checkSinogram(const Sinogram& sino, const FanBeamGeometry& geometry,
                   std::span<const std::size_t> angleSubset) {
  checkSubset(geometry, angleSubset);
  if (sino.nBins != geometry.nBins)
    throw ValidationError("sinogram has " + std::to_string(sino.nBins) +
                          " bins, geometry has " +
                          std::to_string(geometry.nBins));
  if (std::abs(sino.binSize - geometry.binSize) > 1e-9 * geometry.binSize)
    throw ValidationError("sinogram bin size does not match geometry");
  if (sino.nAngles() != angleSubset.size())
    throw ValidationError("sinogram has " + std::to_string(sino.nAngles()) +
                          " angles, subset has " +
                          std::to_string(angleSubset.size()));
  if (sino.values.size() != sino.nAngles() * sino.nBins)
    throw ValidationError("sinogram value count does not match its shape");
  for (std::size_t a = 0; a < angleSubset.size(); ++a)
    if (std::abs(sino.anglesDeg[a] - geometry.anglesDeg[angleSubset[a]]) > 1e-6)
      throw ValidationError("sinogram angle " + std::to_string(a) +
                            " does not match geometry");
}

namespace detail {

void forwardProjectAngle(const ImageGrid& image, const FanBeamGeometry& geometry,
                         std::size_t angleIndex, std::span<double> out) {
  const AngleFrame fr = frameFor(geometry, angleIndex);
  const GridSpec& grid = image.spec();
  const int nx = grid.nx, ny = grid.ny;
  const double halfX = 0.5 * (nx - 1), halfY = 0.5 * (ny - 1);
  const auto values = image.values();

#pragma omp parallel for schedule(static)
  for (int k = 0; k < geometry.nBins; ++k) {
    const double u = geometry.binCenter(k);
    const double px = fr.dx0 - u * fr.s;
    const double py = fr.dy0 + u * fr.c;
    double dirX = px - fr.sx, dirY = py - fr.sy;
    const double length = std::hypot(dirX, dirY);
    dirX /= length;
    dirY /= length;

    double acc = 0.0;
    if (std::abs(dirX) >= std::abs(dirY)) {
      for (int ix = 0; ix < nx; ++ix) {
        const double t = (grid.x(ix) - fr.sx) / dirX;
        if (t < 0.0 || t > length) continue;
        const double fy = (fr.sy + t * dirY) / grid.dy + halfY;
        const double fl = std::floor(fy);
        const int i0 = static_cast<int>(fl);
        const double w = fy - fl;
        if (i0 >= 0 && i0 < ny) acc += (1.0 - w) * values[static_cast<std::size_t>(i0) * nx + ix];
        if (i0 + 1 >= 0 && i0 + 1 < ny) acc += w * values[static_cast<std::size_t>(i0 + 1) * nx + ix];
      }
      out[k] = acc * grid.dx / std::abs(dirX);
    } else {
      for (int iy = 0; iy < ny; ++iy) {
        const double t = (grid.y(iy) - fr.sy) / dirY;
        if (t < 0.0 || t > length) continue;
        const double fx = (fr.sx + t * dirX) / grid.dx + halfX;
        const double fl = std::floor(fx);
        const int i0 = static_cast<int>(fl);
        const double w = fx - fl;
        const std::size_t rowBase = static_cast<std::size_t>(iy) * nx;
        if (i0 >= 0 && i0 < nx) acc += (1.0 - w) * values[rowBase + i0];
        if (i0 + 1 >= 0 && i0 + 1 < nx) acc += w * values[rowBase + i0 + 1];
      }
      out[k] = acc * grid.dy / std::abs(dirY);
    }
  }
}

void backProjectAngleAdd(std::span<const double> row,
                         const FanBeamGeometry& geometry,
                         std::size_t angleIndex, ImageGrid& image) {
  const AngleFrame fr = frameFor(geometry, angleIndex);
  const GridSpec grid = image.spec();
  const double area = grid.dx * grid.dy;
  const int nBins = geometry.nBins;
  auto values = image.values();

#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < grid.ny; ++iy) {
    const double y = grid.y(iy);
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double x = grid.x(ix);
      const double along = x * fr.c + y * fr.s;
      const double lateral = -x * fr.s + y * fr.c;
      const double depth = geometry.sid - along;
      if (depth <= 0.0) continue;
      const double fk = geometry.binIndex(lateral * geometry.sdd / depth);
      const double fl = std::floor(fk);
      const int k0 = static_cast<int>(fl);
      if (k0 < -1 || k0 >= nBins) continue;
      const double w = fk - fl;
      double v = 0.0;
      if (k0 >= 0) v += (1.0 - w) * row[k0];
      if (k0 + 1 < nBins) v += w * row[k0 + 1];
      if (v == 0.0) continue;
      // Pixel area over the perpendicular ray spacing at this pixel.
      const double weight = area * geometry.sdd * std::hypot(depth, lateral) /
                            (geometry.binSize * depth * depth);
      values[static_cast<std::size_t>(iy) * grid.nx + ix] += weight * v;
    }
  }
}

}  // namespace detail

Sinogram forwardProject(const ImageGrid& image, const FanBeamGeometry& geometry,
                        std::span<const std::size_t> angleSubset) {
  checkFieldOfView(geometry, image.spec());
  Sinogram sino = makeSinogram(geometry, angleSubset);
  for (std::size_t a = 0; a < angleSubset.size(); ++a)
    detail::forwardProjectAngle(image, geometry, angleSubset[a], sino.row(a));
  return sino;
}

ImageGrid backProject(const Sinogram& sino, const FanBeamGeometry& geometry,
                      std::span<const std::size_t> angleSubset,
                      const GridSpec& grid) {
  checkSinogram(sino, geometry, angleSubset);
  checkFieldOfView(geometry, grid);
  ImageGrid image(grid);
  for (std::size_t a = 0; a < angleSubset.size(); ++a)
    detail::backProjectAngleAdd(sino.row(a), geometry, angleSubset[a], image);
  return image;
}

Sinogram raySums(const FanBeamGeometry& geometry,
                 std::span<const std::size_t> angleSubset,
                 const GridSpec& grid) {
  return forwardProject(ImageGrid(grid, 1.0), geometry, angleSubset);
}

ImageGrid pixelSums(const FanBeamGeometry& geometry, std::size_t angleIndex,
                    const GridSpec& grid) {
  if (angleIndex >= geometry.angleCount())
    throw ValidationError("angle index out of range");
  checkFieldOfView(geometry, grid);
  ImageGrid image(grid);
  const std::vector<double> ones(geometry.nBins, 1.0);
  detail::backProjectAngleAdd(ones, geometry, angleIndex, image);
  return image;
}

}  // namespace dcar

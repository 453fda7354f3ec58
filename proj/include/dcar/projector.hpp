#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"

namespace dcar {

/// Line integrals, one row of nBins values per angle.
struct Sinogram {
  int nBins = 0;
  double binSize = 0.0;
  std::vector<double> anglesDeg;
  std::vector<double> values;

  Sinogram() = default;
  Sinogram(int nBins, double binSize, std::vector<double> anglesDeg,
           double fill = 0.0);

  std::size_t nAngles() const { return anglesDeg.size(); }
  std::span<double> row(std::size_t a) {
    return std::span<double>(values).subspan(a * nBins, nBins);
  }
  std::span<const double> row(std::size_t a) const {
    return std::span<const double>(values).subspan(a * nBins, nBins);
  }
  double& at(std::size_t a, int bin) { return values[a * nBins + bin]; }
  double at(std::size_t a, int bin) const { return values[a * nBins + bin]; }
};

/// Empty sinogram laid out for the given subset of geometry angles.
Sinogram makeSinogram(const FanBeamGeometry& geometry,
                      std::span<const std::size_t> angleSubset,
                      double fill = 0.0);

/// Throws ValidationError unless sino rows correspond to angleSubset.
void checkSinogram(const Sinogram& sino, const FanBeamGeometry& geometry,
                   std::span<const std::size_t> angleSubset);

// Ray-driven Joseph projector: each ray is sampled once per pixel line of its
// dominant axis, with linear interpolation along the other axis. Pixels
// outside the grid contribute zero.
Sinogram forwardProject(const ImageGrid& image, const FanBeamGeometry& geometry,
                        std::span<const std::size_t> angleSubset);

// Pixel-driven backprojector with linear detector interpolation. Each
// contribution is scaled by the pixel area over the ray spacing at the pixel,
// so that it approximates the transpose of forwardProject.
ImageGrid backProject(const Sinogram& sino, const FanBeamGeometry& geometry,
                      std::span<const std::size_t> angleSubset,
                      const GridSpec& grid);

/// Row sums of the system matrix: forwardProject of an all-ones image.
Sinogram raySums(const FanBeamGeometry& geometry,
                 std::span<const std::size_t> angleSubset, const GridSpec& grid);

/// Per-angle column sums: backProject of an all-ones row at a single angle.
ImageGrid pixelSums(const FanBeamGeometry& geometry, std::size_t angleIndex,
                    const GridSpec& grid);

namespace detail {

/// Projects one angle into out (size nBins).
void forwardProjectAngle(const ImageGrid& image, const FanBeamGeometry& geometry,
                         std::size_t angleIndex, std::span<double> out);

/// Accumulates the backprojection of one detector row into image.
void backProjectAngleAdd(std::span<const double> row,
                         const FanBeamGeometry& geometry,
                         std::size_t angleIndex, ImageGrid& image);

}  // namespace detail

}  // namespace dcar

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dcar {

/// Shape and pixel spacing of a 2-D image. The isocenter sits at the
/// geometric center of the grid.
struct GridSpec {
  int nx = 128;
  int ny = 128;
  double dx = 2.5;  // mm
  double dy = 2.5;  // mm

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  /// Physical x coordinate (mm) of the center of column ix.
  double x(int ix) const { return (ix - 0.5 * (nx - 1)) * dx; }
  /// Physical y coordinate (mm) of the center of row iy.
  double y(int iy) const { return (iy - 0.5 * (ny - 1)) * dy; }

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Row-major 2-D image. Values are attenuation in mm^-1 unless a function
/// explicitly documents HU.
class ImageGrid {
 public:
  explicit ImageGrid(GridSpec spec, double fill = 0.0);
  ImageGrid(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  int nx() const { return spec_.nx; }
  int ny() const { return spec_.ny; }
  double dx() const { return spec_.dx; }
  double dy() const { return spec_.dy; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int ix, int iy) { return values_[index(ix, iy)]; }
  double operator()(int ix, int iy) const { return values_[index(ix, iy)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * spec_.nx + ix;
  }

  bool allFinite() const;
  double minValue() const;
  double maxValue() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

struct HuScale {
  double muWater = 0.02;  // mm^-1

  void validate() const;
  double toHu(double mu) const { return 1000.0 * (mu - muWater) / muWater; }
  double toMu(double hu) const { return muWater * (1.0 + hu / 1000.0); }
  /// Converts a HU difference (no water offset) to an attenuation difference.
  double deltaToMu(double deltaHu) const { return deltaHu * muWater / 1000.0; }
};

ImageGrid muToHu(const ImageGrid& image, const HuScale& scale);
ImageGrid huToMu(const ImageGrid& imageHu, const HuScale& scale);

}  // namespace dcar

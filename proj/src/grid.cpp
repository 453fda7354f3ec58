#include "dcar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcar/errors.hpp"

namespace dcar {

void GridSpec::validate() const {
  if (nx <= 0 || ny <= 0)
    throw ValidationError("grid: nx and ny must be positive");
  if (!(dx > 0.0) || !(dy > 0.0))
    throw ValidationError("grid: dx and dy must be positive");
}

ImageGrid::ImageGrid(GridSpec spec, double fill)
    : spec_(spec), values_((spec.validate(), spec.size()), fill) {}

ImageGrid::ImageGrid(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.size())
    throw ValidationError("image: value count " +
                          std::to_string(values_.size()) +
                          " does not match grid " + std::to_string(spec_.nx) +
                          "x" + std::to_string(spec_.ny));
}

bool ImageGrid::allFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ImageGrid::minValue() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ImageGrid::maxValue() const {
  return *std::max_element(values_.begin(), values_.end());
}

void HuScale::validate() const {
  if (!(muWater > 0.0) || !std::isfinite(muWater))
    throw ValidationError("muWater must be positive");
}

ImageGrid muToHu(const ImageGrid& image, const HuScale& scale) {
  scale.validate();
  ImageGrid out(image.spec());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = scale.toHu(image[i]);
  return out;
}

ImageGrid huToMu(const ImageGrid& imageHu, const HuScale& scale) {
  scale.validate();
  ImageGrid out(imageHu.spec());
  for (std::size_t i = 0; i < imageHu.size(); ++i)
    out[i] = scale.toMu(imageHu[i]);
  return out;
}

}  // namespace dcar

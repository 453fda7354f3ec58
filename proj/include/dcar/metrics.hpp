#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dcar/geometry.hpp"
#include "dcar/grid.hpp"
#include "dcar/projector.hpp"

namespace dcar {

class EvalMask {
 public:
  EvalMask(GridSpec grid, std::vector<bool> include);

  const GridSpec& grid() const { return grid_; }
  bool includes(std::size_t i) const { return include_[i]; }
  std::size_t count() const { return count_; }

 private:
  GridSpec grid_;
  std::vector<bool> include_;
  std::size_t count_ = 0;
};

double rmseHu(const ImageGrid& image, const ImageGrid& reference,
              const HuScale& scale, const EvalMask* mask = nullptr);

struct ResidualStats {
  double rms = 0.0;
  double maxAbs = 0.0;
  double fractionAbove = 0.0;  // fraction of rays with |residual| > threshold
};

ResidualStats residualStats(
    const ImageGrid& image, const Sinogram& sino,
    const FanBeamGeometry& geometry, std::span<const std::size_t> angleSubset,
    double threshold = std::numeric_limits<double>::infinity());

/// Statistics of sino - other, both laid out identically.
ResidualStats sinogramResidualStats(
    const Sinogram& sino, const Sinogram& other,
    double threshold = std::numeric_limits<double>::infinity());

}  // namespace dcar

#include "dcar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dcar/errors.hpp"

namespace dcar {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// SplitMix64 as a UniformRandomBitGenerator; cheap to construct per ray.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform double in [lo, hi) from the top 53 bits.
double uniform(SplitMix64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace

void EllipseSpec::validate() const {
  if (!(ax > 0.0) || !(ay > 0.0))
    throw ValidationError("ellipse semi-axes must be positive");
}

bool EllipseSpec::contains(double x, double y) const {
  const double t = rotationDeg * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  const double px = x - cx, py = y - cy;
  const double u = (px * c + py * s) / ax;
  const double v = (-px * s + py * c) / ay;
  return u * u + v * v <= 1.0;
}

ImageGrid renderPhantom(const std::vector<EllipseSpec>& specs,
                        const GridSpec& grid) {
  for (const auto& e : specs) e.validate();
  ImageGrid image(grid);
  for (int iy = 0; iy < grid.ny; ++iy) {
    const double y = grid.y(iy);
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double x = grid.x(ix);
      double v = 0.0;
      for (const auto& e : specs)
        if (e.contains(x, y)) v += e.delta;
      image(ix, iy) = v;
    }
  }
  return image;
}

std::vector<EllipseSpec> sheppLoganSpecs(double radiusMm, double muScale) {
  struct Row { double x0, y0, a, b, phi, value; };
  static constexpr Row kRows[] = {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
      {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},
      {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
      {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
  std::vector<EllipseSpec> specs;
  for (const Row& r : kRows)
    specs.push_back({r.x0 * radiusMm, r.y0 * radiusMm, r.a * radiusMm,
                     r.b * radiusMm, r.phi, r.value * muScale});
  return specs;
}

std::vector<EllipseSpec> abdomenSpecs() {
  return {
      {0.0, 0.0, 140.0, 100.0, 0.0, 0.0181},      // body, fat
      {0.0, -2.0, 128.0, 88.0, 0.0, 0.0023},      // soft tissue
      {-50.0, 20.0, 55.0, 45.0, 20.0, 0.0008},    // liver
      {70.0, 15.0, 25.0, 35.0, -30.0, 0.0006},    // spleen
      {-55.0, -35.0, 18.0, 28.0, 25.0, 0.0006},   // kidneys
      {55.0, -35.0, 18.0, 28.0, -25.0, 0.0006},
      {0.0, -60.0, 20.0, 18.0, 0.0, 0.014},       // vertebral body
      {0.0, -84.0, 6.0, 10.0, 0.0, 0.010},        // spinous process
      {12.0, -32.0, 10.0, 10.0, 0.0, 0.0012},     // aorta
      {40.0, 35.0, 14.0, 10.0, 15.0, -0.0194},    // bowel gas
      {-60.0, 25.0, 10.0, 10.0, 0.0, -0.0006},    // lesion
  };
}

std::vector<EllipseSpec> randomAbdomenSpecs(std::uint64_t seed) {
  SplitMix64 rng(splitmix(seed));
  std::vector<EllipseSpec> specs;
  const double bodyX = uniform(rng, 110.0, 145.0);
  const double bodyY = uniform(rng, 80.0, 105.0);
  specs.push_back({0.0, 0.0, bodyX, bodyY, uniform(rng, -10.0, 10.0), 0.02});
  const int count = 5 + static_cast<int>(rng() % 11);
  for (int i = 0; i < count; ++i) {
    EllipseSpec e;
    const double r = 0.7 * std::sqrt(uniform(rng, 0.0, 1.0));
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    e.cx = r * bodyX * std::cos(phi);
    e.cy = r * bodyY * std::sin(phi);
    e.ax = uniform(rng, 5.0, 35.0);
    e.ay = uniform(rng, 5.0, 35.0);
    e.rotationDeg = uniform(rng, 0.0, 180.0);
    e.delta = uniform(rng, -0.004, 0.02);
    specs.push_back(e);
  }
  return specs;
}

ImageGrid randomAbdomenPhantom(std::uint64_t seed, const GridSpec& grid) {
  ImageGrid image = renderPhantom(randomAbdomenSpecs(seed), grid);
  for (double& v : image.values()) v = std::clamp(v, 0.0, 0.06);
  return image;
}

void NoiseModel::validate() const {
  if (!(i0 > 0.0) || !std::isfinite(i0))
    throw ValidationError("noise: i0 must be positive");
}

Sinogram addPoissonNoise(const Sinogram& sino, const NoiseModel& model) {
  model.validate();
  for (std::size_t i = 0; i < sino.values.size(); ++i)
    if (!(sino.values[i] >= 0.0))
      throw ValidationError("noise: negative line integral at index " +
                            std::to_string(i));
  Sinogram out = sino;
  const std::size_t nAngles = sino.nAngles();
  const int nBins = sino.nBins;
  const double logI0 = std::log(model.i0);
  const std::uint64_t key = splitmix(model.seed);
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < nAngles; ++a) {
    for (int k = 0; k < nBins; ++k) {
      const double mean = model.i0 * std::exp(-sino.at(a, k));
      long long counts = 0;
      if (mean > 0.0) {
        SplitMix64 rng(splitmix(key ^ splitmix((static_cast<std::uint64_t>(a) << 32) |
                                               static_cast<std::uint32_t>(k))));
        std::poisson_distribution<long long> poisson(mean);
        counts = poisson(rng);
      }
      out.at(a, k) = logI0 - std::log(static_cast<double>(std::max(counts, 1LL)));
    }
  }
  return out;
}

}  // namespace dcar

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcar/errors.hpp"
#include "dcar/simulate.hpp"
#include "oracles.hpp"

using namespace dcar;

namespace {

// Uniform sinogram of nAngles x nBins with every ray set to p.
Sinogram flat(std::size_t nAngles, int nBins, double p) {
  std::vector<double> angles(nAngles);
  for (std::size_t i = 0; i < nAngles; ++i) angles[i] = double(i) * 0.1;
  Sinogram s(nBins, 1.0, angles);
  std::fill(s.values.begin(), s.values.end(), p);
  return s;
}

struct Moments {
  double mean = 0.0, variance = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= double(v.size());
  for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= double(v.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("ellipses add inside and vanish outside") {
  const GridSpec grid{21, 21, 1.0, 1.0};
  const ImageGrid img = renderPhantom(
      {{0, 0, 5, 5, 0, 0.02}, {3, 0, 1.5, 1.5, 0, 0.01}}, grid);
  CHECK(img(10, 10) == doctest::Approx(0.02));
  CHECK(img(13, 10) == doctest::Approx(0.03));
  CHECK(img(0, 0) == 0.0);
  CHECK(img(10, 16) == 0.0);

  // A 10x2 ellipse rotated by 90 degrees lies along the y axis.
  const ImageGrid rot = renderPhantom({{0, 0, 8, 2, 90, 1.0}}, grid);
  CHECK(rot(10, 17) == 1.0);
  CHECK(rot(17, 10) == 0.0);

  CHECK_THROWS_AS(renderPhantom({{0, 0, -1, 2, 0, 1.0}}, grid), ValidationError);
}

TEST_CASE("modified Shepp-Logan values at reference points") {
  // Reference values from the modified (Toft) table with unit intensity:
  // skull 1.0, brain 1 - 0.8 = 0.2, ventricles 0.0, upper blob 0.3.
  const GridSpec grid{201, 201, 1.0, 1.0};
  const ImageGrid img = renderPhantom(sheppLoganSpecs(100.0, 1.0), grid);
  auto at = [&](double x, double y) {
    return img(static_cast<int>(std::lround(x + 100)),
               static_cast<int>(std::lround(y + 100)));
  };
  CHECK(at(0, 0) == doctest::Approx(0.2));
  CHECK(at(0, 90) == doctest::Approx(1.0));
  CHECK(at(0, -90) == doctest::Approx(1.0));
  CHECK(std::abs(at(22, 0)) < 1e-12);
  CHECK(std::abs(at(-22, 0)) < 1e-12);
  CHECK(at(0, 35) == doctest::Approx(0.3));
  CHECK(at(0, -10) == doctest::Approx(0.3));
  CHECK(at(80, 80) == 0.0);

  const auto scaled = sheppLoganSpecs(100.0);
  CHECK(scaled.front().delta == doctest::Approx(0.02));
}

TEST_CASE("random phantoms are deterministic, varied and bounded") {
  const GridSpec grid;
  const ImageGrid a = randomAbdomenPhantom(11, grid);
  const ImageGrid b = randomAbdomenPhantom(11, grid);
  const ImageGrid c = randomAbdomenPhantom(12, grid);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] >= 0.0);
    CHECK(a[i] <= 0.06);
    if (a[i] != c[i]) ++differ;
  }
  CHECK(double(differ) / double(a.size()) >= 0.01);
}

TEST_CASE("zero line integrals stay near zero under noise") {
  const Sinogram s = flat(200, 500, 0.0);
  const Sinogram n = addPoissonNoise(s, {1e5, 1});
  CHECK(std::abs(moments(n.values).mean) < 3e-4);
}

TEST_CASE("a fully absorbed ray clamps to ln(i0)") {
  const Sinogram s = flat(2, 10, 200.0);
  const Sinogram n = addPoissonNoise(s, {1e4, 1});
  for (double v : n.values) CHECK(v == doctest::Approx(std::log(1e4)));
}

TEST_CASE("noise is reproducible from its seed") {
  const Sinogram s = flat(20, 50, 1.0);
  const Sinogram a = addPoissonNoise(s, {1e5, 42});
  const Sinogram b = addPoissonNoise(s, {1e5, 42});
  const Sinogram c = addPoissonNoise(s, {1e5, 43});
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("noisy line integrals match the Poisson log moments") {
  const double i0 = 1e4;
  for (double p : {1.0, 3.0}) {
    const Sinogram n = addPoissonNoise(flat(200, 500, p), {i0, 7});
    const Moments m = moments(n.values);
    const double mean = i0 * std::exp(-p);
    const double expected = p + oracle::expectedNegLogPoisson(mean);
    const double variance = oracle::varianceNegLogPoisson(mean);
    const double se = std::sqrt(variance / double(n.values.size()));
    CHECK(std::abs(m.mean - expected) < 4.0 * se);
    CHECK(m.variance == doctest::Approx(variance).epsilon(0.05).scale(0));
  }
  const double v1 = moments(addPoissonNoise(flat(50, 200, 1.0), {i0, 3}).values).variance;
  const double v3 = moments(addPoissonNoise(flat(50, 200, 3.0), {i0, 3}).values).variance;
  CHECK(v3 > v1);
}

TEST_CASE("noise rejects invalid input") {
  CHECK_THROWS_AS(addPoissonNoise(flat(2, 3, -0.1), {1e5, 0}), ValidationError);
  CHECK_THROWS_AS(addPoissonNoise(flat(2, 3, 1.0), {0.0, 0}), ValidationError);
}

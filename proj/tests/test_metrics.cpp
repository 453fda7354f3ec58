#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcar/errors.hpp"
#include "dcar/metrics.hpp"
#include "dcar/simulate.hpp"

using namespace dcar;

namespace {
const GridSpec kGrid{8, 8, 1.0, 1.0};
}

TEST_CASE("RMSE in HU on hand-computed examples") {
  const HuScale scale;
  const ImageGrid a(kGrid, 0.02);
  CHECK(rmseHu(a, a, scale) == 0.0);
  // 0.0002 mm^-1 is 10 HU at muWater = 0.02.
  const ImageGrid b(kGrid, 0.0202);
  CHECK(rmseHu(b, a, scale) == doctest::Approx(10.0));
  ImageGrid half = a;
  for (std::size_t i = 0; i < half.size(); i += 2) half[i] = 0.0202;
  CHECK(rmseHu(half, a, scale) == doctest::Approx(std::sqrt(50.0)));
  CHECK(rmseHu(b, a, HuScale{0.01}) == doctest::Approx(20.0));
}

TEST_CASE("RMSE is symmetric and scales linearly") {
  const HuScale scale;
  const GridSpec grid{64, 64, 5.0, 5.0};
  const ImageGrid ref = randomAbdomenPhantom(1, grid);
  const ImageGrid img = randomAbdomenPhantom(2, grid);
  const double d = rmseHu(img, ref, scale);
  CHECK(d > 0.0);
  CHECK(d == doctest::Approx(rmseHu(ref, img, scale)));
  ImageGrid scaled = ref;
  for (std::size_t i = 0; i < scaled.size(); ++i)
    scaled[i] = ref[i] + 3.0 * (img[i] - ref[i]);
  CHECK(rmseHu(scaled, ref, scale) == doctest::Approx(3.0 * d));
}

TEST_CASE("masks restrict the evaluation") {
  const HuScale scale;
  const ImageGrid a(kGrid, 0.02);
  ImageGrid b = a;
  b[0] = 0.03;
  std::vector<bool> keep(kGrid.size(), true);
  keep[0] = false;
  const EvalMask mask(kGrid, keep);
  CHECK(mask.count() == kGrid.size() - 1);
  CHECK(rmseHu(b, a, scale, &mask) == 0.0);
  CHECK(rmseHu(b, a, scale) > 0.0);

  CHECK_THROWS_AS(EvalMask(kGrid, std::vector<bool>(3, true)), ValidationError);
  CHECK_THROWS_AS(EvalMask(kGrid, std::vector<bool>(kGrid.size(), false)),
                  ValidationError);
  const EvalMask other(GridSpec{4, 4, 1, 1}, std::vector<bool>(16, true));
  CHECK_THROWS_AS(rmseHu(b, a, scale, &other), ValidationError);
  CHECK_THROWS_AS(rmseHu(ImageGrid(GridSpec{4, 4, 1, 1}), a, scale),
                  ValidationError);
}

TEST_CASE("sinogram residual statistics") {
  Sinogram a(4, 1.0, {0.0, 1.0});
  Sinogram b = a;
  b.values = {0, 0, 0, 0, 0.002, -0.003, 0, 0.0005};
  const ResidualStats s = sinogramResidualStats(a, b, 0.001);
  CHECK(s.maxAbs == doctest::Approx(0.003));
  CHECK(s.fractionAbove == doctest::Approx(0.25));
  CHECK(s.rms == doctest::Approx(std::sqrt((4e-6 + 9e-6 + 2.5e-7) / 8)));
  CHECK(sinogramResidualStats(a, a).rms == 0.0);
  CHECK_THROWS_AS(sinogramResidualStats(a, Sinogram(3, 1.0, {0.0, 1.0})),
                  ValidationError);
}

TEST_CASE("image residual statistics against its own projections") {
  const GridSpec grid{32, 32, 5.0, 5.0};
  const auto g = makeShortScanGeometry(600, 1200, 120, 2.0, 0, 210, 10);
  const auto subset = allAngles(g);
  const ImageGrid img = randomAbdomenPhantom(4, grid);
  Sinogram sino = forwardProject(img, g, subset);
  CHECK(residualStats(img, sino, g, subset, 1e-9).fractionAbove == 0.0);
  sino.at(0, 60) += 0.5;
  const ResidualStats s = residualStats(img, sino, g, subset, 0.1);
  CHECK(s.maxAbs == doctest::Approx(0.5));
  CHECK(s.fractionAbove == doctest::Approx(1.0 / double(sino.values.size())));
}

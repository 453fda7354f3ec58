#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <limits>

#include "dcar/errors.hpp"
#include "dcar/fbp.hpp"
#include "dcar/io.hpp"
#include "dcar/prior.hpp"

using namespace dcar;
namespace fs = std::filesystem;

namespace {

const GridSpec kGrid{64, 64, 5.0, 5.0};

fs::path scratchDir() {
  const fs::path dir = fs::temp_directory_path() / "dcar_test_prior";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (PriorKind k : {PriorKind::File, PriorKind::Zero, PriorKind::LimitedFbp,
                      PriorKind::OracleCorrupted})
    CHECK(parsePriorKind(priorKindName(k)) == k);
  CHECK_THROWS_AS(parsePriorKind("atlas"), ValidationError);
}

TEST_CASE("zero prior") {
  PriorContext ctx;
  ctx.grid = kGrid;
  const ImageGrid p = resolvePrior({PriorKind::Zero, "", {}}, ctx);
  CHECK(p.spec() == kGrid);
  for (double v : p.values()) CHECK(v == 0.0);
}

TEST_CASE("file prior loads, and rejects mismatched or broken files") {
  const fs::path dir = scratchDir();
  const ImageGrid truth = renderPhantom(abdomenSpecs(), kGrid);
  io::writeImage(dir / "prior.raw", truth);
  PriorContext ctx;
  ctx.grid = kGrid;
  const ImageGrid p =
      resolvePrior({PriorKind::File, (dir / "prior.raw").string(), {}}, ctx);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(p[i] == static_cast<double>(static_cast<float>(truth[i])));

  io::writeImage(dir / "small.raw", ImageGrid(GridSpec{32, 32, 5.0, 5.0}));
  CHECK_THROWS_AS(
      resolvePrior({PriorKind::File, (dir / "small.raw").string(), {}}, ctx),
      ValidationError);

  ImageGrid bad(kGrid);
  bad[10] = std::numeric_limits<double>::quiet_NaN();
  io::writeImage(dir / "nan.raw", bad);
  CHECK_THROWS_AS(
      resolvePrior({PriorKind::File, (dir / "nan.raw").string(), {}}, ctx),
      ValidationError);

  CHECK_THROWS_AS(
      resolvePrior({PriorKind::File, (dir / "missing.raw").string(), {}}, ctx),
      IoError);
}

TEST_CASE("limited-fbp prior is the FBP of the measured rows") {
  const auto g = makeShortScanGeometry(600, 1200, 200, 2.0, 0, 210, 3);
  const auto part = partitionAngles(g, 0, 120);
  const ImageGrid truth = renderPhantom(abdomenSpecs(), kGrid);
  const Sinogram measured = forwardProject(truth, g, part.measured);
  PriorContext ctx{&measured, &g, &part, kGrid, nullptr, {}};
  const ImageGrid p = resolvePrior({PriorKind::LimitedFbp, "", {}}, ctx);
  const ImageGrid direct = fbpReconstruct(measured, g, part.measured, kGrid);
  CHECK(std::equal(p.values().begin(), p.values().end(), direct.values().begin()));

  PriorContext empty;
  empty.grid = kGrid;
  CHECK_THROWS_AS(resolvePrior({PriorKind::LimitedFbp, "", {}}, empty),
                  ValidationError);
}

TEST_CASE("oracle-corrupted prior differs only inside the corruption") {
  const ImageGrid truth = renderPhantom(abdomenSpecs(), kGrid);
  PriorContext ctx;
  ctx.grid = kGrid;
  ctx.groundTruth = &truth;
  const Corruption disk{-20, 10, 15, 15, 0, -300};
  const ImageGrid p =
      resolvePrior({PriorKind::OracleCorrupted, "", {disk}}, ctx);
  int inside = 0;
  for (int iy = 0; iy < kGrid.ny; ++iy)
    for (int ix = 0; ix < kGrid.nx; ++ix) {
      const double x = kGrid.x(ix) + 20, y = kGrid.y(iy) - 10;
      if (x * x + y * y <= 15.0 * 15.0) {
        ++inside;
        CHECK(p(ix, iy) - truth(ix, iy) == doctest::Approx(-0.006));
      } else {
        CHECK(p(ix, iy) == truth(ix, iy));
      }
    }
  CHECK(inside > 20);

  PriorContext noTruth;
  noTruth.grid = kGrid;
  CHECK_THROWS_AS(resolvePrior({PriorKind::OracleCorrupted, "", {disk}}, noTruth),
                  ValidationError);
}

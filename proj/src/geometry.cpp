#include "dcar/geometry.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dcar/errors.hpp"

namespace dcar {

void FanBeamGeometry::validate() const {
  if (!(sid > 0.0) || !(sdd > sid))
    throw ValidationError("geometry: require 0 < sid < sdd");
  if (nBins <= 0) throw ValidationError("geometry: nBins must be positive");
  if (!(binSize > 0.0))
    throw ValidationError("geometry: binSize must be positive");
  if (anglesDeg.empty()) throw ValidationError("geometry: no angles");
  for (std::size_t i = 0; i < anglesDeg.size(); ++i) {
    const double a = anglesDeg[i];
    if (!(a >= 0.0 && a < 360.0))
      throw ValidationError("geometry: angle " + std::to_string(a) +
                            " outside [0, 360)");
    if (i > 0 && !(a > anglesDeg[i - 1]))
      throw ValidationError("geometry: angles must be strictly increasing");
  }
}

FanBeamGeometry makeShortScanGeometry(double sid, double sdd, int nBins,
                                      double binSize, double startDeg,
                                      double endDeg, double stepDeg) {
  if (!(stepDeg > 0.0)) throw ValidationError("geometry: step must be > 0");
  if (!(endDeg >= startDeg))
    throw ValidationError("geometry: empty angular range");
  // Tolerate accumulated rounding so that e.g. [0, 210] by 1 yields 211.
  const auto count =
      static_cast<std::size_t>(std::floor((endDeg - startDeg) / stepDeg + 1e-9)) + 1;
  FanBeamGeometry g;
  g.sid = sid;
  g.sdd = sdd;
  g.nBins = nBins;
  g.binSize = binSize;
  g.anglesDeg.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    g.anglesDeg.push_back(startDeg + static_cast<double>(i) * stepDeg);
  g.validate();
  return g;
}

void AngularPartition::validate(const FanBeamGeometry& geometry) const {
  if (measured.empty())
    throw ValidationError("partition: measured angle set is empty");
  std::vector<int> seen(geometry.angleCount(), 0);
  auto mark = [&](const std::vector<std::size_t>& set, const char* name) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i] >= seen.size())
        throw ValidationError(std::string("partition: ") + name +
                              " index out of range");
      if (i > 0 && set[i] <= set[i - 1])
        throw ValidationError(std::string("partition: ") + name +
                              " indices must be ascending");
      ++seen[set[i]];
    }
  };
  mark(measured, "measured");
  mark(unmeasured, "unmeasured");
  for (int s : seen)
    if (s != 1)
      throw ValidationError(
          "partition: measured and unmeasured must split the angle set");
}

AngularPartition partitionAngles(const FanBeamGeometry& geometry,
                                 double measStartDeg, double measEndDeg) {
  AngularPartition p;
  for (std::size_t i = 0; i < geometry.angleCount(); ++i) {
    const double a = geometry.anglesDeg[i];
    if (a >= measStartDeg - 1e-9 && a <= measEndDeg + 1e-9)
      p.measured.push_back(i);
    else
      p.unmeasured.push_back(i);
  }
  if (p.measured.empty())
    throw ValidationError("partition: measured range [" +
                          std::to_string(measStartDeg) + ", " +
                          std::to_string(measEndDeg) +
                          "] contains no geometry angle");
  return p;
}

std::vector<std::size_t> allAngles(const FanBeamGeometry& geometry) {
  std::vector<std::size_t> idx(geometry.angleCount());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace dcar

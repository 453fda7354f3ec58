#pragma once

#include <cstddef>
#include <vector>

namespace dcar {

/// Flat-detector fan-beam geometry. Source angles are counterclockwise in
/// degrees with 0 deg placing the source on the +x axis; the detector is
/// centered on the source-isocenter line.
struct FanBeamGeometry {
  double sid = 600.0;  // source to isocenter, mm
  double sdd = 1200.0;  // source to detector, mm
  int nBins = 310;
  double binSize = 2.0;  // mm
  std::vector<double> anglesDeg;

  void validate() const;
  std::size_t angleCount() const { return anglesDeg.size(); }
  /// Detector coordinate (mm) of the center of bin k.
  double binCenter(int k) const { return (k - 0.5 * (nBins - 1)) * binSize; }
  /// Fractional bin index of detector coordinate u.
  double binIndex(double u) const { return u / binSize + 0.5 * (nBins - 1); }
};

FanBeamGeometry makeShortScanGeometry(double sid, double sdd, int nBins,
                                      double binSize, double startDeg,
                                      double endDeg, double stepDeg);

/// Indices into FanBeamGeometry::anglesDeg, both ascending.
struct AngularPartition {
  std::vector<std::size_t> measured;
  std::vector<std::size_t> unmeasured;

  void validate(const FanBeamGeometry& geometry) const;
};

AngularPartition partitionAngles(const FanBeamGeometry& geometry,
                                 double measStartDeg, double measEndDeg);

/// 0, 1, ..., n-1 for a geometry with n angles.
std::vector<std::size_t> allAngles(const FanBeamGeometry& geometry);

}  // namespace dcar

#pragma once

#include <filesystem>
#include <string>

#include "dcar/grid.hpp"
#include "dcar/projector.hpp"

namespace dcar::io {

enum class ImageUnit { Mu, Hu };

/// Sidecar path for a raw file: the full file name with ".json" appended.
std::filesystem::path sidecarPath(const std::filesystem::path& raw);

/// Little-endian float32 row-major values plus a JSON sidecar
/// {nx, ny, dx_mm, dy_mm, unit}.
void writeImage(const std::filesystem::path& raw, const ImageGrid& image,
                ImageUnit unit = ImageUnit::Mu);
/// Loads an image and converts it to mm^-1 if the sidecar says HU.
ImageGrid readImage(const std::filesystem::path& raw,
                    const HuScale& scale = {});

/// Little-endian float32 values plus {nAngles, nBins, binSize_mm, angles_deg}.
void writeSinogram(const std::filesystem::path& raw, const Sinogram& sino);
Sinogram readSinogram(const std::filesystem::path& raw);

/// 16-bit grayscale PNG, HU window mapped linearly onto [0, 65535].
void writePng(const std::filesystem::path& png, const ImageGrid& image,
              const HuScale& scale = {}, double windowLowHu = -1000.0,
              double windowHighHu = 1000.0);

void writeText(const std::filesystem::path& path, const std::string& text);

}  // namespace dcar::io

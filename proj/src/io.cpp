#include "dcar/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "dcar/errors.hpp"

namespace dcar::io {

namespace {

using json = nlohmann::json;

void writeFloats(const std::filesystem::path& path,
                 std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b)
      bytes[4 * i + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> readFloats(const std::filesystem::path& path,
                               std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw IoError(path.string() + " is shorter than its sidecar declares");
  if (in.peek() != std::char_traits<char>::eof())
    throw IoError(path.string() + " is longer than its sidecar declares");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return values;
}

json readJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sidecar " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed sidecar " + path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key))
    throw IoError("sidecar " + path.string() + " lacks '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError("sidecar " + path.string() + " has a bad '" + key + "'");
  }
}

}  // namespace

std::filesystem::path sidecarPath(const std::filesystem::path& raw) {
  // Appended rather than substituted so "scan.raw" can never clobber a
  // "scan.json" config sitting next to it.
  auto p = raw;
  p += ".json";
  return p;
}

void writeText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void writeImage(const std::filesystem::path& raw, const ImageGrid& image,
                ImageUnit unit) {
  writeFloats(raw, image.values());
  json side = {{"nx", image.nx()},
               {"ny", image.ny()},
               {"dx_mm", image.dx()},
               {"dy_mm", image.dy()},
               {"unit", unit == ImageUnit::Mu ? "mm^-1" : "HU"}};
  writeText(sidecarPath(raw), side.dump(2) + "\n");
}

ImageGrid readImage(const std::filesystem::path& raw, const HuScale& scale) {
  const auto sidePath = sidecarPath(raw);
  const json side = readJson(sidePath);
  GridSpec spec{field<int>(side, "nx", sidePath), field<int>(side, "ny", sidePath),
                field<double>(side, "dx_mm", sidePath),
                field<double>(side, "dy_mm", sidePath)};
  const auto unit = field<std::string>(side, "unit", sidePath);
  if (unit != "mm^-1" && unit != "HU")
    throw IoError("sidecar " + sidePath.string() + " has unknown unit '" +
                  unit + "'");
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw IoError("sidecar " + sidePath.string() + ": " + e.what());
  }
  ImageGrid image(spec, readFloats(raw, spec.size()));
  if (unit == "HU") return huToMu(image, scale);
  return image;
}

void writeSinogram(const std::filesystem::path& raw, const Sinogram& sino) {
  writeFloats(raw, sino.values);
  json side = {{"nAngles", sino.nAngles()},
               {"nBins", sino.nBins},
               {"binSize_mm", sino.binSize},
               {"angles_deg", sino.anglesDeg}};
  writeText(sidecarPath(raw), side.dump(2) + "\n");
}

Sinogram readSinogram(const std::filesystem::path& raw) {
  const auto sidePath = sidecarPath(raw);
  const json side = readJson(sidePath);
  const auto nAngles = field<std::size_t>(side, "nAngles", sidePath);
  const auto nBins = field<int>(side, "nBins", sidePath);
  const auto binSize = field<double>(side, "binSize_mm", sidePath);
  auto angles = field<std::vector<double>>(side, "angles_deg", sidePath);
  if (angles.size() != nAngles)
    throw IoError("sidecar " + sidePath.string() +
                  ": angles_deg length differs from nAngles");
  if (nBins <= 0 || !(binSize > 0.0))
    throw IoError("sidecar " + sidePath.string() + ": bad detector shape");
  Sinogram sino(nBins, binSize, std::move(angles));
  sino.values = readFloats(raw, nAngles * static_cast<std::size_t>(nBins));
  return sino;
}

void writePng(const std::filesystem::path& pngPath, const ImageGrid& image,
              const HuScale& scale, double windowLowHu, double windowHighHu) {
  if (!(windowHighHu > windowLowHu))
    throw ValidationError("png window must have high > low");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(pngPath.c_str(), "wb"),
                                           &std::fclose);
  if (!fp) throw IoError("cannot open " + pngPath.string() + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  const int nx = image.nx(), ny = image.ny();
  // Top PNG row is the highest y so that +y points up in viewers.
  std::vector<png_byte> pixels(static_cast<std::size_t>(nx) * ny * 2);
  for (int iy = 0; iy < ny; ++iy) {
    const int pngRow = ny - 1 - iy;
    for (int ix = 0; ix < nx; ++ix) {
      const double hu = scale.toHu(image(ix, iy));
      const double t =
          std::clamp((hu - windowLowHu) / (windowHighHu - windowLowHu), 0.0, 1.0);
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      const std::size_t off = (static_cast<std::size_t>(pngRow) * nx + ix) * 2;
      pixels[off] = static_cast<png_byte>(v >> 8);
      pixels[off + 1] = static_cast<png_byte>(v & 0xFF);
    }
  }
  std::vector<png_bytep> rows(ny);
  for (int r = 0; r < ny; ++r)
    rows[r] = pixels.data() + static_cast<std::size_t>(r) * nx * 2;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + pngPath.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, nx, ny, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace dcar::io

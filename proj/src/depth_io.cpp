#include "sfmscale/depth_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

#include "sfmscale/error.hpp"
#include "text_util.hpp"

namespace sfmscale {

std::string_view DepthUnitName(DepthUnit unit) {
  switch (unit) {
    case DepthUnit::kMillimeters: return "millimeters";
    case DepthUnit::kUnscaled: return "unscaled";
    case DepthUnit::kDisparityPixels: return "disparity_pixels";
  }
  return "unknown";
}

DepthMap::DepthMap(ImageSize size, DepthUnit unit)
    : size_(size), unit_(unit), values_(size.area(), 0.0) {}

DepthMap::DepthMap(ImageSize size, DepthUnit unit, std::vector<double> values)
    : size_(size), unit_(unit), values_(std::move(values)) {
  if (size.width < 0 || size.height < 0 || values_.size() != size.area()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "depth map of " + std::to_string(size.width) + "x" +
                    std::to_string(size.height) + " given " +
                    std::to_string(values_.size()) + " values");
  }
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), IsValidValue));
}

DepthMap DepthMap::WithUnit(DepthUnit unit) const {
  DepthMap out = *this;
  out.unit_ = unit;
  return out;
}

bool DepthMap::SameContent(const DepthMap& other) const {
  if (size_ != other.size_ || unit_ != other.unit_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const bool va = valid(i);
    if (va != other.valid(i)) return false;
    if (va && values_[i] != other.values_[i]) return false;
  }
  return true;
}

namespace {

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                        '\r', '\n', 0x1a, '\n'};

[[noreturn]] void Unsupported(const std::filesystem::path& path,
                              const std::string& why) {
  throw Error(ErrorCode::kUnsupportedDepthFormat,
              path.string() + ": " + why);
}

std::vector<unsigned char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads one whitespace-delimited header token starting at `pos`.
std::string HeaderToken(const std::vector<unsigned char>& bytes,
                        std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

DepthMap DecodePfm(const std::vector<unsigned char>& bytes,
                   const std::filesystem::path& path, DepthUnit unit) {
  std::size_t pos = 0;
  const std::string magic = HeaderToken(bytes, pos);
  if (magic == "PF") Unsupported(path, "3-channel PF maps are not depth maps");
  if (magic != "Pf") Unsupported(path, "bad float-map magic");
  const auto width = detail::ParseNumber<int>(HeaderToken(bytes, pos));
  const auto height = detail::ParseNumber<int>(HeaderToken(bytes, pos));
  const auto scale = detail::ParseNumber<double>(HeaderToken(bytes, pos));
  if (!width || !height || !scale || *width <= 0 || *height <= 0 ||
      *scale == 0.0 || !std::isfinite(*scale)) {
    Unsupported(path, "malformed float-map header");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size()) Unsupported(path, "truncated float-map");
  ++pos;
  const ImageSize size{*width, *height};
  const std::size_t expected = size.area() * sizeof(float);
  if (bytes.size() - pos != expected) {
    Unsupported(path, "raster holds " + std::to_string(bytes.size() - pos) +
                          " bytes, expected " + std::to_string(expected));
  }
  const bool little_endian = *scale < 0.0;
  std::vector<double> values(size.area());
  for (int row = 0; row < size.height; ++row) {
    // Pf rows run bottom-to-top.
    const int v = size.height - 1 - row;
    for (int u = 0; u < size.width; ++u) {
      const std::size_t off =
          pos + (static_cast<std::size_t>(row) * size.width + u) * 4;
      std::uint32_t word = 0;
      if (little_endian) {
        word = std::uint32_t(bytes[off]) | std::uint32_t(bytes[off + 1]) << 8 |
               std::uint32_t(bytes[off + 2]) << 16 |
               std::uint32_t(bytes[off + 3]) << 24;
      } else {
        word = std::uint32_t(bytes[off + 3]) |
               std::uint32_t(bytes[off + 2]) << 8 |
               std::uint32_t(bytes[off + 1]) << 16 |
               std::uint32_t(bytes[off]) << 24;
      }
      const double d = std::bit_cast<float>(word);
      values[static_cast<std::size_t>(v) * size.width + u] =
          DepthMap::IsValidValue(d) ? d : 0.0;
    }
  }
  return DepthMap(size, unit, std::move(values));
}

struct PngReadSource {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

void PngReadCallback(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(out, src->bytes->data() + src->pos, n);
  src->pos += n;
}

DepthMap DecodePng16(const std::vector<unsigned char>& bytes,
                     const std::filesystem::path& path, DepthUnit unit) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::kIoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::string failure;
  ImageSize size;
  std::vector<double> values;
  std::vector<png_byte> raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Unsupported(path, "corrupt PNG");
  }
  PngReadSource src{&bytes, 0};
  png_set_read_fn(png, &src, PngReadCallback);
  png_read_info(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  const auto color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    failure = "PNG depth maps must be 16-bit single-channel grayscale";
  } else {
    size = {static_cast<int>(png_get_image_width(png, info)),
            static_cast<int>(png_get_image_height(png, info))};
    const std::size_t stride = png_get_rowbytes(png, info);
    raster.resize(stride * size.height);
    rows.resize(size.height);
    for (int v = 0; v < size.height; ++v) rows[v] = raster.data() + v * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    values.resize(size.area());
    for (int v = 0; v < size.height; ++v) {
      for (int u = 0; u < size.width; ++u) {
        // PNG samples are big-endian.
        const png_bytep p = rows[v] + 2 * u;
        const unsigned count = (unsigned(p[0]) << 8) | p[1];
        values[static_cast<std::size_t>(v) * size.width + u] =
            count / kPng16Scale;
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) Unsupported(path, failure);
  return DepthMap(size, unit, std::move(values));
}

void WritePfm(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  std::vector<unsigned char> raster(map.pixel_count() * 4);
  std::size_t off = 0;
  for (int v = map.height() - 1; v >= 0; --v) {
    for (int u = 0; u < map.width(); ++u) {
      const double d = map.at(u, v);
      const float f =
          DepthMap::IsValidValue(d) ? static_cast<float>(d) : 0.0f;
      const auto word = std::bit_cast<std::uint32_t>(f);
      raster[off++] = word & 0xff;
      raster[off++] = (word >> 8) & 0xff;
      raster[off++] = (word >> 16) & 0xff;
      raster[off++] = (word >> 24) & 0xff;
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write " + path.string());
}

void WritePng16(const DepthMap& map, const std::filesystem::path& path) {
  constexpr double kMaxValue = 65535.0 / kPng16Scale;
  std::vector<png_byte> raster(map.pixel_count() * 2);
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    unsigned count = 0;
    if (map.valid(i)) {
      if (map[i] > kMaxValue) {
        throw Error(ErrorCode::kValueOutOfRange,
                    "value " + detail::FormatDouble(map[i], 9) +
                        " exceeds the 16-bit PNG range of 65535/256");
      }
      count = static_cast<unsigned>(std::lround(map[i] * kPng16Scale));
    }
    raster[2 * i] = static_cast<png_byte>(count >> 8);
    raster[2 * i + 1] = static_cast<png_byte>(count & 0xff);
  }

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"),
                                            &std::fclose);
  if (!fp) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) throw Error(ErrorCode::kIoError, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "PNG encode failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, map.width(), map.height(), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(map.width()) * 2;
  for (int v = 0; v < map.height(); ++v) {
    png_write_row(png, raster.data() + v * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

DepthMap LoadDepth(const std::filesystem::path& path, DepthUnit expected_unit,
                   std::optional<ImageSize> expected_size) {
  const auto bytes = ReadAll(path);
  if (bytes.empty()) Unsupported(path, "empty file");
  DepthMap map;
  if (bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    map = DecodePng16(bytes, path, expected_unit);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' &&
             (bytes[1] == 'f' || bytes[1] == 'F')) {
    map = DecodePfm(bytes, path, expected_unit);
  } else {
    Unsupported(path, "neither a Pf float map nor a PNG");
  }
  if (expected_size && map.size() != *expected_size) {
    throw Error(ErrorCode::kDimensionMismatch,
                path.string() + ": " + std::to_string(map.width()) + "x" +
                    std::to_string(map.height()) + " but expected " +
                    std::to_string(expected_size->width) + "x" +
                    std::to_string(expected_size->height));
  }
  return map;
}

void SaveDepth(const DepthMap& map, const std::filesystem::path& path,
               DepthFileFormat format) {
  if (format == DepthFileFormat::kPfm) {
    WritePfm(map, path);
  } else {
    WritePng16(map, path);
  }
}

std::vector<std::size_t> ValidIntersection(const DepthMap& a,
                                           const DepthMap& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "maps differ in size: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    if (a.valid(i) && b.valid(i)) out.push_back(i);
  }
  return out;
}

}  // namespace sfmscale

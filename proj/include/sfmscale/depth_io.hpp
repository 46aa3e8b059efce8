#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sfmscale {

enum class DepthUnit { kMillimeters, kUnscaled, kDisparityPixels };

std::string_view DepthUnitName(DepthUnit unit);

struct ImageSize {
  int width = 0;
  int height = 0;

  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool operator==(const ImageSize&) const = default;
};

// Dense row-major scalar image. A pixel is valid iff its value is finite and
// strictly positive; validity is never stored separately.
class DepthMap {
 public:
  DepthMap() = default;
  // All pixels invalid (0).
  DepthMap(ImageSize size, DepthUnit unit);
  // Throws kDimensionMismatch when values.size() != width * height.
  DepthMap(ImageSize size, DepthUnit unit, std::vector<double> values);

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  ImageSize size() const { return size_; }
  DepthUnit unit() const { return unit_; }
  std::size_t pixel_count() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(int u, int v) const { return values_[index(u, v)]; }
  double& at(int u, int v) { return values_[index(u, v)]; }
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * size_.width + u;
  }

  static bool IsValidValue(double v) { return std::isfinite(v) && v > 0.0; }
  bool valid(std::size_t i) const { return IsValidValue(values_[i]); }
  std::size_t valid_count() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Copy with a different unit tag; values untouched.
  DepthMap WithUnit(DepthUnit unit) const;

  // Exact value equality, treating every invalid value as equal to any other.
  bool SameContent(const DepthMap& other) const;

 private:
  ImageSize size_{};
  DepthUnit unit_ = DepthUnit::kMillimeters;
  std::vector<double> values_;
};

enum class DepthFileFormat { kPfm, kPng16 };

// One png16 count is 1/256 of a unit.
inline constexpr double kPng16Scale = 256.0;

// Reads a single-channel Pf float map or a 16-bit grayscale PNG (value / 256).
// Invalid values (zero, negative, NaN, inf) are normalized to 0.
DepthMap LoadDepth(const std::filesystem::path& path, DepthUnit expected_unit,
                   std::optional<ImageSize> expected_size = std::nullopt);

// Pf output stores float32, little-endian, rows bottom-to-top. PNG output
// rounds to the nearest 1/256 unit; invalid pixels are written as 0.
void SaveDepth(const DepthMap& map, const std::filesystem::path& path,
               DepthFileFormat format);

// Indices where both maps are valid, ascending.
std::vector<std::size_t> ValidIntersection(const DepthMap& a,
                                           const DepthMap& b);

}  // namespace sfmscale

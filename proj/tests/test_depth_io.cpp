#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include <png.h>

#include "doctest.h"
#include "sfmscale/depth_io.hpp"
#include "sfmscale/error.hpp"
#include "support/warp_oracle.hpp"

using namespace sfmscale;
namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

// Hand-rolled Pf writer so the reader is checked against bytes we control.
void WritePf(const fs::path& path, int w, int h, const std::vector<float>& rows,
             bool little_endian) {
  std::ofstream out(path, std::ios::binary);
  out << "Pf\n" << w << ' ' << h << '\n' << (little_endian ? "-1.0" : "1.0") << '\n';
  // Pf rows run bottom to top.
  for (int r = h - 1; r >= 0; --r) {
    for (int c = 0; c < w; ++c) {
      float f = rows[static_cast<std::size_t>(r) * w + c];
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      if (!little_endian) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
}

void WriteRawPng16(const fs::path& path, int w, int h,
                   const std::vector<std::uint16_t>& values) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  REQUIRE(fp);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(2 * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint16_t v = values[y * w + x];
      row[2 * x] = v >> 8;
      row[2 * x + 1] = v & 0xff;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

TEST_CASE("depth map validity is derived") {
  DepthMap m({3, 2}, DepthUnit::kMillimeters,
             {1.0, 0.0, -2.0, std::numeric_limits<double>::quiet_NaN(),
              std::numeric_limits<double>::infinity(), 1e-300});
  CHECK(m.valid(0));
  CHECK_FALSE(m.valid(1));
  CHECK_FALSE(m.valid(2));
  CHECK_FALSE(m.valid(3));
  CHECK_FALSE(m.valid(4));
  CHECK(m.valid(5));
  CHECK(m.valid_count() == 2);
  CHECK(m.at(2, 1) == 1e-300);
  CHECK(CodeOf([] { DepthMap({2, 2}, DepthUnit::kMillimeters, {1.0, 2.0}); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("Pf example: [5, 0]") {
  const auto dir = testing::FreshTempDir("pf");
  WritePf(dir / "a.pfm", 2, 1, {5.0f, 0.0f}, true);
  const DepthMap m = LoadDepth(dir / "a.pfm", DepthUnit::kMillimeters);
  CHECK(m.width() == 2);
  CHECK(m.height() == 1);
  CHECK(m[0] == 5.0);
  CHECK_FALSE(m.valid(1));
  CHECK(m.valid_count() == 1);
  fs::remove_all(dir);
}

TEST_CASE("Pf row order and endianness") {
  const auto dir = testing::FreshTempDir("pf2");
  const std::vector<float> top_down = {1, 2, 3, 4, 5, 6};
  WritePf(dir / "le.pfm", 3, 2, top_down, true);
  WritePf(dir / "be.pfm", 3, 2, top_down, false);
  for (const char* name : {"le.pfm", "be.pfm"}) {
    const DepthMap m = LoadDepth(dir / name, DepthUnit::kMillimeters);
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(2, 0) == 3.0);
    CHECK(m.at(0, 1) == 4.0);
  }
  // NaN and negatives on disk load as invalid.
  WritePf(dir / "bad.pfm", 2, 1, {std::numeric_limits<float>::quiet_NaN(), -3.0f}, true);
  const DepthMap bad = LoadDepth(dir / "bad.pfm", DepthUnit::kMillimeters);
  CHECK(bad.valid_count() == 0);
  CHECK(bad[0] == 0.0);
  CHECK(bad[1] == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("PNG16 fixed point: 25600 -> 100 mm") {
  const auto dir = testing::FreshTempDir("png");
  WriteRawPng16(dir / "a.png", 2, 1, {25600, 0});
  const DepthMap m = LoadDepth(dir / "a.png", DepthUnit::kMillimeters);
  CHECK(m[0] == 100.0);
  CHECK_FALSE(m.valid(1));
  fs::remove_all(dir);
}

TEST_CASE("load errors") {
  const auto dir = testing::FreshTempDir("err");
  { std::ofstream(dir / "empty.pfm"); }
  CHECK(CodeOf([&] { LoadDepth(dir / "empty.pfm", DepthUnit::kMillimeters); }) ==
        ErrorCode::kUnsupportedDepthFormat);
  {
    std::ofstream out(dir / "color.pfm", std::ios::binary);
    out << "PF\n1 1\n-1.0\n";
    const float px[3] = {1, 2, 3};
    out.write(reinterpret_cast<const char*>(px), sizeof(px));
  }
  CHECK(CodeOf([&] { LoadDepth(dir / "color.pfm", DepthUnit::kMillimeters); }) ==
        ErrorCode::kUnsupportedDepthFormat);
  {
    std::ofstream out(dir / "junk.bin", std::ios::binary);
    out << "hello world";
  }
  CHECK(CodeOf([&] { LoadDepth(dir / "junk.bin", DepthUnit::kMillimeters); }) ==
        ErrorCode::kUnsupportedDepthFormat);
  WritePf(dir / "ok.pfm", 2, 1, {1, 2}, true);
  CHECK(CodeOf([&] {
          LoadDepth(dir / "ok.pfm", DepthUnit::kMillimeters, ImageSize{3, 1});
        }) == ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([&] { LoadDepth(dir / "missing.pfm", DepthUnit::kMillimeters); }) ==
        ErrorCode::kIoError);
  fs::remove_all(dir);
}

TEST_CASE("PNG16 out of range") {
  const auto dir = testing::FreshTempDir("range");
  DepthMap m({1, 1}, DepthUnit::kMillimeters, {65535.0 / 256.0 + 0.01});
  CHECK(CodeOf([&] { SaveDepth(m, dir / "x.png", DepthFileFormat::kPng16); }) ==
        ErrorCode::kValueOutOfRange);
  DepthMap edge({1, 1}, DepthUnit::kMillimeters, {65535.0 / 256.0});
  CHECK_NOTHROW(SaveDepth(edge, dir / "y.png", DepthFileFormat::kPng16));
  CHECK(LoadDepth(dir / "y.png", DepthUnit::kMillimeters)[0] == 65535.0 / 256.0);
  fs::remove_all(dir);
}

TEST_CASE("randomized round trips") {
  const auto dir = testing::FreshTempDir("rt");
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> val(0.01, 255.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const ImageSize size{dim(rng), dim(rng)};
    std::vector<double> v(size.area());
    std::vector<double> as_float(size.area());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = unit(rng);
      v[i] = r < 0.2 ? 0.0 : r < 0.25 ? -1.0 : r < 0.28 ? NAN : val(rng);
      as_float[i] = static_cast<float>(v[i]);
    }
    const DepthMap m(size, DepthUnit::kMillimeters, v);

    // Pf holds float32: values that are already floats survive bit-exactly.
    const DepthMap mf(size, DepthUnit::kMillimeters, as_float);
    SaveDepth(mf, dir / "m.pfm", DepthFileFormat::kPfm);
    const DepthMap pf = LoadDepth(dir / "m.pfm", DepthUnit::kMillimeters, size);
    CHECK(pf.SameContent(mf));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mf.valid(i)) {
        CHECK(std::memcmp(&pf.values()[i], &mf.values()[i], sizeof(double)) == 0);
      }
    }

    SaveDepth(m, dir / "m.png", DepthFileFormat::kPng16);
    const DepthMap png = LoadDepth(dir / "m.png", DepthUnit::kMillimeters, size);
    for (std::size_t i = 0; i < v.size(); ++i) {
      // Values below half a count round to zero and become invalid.
      const bool representable = m.valid(i) && m[i] >= 0.5 / kPng16Scale;
      CHECK(png.valid(i) == representable);
      if (representable) CHECK(std::abs(png[i] - m[i]) <= 1.0 / 256.0);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("valid intersection") {
  auto map = [](std::vector<double> v) {
    return DepthMap({static_cast<int>(v.size()), 1}, DepthUnit::kMillimeters, v);
  };
  CHECK(ValidIntersection(map({1, 0, 0}), map({0, 1, 0})).empty());
  CHECK(ValidIntersection(map({1, 0, 3}), map({1, 0, 3})) ==
        std::vector<std::size_t>{0, 2});
  CHECK(ValidIntersection(map({1, 1, 0}), map({0, 1, 1})) ==
        std::vector<std::size_t>{1});
  CHECK(CodeOf([&] { ValidIntersection(map({1}), map({1, 1})); }) ==
        ErrorCode::kDimensionMismatch);
}

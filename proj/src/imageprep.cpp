// Copyright 2026 The Semixup Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semixup/imageprep.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"

namespace semixup::imageprep {

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

LandmarkSet mirror(const LandmarkSet& lm, int width) {
  auto flip = [width](Point p) { return Point{static_cast<double>(width - 1) - p.x, p.y}; };
  return {flip(lm.joint_center), flip(lm.plateau_start), flip(lm.plateau_end)};
}

}  // namespace

Side parse_side(const std::string& s) {
  if (s == "left" || s == "L" || s == "l") return Side::kLeft;
  if (s == "right" || s == "R" || s == "r") return Side::kRight;
  throw Error(ErrorCode::kParseError, "unknown knee side '" + s + "'");
}

const char* to_string(Side side) { return side == Side::kLeft ? "left" : "right"; }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of empty array");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Image8 standardize_intensity(const RawImage& img) {
  if (!(img.spacing_mm > 0.0)) throw Error(ErrorCode::kDegenerateImage, "pixel spacing must be positive");
  if (img.pixels.empty()) throw Error(ErrorCode::kDegenerateImage, "empty image");
  std::vector<double> flat(img.pixels.data.begin(), img.pixels.data.end());
  const double lo = percentile(flat, 5.0);
  const double hi = percentile(std::move(flat), 99.0);
  if (hi <= lo) throw Error(ErrorCode::kDegenerateImage, "5th and 99th percentiles coincide");
  Image8 out(img.pixels.width, img.pixels.height);
  const double range = hi - lo;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(static_cast<double>(img.pixels.data[i]), lo, hi);
    out.data[i] = to_u8((v - lo) / range * 255.0);
  }
  return out;
}

double plateau_angle(const LandmarkSet& lm) {
  Point a = lm.plateau_start;
  Point b = lm.plateau_end;
  if (a.x == b.x && a.y == b.y) throw Error(ErrorCode::kParseError, "plateau endpoints coincide");
  if (b.x < a.x) std::swap(a, b);
  return std::atan2(b.y - a.y, b.x - a.x);
}

Point roi_source_point(const Point& center, double angle, int side, double u, double v) {
  const double du = u - side / 2.0;
  const double dv = v - side / 2.0;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {center.x + c * du - s * dv, center.y + s * du + c * dv};
}

Image8 crop_knee_roi(const Image8& img_in, const LandmarkSet& lm_in, double spacing_mm, Side side) {
  if (!(spacing_mm > 0.0)) throw Error(ErrorCode::kDegenerateImage, "pixel spacing must be positive");
  const Image8 img = side == Side::kLeft ? flip_horizontal(img_in) : img_in;
  const LandmarkSet lm = side == Side::kLeft ? mirror(lm_in, img_in.width) : lm_in;

  const Point& c = lm.joint_center;
  if (c.x < 0 || c.y < 0 || c.x > img.width - 1 || c.y > img.height - 1)
    throw Error(ErrorCode::kOutOfBounds, "joint center outside the image");

  const int roi = static_cast<int>(std::lround(kRoiSizeMm / spacing_mm));
  const double angle = plateau_angle(lm);

  // The padded canvas extends kImagePadding zero pixels beyond each border.
  const double min_coord = -kImagePadding;
  const double max_x = img.width - 1 + kImagePadding;
  const double max_y = img.height - 1 + kImagePadding;
  for (const auto& [u, v] : std::array<std::pair<int, int>, 4>{{{0, 0}, {roi - 1, 0}, {0, roi - 1}, {roi - 1, roi - 1}}}) {
    const Point p = roi_source_point(c, angle, roi, u, v);
    if (p.x < min_coord || p.y < min_coord || p.x > max_x || p.y > max_y)
      throw Error(ErrorCode::kOutOfBounds, "ROI exceeds the padded image");
  }

  Image8 out(roi, roi);
  for (int v = 0; v < roi; ++v) {
    for (int u = 0; u < roi; ++u) {
      const Point p = roi_source_point(c, angle, roi, u, v);
      out.at(u, v) = to_u8(sample_bilinear(img, p.x, p.y, Border::kZero));
    }
  }
  return out;
}

Image8 center_crop_resize(const Image8& roi, double spacing_mm) {
  const int side = static_cast<int>(std::lround(kCenterCropMm / spacing_mm));
  if (roi.width < side || roi.height < side)
    throw Error(ErrorCode::kTooSmall, "ROI smaller than " + std::to_string(side) + " px");
  const Image8 centered = crop(roi, (roi.width - side) / 2, (roi.height - side) / 2, side, side);
  const Image<double> resized = resize_bilinear(centered, kResizedSide, kResizedSide);
  Image8 out(kResizedSide, kResizedSide);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = to_u8(resized.data[i]);
  return out;
}

PatchPair extract_patch_pair(const Image8& img, int patch_side) {
  if (img.width < 2 * patch_side || img.height < img.height / 3 + patch_side)
    throw Error(ErrorCode::kTooSmall, "image too small for patch extraction");
  const int top = img.height / 3;
  const int medial_left = img.width - patch_side;
  PatchPair pair(patch_side);
  auto normalize = [](std::uint8_t v) { return static_cast<float>((v / 255.0 - 0.5) / 0.5); };
  for (int y = 0; y < patch_side; ++y) {
    for (int x = 0; x < patch_side; ++x) {
      pair.lateral.at(x, y) = normalize(img.at(x, top + y));
      pair.medial.at(x, y) = normalize(img.at(medial_left + patch_side - 1 - x, top + y));
    }
  }
  return pair;
}

PatchPair preprocess(const RawImage& img, const LandmarkSet& lm) {
  const Image8 std8 = standardize_intensity(img);
  const Image8 roi = crop_knee_roi(std8, lm, img.spacing_mm, img.side);
  const Image8 img300 = center_crop_resize(roi, img.spacing_mm);
  return extract_patch_pair(img300);
}

// --- file ingestion -------------------------------------------------------

namespace {

struct Sidecar {
  int width = 0;
  int height = 0;
  double spacing_mm = 0.0;
  Side side = Side::kRight;
};

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  auto s = p;
  s.replace_extension(".json");
  return s;
}

Sidecar read_sidecar(const std::filesystem::path& p, bool need_dims) {
  std::ifstream in(sidecar_path(p));
  if (!in) throw Error(ErrorCode::kMissingFile, "sidecar " + sidecar_path(p).string());
  nlohmann::json j;
  try {
    in >> j;
    Sidecar s;
    if (need_dims) {
      s.width = j.at("width").get<int>();
      s.height = j.at("height").get<int>();
    }
    s.spacing_mm = j.at("spacing_mm").get<double>();
    s.side = parse_side(j.at("side").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, sidecar_path(p).string() + ": " + e.what());
  }
}

void write_sidecar(const std::filesystem::path& p, const RawImage& img) {
  nlohmann::json j = {{"width", img.pixels.width},
                      {"height", img.pixels.height},
                      {"spacing_mm", img.spacing_mm},
                      {"side", to_string(img.side)}};
  std::ofstream(sidecar_path(p)) << j.dump(2) << "\n";
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image16 read_png16(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::kMissingFile, path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kParseError, "cannot decode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kParseError, "expected a grayscale PNG: " + path.string());
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buf(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image16 img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const png_byte* r = rows[y];
      img.at(x, y) = depth == 16 ? static_cast<std::uint16_t>((r[2 * x] << 8) | r[2 * x + 1])
                                 : static_cast<std::uint16_t>(r[x] * 257);
    }
  }
  return img;
}

void write_png16(const std::filesystem::path& path, const Image16& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "cannot encode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(2 * static_cast<std::size_t>(img.width));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      row[2 * x] = static_cast<png_byte>(img.at(x, y) >> 8);
      row[2 * x + 1] = static_cast<png_byte>(img.at(x, y) & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RawImage load_raw_image(const std::filesystem::path& path) {
  RawImage out;
  if (path.extension() == ".png") {
    out.pixels = read_png16(path);
    const Sidecar s = read_sidecar(path, false);
    out.spacing_mm = s.spacing_mm;
    out.side = s.side;
    return out;
  }
  const Sidecar s = read_sidecar(path, true);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  out.pixels = Image16(s.width, s.height);
  std::vector<unsigned char> bytes(out.pixels.size() * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error(ErrorCode::kParseError, path.string() + ": file shorter than width*height*2");
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels.data[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  out.spacing_mm = s.spacing_mm;
  out.side = s.side;
  return out;
}

void save_raw_image(const std::filesystem::path& path, const RawImage& img) {
  if (path.extension() == ".png") {
    write_png16(path, img.pixels);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    for (std::uint16_t v : img.pixels.data) {
      const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
      out.write(reinterpret_cast<const char*>(b), 2);
    }
  }
  write_sidecar(path, img);
}

LandmarkTable load_landmarks(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path, {"image_id", "role", "x", "y"});
  struct Partial {
    std::optional<Point> center, start, end;
    std::string problem;
  };
  std::map<std::string, Partial> partial;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Partial& p = partial[row[0]];
    Point pt;
    try {
      pt = {parse_double(row[2]), parse_double(row[3])};
    } catch (const Error&) {
      p.problem = "line " + std::to_string(table.line_numbers[r]) + ": bad coordinate";
      continue;
    }
    if (row[1] == "joint_center") {
      p.center = pt;
    } else if (row[1] == "plateau_start") {
      p.start = pt;
    } else if (row[1] == "plateau_end") {
      p.end = pt;
    } else {
      p.problem = "line " + std::to_string(table.line_numbers[r]) + ": unknown role '" + row[1] + "'";
    }
  }
  LandmarkTable out;
  for (auto& [id, p] : partial) {
    if (!p.problem.empty()) {
      out.problems[id] = p.problem;
    } else if (!p.center || !p.start || !p.end) {
      out.problems[id] = "incomplete landmark set";
    } else {
      out.complete[id] = LandmarkSet{*p.center, *p.start, *p.end};
    }
  }
  return out;
}

}  // namespace semixup::imageprep

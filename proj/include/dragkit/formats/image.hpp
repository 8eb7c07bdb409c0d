// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// 8-bit raster images and binary netpbm (P5 graymap / P6 pixmap) codecs.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"

namespace dragkit {

struct PixelImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = gray, 3 = RGB
  std::vector<std::uint8_t> pixels;

  PixelImage() = default;
  PixelImage(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      fail(ErrorCode::ShapeMismatch, "image must be non-empty with 1 or 3 channels");
  }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }

  PixelImage to_rgb() const {
    if (channels == 3) return *this;
    PixelImage out(width, height, 3);
    for (std::size_t i = 0; i < pixels.size(); ++i)
      out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = pixels[i];
    return out;
  }

  friend bool operator==(const PixelImage&, const PixelImage&) = default;
};

namespace netpbm {

namespace detail {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : b_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 1'000'000'000) throw_bad("header value too large");
      ++digits;
    }
    if (digits == 0) throw_bad("expected a number in header");
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

  [[noreturn]] static void throw_bad(const std::string& what) {
    fail(ErrorCode::MalformedSpec, "not a binary PGM/PPM image: " + what);
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 2;
};

}  // namespace detail

struct Header {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::size_t raster_offset = 0;
};

/// Parses and checks a binary P5/P6 header (maxval 255) without touching the
/// raster.
inline Header read_header(std::string_view bytes) {
  using detail::HeaderReader;
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    HeaderReader::throw_bad("missing P5/P6 magic");
  HeaderReader r(bytes);
  const long w = r.number(), h = r.number(), maxval = r.number();
  if (w <= 0 || h <= 0) HeaderReader::throw_bad("zero dimension");
  if (maxval != 255) HeaderReader::throw_bad("only maxval 255 is supported");
  if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()])))
    HeaderReader::throw_bad("missing separator before raster");
  return {static_cast<int>(w), static_cast<int>(h), bytes[1] == '5' ? 1 : 3, r.pos() + 1};
}

/// Decodes a binary P5 or P6 image with maxval 255.
inline PixelImage decode(std::string_view bytes) {
  const Header hd = read_header(bytes);
  const std::size_t need = static_cast<std::size_t>(hd.width) * hd.height * hd.channels;
  if (bytes.size() - hd.raster_offset < need) detail::HeaderReader::throw_bad("truncated raster");
  PixelImage img(hd.width, hd.height, hd.channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(hd.raster_offset), need, img.pixels.begin());
  return img;
}

/// P5 for gray images, P6 for RGB.
inline std::string encode(const PixelImage& img) {
  std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

/// Gray image with 255 on set cells and 0 elsewhere.
inline PixelImage mask_image(const BinaryMask& m) {
  PixelImage img(m.width(), m.height(), 1);
  for (std::size_t i = 0; i < m.size(); ++i) img.pixels[i] = m.data()[i] ? 255 : 0;
  return img;
}

}  // namespace netpbm

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MalformedSpec, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

inline PixelImage load_image(const std::filesystem::path& path) {
  return netpbm::decode(read_file(path));
}

}  // namespace dragkit

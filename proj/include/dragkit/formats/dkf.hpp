// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// DKF1 dense field container:
//   bytes 0..3   magic "DKF1"
//   bytes 4..15  u32 width, u32 height, u32 channels (little-endian)
//   then width * height * channels little-endian IEEE-754 f32, row-major,
//   channels interleaved per cell.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"

namespace dragkit::dkf {

inline constexpr std::string_view magic = "DKF1";

struct FieldData {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<float> values;

  friend bool operator==(const FieldData&, const FieldData&) = default;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

}  // namespace detail

inline std::string encode(const FieldData& f) {
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height * f.channels;
  if (f.values.size() != n) fail(ErrorCode::ShapeMismatch, "field payload does not match header");
  std::string out(magic);
  out.reserve(16 + 4 * n);
  detail::put_u32(out, f.width);
  detail::put_u32(out, f.height);
  detail::put_u32(out, f.channels);
  for (float v : f.values) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline FieldData decode(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != magic)
    fail(ErrorCode::MalformedSpec, "not a DKF1 field file");
  FieldData f;
  f.width = detail::get_u32(bytes, 4);
  f.height = detail::get_u32(bytes, 8);
  f.channels = detail::get_u32(bytes, 12);
  const std::uint64_t n = static_cast<std::uint64_t>(f.width) * f.height * f.channels;
  if (bytes.size() - 16 != n * 4) fail(ErrorCode::MalformedSpec, "DKF1 payload length mismatch");
  f.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.values[i] = std::bit_cast<float>(detail::get_u32(bytes, 16 + 4 * i));
  return f;
}

inline FieldData from_vector_field(const VectorField& field) {
  FieldData f{static_cast<std::uint32_t>(field.width()), static_cast<std::uint32_t>(field.height()),
              2, {}};
  f.values.reserve(field.size() * 2);
  for (const auto& v : field.data()) {
    f.values.push_back(static_cast<float>(v.x));
    f.values.push_back(static_cast<float>(v.y));
  }
  return f;
}

inline VectorField to_vector_field(const FieldData& f) {
  if (f.channels != 2) fail(ErrorCode::ShapeMismatch, "vector field needs 2 channels");
  VectorField out(static_cast<int>(f.width), static_cast<int>(f.height));
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = {f.values[2 * i], f.values[2 * i + 1]};
  return out;
}

}  // namespace dragkit::dkf

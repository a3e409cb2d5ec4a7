#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctreg/volume.hpp"

// CTV container (little-endian, no compression, no padding):
//   bytes 0..3   magic "CTV1"
//   bytes 4..15  nx, ny, nz as uint32
//   bytes 16..39 sx, sy, sz as IEEE binary64
//   bytes 40..   nx*ny*nz int16 voxels, x-fastest order

namespace ctreg {

struct ctv_format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ctv_bad_magic : ctv_format_error {
  using ctv_format_error::ctv_format_error;
};
struct ctv_truncated : ctv_format_error {
  using ctv_format_error::ctv_format_error;
};
struct ctv_payload_mismatch : ctv_format_error {
  using ctv_format_error::ctv_format_error;
};
struct ctv_invalid_header : ctv_format_error {
  using ctv_format_error::ctv_format_error;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void put_i16(std::string& out, std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::int16_t get_i16(const unsigned char* p) {
  const auto u = static_cast<std::uint16_t>(static_cast<std::uint16_t>(p[0]) |
                                            (static_cast<std::uint16_t>(p[1]) << 8));
  return static_cast<std::int16_t>(u);
}

}  // namespace detail

inline std::string encode_volume(const Volume3D& v) {
  std::string out;
  out.reserve(40 + 2 * v.size());
  out.append("CTV1");
  detail::put_u32(out, static_cast<std::uint32_t>(v.dims.x));
  detail::put_u32(out, static_cast<std::uint32_t>(v.dims.y));
  detail::put_u32(out, static_cast<std::uint32_t>(v.dims.z));
  detail::put_f64(out, v.spacing.x);
  detail::put_f64(out, v.spacing.y);
  detail::put_f64(out, v.spacing.z);
  for (voxel_t vx : v.voxels) detail::put_i16(out, vx);
  return out;
}

inline Volume3D decode_volume(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "CTV1") != 0)
    throw ctv_bad_magic("not a CTV1 file");
  if (bytes.size() < 40) throw ctv_truncated("CTV header truncated");

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t nx = detail::get_u32(p + 4);
  const std::uint32_t ny = detail::get_u32(p + 8);
  const std::uint32_t nz = detail::get_u32(p + 12);
  const double sx = detail::get_f64(p + 16);
  const double sy = detail::get_f64(p + 24);
  const double sz = detail::get_f64(p + 32);

  if (nx < 1 || ny < 1 || nz < 1)
    throw ctv_invalid_header("CTV dims must be >= 1");
  if (!(sx > 0.0) || !(sy > 0.0) || !(sz > 0.0))
    throw ctv_invalid_header("CTV spacing must be > 0");

  const std::uint64_t count =
      static_cast<std::uint64_t>(nx) * static_cast<std::uint64_t>(ny) * nz;
  const std::uint64_t want = 40 + 2 * count;
  if (bytes.size() < want)
    throw ctv_truncated("CTV payload shorter than nx*ny*nz voxels");
  if (bytes.size() > want)
    throw ctv_payload_mismatch("CTV payload longer than nx*ny*nz voxels");

  std::vector<voxel_t> data(count);
  for (std::uint64_t i = 0; i < count; ++i)
    data[i] = detail::get_i16(p + 40 + 2 * i);

  return Volume3D{{static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)},
                  {sx, sy, sz},
                  std::move(data)};
}

inline void save_volume(const Volume3D& v, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::string bytes = encode_volume(v);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline Volume3D load_volume(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return decode_volume(bytes);
}

/// Imports a bare little-endian int16 payload with caller-supplied geometry.
inline Volume3D import_raw(const std::string& path, Index3 dims, Vec3 spacing) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

  Volume3D out(dims, spacing);
  const std::uint64_t want = 2 * static_cast<std::uint64_t>(out.size());
  if (bytes.size() != want)
    throw ctv_payload_mismatch("raw payload is " + std::to_string(bytes.size()) +
                               " bytes, expected " + std::to_string(want));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.voxels[i] = detail::get_i16(p + 2 * i);
  return out;
}

}  // namespace ctreg

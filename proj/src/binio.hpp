#pragma once

// Little-endian binary stream helpers shared by the window and checkpoint
// formats. Readers throw DataError with the file path on truncation.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "temprel/errors.hpp"

namespace temprel::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_i32(std::ostream& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

inline void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t get_u32(std::istream& in, const std::string& context) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError(context + ": truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::int32_t get_i32(std::istream& in, const std::string& context) {
  return static_cast<std::int32_t>(get_u32(in, context));
}

inline std::uint64_t get_u64(std::istream& in, const std::string& context) {
  const std::uint64_t lo = get_u32(in, context);
  const std::uint64_t hi = get_u32(in, context);
  return lo | (hi << 32);
}

inline float get_f32(std::istream& in, const std::string& context) {
  const std::uint32_t bits = get_u32(in, context);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline double get_f64(std::istream& in, const std::string& context) {
  const std::uint64_t bits = get_u64(in, context);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::string get_str(std::istream& in, const std::string& context) {
  const std::uint32_t len = get_u32(in, context);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) throw DataError(context + ": truncated file");
  return s;
}

}  // namespace temprel::binio

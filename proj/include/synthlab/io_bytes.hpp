#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "synthlab/errors.hpp"

// Little-endian primitives shared by every binary artifact format. Written
// byte-wise so files are portable across host endianness.
namespace synthlab::io {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_f64_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64_le(out, bits);
}

inline std::uint32_t read_u32_le(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const int c = in.get();
    if (c < 0) throw IoError(std::string(what) + ": truncated u32");
    v |= static_cast<std::uint32_t>(c) << (8 * i);
  }
  return v;
}

inline std::uint64_t read_u64_le(std::istream& in, const char* what) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c < 0) throw IoError(std::string(what) + ": truncated u64");
    v |= static_cast<std::uint64_t>(c) << (8 * i);
  }
  return v;
}

inline double read_f64_le(std::istream& in, const char* what) {
  const std::uint64_t bits = read_u64_le(in, what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace synthlab::io

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fatigue/common.hpp"

namespace fatigue::io {

// Little-endian binary primitives. x86-only builds are little-endian already;
// the explicit byte handling keeps the file formats portable.

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) raise(ErrorCode::io_error, "write failed");
}

inline void read_bytes(std::istream& is, void* p, size_t n, const std::string& what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n)
    raise(ErrorCode::format_error, "truncated file while reading " + what);
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  write_bytes(os, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v;
  read_bytes(is, &v, sizeof(T), what);
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_pod<uint32_t>(os, static_cast<uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is, const std::string& what, uint32_t max_len = 1u << 28) {
  const uint32_t n = read_pod<uint32_t>(is, what + " length");
  if (n > max_len) raise(ErrorCode::format_error, what + ": implausible length");
  std::string s(n, '\0');
  if (n) read_bytes(is, s.data(), n, what);
  return s;
}

inline void write_magic(std::ostream& os, const char magic[4]) {
  write_bytes(os, magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[4], const std::string& path) {
  char got[4];
  read_bytes(is, got, 4, "magic");
  if (std::memcmp(got, magic, 4) != 0)
    raise(ErrorCode::format_error, path + ": bad magic (expected " + std::string(magic, 4) + ")");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(ErrorCode::io_error, "cannot open for reading: " + path);
  return is;
}

inline std::string read_text_file(const std::string& path) {
  auto is = open_in(path);
  std::string s((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return s;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  write_bytes(os, text.data(), text.size());
}

}  // namespace fatigue::io

#pragma once

// Small file helpers: atomic writes, little-endian float I/O, CSV splitting.

#include "asap/error.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace asap::io {

namespace fs = std::filesystem;

// Writes to `<path>.tmp` then renames over `path`.
inline void write_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename UInt>
UInt to_little(UInt v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    UInt r = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) r |= ((v >> (8 * i)) & 0xFF) << (8 * (sizeof(UInt) - 1 - i));
    return r;
  }
}

template <typename Float>
void append_le(std::string& buf, Float value) {
  using UInt = std::conditional_t<sizeof(Float) == 4, std::uint32_t, std::uint64_t>;
  const UInt bits = to_little(std::bit_cast<UInt>(value));
  char raw[sizeof(UInt)];
  std::memcpy(raw, &bits, sizeof(UInt));
  buf.append(raw, sizeof(UInt));
}

template <typename Float>
Float read_le(const char* p) {
  using UInt = std::conditional_t<sizeof(Float) == 4, std::uint32_t, std::uint64_t>;
  UInt bits;
  std::memcpy(&bits, p, sizeof(UInt));
  return std::bit_cast<Float>(to_little(bits));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// Shortest round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::FormatError, context + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::FormatError, context + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace asap::io

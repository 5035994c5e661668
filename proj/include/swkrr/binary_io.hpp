#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "swkrr/error.hpp"

namespace swkrr::binio {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap(T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  T value{};
  const auto offset = static_cast<std::uint64_t>(in.tellg());
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw FormatError(what + ": truncated", offset);
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  return value;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char got[4] = {};
  if (!in.read(got, 4)) throw FormatError(what + ": truncated header", 0);
  if (std::memcmp(got, magic, 4) != 0) throw FormatError(what + ": expected magic \"" + std::string(magic) + "\"", 0);
}

}  // namespace swkrr::binio

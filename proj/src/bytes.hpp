#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <vector>

namespace ribcage::detail {

template <typename T>
using UnsignedOf = std::conditional_t<
    sizeof(T) == 1, std::uint8_t,
    std::conditional_t<sizeof(T) == 2, std::uint16_t,
                       std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;

// Little-endian encode/decode independent of host byte order.
template <typename T>
void put_le(unsigned char* dst, T value) {
  const auto bits = std::bit_cast<UnsignedOf<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
  }
}

template <typename T>
T get_le(const unsigned char* src) {
  UnsignedOf<T> bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits = static_cast<UnsignedOf<T>>(bits | (static_cast<UnsignedOf<T>>(src[i]) << (8 * i)));
  }
  return std::bit_cast<T>(bits);
}

template <typename T>
void append_le(std::vector<unsigned char>& buf, T value) {
  const std::size_t off = buf.size();
  buf.resize(off + sizeof(T));
  put_le<T>(buf.data() + off, value);
}

}  // namespace ribcage::detail

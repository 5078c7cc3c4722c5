#pragma once

#include <cstddef>
#include <string_view>

namespace qe::utf8 {

/// Decodes the codepoint starting at s[i], advancing i past it. Returns
/// false (leaving i unspecified) on malformed input: bad continuation
/// bytes, overlong forms, surrogates, or values beyond U+10FFFF.
inline bool decode_next(std::string_view s, std::size_t& i, char32_t& cp) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    cp = b0;
    i += 1;
    return true;
  }
  std::size_t len;
  char32_t value;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    value = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    value = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    value = b0 & 0x07;
  } else {
    return false;
  }
  if (i + len > s.size()) return false;
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = byte(i + k);
    if ((b & 0xC0) != 0x80) return false;
    value = (value << 6) | (b & 0x3F);
  }
  static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
  if (value < min_for_len[len]) return false;               // overlong
  if (value >= 0xD800 && value <= 0xDFFF) return false;     // surrogate
  if (value > 0x10FFFF) return false;
  cp = value;
  i += len;
  return true;
}

inline bool validate(std::string_view s) {
  std::size_t i = 0;
  char32_t cp;
  while (i < s.size()) {
    if (!decode_next(s, i, cp)) return false;
  }
  return true;
}

}  // namespace qe::utf8

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kurdner {

/// Thrown when input bytes are not well-formed UTF-8.
struct InvalidEncoding : std::runtime_error {
    explicit InvalidEncoding(size_t byte_offset)
        : std::runtime_error("invalid UTF-8 sequence at byte " + std::to_string(byte_offset)),
          offset(byte_offset) {}
    size_t offset;
};

namespace uni {

// Strict UTF-8 decoding: rejects overlong forms, surrogates and
// out-of-range scalars. Throws InvalidEncoding.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view codepoints);

// Canonical composition over the Arabic block (the only compositions
// relevant to Sorani text; ASCII has none). Combining marks are first
// put in canonical order by combining class, then starter+mark pairs
// are composed. Idempotent.
std::u32string compose_arabic(std::u32string_view text);

inline bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_arabic_indic_digit(char32_t c) {
    return (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9);
}

inline bool is_digit(char32_t c) { return is_ascii_digit(c) || is_arabic_indic_digit(c); }

constexpr char32_t kZwnj = 0x200C;

}  // namespace uni
}  // namespace kurdner

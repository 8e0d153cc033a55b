#include "kurdner/unicode.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace kurdner::uni {

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    size_t i = 0;
    const auto n = bytes.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len;
        char32_t cp;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            throw InvalidEncoding(i);
        }
        if (i + len > n) throw InvalidEncoding(i);
        for (int k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) throw InvalidEncoding(i + k);
            cp = (cp << 6) | (bk & 0x3F);
        }
        // Overlong forms, surrogates, and > U+10FFFF are all invalid.
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            throw InvalidEncoding(i);
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view codepoints) {
    std::string out;
    out.reserve(codepoints.size() * 2);
    for (char32_t cp : codepoints) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

namespace {

// Canonical combining classes for the Arabic-script marks that occur in
// practice. Everything else is treated as a starter (ccc 0).
int combining_class(char32_t c) {
    switch (c) {
        case 0x064B: return 27;  // fathatan
        case 0x064C: return 28;  // dammatan
        case 0x064D: return 29;  // kasratan
        case 0x064E: return 30;  // fatha
        case 0x064F: return 31;  // damma
        case 0x0650: return 32;  // kasra
        case 0x0651: return 33;  // shadda
        case 0x0652: return 34;  // sukun
        case 0x0653: return 230; // maddah above
        case 0x0654: return 230; // hamza above
        case 0x0655: return 220; // hamza below
        case 0x0656: return 220; // subscript alef
        case 0x0670: return 35;  // superscript alef
        default: break;
    }
    if (c >= 0x06D6 && c <= 0x06DC) return 230;
    if (c >= 0x06DF && c <= 0x06E2) return 230;
    if (c == 0x06E3) return 220;
    if (c == 0x06E4) return 230;
    if (c == 0x06E7 || c == 0x06E8) return 230;
    if (c == 0x06EA) return 220;
    if (c >= 0x06EB && c <= 0x06EC) return 230;
    if (c == 0x06ED) return 220;
    return 0;
}

// The canonical (starter, mark) -> composite pairs of the Arabic block.
constexpr std::array<std::array<char32_t, 3>, 8> kCompositions = {{
    {0x0627, 0x0653, 0x0622},  // alef + maddah        -> alef with maddah
    {0x0627, 0x0654, 0x0623},  // alef + hamza above   -> alef with hamza above
    {0x0648, 0x0654, 0x0624},  // waw + hamza above    -> waw with hamza above
    {0x0627, 0x0655, 0x0625},  // alef + hamza below   -> alef with hamza below
    {0x064A, 0x0654, 0x0626},  // yeh + hamza above    -> yeh with hamza above
    {0x06D5, 0x0654, 0x06C0},  // ae + hamza above     -> heh with yeh above
    {0x06C1, 0x0654, 0x06C2},  // heh goal + hamza     -> heh goal with hamza
    {0x06D2, 0x0654, 0x06D3},  // yeh barree + hamza   -> yeh barree with hamza
}};

char32_t compose_pair(char32_t starter, char32_t mark) {
    for (const auto& e : kCompositions)
        if (e[0] == starter && e[1] == mark) return e[2];
    return 0;
}

}  // namespace

std::u32string compose_arabic(std::u32string_view text) {
    std::u32string s(text);

    // Canonical ordering: stable-sort each run of non-starters by ccc.
    size_t i = 0;
    while (i < s.size()) {
        if (combining_class(s[i]) == 0) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < s.size() && combining_class(s[j]) != 0) ++j;
        std::stable_sort(s.begin() + i, s.begin() + j,
                         [](char32_t a, char32_t b) { return combining_class(a) < combining_class(b); });
        i = j;
    }

    // Pairwise composition; a mark is blocked if a mark of >= ccc sits
    // between it and the starter.
    std::u32string out;
    out.reserve(s.size());
    for (size_t k = 0; k < s.size(); ++k) {
        const char32_t c = s[k];
        if (combining_class(c) == 0 || out.empty()) {
            out.push_back(c);
            continue;
        }
        // Locate the starter of the current run in `out`.
        size_t starter = out.size();
        while (starter > 0 && combining_class(out[starter - 1]) != 0) --starter;
        if (starter == 0 && combining_class(out[0]) != 0) {
            out.push_back(c);
            continue;
        }
        starter = (starter == out.size()) ? out.size() - 1 : starter - 1;
        bool blocked = false;
        for (size_t m = starter + 1; m < out.size(); ++m)
            if (combining_class(out[m]) >= combining_class(c)) blocked = true;
        const char32_t composite = blocked ? 0 : compose_pair(out[starter], c);
        if (composite != 0)
            out[starter] = composite;
        else
            out.push_back(c);
    }
    return out;
}

}  // namespace kurdner::uni

#include "kurdner/text.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace kurdner {

namespace {

constexpr std::array<char32_t, 17> kPunctuation = {
    U'.', U',', U';', U':', U'!', U'?',
    0x060C,  // Arabic comma
    0x061B,  // Arabic semicolon
    0x061F,  // Arabic question mark
    0x00AB, 0x00BB,  // guillemets
    U'(', U')', U'[', U']', U'"', U'\'',
};

constexpr std::array<char32_t, 6> kTerminators = {U'.', U'!', U'?', 0x061F, 0x061B, U'\n'};

std::string cp_to_utf8(char32_t c) { return uni::encode_utf8(std::u32string(1, c)); }

void record(std::vector<AuditRecord>* audit, const char* op, size_t pos, char32_t before,
            char32_t after) {
    if (!audit) return;
    audit->push_back({op, pos, cp_to_utf8(before), after == 0 ? std::string() : cp_to_utf8(after)});
}

}  // namespace

bool is_punctuation(char32_t c) {
    return std::find(kPunctuation.begin(), kPunctuation.end(), c) != kPunctuation.end();
}

bool is_sentence_terminator(char32_t c) {
    return std::find(kTerminators.begin(), kTerminators.end(), c) != kTerminators.end();
}

CharMap CharMap::kurdish_defaults() {
    CharMap m;
    m.entries_ = {
        {0x0643, 0x06A9},  // Arabic kaf      -> keheh
        {0x0649, 0x06CC},  // alef maksura    -> Farsi yeh
        {0x064A, 0x06CC},  // Arabic yeh      -> Farsi yeh
        {0x06C0, 0x06D5},  // heh + yeh above -> ae
    };
    return m;
}

CharMap CharMap::load_tsv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open character map: " + file.string());
    CharMap m;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("character map line " + std::to_string(line_no) +
                                     ": expected source_hex<TAB>target_hex");
        const auto parse_hex = [&](const std::string& s) {
            return static_cast<char32_t>(std::stoul(s, nullptr, 16));
        };
        m.entries_.emplace_back(parse_hex(line.substr(0, tab)), parse_hex(line.substr(tab + 1)));
    }
    std::sort(m.entries_.begin(), m.entries_.end());
    return m;
}

bool CharMap::contains(char32_t c) const {
    return std::any_of(entries_.begin(), entries_.end(), [c](auto& e) { return e.first == c; });
}

char32_t CharMap::target(char32_t c) const {
    for (const auto& [src, dst] : entries_)
        if (src == c) return dst;
    return c;
}

std::string Normalizer::normalize_codepoints(std::string_view text,
                                             std::vector<AuditRecord>* audit) const {
    std::u32string cps = uni::decode_utf8(text);
    for (size_t i = 0; i < cps.size(); ++i) {
        const char32_t t = map_.target(cps[i]);
        if (t != cps[i]) {
            record(audit, "codepoints", i, cps[i], t);
            cps[i] = t;
        }
    }
    return uni::encode_utf8(cps);
}

std::string Normalizer::normalize_digits(std::string_view text,
                                         std::vector<AuditRecord>* audit) const {
    std::u32string cps = uni::decode_utf8(text);
    for (size_t i = 0; i < cps.size(); ++i) {
        char32_t t = cps[i];
        if (t >= 0x0660 && t <= 0x0669) t = U'0' + (t - 0x0660);
        else if (t >= 0x06F0 && t <= 0x06F9) t = U'0' + (t - 0x06F0);
        if (t != cps[i]) {
            record(audit, "digits", i, cps[i], t);
            cps[i] = t;
        }
    }
    return uni::encode_utf8(cps);
}

std::string Normalizer::strip_zwnj(std::string_view text, std::vector<AuditRecord>* audit) const {
    std::u32string cps = uni::decode_utf8(text);
    std::u32string out;
    out.reserve(cps.size());
    for (size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == uni::kZwnj) {
            record(audit, "zwnj", i, cps[i], 0);
            continue;
        }
        out.push_back(cps[i]);
    }
    return uni::encode_utf8(out);
}

std::string Normalizer::space_punctuation(std::string_view text) const {
    // Split into atoms (punctuation char | digit run | space run | other
    // run), then re-join with a single space wherever two adjacent atoms
    // touch and either side is punctuation or a digit run. String
    // boundaries gain no padding, which makes the operation idempotent.
    enum class Kind { punct, digits, space, other };
    struct Atom {
        Kind kind;
        std::u32string s;
    };
    const std::u32string cps = uni::decode_utf8(text);
    std::vector<Atom> atoms;
    size_t i = 0;
    while (i < cps.size()) {
        const char32_t c = cps[i];
        if (is_punctuation(c)) {
            atoms.push_back({Kind::punct, std::u32string(1, c)});
            ++i;
        } else {
            Kind kind = uni::is_digit(c) ? Kind::digits : (c == U' ' ? Kind::space : Kind::other);
            const auto same = [&](char32_t x) {
                if (kind == Kind::digits) return uni::is_digit(x);
                if (kind == Kind::space) return x == U' ';
                return !uni::is_digit(x) && x != U' ' && !is_punctuation(x);
            };
            size_t j = i;
            while (j < cps.size() && same(cps[j])) ++j;
            atoms.push_back({kind, cps.substr(i, j - i)});
            i = j;
        }
    }

    std::u32string out;
    out.reserve(cps.size() + atoms.size());
    Kind prev_solid = Kind::other;  // kind of the last non-space atom emitted
    for (const auto& a : atoms) {
        if (a.kind == Kind::space) {
            if (out.empty() || out.back() != U' ') out.push_back(U' ');
            continue;
        }
        const bool needs_gap = a.kind != Kind::other || prev_solid != Kind::other;
        if (!out.empty() && out.back() != U' ' && needs_gap) out.push_back(U' ');
        out.append(a.s);
        prev_solid = a.kind;
    }
    return uni::encode_utf8(out);
}

std::string Normalizer::normalize(std::string_view text, std::vector<AuditRecord>* audit) const {
    std::string s = uni::encode_utf8(uni::decode_utf8(text));  // throws on malformed input

    // The codepoint-level steps feed each other: composition can build a
    // mapped codepoint (ae + hamza -> U+06C0), the map can re-expose a
    // composable pair, and removing a ZWNJ makes its neighbours adjacent.
    // Iterate composition -> map -> ZWNJ removal to a fixed point so the
    // whole pipeline is idempotent; with the default table this converges
    // in two rounds (each extra round consumes a combining mark or a ZWNJ).
    for (int round = 0; round < 16; ++round) {
        const std::string before = s;
        s = uni::encode_utf8(uni::compose_arabic(uni::decode_utf8(s)));
        s = normalize_codepoints(s, audit);
        s = strip_zwnj(s, audit);
        if (s == before) break;
    }

    s = normalize_digits(s, audit);
    s = space_punctuation(s);

    // Whitespace collapse + trim (any whitespace run becomes one space).
    const std::u32string in = uni::decode_utf8(s);
    std::u32string out;
    out.reserve(in.size());
    for (char32_t c : in) {
        if (uni::is_space(c)) {
            if (!out.empty() && out.back() != U' ') out.push_back(U' ');
        } else {
            out.push_back(c);
        }
    }
    if (!out.empty() && out.back() == U' ') out.pop_back();
    return uni::encode_utf8(out);
}

SentenceList segment_sentences(std::string_view normalized_text) {
    const std::u32string cps = uni::decode_utf8(normalized_text);
    SentenceList result;

    size_t i = 0;
    const size_t n = cps.size();
    while (i < n) {
        while (i < n && uni::is_space(cps[i])) ++i;
        if (i >= n) break;
        const size_t start = i;
        size_t last_non_ws = i;
        while (i < n) {
            const char32_t c = cps[i];
            if (!uni::is_space(c)) last_non_ws = i;
            if (is_sentence_terminator(c)) {
                // A newline splits but, being whitespace, stays outside
                // the boundary; printable terminators attach.
                ++i;
                break;
            }
            ++i;
        }
        const size_t end = last_non_ws + 1;
        if (end > start) {
            result.boundaries.emplace_back(start, end);
            result.sentences.push_back(
                uni::encode_utf8(std::u32string_view(cps.data() + start, end - start)));
        }
    }
    return result;
}

}  // namespace kurdner

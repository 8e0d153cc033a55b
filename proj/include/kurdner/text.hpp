#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kurdner/unicode.hpp"

namespace kurdner {

/// One recorded substitution made during normalization, for audit output.
struct AuditRecord {
    std::string op;       // which normalization step fired
    size_t position;      // codepoint offset in that step's input
    std::string before;   // UTF-8
    std::string after;    // UTF-8 ("" for removals)
};

/// 1-to-1 codepoint replacement table used to unify Arabic-keyboard
/// characters with their Kurdish forms.
class CharMap {
 public:
    // The built-in Sorani table: Arabic kaf/yeh/alef-maksura and the
    // heh-with-yeh variant, mapped to their Kurdish equivalents.
    static CharMap kurdish_defaults();

    // Two-column TSV: source_hex<TAB>target_hex, '#' starts a comment.
    static CharMap load_tsv(const std::filesystem::path& file);

    bool contains(char32_t c) const;
    char32_t target(char32_t c) const;  // identity for unmapped codepoints
    const std::vector<std::pair<char32_t, char32_t>>& entries() const { return entries_; }

 private:
    std::vector<std::pair<char32_t, char32_t>> entries_;  // sorted by source
};

struct SentenceList {
    std::vector<std::string> sentences;
    std::vector<std::pair<size_t, size_t>> boundaries;  // codepoint [start, end) into the source
};

/// Deterministic Sorani normalization pipeline. All operations are pure;
/// a Normalizer is safe to share across threads.
class Normalizer {
 public:
    Normalizer() : map_(CharMap::kurdish_defaults()) {}
    explicit Normalizer(CharMap map) : map_(std::move(map)) {}

    // Individual steps. Each takes and returns UTF-8.
    std::string normalize_codepoints(std::string_view text, std::vector<AuditRecord>* audit = nullptr) const;
    std::string normalize_digits(std::string_view text, std::vector<AuditRecord>* audit = nullptr) const;
    std::string strip_zwnj(std::string_view text, std::vector<AuditRecord>* audit = nullptr) const;
    std::string space_punctuation(std::string_view text) const;

    // Full pipeline: canonical composition, codepoint map, digit map,
    // ZWNJ removal, punctuation/digit spacing, whitespace collapse and
    // trim. Idempotent. Throws InvalidEncoding on malformed input.
    std::string normalize(std::string_view text, std::vector<AuditRecord>* audit = nullptr) const;

    const CharMap& char_map() const { return map_; }

 private:
    CharMap map_;
};

// Splits on the terminator set {. ! ? U+061F U+061B newline}; a terminator
// attaches to the sentence it closes. Segments without any non-whitespace
// content are dropped; boundaries cover exactly the non-whitespace
// codepoints of the input.
SentenceList segment_sentences(std::string_view normalized_text);

bool is_punctuation(char32_t c);
bool is_sentence_terminator(char32_t c);

}  // namespace kurdner

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "kurdner/rng.hpp"
#include "kurdner/text.hpp"
#include "kurdner/unicode.hpp"

using namespace kurdner;

namespace {

// Pseudorandom mixed-script strings: ASCII, Arabic-block letters, Kurdish
// letters, both digit families, combining marks, ZWNJ and whitespace.
std::string random_mixed_string(Rng& rng, size_t max_len = 40) {
    static const std::u32string pool =
        U"abcXYZ 09٤٦۷۰.،؟!()«»\t\n"
        U"ابتكىيکیەۀۆڕژ"
        U"ًّٓٔ‌";
    std::u32string s;
    const size_t len = rng.below(max_len + 1);
    for (size_t i = 0; i < len; ++i) s.push_back(pool[rng.below(pool.size())]);
    return uni::encode_utf8(s);
}

size_t count_codepoints(const std::string& utf8) { return uni::decode_utf8(utf8).size(); }

}  // namespace

TEST_CASE("utf8 decode rejects malformed input with the byte offset") {
    CHECK_NOTHROW(uni::decode_utf8("abc"));
    CHECK_NOTHROW(uni::decode_utf8("کوردی"));

    const auto offset_of = [](std::string_view bytes) {
        try {
            uni::decode_utf8(bytes);
        } catch (const InvalidEncoding& e) {
            return e.offset;
        }
        return size_t(-1);
    };
    CHECK(offset_of("ab\xFF") == 2);                  // invalid lead byte
    CHECK(offset_of("\xC3") == 0);                    // truncated sequence
    CHECK(offset_of("\xC0\xAF") == 0);                // overlong encoding
    CHECK(offset_of("\xED\xA0\x80") == 0);            // surrogate
    CHECK(offset_of("ok\xF4\x90\x80\x80") == 2);      // beyond U+10FFFF
}

TEST_CASE("utf8 encode/decode round-trips") {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        const std::string s = random_mixed_string(rng);
        CHECK(uni::encode_utf8(uni::decode_utf8(s)) == s);
    }
}

TEST_CASE("arabic canonical composition") {
    // alef + maddah above composes to alef-with-madda
    CHECK(uni::compose_arabic(U"آ") == U"آ");
    // alef + hamza above
    CHECK(uni::compose_arabic(U"أ") == U"أ");
    // combining marks are reordered by combining class before composing:
    // shadda (ccc 33) written before hamza-above (ccc 230) must not block it
    CHECK(uni::compose_arabic(U"أّ") ==
          uni::compose_arabic(U"أّ"));
    // idempotent
    Rng rng(102);
    for (int i = 0; i < 100; ++i) {
        const std::u32string s = uni::decode_utf8(random_mixed_string(rng));
        const std::u32string once = uni::compose_arabic(s);
        CHECK(uni::compose_arabic(once) == once);
    }
}

TEST_CASE("codepoint map replaces Arabic keyboard forms") {
    Normalizer n;
    SUBCASE("Arabic kaf becomes keheh") {
        CHECK(n.normalize_codepoints("كوردستان") == "کوردستان");
    }
    SUBCASE("empty input") { CHECK(n.normalize_codepoints("") == ""); }
    SUBCASE("unmapped text passes through") {
        CHECK(n.normalize_codepoints("ABC 123") == "ABC 123");
    }
    SUBCASE("all four defaults") {
        CHECK(n.normalize_codepoints("ك") == "ک");
        CHECK(n.normalize_codepoints("ى") == "ی");
        CHECK(n.normalize_codepoints("ي") == "ی");
        CHECK(n.normalize_codepoints("ۀ") == "ە");
    }
    SUBCASE("codepoint count is preserved") {
        Rng rng(103);
        for (int i = 0; i < 200; ++i) {
            const std::string s = random_mixed_string(rng);
            CHECK(count_codepoints(n.normalize_codepoints(s)) == count_codepoints(s));
        }
    }
}

TEST_CASE("digit map covers both source families") {
    Normalizer n;
    CHECK(n.normalize_digits("٦٧٠٠") == "6700");
    CHECK(n.normalize_digits("6700") == "6700");
    CHECK(n.normalize_digits("٠٩") == "09");
    SUBCASE("each of the 20 source digits maps to its value") {
        for (char32_t d = 0; d <= 9; ++d) {
            const std::string expected(1, static_cast<char>('0' + d));
            const std::u32string arabic(1, char32_t(0x0660 + d));
            const std::u32string extended(1, char32_t(0x06F0 + d));
            CHECK(n.normalize_digits(uni::encode_utf8(arabic)) == expected);
            CHECK(n.normalize_digits(uni::encode_utf8(extended)) == expected);
        }
    }
}

TEST_CASE("zwnj removal") {
    Normalizer n;
    CHECK(n.strip_zwnj("ا‌ب") == "اب");
    CHECK(n.strip_zwnj("abc") == "abc");
    CHECK(n.strip_zwnj("‌‌") == "");
}

TEST_CASE("punctuation and digit runs get single-space flanks") {
    Normalizer n;
    CHECK(n.space_punctuation("کۆیە.") == "کۆیە .");
    CHECK(n.space_punctuation("نزیک6700فەرمانبەر") == "نزیک 6700 فەرمانبەر");
    CHECK(n.space_punctuation("a . b") == "a . b");

    SUBCASE("a digit run stays one token") {
        CHECK(n.space_punctuation("a6700b") == "a 6700 b");
    }
    SUBCASE("adjacent punctuation marks separate") {
        CHECK(n.space_punctuation("a«b»") == "a « b »");
    }
    SUBCASE("no double spaces are introduced") {
        Rng rng(104);
        for (int i = 0; i < 200; ++i) {
            const std::string s = n.space_punctuation(random_mixed_string(rng));
            CHECK(s.find("  ") == std::string::npos);
        }
    }
}

TEST_CASE("normalize applies the full pipeline") {
    Normalizer n;
    SUBCASE("registry-office sentence keeps ASCII digits only") {
        const std::string out = n.normalize("لەشاری کۆیە نزیک ٦٧٠٠ فەرمانبەر تۆمارکراوە");
        CHECK(out.find("6700") != std::string::npos);
        for (char32_t c : uni::decode_utf8(out)) CHECK_FALSE(uni::is_arabic_indic_digit(c));
    }
    SUBCASE("whitespace collapses and trims") { CHECK(n.normalize("  a  ") == "a"); }
    SUBCASE("invalid bytes are rejected") {
        CHECK_THROWS_AS(n.normalize("ok\xFFzz"), InvalidEncoding);
    }
    SUBCASE("output invariants hold on random input") {
        Rng rng(105);
        for (int i = 0; i < 300; ++i) {
            const std::string out = n.normalize(random_mixed_string(rng));
            for (char32_t c : uni::decode_utf8(out)) {
                CHECK_FALSE(n.char_map().contains(c));
                CHECK_FALSE(uni::is_arabic_indic_digit(c));
                CHECK(c != uni::kZwnj);
            }
        }
    }
    SUBCASE("idempotent on random mixed-script strings") {
        Rng rng(106);
        for (int i = 0; i < 300; ++i) {
            const std::string once = n.normalize(random_mixed_string(rng));
            CHECK(n.normalize(once) == once);
        }
    }
}

TEST_CASE("normalize records an audit trail") {
    Normalizer n;
    std::vector<AuditRecord> audit;
    n.normalize("كتاب‌٤", &audit);
    REQUIRE_FALSE(audit.empty());
    bool saw_map = false, saw_digit = false, saw_zwnj = false;
    for (const auto& rec : audit) {
        CHECK_FALSE(rec.op.empty());
        if (rec.before == "ك") {
            saw_map = true;
            CHECK(rec.after == "ک");
        }
        if (rec.before == "٤") {
            saw_digit = true;
            CHECK(rec.after == "4");
        }
        if (rec.before == "‌") {
            saw_zwnj = true;
            CHECK(rec.after == "");
        }
    }
    CHECK(saw_map);
    CHECK(saw_digit);
    CHECK(saw_zwnj);
}

TEST_CASE("charmap TSV loader") {
    SUBCASE("shipped table equals the built-in defaults") {
        const CharMap loaded = CharMap::load_tsv("data/charmap.tsv");
        CHECK(loaded.entries() == CharMap::kurdish_defaults().entries());
    }
    SUBCASE("comments and blank lines are skipped") {
        const char* path = "build/charmap_test.tsv";
        std::ofstream(path) << "# comment only\n\n0041\t0042\n";
        const CharMap m = CharMap::load_tsv(path);
        REQUIRE(m.entries().size() == 1);
        CHECK(m.target(U'A') == U'B');
        CHECK(m.target(U'Z') == U'Z');
    }
    SUBCASE("a line without a tab is an error") {
        const char* path = "build/charmap_bad.tsv";
        std::ofstream(path) << "0041 0042\n";
        CHECK_THROWS_AS(CharMap::load_tsv(path), std::runtime_error);
    }
    SUBCASE("missing file is an error") {
        CHECK_THROWS_AS(CharMap::load_tsv("no/such/file.tsv"), std::runtime_error);
    }
}

TEST_CASE("sentence segmentation") {
    SUBCASE("terminator closes the sentence it follows") {
        const SentenceList out = segment_sentences("ئەو هات . ئەو ڕۆیشت .");
        REQUIRE(out.sentences.size() == 2);
        CHECK(out.sentences[0] == "ئەو هات .");
        CHECK(out.sentences[1] == "ئەو ڕۆیشت .");
    }
    SUBCASE("Arabic question mark terminates") {
        const SentenceList out = segment_sentences("چی ؟");
        REQUIRE(out.sentences.size() == 1);
        CHECK(out.sentences[0] == "چی ؟");
    }
    SUBCASE("empty input yields no sentences") {
        CHECK(segment_sentences("").sentences.empty());
    }
    SUBCASE("newline splits without appearing in a sentence") {
        const SentenceList out = segment_sentences("a b\nc d");
        REQUIRE(out.sentences.size() == 2);
        CHECK(out.sentences[0] == "a b");
        CHECK(out.sentences[1] == "c d");
    }
    SUBCASE("whitespace-only segments are dropped") {
        const SentenceList out = segment_sentences("a .\n \n\t\nb");
        REQUIRE(out.sentences.size() == 2);
        CHECK(out.sentences[0] == "a .");
        CHECK(out.sentences[1] == "b");
    }
    SUBCASE("a lone terminator is still a segment") {
        const SentenceList out = segment_sentences("a . . b .");
        REQUIRE(out.sentences.size() == 3);
        CHECK(out.sentences[1] == ".");
    }
}

TEST_CASE("segmentation boundaries tile the non-whitespace content") {
    Normalizer n;
    Rng rng(107);
    for (int i = 0; i < 200; ++i) {
        const std::string text = n.normalize(random_mixed_string(rng, 60));
        const SentenceList out = segment_sentences(text);
        const std::u32string cps = uni::decode_utf8(text);

        REQUIRE(out.sentences.size() == out.boundaries.size());
        size_t prev_end = 0;
        std::vector<bool> covered(cps.size(), false);
        for (const auto& [start, end] : out.boundaries) {
            CHECK(start >= prev_end);
            CHECK(start < end);
            CHECK(end <= cps.size());
            for (size_t k = start; k < end; ++k) covered[k] = true;
            prev_end = end;
        }
        // Everything outside a boundary is whitespace; boundary endpoints are not.
        for (size_t k = 0; k < cps.size(); ++k)
            if (!covered[k]) CHECK(uni::is_space(cps[k]));
        for (const auto& [start, end] : out.boundaries) {
            CHECK_FALSE(uni::is_space(cps[start]));
            CHECK_FALSE(uni::is_space(cps[end - 1]));
        }

        // Joining the sentences and re-normalizing reproduces the input.
        std::string joined;
        for (size_t s = 0; s < out.sentences.size(); ++s) {
            if (s) joined += ' ';
            joined += out.sentences[s];
        }
        CHECK(n.normalize(joined) == text);
    }
}

TEST_CASE("punctuation and terminator sets") {
    for (char32_t c : {U'.', U',', U';', U':', U'!', U'?', char32_t(0x060C), char32_t(0x061B),
                       char32_t(0x061F), char32_t(0x00AB), char32_t(0x00BB), U'(', U')', U'[',
                       U']', U'"', U'\''})
        CHECK(is_punctuation(c));
    CHECK_FALSE(is_punctuation(U'a'));
    CHECK_FALSE(is_punctuation(char32_t(0x06A9)));

    for (char32_t c : {U'.', U'!', U'?', char32_t(0x061F), char32_t(0x061B), U'\n'})
        CHECK(is_sentence_terminator(c));
    CHECK_FALSE(is_sentence_terminator(U','));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kurdner/corpus.hpp"
#include "kurdner/rng.hpp"
#include "kurdner/tokenizer.hpp"

using namespace kurdner;

namespace {

const std::string kHeader = "sentence_id\tword\ttag\n";

std::string small_tsv() {
    return kHeader +
           "1\tتارا\tB-per\n"
           "1\tچوو\tO\n"
           "2\tمشک\tB-ani\n"
           "2\tو\tO\n"
           "2\tپشیلە\tB-ani\n";
}

Corpus synthetic_corpus(size_t n_sentences, uint64_t seed) {
    static const std::vector<std::pair<std::string, std::string>> lexicon = {
        {"tara", "B-per"}, {"aram", "B-per"},    {"hawler", "B-gpe"},
        {"duhok", "B-gpe"}, {"kteb", "O"},       {"xwend", "O"},
        {"chu", "O"},       {"bo", "O"},         {"nan", "O"},
    };
    Rng rng(seed);
    Corpus c;
    for (size_t i = 0; i < n_sentences; ++i) {
        AnnotatedSentence s;
        s.sentence_id = std::to_string(i + 1);
        const size_t len = 3 + rng.below(5);
        for (size_t w = 0; w < len; ++w) {
            const auto& [word, tag] = lexicon[rng.below(lexicon.size())];
            s.words.push_back(word);
            s.tags.push_back(tag);
        }
        c.sentences.push_back(std::move(s));
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tags and schemes

TEST_CASE("tag grammar accepts O and B/I/E-category") {
    // Categories are opaque non-whitespace strings; "B-Money" and hyphenated
    // categories pass through verbatim.
    for (const char* good : {"O", "B-per", "I-org", "E-loc", "B-Money", "B-x", "B-per-x"})
        CHECK(Tag::valid(good));
    for (const char* bad : {"", "o", "B", "B-", "X-per", "per", "BO", "I -x", " O", "B-a b"})
        CHECK_FALSE(Tag::valid(bad));

    const Tag t = Tag::parse("I-org");
    CHECK(t.position == Tag::Position::I);
    CHECK(t.category == "org");
    CHECK(t.str() == "I-org");
    const Tag o = Tag::parse("O");
    CHECK(o.position == Tag::Position::O);
    CHECK(o.category.empty());
    CHECK(o.str() == "O");
}

TEST_CASE("tag scheme assigns sorted dense ids") {
    const TagScheme s = TagScheme::from_names({"O", "B-per", "B-ani", "B-per", "I-per"});
    REQUIRE(s.size() == 4);
    CHECK(s.names() == std::vector<std::string>{"B-ani", "B-per", "I-per", "O"});
    for (size_t i = 0; i < s.size(); ++i) CHECK(s.id_of(s.name_of(static_cast<int>(i))) == static_cast<int>(i));
    CHECK(s.id_of("E-per") == -1);
    CHECK(s.o_id() == 3);
    CHECK(TagScheme::kIgnoreIndex == -1);
}

// ---------------------------------------------------------------------------
// Parsing

TEST_CASE("parse reads a well-formed file") {
    const Corpus c = parse_corpus_string(small_tsv());
    REQUIRE(c.size() == 2);
    CHECK(c.sentences[0].sentence_id == "1");
    CHECK(c.sentences[0].words == std::vector<std::string>{"تارا", "چوو"});
    CHECK(c.sentences[0].tags == std::vector<std::string>{"B-per", "O"});
    CHECK(c.sentences[1].words.size() == 3);
    CHECK(c.sentences[0].text() == "تارا چوو");

    SUBCASE("a trailing newline is required but only once") {
        CHECK(parse_corpus_string(kHeader + "1\tx\tO\n").size() == 1);
    }
    SUBCASE("the shipped fixture parses") {
        const Corpus f = parse_corpus_file("data/fixtures/table3.tsv");
        CHECK(f.size() == 2);
    }
}

TEST_CASE("parse rejects malformed input with line numbers") {
    SUBCASE("empty input") { CHECK_THROWS_AS(parse_corpus_string(""), EmptyFile); }
    SUBCASE("wrong header") {
        CHECK_THROWS_AS(parse_corpus_string("id\tword\ttag\n1\tx\tO\n"), MalformedLine);
        try {
            parse_corpus_string("id\tword\ttag\n");
        } catch (const CorpusError& e) {
            CHECK(e.line_no == 1);
        }
    }
    SUBCASE("byte order mark") {
        CHECK_THROWS_AS(parse_corpus_string("\xEF\xBB\xBF" + small_tsv()), MalformedLine);
    }
    SUBCASE("CRLF line endings") {
        CHECK_THROWS_AS(parse_corpus_string("sentence_id\tword\ttag\r\n1\tx\tO\r\n"), MalformedLine);
    }
    SUBCASE("blank lines") {
        try {
            parse_corpus_string(kHeader + "1\tx\tO\n\n2\ty\tO\n");
            FAIL("expected MalformedLine");
        } catch (const MalformedLine& e) {
            CHECK(e.line_no == 3);
        }
    }
    SUBCASE("wrong column counts") {
        CHECK_THROWS_AS(parse_corpus_string(kHeader + "1\tx\n"), MalformedLine);
        CHECK_THROWS_AS(parse_corpus_string(kHeader + "1\tx\tO\textra\n"), MalformedLine);
        try {
            parse_corpus_string(kHeader + "1\tok\tO\n1\tx\n");
            FAIL("expected MalformedLine");
        } catch (const MalformedLine& e) {
            CHECK(e.line_no == 3);
        }
    }
    SUBCASE("empty fields") {
        CHECK_THROWS_AS(parse_corpus_string(kHeader + "\tx\tO\n"), MalformedLine);
        CHECK_THROWS_AS(parse_corpus_string(kHeader + "1\t\tO\n"), MalformedLine);
    }
    SUBCASE("invalid tags carry the line number") {
        try {
            parse_corpus_string(kHeader + "1\tx\tO\n1\ty\tB-\n");
            FAIL("expected InvalidTag");
        } catch (const InvalidTag& e) {
            CHECK(e.line_no == 3);
            CHECK(std::string(e.what()).find("B-") != std::string::npos);
        }
    }
    SUBCASE("header alone parses as a corpus with no sentences") {
        CHECK(parse_corpus_string(kHeader).size() == 0);
    }
    SUBCASE("sentences are consecutive runs of one id") {
        // A reappearing id starts a new sentence rather than merging back.
        const Corpus c = parse_corpus_string(kHeader + "1\ta\tO\n2\tb\tO\n1\tc\tO\n");
        REQUIRE(c.size() == 3);
        CHECK(c.sentences[2].sentence_id == "1");
        CHECK(c.sentences[2].words == std::vector<std::string>{"c"});
    }
}

TEST_CASE("write and parse round-trip") {
    const Corpus c = synthetic_corpus(25, 5);
    std::ostringstream out;
    write_corpus(c, out);
    const Corpus back = parse_corpus_string(out.str());
    REQUIRE(back.size() == c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        CHECK(back.sentences[i].sentence_id == c.sentences[i].sentence_id);
        CHECK(back.sentences[i].words == c.sentences[i].words);
        CHECK(back.sentences[i].tags == c.sentences[i].tags);
    }
    // Writing again must produce identical bytes.
    std::ostringstream again;
    write_corpus(back, again);
    CHECK(again.str() == out.str());

    write_corpus_file(c, "build/corpus_roundtrip.tsv");
    CHECK(parse_corpus_file("build/corpus_roundtrip.tsv").size() == c.size());
}

// ---------------------------------------------------------------------------
// Validation

TEST_CASE("validation flags broken continuations") {
    SUBCASE("clean corpora report no issues") {
        const std::string tsv = kHeader +
                                "1\tx\tB-per\n"
                                "1\ty\tI-per\n"
                                "1\tz\tE-per\n"
                                "1\tw\tO\n";
        CHECK(validate_corpus(parse_corpus_string(tsv)).clean());
        CHECK(validate_corpus(parse_corpus_string(small_tsv())).clean());
    }
    SUBCASE("I without a preceding B") {
        const std::string tsv = kHeader + "1\tx\tO\n1\ty\tI-per\n";
        const ValidationReport r = validate_corpus(parse_corpus_string(tsv));
        REQUIRE(r.issues.size() == 1);
        CHECK(r.issues[0].sentence_id == "1");
        CHECK(r.issues[0].word_index == 1);
        CHECK(r.issues[0].rule.find("I-per") != std::string::npos);
    }
    SUBCASE("E whose category differs from the open entity") {
        const std::string tsv = kHeader + "1\tx\tB-per\n1\ty\tE-org\n";
        const ValidationReport r = validate_corpus(parse_corpus_string(tsv));
        REQUIRE(r.issues.size() == 1);
        CHECK(r.issues[0].word_index == 1);
    }
    SUBCASE("continuation at sentence start") {
        const std::string tsv = kHeader + "1\tx\tI-loc\n";
        CHECK(validate_corpus(parse_corpus_string(tsv)).issues.size() == 1);
    }
    SUBCASE("an entity does not span a B that restarts it") {
        const std::string tsv = kHeader + "1\tx\tB-per\n1\ty\tB-per\n1\tz\tI-per\n";
        CHECK(validate_corpus(parse_corpus_string(tsv)).clean());
    }
    SUBCASE("O closes the entity") {
        const std::string tsv = kHeader + "1\tx\tB-per\n1\ty\tO\n1\tz\tE-per\n";
        CHECK(validate_corpus(parse_corpus_string(tsv)).issues.size() == 1);
    }
}

// ---------------------------------------------------------------------------
// Stats

TEST_CASE("stats count exactly what a manual pass counts") {
    const Corpus c = synthetic_corpus(40, 6);
    const CorpusStats st = corpus_stats(c);

    long long tokens = 0;
    std::set<std::string> words, tags;
    std::map<std::string, long long> tag_counts, cat_counts;
    for (const auto& s : c.sentences) {
        tokens += static_cast<long long>(s.words.size());
        for (const auto& w : s.words) words.insert(w);
        for (const auto& t : s.tags) {
            tags.insert(t);
            ++tag_counts[t];
            if (t != "O") ++cat_counts[t.substr(2)];
        }
    }
    CHECK(st.n_sentences == 40);
    CHECK(st.n_tokens == tokens);
    CHECK(st.n_unique_words == static_cast<long long>(words.size()));
    CHECK(st.n_unique_tags == static_cast<long long>(tags.size()));
    CHECK(st.tag_counts == tag_counts);
    CHECK(st.category_counts == cat_counts);

    SUBCASE("the shipped fixture has the published counts") {
        const CorpusStats f = corpus_stats(parse_corpus_file("data/fixtures/table3.tsv"));
        CHECK(f.n_sentences == 2);
        CHECK(f.n_tokens == 8);
        CHECK(f.tag_counts.at("B-per") == 1);
        CHECK(f.tag_counts.at("B-ani") == 2);
        CHECK(f.tag_counts.at("O") == 5);
        CHECK(f.category_counts.at("per") == 1);
        CHECK(f.category_counts.at("ani") == 2);
        CHECK(f.category_counts.count("O") == 0);
    }
}

// ---------------------------------------------------------------------------
// Split

TEST_CASE("split partitions the corpus deterministically") {
    const Corpus c = synthetic_corpus(100, 7);
    const CorpusSplit sp = split_corpus(c, SplitRatios{}, 42);

    CHECK(sp.train.size() == 70);
    CHECK(sp.val.size() == 15);
    CHECK(sp.test.size() == 15);

    // Disjoint and exhaustive on sentence ids.
    std::set<std::string> seen;
    size_t total = 0;
    for (const Corpus* part : {&sp.train, &sp.val, &sp.test})
        for (const auto& s : part->sentences) {
            CHECK(seen.insert(s.sentence_id).second);
            ++total;
        }
    CHECK(total == c.size());

    // Same seed, same split; different seed, different order.
    const CorpusSplit sp2 = split_corpus(c, SplitRatios{}, 42);
    REQUIRE(sp2.train.size() == sp.train.size());
    for (size_t i = 0; i < sp.train.size(); ++i)
        CHECK(sp2.train.sentences[i].sentence_id == sp.train.sentences[i].sentence_id);
    const CorpusSplit sp3 = split_corpus(c, SplitRatios{}, 43);
    bool any_differs = false;
    for (size_t i = 0; i < sp.train.size(); ++i)
        any_differs |= sp3.train.sentences[i].sentence_id != sp.train.sentences[i].sentence_id;
    CHECK(any_differs);

    SUBCASE("sizes use floor for train and val") {
        const Corpus ten = synthetic_corpus(10, 8);
        const CorpusSplit s10 = split_corpus(ten, SplitRatios{}, 1);
        CHECK(s10.train.size() == 7);
        CHECK(s10.val.size() == 1);
        CHECK(s10.test.size() == 2);
    }
    SUBCASE("the published corpus size splits 1030/220/222") {
        const Corpus big = synthetic_corpus(1472, 9);
        const CorpusSplit s = split_corpus(big, SplitRatios{}, 2);
        CHECK(s.train.size() == 1030);
        CHECK(s.val.size() == 220);
        CHECK(s.test.size() == 222);
    }
    SUBCASE("bad ratios throw") {
        CHECK_THROWS_AS(split_corpus(c, SplitRatios{0.5, 0.5, 0.5}, 1), BadRatios);
        CHECK_THROWS_AS(split_corpus(c, SplitRatios{1.2, -0.1, -0.1}, 1), BadRatios);
    }
}

// ---------------------------------------------------------------------------
// Label alignment

TEST_CASE("labels land on first pieces, continuations are ignored") {
    // One codepoint per piece so every multi-letter word has continuations.
    std::vector<std::string> alphabet;
    for (char ch = 'a'; ch <= 'z'; ++ch) alphabet.emplace_back(1, ch);
    const BpeModel bpe = bpe_from_parts(alphabet, {});
    const TagScheme scheme = TagScheme::from_names({"O", "B-per", "B-gpe"});

    const Encoding e = bpe.encode("tara chu");
    const std::vector<int> labels = align_labels(e, {"B-per", "O"}, scheme);
    REQUIRE(labels.size() == e.size());

    std::vector<int> expected;
    for (size_t i = 0; i < e.size(); ++i) {
        const bool first = i == 0 || e.word_index[i] != e.word_index[i - 1];
        if (!first)
            expected.push_back(TagScheme::kIgnoreIndex);
        else
            expected.push_back(scheme.id_of(e.word_index[i] == 0 ? "B-per" : "O"));
    }
    CHECK(labels == expected);
    CHECK(std::count(labels.begin(), labels.end(), TagScheme::kIgnoreIndex) ==
          static_cast<long>(e.size() - 2));

    SUBCASE("word-level encodings ignore nothing") {
        const WordVocab v = word_vocab_from_words({"tara", "chu"});
        const std::vector<int> wl = align_labels(v.encode("tara chu"), {"B-per", "O"}, scheme);
        CHECK(wl == std::vector<int>{scheme.id_of("B-per"), scheme.id_of("O")});
    }
    SUBCASE("word/tag count mismatch throws") {
        CHECK_THROWS_AS(align_labels(e, {"B-per"}, scheme), AlignmentMismatch);
        CHECK_THROWS_AS(align_labels(e, {"B-per", "O", "O"}, scheme), AlignmentMismatch);
    }
    SUBCASE("unknown tags throw") {
        CHECK_THROWS(align_labels(e, {"B-unknown", "O"}, scheme));
    }
}

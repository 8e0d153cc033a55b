#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "kurdner/rng.hpp"
#include "kurdner/tokenizer.hpp"
#include "kurdner/unicode.hpp"

using namespace kurdner;

namespace {

// A small Sorani-flavoured corpus generator for roundtrip and property
// tests. Words are drawn from a fixed lexicon so subword structure repeats.
std::vector<std::string> sample_corpus(size_t n_sentences, uint64_t seed) {
    static const std::vector<std::string> lexicon = {
        "کوردستان", "کورد",   "شار",    "شاری",   "هەولێر", "سلێمانی", "کۆیە",
        "نزیک",     "گەورە",  "خوێندن", "خوێند",  "فەرمانبەر", "تۆمار", "کرا",
        "لە",       "بۆ",     "و",      "بە",     "6700",   "12",
    };
    Rng rng(seed);
    std::vector<std::string> out;
    for (size_t i = 0; i < n_sentences; ++i) {
        std::string s;
        const size_t len = 3 + rng.below(6);
        for (size_t w = 0; w < len; ++w) {
            if (w) s += ' ';
            s += lexicon[rng.below(lexicon.size())];
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::u32string> split_words_u32(const std::string& text) {
    std::vector<std::u32string> words;
    std::u32string cur;
    for (char32_t c : uni::decode_utf8(text)) {
        if (uni::is_space(c)) {
            if (!cur.empty()) words.push_back(std::exchange(cur, {}));
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

// Offsets must tile each whitespace word exactly, in order.
void check_offsets_tile_words(const std::string& text, const Encoding& enc) {
    const std::u32string cps = uni::decode_utf8(text);
    std::vector<std::pair<size_t, size_t>> word_spans;  // codepoint [start, end)
    for (size_t i = 0; i < cps.size();) {
        while (i < cps.size() && uni::is_space(cps[i])) ++i;
        if (i >= cps.size()) break;
        const size_t start = i;
        while (i < cps.size() && !uni::is_space(cps[i])) ++i;
        word_spans.emplace_back(start, i);
    }

    REQUIRE(enc.pieces.size() == enc.ids.size());
    REQUIRE(enc.pieces.size() == enc.offsets.size());
    REQUIRE(enc.pieces.size() == enc.word_index.size());

    size_t piece = 0;
    for (size_t w = 0; w < word_spans.size(); ++w) {
        size_t pos = word_spans[w].first;
        REQUIRE(piece < enc.size());
        while (piece < enc.size() && enc.word_index[piece] == static_cast<int>(w)) {
            CHECK(enc.offsets[piece].first == pos);
            CHECK(enc.offsets[piece].second > enc.offsets[piece].first);
            pos = enc.offsets[piece].second;
            ++piece;
        }
        CHECK(pos == word_spans[w].second);
    }
    CHECK(piece == enc.size());
}

// Independent pair-frequency count over a corpus symbolized by `syms`,
// used to verify each recorded merge was the most frequent pair at its turn.
using SymWord = std::vector<std::string>;

std::pair<std::string, std::string> best_pair_oracle(
    const std::map<SymWord, long long>& words) {
    std::map<std::pair<std::string, std::string>, long long> counts;
    for (const auto& [syms, freq] : words)
        for (size_t i = 0; i + 1 < syms.size(); ++i)
            counts[{syms[i], syms[i + 1]}] += freq;
    std::pair<std::string, std::string> best;
    long long best_count = 0;
    for (const auto& [pair, count] : counts) {
        if (count < 2) continue;
        const auto key = [](const std::pair<std::string, std::string>& p) {
            return std::make_pair(p.first + p.second, p.first);
        };
        if (count > best_count || (count == best_count && key(pair) < key(best))) {
            best = pair;
            best_count = count;
        }
    }
    return best_count >= 2 ? best : std::pair<std::string, std::string>{};
}

void apply_merge(std::map<SymWord, long long>& words,
                 const std::pair<std::string, std::string>& merge) {
    std::map<SymWord, long long> next;
    for (const auto& [syms, freq] : words) {
        SymWord merged;
        for (size_t i = 0; i < syms.size(); ++i) {
            if (i + 1 < syms.size() && syms[i] == merge.first && syms[i + 1] == merge.second) {
                merged.push_back(syms[i] + syms[i + 1]);
                ++i;
            } else {
                merged.push_back(syms[i]);
            }
        }
        next[merged] += freq;
    }
    words = std::move(next);
}

// All segmentations of `word` into table pieces, as piece-string lists.
void enumerate_segmentations(const std::u32string& word, size_t pos,
                             const UnigramModel& model, std::vector<std::string>& current,
                             double score, std::vector<std::pair<std::vector<std::string>, double>>& out) {
    if (pos == word.size()) {
        out.emplace_back(current, score);
        return;
    }
    for (size_t len = 1; pos + len <= word.size(); ++len) {
        const std::string piece = uni::encode_utf8(word.substr(pos, len));
        const double lp = model.log_prob(piece);
        if (lp == -std::numeric_limits<double>::infinity()) continue;
        current.push_back(piece);
        enumerate_segmentations(word, pos + len, model, current, score + lp, out);
        current.pop_back();
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// BPE

TEST_CASE("bpe first merge is the most frequent pair") {
    const std::vector<std::string> corpus = {"ab ab ab"};
    const BpeModel m = BpeModel::train(corpus, 10);
    REQUIRE_FALSE(m.merges().empty());
    CHECK(m.merges()[0] == std::pair<std::string, std::string>{"a", "b"});
}

TEST_CASE("bpe single-symbol words produce no merges") {
    const std::vector<std::string> corpus = {"a a a"};
    const BpeModel m = BpeModel::train(corpus, 10);
    CHECK(m.merges().empty());
    CHECK(m.alphabet() == std::vector<std::string>{"a"});
}

TEST_CASE("bpe training errors") {
    CHECK_THROWS_AS(BpeModel::train(std::vector<std::string>{}, 10), EmptyCorpus);
    CHECK_THROWS_AS(BpeModel::train(std::vector<std::string>{"   "}, 10), EmptyCorpus);
    // alphabet {a, b} + 4 specials = 6 > 5
    CHECK_THROWS_AS(BpeModel::train(std::vector<std::string>{"ab"}, 5), VocabTooSmall);
}

TEST_CASE("bpe merge sequence matches a brute-force pair oracle") {
    const std::vector<std::string> corpus = sample_corpus(60, 11);
    const BpeModel m = BpeModel::train(corpus, 80);

    std::map<SymWord, long long> words;
    for (const auto& sentence : corpus)
        for (const auto& w : split_words_u32(sentence)) {
            SymWord syms;
            for (char32_t c : w) syms.push_back(uni::encode_utf8(std::u32string(1, c)));
            words[syms] += 1;
        }

    for (const auto& merge : m.merges()) {
        CHECK(merge == best_pair_oracle(words));
        apply_merge(words, merge);
    }
    // Train stopped either at the vocab target or because no pair repeats.
    if (m.vocab_size() < 80)
        CHECK(best_pair_oracle(words) == std::pair<std::string, std::string>{});
}

TEST_CASE("bpe merge replay reconstructs the vocabulary") {
    const std::vector<std::string> corpus = sample_corpus(40, 12);
    const BpeModel m = BpeModel::train(corpus, 60);

    std::map<std::string, int> expected;
    for (int i = 0; i < kNumSpecials; ++i) expected[special_piece(i)] = i;
    int next = kNumSpecials;
    for (const auto& sym : m.alphabet()) expected[sym] = next++;
    for (const auto& [a, b] : m.merges())
        if (!expected.count(a + b)) expected[a + b] = next++;
    CHECK(m.vocab() == expected);

    // Every merge part is a base symbol or the product of an earlier merge.
    std::map<std::string, bool> known;
    for (const auto& sym : m.alphabet()) known[sym] = true;
    for (const auto& [a, b] : m.merges()) {
        CHECK(known.count(a));
        CHECK(known.count(b));
        known[a + b] = true;
    }
}

TEST_CASE("bpe ids are dense with specials at 0-3") {
    const BpeModel m = BpeModel::train(sample_corpus(20, 13), 40);
    std::vector<int> ids;
    for (const auto& [sym, id] : m.vocab()) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == static_cast<int>(i));
    CHECK(m.vocab().at("<pad>") == kPadId);
    CHECK(m.vocab().at("<unk>") == kUnkId);
    CHECK(m.vocab().at("<s>") == kBosId);
    CHECK(m.vocab().at("</s>") == kEosId);
}

TEST_CASE("bpe encode applies merges and handles unknowns") {
    SUBCASE("single merge joins the word") {
        const std::vector<std::string> corpus = {"ab ab"};
        const BpeModel m = BpeModel::train(corpus, 10);
        const Encoding e = m.encode("ab");
        REQUIRE(e.pieces.size() == 1);
        CHECK(e.pieces[0] == "ab");
        CHECK(e.offsets[0] == std::pair<size_t, size_t>{0, 2});
    }
    SUBCASE("unseen codepoints become unk with correct offsets") {
        const std::vector<std::string> corpus = {"ab ab"};
        const BpeModel m = BpeModel::train(corpus, 10);
        const Encoding e = m.encode("xyz");
        REQUIRE(e.pieces.size() == 3);
        for (size_t i = 0; i < 3; ++i) {
            CHECK(e.pieces[i] == "<unk>");
            CHECK(e.ids[i] == kUnkId);
            CHECK(e.offsets[i] == std::pair<size_t, size_t>{i, i + 1});
        }
        CHECK(e.has_unk());
    }
    SUBCASE("offsets tile words on random sentences") {
        const std::vector<std::string> corpus = sample_corpus(50, 14);
        const BpeModel m = BpeModel::train(corpus, 90);
        for (const auto& s : sample_corpus(50, 15)) check_offsets_tile_words(s, m.encode(s));
    }
}

TEST_CASE("bpe training is deterministic") {
    const std::vector<std::string> corpus = sample_corpus(40, 16);
    const BpeModel a = BpeModel::train(corpus, 70);
    const BpeModel b = BpeModel::train(corpus, 70);
    CHECK(a.merges() == b.merges());
    CHECK(Tokenizer(a).to_json_string() == Tokenizer(b).to_json_string());
}

// ---------------------------------------------------------------------------
// Unigram

TEST_CASE("unigram keeps the productive piece on a toy corpus") {
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 8;
    const std::vector<std::string> corpus = {"abab abab"};
    const UnigramModel m = UnigramModel::train(corpus, opt);
    bool has_ab = false;
    for (const auto& [piece, lp] : m.pieces()) {
        if (piece == "ab") has_ab = true;
        CHECK(lp <= 0.0);
        CHECK(std::isfinite(lp));
    }
    CHECK(has_ab);
}

TEST_CASE("unigram covers every corpus codepoint") {
    const std::vector<std::string> corpus = sample_corpus(40, 17);
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 60;
    const UnigramModel m = UnigramModel::train(corpus, opt);

    for (const auto& s : corpus)
        for (char32_t c : uni::decode_utf8(s)) {
            if (uni::is_space(c)) continue;
            const std::string single = uni::encode_utf8(std::u32string(1, c));
            CHECK(m.log_prob(single) > -std::numeric_limits<double>::infinity());
        }
    // ...which makes every training sentence segmentable without unk.
    for (const auto& s : corpus) CHECK_FALSE(m.encode(s).has_unk());
}

TEST_CASE("unigram piece distribution is normalized") {
    const std::vector<std::string> corpus = sample_corpus(30, 18);
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 50;
    const UnigramModel m = UnigramModel::train(corpus, opt);
    double max_lp = -std::numeric_limits<double>::infinity();
    for (const auto& [piece, lp] : m.pieces()) max_lp = std::max(max_lp, lp);
    double sum = 0;
    for (const auto& [piece, lp] : m.pieces()) sum += std::exp(lp - max_lp);
    CHECK(std::fabs(max_lp + std::log(sum)) < 1e-9);  // log-sum-exp of all pieces == 0
}

TEST_CASE("unigram viterbi picks the max-likelihood segmentation") {
    const UnigramModel m = unigram_from_pieces({{"ab", -0.5}, {"a", -2.0}, {"b", -2.0}});
    const Encoding e = m.encode("abab");
    CHECK(e.pieces == std::vector<std::string>{"ab", "ab"});

    SUBCASE("a whole-word piece wins when cheapest") {
        const UnigramModel w =
            unigram_from_pieces({{"abc", -1.0}, {"ab", -3.0}, {"c", -3.0}, {"a", -4.0}, {"b", -4.0}});
        CHECK(w.encode("abc").pieces == std::vector<std::string>{"abc"});
    }
    SUBCASE("equal scores prefer fewer pieces") {
        // "aa" as one piece vs two: scores tie at -2, the single piece wins.
        const UnigramModel t = unigram_from_pieces({{"aa", -2.0}, {"a", -1.0}});
        CHECK(t.encode("aa").pieces == std::vector<std::string>{"aa"});
    }
    SUBCASE("equal scores and counts prefer the longer left piece") {
        // "abc" -> {ab,c} or {a,bc}: same score, same count; leftmost-longest.
        const UnigramModel t = unigram_from_pieces(
            {{"ab", -1.0}, {"bc", -1.0}, {"a", -1.0}, {"c", -1.0}, {"b", -5.0}});
        CHECK(t.encode("abc").pieces == std::vector<std::string>{"ab", "c"});
    }
    SUBCASE("unseen codepoint becomes a single unk piece") {
        const Encoding u = m.encode("axb");
        REQUIRE(u.pieces.size() == 3);
        CHECK(u.pieces[1] == "<unk>");
        CHECK(u.ids[1] == kUnkId);
        CHECK(u.offsets[1] == std::pair<size_t, size_t>{1, 2});
    }
}

TEST_CASE("unigram viterbi and marginal agree with exhaustive enumeration") {
    const std::vector<std::string> corpus = sample_corpus(40, 19);
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 70;
    const UnigramModel m = UnigramModel::train(corpus, opt);

    size_t words_checked = 0;
    for (const auto& s : sample_corpus(30, 20)) {
        for (const auto& word : split_words_u32(s)) {
            if (word.size() > 10) continue;
            std::vector<std::pair<std::vector<std::string>, double>> all;
            std::vector<std::string> current;
            enumerate_segmentations(word, 0, m, current, 0.0, all);
            if (all.empty()) continue;
            ++words_checked;

            // Oracle: best score; ties by fewer pieces, then leftmost-longest.
            const auto better = [](const std::pair<std::vector<std::string>, double>& x,
                                   const std::pair<std::vector<std::string>, double>& y) {
                if (x.second != y.second) return x.second > y.second;
                if (x.first.size() != y.first.size()) return x.first.size() < y.first.size();
                for (size_t i = 0; i < x.first.size(); ++i)
                    if (x.first[i].size() != y.first[i].size())
                        return x.first[i].size() > y.first[i].size();
                return false;
            };
            const auto& best = *std::min_element(
                all.begin(), all.end(),
                [&](const auto& x, const auto& y) { return better(x, y); });

            const Encoding e = m.encode(uni::encode_utf8(word));
            CHECK(e.pieces == best.first);

            double lse = -std::numeric_limits<double>::infinity();
            for (const auto& [seg, score] : all)
                lse = std::max(lse, score) +
                      std::log1p(std::exp(std::min(lse, score) - std::max(lse, score)));
            CHECK(m.marginal_log_prob(uni::encode_utf8(word)) == doctest::Approx(lse).epsilon(1e-9));
        }
    }
    CHECK(words_checked > 50);
}

TEST_CASE("unigram training errors and determinism") {
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 30;
    CHECK_THROWS_AS(UnigramModel::train(std::vector<std::string>{}, opt), EmptyCorpus);
    UnigramModel::TrainOptions tiny;
    tiny.target_vocab = 5;  // corpus has 2 distinct codepoints + 4 specials = 6
    CHECK_THROWS_AS(UnigramModel::train(std::vector<std::string>{"ab"}, tiny), VocabTooSmall);

    const std::vector<std::string> corpus = sample_corpus(30, 21);
    opt.target_vocab = 50;
    const UnigramModel a = UnigramModel::train(corpus, opt);
    const UnigramModel b = UnigramModel::train(corpus, opt);
    CHECK(a.pieces() == b.pieces());
    CHECK(Tokenizer(a).to_json_string() == Tokenizer(b).to_json_string());
}

// ---------------------------------------------------------------------------
// Word-level

TEST_CASE("word tokenizer splits on whitespace") {
    const std::vector<std::string> corpus = {"مشک له پشیلە دەترسینت", "مشک له"};
    const WordVocab v = WordVocab::build(corpus, 100);
    const Encoding e = v.encode("مشک له پشیلە دەترسینت");
    CHECK(e.pieces.size() == 4);
    for (size_t i = 0; i < e.size(); ++i) CHECK(e.word_index[i] == static_cast<int>(i));

    CHECK(v.encode("").size() == 0);

    SUBCASE("out-of-vocabulary word gets unk with the full-word span") {
        const Encoding u = v.encode("نەناسراو");
        REQUIRE(u.size() == 1);
        CHECK(u.ids[0] == kUnkId);
        CHECK(u.pieces[0] == "<unk>");
        CHECK(u.offsets[0] == std::pair<size_t, size_t>{0, 8});
    }
    SUBCASE("the cap keeps the most frequent words, ties alphabetical") {
        const std::vector<std::string> c2 = {"b b c c a"};
        const WordVocab small = WordVocab::build(c2, kNumSpecials + 2);
        CHECK(small.words() == std::vector<std::string>{"b", "c"});
    }
}

// ---------------------------------------------------------------------------
// Decode and the Tokenizer wrapper

TEST_CASE("decode reconstructs the input for all three tokenizers") {
    const std::vector<std::string> corpus = sample_corpus(80, 22);
    const Tokenizer bpe{BpeModel::train(corpus, 90)};
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 90;
    const Tokenizer ug{UnigramModel::train(corpus, opt)};
    const Tokenizer word{WordVocab::build(corpus, 500)};

    for (const Tokenizer* t : {&bpe, &ug, &word})
        for (const auto& s : corpus) CHECK(tokenizer_decode(t->encode(s)) == s);

    CHECK(tokenizer_decode(Encoding{}) == "");
    CHECK_THROWS_AS(tokenizer_decode(bpe.encode("never_seen_λ")), ContainsUnk);
}

TEST_CASE("tokenizer serialization round-trips byte-identically") {
    const std::vector<std::string> corpus = sample_corpus(40, 23);
    UnigramModel::TrainOptions opt;
    opt.target_vocab = 60;
    const std::vector<Tokenizer> models = {
        Tokenizer{BpeModel::train(corpus, 70)},
        Tokenizer{UnigramModel::train(corpus, opt)},
        Tokenizer{WordVocab::build(corpus, 200)},
    };
    for (const auto& t : models) {
        const std::string json = t.to_json_string();
        const Tokenizer back = Tokenizer::from_json_string(json);
        CHECK(back.to_json_string() == json);
        CHECK(back.type() == t.type());
        CHECK(back.vocab_size() == t.vocab_size());
        for (const auto& s : corpus) {
            const Encoding a = t.encode(s);
            const Encoding b = back.encode(s);
            CHECK(a.pieces == b.pieces);
            CHECK(a.ids == b.ids);
        }
    }

    SUBCASE("save/load goes through files") {
        const Tokenizer& t = models[0];
        t.save("build/tokenizer_roundtrip.json");
        CHECK(Tokenizer::load("build/tokenizer_roundtrip.json").to_json_string() ==
              t.to_json_string());
    }
    SUBCASE("bad payloads are rejected") {
        CHECK_THROWS(Tokenizer::from_json_string("{\"type\":\"bpe\",\"version\":2}"));
        CHECK_THROWS(Tokenizer::from_json_string("{\"type\":\"nope\",\"version\":1}"));
        CHECK_THROWS(Tokenizer::from_json_string("not json"));
        CHECK_THROWS(Tokenizer::load("no/such/model.json"));
    }
}

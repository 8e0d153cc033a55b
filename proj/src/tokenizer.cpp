#include "kurdner/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "kurdner/unicode.hpp"

namespace kurdner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnkLogProb = -1e4;  // finite penalty for unknown codepoints
constexpr size_t kMaxSeedPieceLen = 8;

double log_sum_exp(double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    return hi + std::log1p(std::exp(lo - hi));
}

struct WordSpan {
    std::u32string text;
    size_t start;  // codepoint offset of the word in the source text
};

std::vector<WordSpan> split_words(std::string_view text) {
    const std::u32string cps = uni::decode_utf8(text);
    std::vector<WordSpan> words;
    size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && uni::is_space(cps[i])) ++i;
        if (i >= cps.size()) break;
        const size_t start = i;
        while (i < cps.size() && !uni::is_space(cps[i])) ++i;
        words.push_back({cps.substr(start, i - start), start});
    }
    return words;
}

// Distinct words with frequencies, in sorted order for determinism.
std::map<std::u32string, long long> count_words(std::span<const std::string> sentences) {
    std::map<std::u32string, long long> freq;
    for (const auto& s : sentences)
        for (auto& w : split_words(s)) ++freq[w.text];
    return freq;
}

std::string u32_to_utf8(std::u32string_view s) { return uni::encode_utf8(s); }

}  // namespace

bool Encoding::has_unk() const {
    return std::find(ids.begin(), ids.end(), kUnkId) != ids.end();
}

// ---------------------------------------------------------------------------
// BPE

void BpeModel::rebuild_vocab() {
    vocab_.clear();
    for (int i = 0; i < kNumSpecials; ++i) vocab_[special_piece(i)] = i;
    int next = kNumSpecials;
    for (const auto& s : alphabet_) vocab_[s] = next++;
    for (const auto& [a, b] : merges_) {
        const std::string merged = a + b;
        if (!vocab_.count(merged)) vocab_[merged] = next++;
    }
}

BpeModel bpe_from_parts(std::vector<std::string> alphabet,
                        std::vector<std::pair<std::string, std::string>> merges) {
    BpeModel m;
    m.alphabet_ = std::move(alphabet);
    m.merges_ = std::move(merges);
    m.rebuild_vocab();
    return m;
}

BpeModel BpeModel::train(std::span<const std::string> sentences, size_t target_vocab) {
    const auto word_freq = count_words(sentences);
    if (word_freq.empty()) throw EmptyCorpus();

    std::map<std::u32string, long long> alpha_freq;
    for (const auto& [w, f] : word_freq)
        for (char32_t c : w) alpha_freq[std::u32string(1, c)] += f;

    BpeModel model;
    for (const auto& [sym, f] : alpha_freq) model.alphabet_.push_back(u32_to_utf8(sym));

    if (target_vocab < model.alphabet_.size() + kNumSpecials)
        throw VocabTooSmall("target vocab " + std::to_string(target_vocab) + " below alphabet size " +
                            std::to_string(model.alphabet_.size()) + " + " +
                            std::to_string(kNumSpecials) + " specials");

    // Working corpus: per distinct word, its symbol sequence and count.
    struct Entry {
        std::vector<std::string> syms;
        long long count;
    };
    std::vector<Entry> entries;
    entries.reserve(word_freq.size());
    for (const auto& [w, f] : word_freq) {
        Entry e;
        e.count = f;
        for (char32_t c : w) e.syms.push_back(u32_to_utf8(std::u32string(1, c)));
        entries.push_back(std::move(e));
    }

    const size_t max_merges = target_vocab - kNumSpecials - model.alphabet_.size();
    while (model.merges_.size() < max_merges) {
        std::map<std::pair<std::string, std::string>, long long> pair_freq;
        for (const auto& e : entries)
            for (size_t i = 0; i + 1 < e.syms.size(); ++i)
                pair_freq[{e.syms[i], e.syms[i + 1]}] += e.count;

        const std::pair<std::string, std::string>* best = nullptr;
        long long best_count = 0;
        for (const auto& [p, c] : pair_freq) {
            if (c > best_count ||
                (c == best_count && best &&
                 std::make_pair(p.first + p.second, p.first) <
                     std::make_pair(best->first + best->second, best->first))) {
                best = &p;
                best_count = c;
            }
        }
        if (!best || best_count < 2) break;

        const auto [a, b] = *best;
        model.merges_.emplace_back(a, b);
        const std::string merged = a + b;
        for (auto& e : entries) {
            size_t w = 0;
            for (size_t r = 0; r < e.syms.size(); ++w) {
                if (r + 1 < e.syms.size() && e.syms[r] == a && e.syms[r + 1] == b) {
                    e.syms[w] = merged;
                    r += 2;
                } else {
                    if (w != r) e.syms[w] = std::move(e.syms[r]);
                    r += 1;
                }
            }
            e.syms.resize(w);
        }
    }

    model.rebuild_vocab();
    return model;
}

Encoding BpeModel::encode(std::string_view text) const {
    Encoding enc;
    int word_ordinal = 0;
    for (const auto& word : split_words(text)) {
        struct Sym {
            std::string text;
            size_t cps;
        };
        std::vector<Sym> syms;
        syms.reserve(word.text.size());
        for (char32_t c : word.text) syms.push_back({u32_to_utf8(std::u32string(1, c)), 1});

        for (const auto& [a, b] : merges_) {
            size_t w = 0;
            for (size_t r = 0; r < syms.size(); ++w) {
                if (r + 1 < syms.size() && syms[r].text == a && syms[r + 1].text == b) {
                    syms[w] = {syms[r].text + syms[r + 1].text, syms[r].cps + syms[r + 1].cps};
                    r += 2;
                } else {
                    if (w != r) syms[w] = std::move(syms[r]);
                    r += 1;
                }
            }
            syms.resize(w);
        }

        size_t pos = word.start;
        for (const auto& s : syms) {
            const auto it = vocab_.find(s.text);
            if (it != vocab_.end()) {
                enc.pieces.push_back(s.text);
                enc.ids.push_back(it->second);
            } else {
                enc.pieces.push_back(special_piece(kUnkId));
                enc.ids.push_back(kUnkId);
            }
            enc.offsets.emplace_back(pos, pos + s.cps);
            enc.word_index.push_back(word_ordinal);
            pos += s.cps;
        }
        ++word_ordinal;
    }
    return enc;
}

// ---------------------------------------------------------------------------
// Unigram

void UnigramModel::rebuild_index() {
    index_.clear();
    max_piece_cps_ = 0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        index_[pieces_[i].first] = static_cast<int>(i);
        max_piece_cps_ = std::max(max_piece_cps_, uni::decode_utf8(pieces_[i].first).size());
    }
}

UnigramModel unigram_from_pieces(std::vector<std::pair<std::string, double>> pieces) {
    UnigramModel m;
    m.pieces_ = std::move(pieces);
    std::sort(m.pieces_.begin(), m.pieces_.end());
    m.rebuild_index();
    return m;
}

double UnigramModel::log_prob(std::string_view piece) const {
    const auto it = index_.find(std::string(piece));
    return it == index_.end() ? kNegInf : pieces_[it->second].second;
}

namespace {

// Training-time candidate table plus the lattice routines shared by the
// E-step, the pruning loss and the final model.
struct CandidateSet {
    std::vector<std::u32string> text;
    std::vector<double> logp;
    std::vector<bool> single;
    std::unordered_map<std::u32string, int> index;
    size_t max_len = 0;

    int find(const std::u32string& s) const {
        const auto it = index.find(s);
        return it == index.end() ? -1 : it->second;
    }
    void reindex() {
        index.clear();
        max_len = 0;
        for (size_t i = 0; i < text.size(); ++i) {
            index[text[i]] = static_cast<int>(i);
            max_len = std::max(max_len, text[i].size());
        }
    }
};

// Forward scores over the segmentation lattice of `w`; fwd[i] is the
// log-marginal of the prefix of length i.
std::vector<double> lattice_forward(const CandidateSet& cs, const std::u32string& w) {
    const size_t n = w.size();
    std::vector<double> fwd(n + 1, kNegInf);
    fwd[0] = 0.0;
    for (size_t end = 1; end <= n; ++end) {
        const size_t max_len = std::min(cs.max_len, end);
        for (size_t len = 1; len <= max_len; ++len) {
            const int p = cs.find(w.substr(end - len, len));
            if (p < 0 || fwd[end - len] == kNegInf) continue;
            fwd[end] = log_sum_exp(fwd[end], fwd[end - len] + cs.logp[p]);
        }
    }
    return fwd;
}

std::vector<double> lattice_backward(const CandidateSet& cs, const std::u32string& w) {
    const size_t n = w.size();
    std::vector<double> bwd(n + 1, kNegInf);
    bwd[n] = 0.0;
    for (size_t start = n; start-- > 0;) {
        const size_t max_len = std::min(cs.max_len, n - start);
        for (size_t len = 1; len <= max_len; ++len) {
            const int p = cs.find(w.substr(start, len));
            if (p < 0 || bwd[start + len] == kNegInf) continue;
            bwd[start] = log_sum_exp(bwd[start], cs.logp[p] + bwd[start + len]);
        }
    }
    return bwd;
}

// Best segmentation score of `w`, optionally with one piece excluded.
double lattice_viterbi_score(const CandidateSet& cs, const std::u32string& w, int excluded = -1) {
    const size_t n = w.size();
    std::vector<double> best(n + 1, kNegInf);
    best[0] = 0.0;
    for (size_t end = 1; end <= n; ++end) {
        const size_t max_len = std::min(cs.max_len, end);
        for (size_t len = 1; len <= max_len; ++len) {
            const int p = cs.find(w.substr(end - len, len));
            if (p < 0 || p == excluded || best[end - len] == kNegInf) continue;
            best[end] = std::max(best[end], best[end - len] + cs.logp[p]);
        }
    }
    return best[n];
}

}  // namespace

UnigramModel UnigramModel::train(std::span<const std::string> sentences, const TrainOptions& opt) {
    const auto word_freq = count_words(sentences);
    if (word_freq.empty()) throw EmptyCorpus();

    // Seed candidates: all single codepoints, plus substrings up to
    // kMaxSeedPieceLen codepoints occurring at least twice.
    std::map<std::u32string, long long> singles, multis;
    for (const auto& [w, f] : word_freq) {
        const size_t n = w.size();
        for (size_t i = 0; i < n; ++i) {
            singles[w.substr(i, 1)] += f;
            for (size_t len = 2; len <= std::min(kMaxSeedPieceLen, n - i); ++len)
                multis[w.substr(i, len)] += f;
        }
    }
    if (opt.target_vocab < singles.size() + kNumSpecials)
        throw VocabTooSmall("target vocab " + std::to_string(opt.target_vocab) +
                            " below distinct codepoints " + std::to_string(singles.size()) + " + " +
                            std::to_string(kNumSpecials) + " specials");
    const size_t piece_budget = opt.target_vocab - kNumSpecials;

    std::vector<std::pair<std::u32string, long long>> ranked;
    for (const auto& [s, f] : multis)
        if (f >= 2) ranked.emplace_back(s, f);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    const auto seed_cap = static_cast<size_t>(opt.seed_multiplier * static_cast<double>(opt.target_vocab));
    if (singles.size() < seed_cap && ranked.size() > seed_cap - singles.size())
        ranked.resize(seed_cap - singles.size());
    else if (singles.size() >= seed_cap)
        ranked.clear();

    CandidateSet cs;
    double total_freq = 0;
    for (const auto& [s, f] : singles) {
        cs.text.push_back(s);
        cs.logp.push_back(static_cast<double>(f));
        cs.single.push_back(true);
        total_freq += static_cast<double>(f);
    }
    for (const auto& [s, f] : ranked) {
        cs.text.push_back(s);
        cs.logp.push_back(static_cast<double>(f));
        cs.single.push_back(false);
        total_freq += static_cast<double>(f);
    }
    for (auto& lp : cs.logp) lp = std::log(lp) - std::log(total_freq);
    cs.reindex();

    std::vector<double> counts;
    const auto em_pass = [&]() {
        counts.assign(cs.text.size(), 0.0);
        for (const auto& [w, f] : word_freq) {
            const auto fwd = lattice_forward(cs, w);
            const auto bwd = lattice_backward(cs, w);
            const double z = fwd[w.size()];
            if (z == kNegInf) continue;
            for (size_t start = 0; start < w.size(); ++start) {
                if (fwd[start] == kNegInf) continue;
                const size_t max_len = std::min(cs.max_len, w.size() - start);
                for (size_t len = 1; len <= max_len; ++len) {
                    const int p = cs.find(w.substr(start, len));
                    if (p < 0 || bwd[start + len] == kNegInf) continue;
                    counts[p] +=
                        static_cast<double>(f) * std::exp(fwd[start] + cs.logp[p] + bwd[start + len] - z);
                }
            }
        }
        double total = 0;
        for (double c : counts) total += c;
        for (size_t i = 0; i < cs.text.size(); ++i)
            cs.logp[i] = counts[i] > 0 ? std::log(counts[i]) - std::log(total) : kNegInf;
        // Pieces the E-step never used cannot stay at -inf; drop them.
        size_t w = 0;
        std::vector<double> kept_counts;
        for (size_t i = 0; i < cs.text.size(); ++i) {
            if (cs.logp[i] == kNegInf && !cs.single[i]) continue;
            cs.text[w] = cs.text[i];
            cs.logp[w] = cs.logp[i] == kNegInf ? std::log(1e-12) : cs.logp[i];
            cs.single[w] = cs.single[i];
            kept_counts.push_back(counts[i]);
            ++w;
        }
        cs.text.resize(w);
        cs.logp.resize(w);
        cs.single.resize(w);
        counts = std::move(kept_counts);
        cs.reindex();
    };

    const size_t single_count = singles.size();
    while (true) {
        for (int it = 0; it < opt.em_iters; ++it) em_pass();
        if (cs.text.size() <= piece_budget) break;

        // Likelihood loss of removing each multi-codepoint piece: its
        // expected count times the score gap to its best alternative
        // segmentation.
        struct Scored {
            double loss;
            int idx;
        };
        std::vector<Scored> scored;
        for (size_t i = 0; i < cs.text.size(); ++i) {
            if (cs.single[i]) continue;
            const double alt = lattice_viterbi_score(cs, cs.text[i], static_cast<int>(i));
            const double gap = alt == kNegInf ? std::numeric_limits<double>::max()
                                              : cs.logp[i] - alt;
            scored.push_back({counts[i] * gap, static_cast<int>(i)});
        }
        std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
            return a.loss != b.loss ? a.loss > b.loss : cs.text[a.idx] < cs.text[b.idx];
        });

        size_t keep = std::max(piece_budget - single_count,
                               static_cast<size_t>(std::floor(opt.prune_keep * scored.size())));
        if (keep >= scored.size()) keep = piece_budget - single_count;

        std::vector<bool> keep_mask(cs.text.size(), false);
        for (size_t i = 0; i < cs.text.size(); ++i)
            if (cs.single[i]) keep_mask[i] = true;
        for (size_t i = 0; i < keep && i < scored.size(); ++i) keep_mask[scored[i].idx] = true;

        CandidateSet next;
        for (size_t i = 0; i < cs.text.size(); ++i) {
            if (!keep_mask[i]) continue;
            next.text.push_back(cs.text[i]);
            next.logp.push_back(cs.logp[i]);
            next.single.push_back(cs.single[i]);
        }
        next.reindex();
        cs = std::move(next);
    }

    std::vector<std::pair<std::string, double>> pieces;
    pieces.reserve(cs.text.size());
    for (size_t i = 0; i < cs.text.size(); ++i)
        pieces.emplace_back(u32_to_utf8(cs.text[i]), cs.logp[i]);
    return unigram_from_pieces(std::move(pieces));
}

double UnigramModel::marginal_log_prob(std::string_view word) const {
    CandidateSet cs;
    cs.text.reserve(pieces_.size());
    for (const auto& [s, lp] : pieces_) {
        cs.text.push_back(uni::decode_utf8(s));
        cs.logp.push_back(lp);
        cs.single.push_back(cs.text.back().size() == 1);
    }
    cs.reindex();
    const std::u32string w = uni::decode_utf8(word);
    return lattice_forward(cs, w)[w.size()];
}

Encoding UnigramModel::encode(std::string_view text) const {
    Encoding enc;
    int word_ordinal = 0;
    for (const auto& word : split_words(text)) {
        const std::u32string& w = word.text;
        const size_t n = w.size();

        // Suffix DP; ties by fewer pieces, then longest piece first.
        struct Cell {
            double score = kNegInf;
            int n_pieces = 0;
            size_t len = 0;  // length of the piece starting here
            int piece = -2;  // index into pieces_, or -1 for <unk>
        };
        std::vector<Cell> best(n + 1);
        best[n] = {0.0, 0, 0, -2};
        for (size_t i = n; i-- > 0;) {
            const size_t max_len = std::min(max_piece_cps_, n - i);
            bool any = false;
            for (size_t len = 1; len <= max_len; ++len) {
                const auto it = index_.find(u32_to_utf8(w.substr(i, len)));
                if (it == index_.end() || best[i + len].score == kNegInf) continue;
                any = true;
                const Cell cand{pieces_[it->second].second + best[i + len].score,
                                best[i + len].n_pieces + 1, len, it->second};
                const Cell& cur = best[i];
                if (cand.score > cur.score ||
                    (cand.score == cur.score &&
                     (cand.n_pieces < cur.n_pieces ||
                      (cand.n_pieces == cur.n_pieces && cand.len > cur.len))))
                    best[i] = cand;
            }
            if (!any && best[i + 1].score != kNegInf) {
                // Unknown codepoint (or no piece fits): force a single-
                // codepoint <unk> step so every word stays segmentable.
                best[i] = {kUnkLogProb + best[i + 1].score, best[i + 1].n_pieces + 1, 1, -1};
            }
        }

        size_t pos = 0;
        while (pos < n) {
            const Cell& c = best[pos];
            if (c.piece == -1) {
                enc.pieces.push_back(special_piece(kUnkId));
                enc.ids.push_back(kUnkId);
            } else {
                enc.pieces.push_back(pieces_[c.piece].first);
                enc.ids.push_back(c.piece + kNumSpecials);
            }
            enc.offsets.emplace_back(word.start + pos, word.start + pos + c.len);
            enc.word_index.push_back(word_ordinal);
            pos += c.len;
        }
        ++word_ordinal;
    }
    return enc;
}

// ---------------------------------------------------------------------------
// Word-level

WordVocab word_vocab_from_words(std::vector<std::string> words) {
    WordVocab v;
    v.words_ = std::move(words);
    for (size_t i = 0; i < v.words_.size(); ++i)
        v.index_[v.words_[i]] = static_cast<int>(i) + kNumSpecials;
    return v;
}

WordVocab WordVocab::build(std::span<const std::string> sentences, size_t max_vocab) {
    const auto freq = count_words(sentences);
    if (freq.empty()) throw EmptyCorpus();
    if (max_vocab < kNumSpecials + 1)
        throw VocabTooSmall("word vocab must allow at least one word beyond the specials");

    std::vector<std::pair<std::u32string, long long>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (ranked.size() > max_vocab - kNumSpecials) ranked.resize(max_vocab - kNumSpecials);

    std::vector<std::string> words;
    words.reserve(ranked.size());
    for (const auto& [w, f] : ranked) words.push_back(u32_to_utf8(w));
    return word_vocab_from_words(std::move(words));
}

Encoding WordVocab::encode(std::string_view text) const {
    Encoding enc;
    int word_ordinal = 0;
    for (const auto& word : split_words(text)) {
        const std::string utf8 = u32_to_utf8(word.text);
        const auto it = index_.find(utf8);
        if (it != index_.end()) {
            enc.pieces.push_back(utf8);
            enc.ids.push_back(it->second);
        } else {
            enc.pieces.push_back(special_piece(kUnkId));
            enc.ids.push_back(kUnkId);
        }
        enc.offsets.emplace_back(word.start, word.start + word.text.size());
        enc.word_index.push_back(word_ordinal);
        ++word_ordinal;
    }
    return enc;
}

// ---------------------------------------------------------------------------
// Shared surface

std::string tokenizer_decode(const Encoding& enc) {
    if (enc.has_unk()) throw ContainsUnk();
    std::string out;
    int prev_word = -1;
    for (size_t i = 0; i < enc.pieces.size(); ++i) {
        if (enc.word_index[i] != prev_word) {
            if (prev_word >= 0) out.push_back(' ');
            prev_word = enc.word_index[i];
        }
        out += enc.pieces[i];
    }
    return out;
}

Encoding Tokenizer::encode(std::string_view text) const {
    return std::visit([&](const auto& m) { return m.encode(text); }, model_);
}

size_t Tokenizer::vocab_size() const {
    return std::visit([](const auto& m) { return m.vocab_size(); }, model_);
}

std::string Tokenizer::type() const {
    if (std::holds_alternative<BpeModel>(model_)) return "bpe";
    if (std::holds_alternative<UnigramModel>(model_)) return "unigram";
    return "word";
}

std::string Tokenizer::to_json_string() const {
    nlohmann::ordered_json j;
    j["type"] = type();
    j["version"] = 1;
    if (const auto* bpe = std::get_if<BpeModel>(&model_)) {
        j["alphabet"] = bpe->alphabet();
        auto& merges = j["merges"] = nlohmann::ordered_json::array();
        for (const auto& [a, b] : bpe->merges()) merges.push_back({a, b});
    } else if (const auto* ug = std::get_if<UnigramModel>(&model_)) {
        auto& pieces = j["pieces"] = nlohmann::ordered_json::array();
        for (const auto& [s, lp] : ug->pieces()) pieces.push_back({s, lp});
    } else {
        j["words"] = std::get<WordVocab>(model_).words();
    }
    return j.dump(2) + "\n";
}

Tokenizer Tokenizer::from_json_string(std::string_view json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.contains("version") || j["version"] != 1)
        throw std::runtime_error("unsupported tokenizer model version");
    const std::string type = j.at("type");
    if (type == "bpe") {
        std::vector<std::pair<std::string, std::string>> merges;
        for (const auto& m : j.at("merges")) merges.emplace_back(m.at(0), m.at(1));
        return Tokenizer(bpe_from_parts(j.at("alphabet").get<std::vector<std::string>>(),
                                        std::move(merges)));
    }
    if (type == "unigram") {
        std::vector<std::pair<std::string, double>> pieces;
        for (const auto& p : j.at("pieces")) pieces.emplace_back(p.at(0), p.at(1));
        return Tokenizer(unigram_from_pieces(std::move(pieces)));
    }
    if (type == "word")
        return Tokenizer(word_vocab_from_words(j.at("words").get<std::vector<std::string>>()));
    throw std::runtime_error("unknown tokenizer type: " + type);
}

void Tokenizer::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tokenizer model: " + file.string());
    out << to_json_string();
}

Tokenizer Tokenizer::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tokenizer model: " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace kurdner

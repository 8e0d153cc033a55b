#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace kurdner {

struct EmptyCorpus : std::runtime_error {
    EmptyCorpus() : std::runtime_error("tokenizer training corpus is empty") {}
};
struct VocabTooSmall : std::runtime_error {
    explicit VocabTooSmall(const std::string& what) : std::runtime_error(what) {}
};
struct ContainsUnk : std::runtime_error {
    ContainsUnk() : std::runtime_error("encoding contains <unk> pieces; decode would be lossy") {}
};

// Special-token ids shared by all tokenizer variants.
constexpr int kPadId = 0;
constexpr int kUnkId = 1;
constexpr int kBosId = 2;
constexpr int kEosId = 3;
constexpr int kNumSpecials = 4;

inline const char* special_piece(int id) {
    static const char* names[kNumSpecials] = {"<pad>", "<unk>", "<s>", "</s>"};
    return names[id];
}

/// Subword pieces for one text, with enough alignment information to map
/// word-level labels onto pieces and to reconstruct the input.
struct Encoding {
    std::vector<std::string> pieces;
    std::vector<int> ids;
    std::vector<std::pair<size_t, size_t>> offsets;  // codepoint [start, end) in the source
    std::vector<int> word_index;                     // source whitespace-word ordinal per piece

    size_t size() const { return pieces.size(); }
    bool has_unk() const;
};

/// Byte-pair-encoding model over codepoints within whitespace words.
class BpeModel {
 public:
    // Greedy merge training: repeatedly merge the most frequent adjacent
    // symbol pair (ties broken by the lexicographically smallest
    // concatenation, then smallest left part); stops at target_vocab
    // total symbols or when no pair occurs at least twice.
    static BpeModel train(std::span<const std::string> sentences, size_t target_vocab);

    Encoding encode(std::string_view text) const;

    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
    const std::map<std::string, int>& vocab() const { return vocab_; }
    size_t vocab_size() const { return vocab_.size(); }

    friend BpeModel bpe_from_parts(std::vector<std::string> alphabet,
                                   std::vector<std::pair<std::string, std::string>> merges);

 private:
    void rebuild_vocab();

    std::vector<std::string> alphabet_;  // sorted single-codepoint symbols
    std::vector<std::pair<std::string, std::string>> merges_;
    std::map<std::string, int> vocab_;   // symbol -> id, specials included at 0-3
};

BpeModel bpe_from_parts(std::vector<std::string> alphabet,
                        std::vector<std::pair<std::string, std::string>> merges);

/// Unigram language model tokenizer trained by EM over the segmentation
/// lattice with likelihood-loss pruning.
class UnigramModel {
 public:
    struct TrainOptions {
        size_t target_vocab = 4000;
        double seed_multiplier = 4.0;
        double prune_keep = 0.75;
        int em_iters = 4;
    };

    static UnigramModel train(std::span<const std::string> sentences, const TrainOptions& opt);

    // Viterbi segmentation per word; ties broken by fewer pieces, then
    // leftmost-longest.
    Encoding encode(std::string_view text) const;

    // log P(word) summed over *all* segmentations (forward algorithm).
    // Exposed for verification against exhaustive enumeration.
    double marginal_log_prob(std::string_view word) const;

    const std::vector<std::pair<std::string, double>>& pieces() const { return pieces_; }
    size_t vocab_size() const { return pieces_.size() + kNumSpecials; }
    double log_prob(std::string_view piece) const;  // -inf when absent

    friend UnigramModel unigram_from_pieces(std::vector<std::pair<std::string, double>> pieces);

 private:
    void rebuild_index();

    std::vector<std::pair<std::string, double>> pieces_;  // sorted by piece string
    std::unordered_map<std::string, int> index_;
    size_t max_piece_cps_ = 0;
};

UnigramModel unigram_from_pieces(std::vector<std::pair<std::string, double>> pieces);

/// Whole-word vocabulary; out-of-vocabulary words map to <unk>.
class WordVocab {
 public:
    static WordVocab build(std::span<const std::string> sentences, size_t max_vocab);

    Encoding encode(std::string_view text) const;

    const std::vector<std::string>& words() const { return words_; }
    size_t vocab_size() const { return words_.size() + kNumSpecials; }

    friend WordVocab word_vocab_from_words(std::vector<std::string> words);

 private:
    std::vector<std::string> words_;  // id - kNumSpecials -> word
    std::unordered_map<std::string, int> index_;
};

WordVocab word_vocab_from_words(std::vector<std::string> words);

/// Any of the three tokenizer variants behind one encode/decode surface.
class Tokenizer {
 public:
    Tokenizer(BpeModel m) : model_(std::move(m)) {}
    Tokenizer(UnigramModel m) : model_(std::move(m)) {}
    Tokenizer(WordVocab m) : model_(std::move(m)) {}

    Encoding encode(std::string_view text) const;
    size_t vocab_size() const;
    std::string type() const;  // "bpe" | "unigram" | "word"

    std::string to_json_string() const;
    static Tokenizer from_json_string(std::string_view json_text);
    void save(const std::filesystem::path& file) const;
    static Tokenizer load(const std::filesystem::path& file);

    template <class T>
    const T* get_if() const { return std::get_if<T>(&model_); }

 private:
    std::variant<BpeModel, UnigramModel, WordVocab> model_;
};

// Reconstructs the text an encoding was produced from: pieces grouped by
// word_index, single spaces between groups. Throws ContainsUnk when the
// encoding holds <unk> pieces.
std::string tokenizer_decode(const Encoding& enc);

}  // namespace kurdner

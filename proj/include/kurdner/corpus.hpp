#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kurdner/tokenizer.hpp"

namespace kurdner {

struct CorpusError : std::runtime_error {
    size_t line_no;  // 1-based; 0 when the error is not tied to a line
    CorpusError(const std::string& what, size_t line)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_no(line) {}
};
struct EmptyFile : CorpusError {
    EmptyFile() : CorpusError("corpus file is empty", 0) {}
};
struct MalformedLine : CorpusError {
    explicit MalformedLine(size_t line, const std::string& why)
        : CorpusError("malformed corpus line: " + why, line) {}
};
struct InvalidTag : CorpusError {
    explicit InvalidTag(size_t line, const std::string& tag)
        : CorpusError("invalid tag \"" + tag + "\"", line) {}
};
struct AlignmentMismatch : std::runtime_error {
    explicit AlignmentMismatch(size_t words, size_t tags)
        : std::runtime_error("encoding covers " + std::to_string(words) + " words but " +
                             std::to_string(tags) + " tags were given") {}
};
struct BadRatios : std::runtime_error {
    BadRatios() : std::runtime_error("split ratios must be non-negative and sum to 1") {}
};

// A tag is either "O" or position-category, e.g. "B-per", "I-org", "E-org".
struct Tag {
    enum class Position { O, B, I, E };
    Position position = Position::O;
    std::string category;  // empty for O

    static bool valid(const std::string& text);
    static Tag parse(const std::string& text);  // pre: valid(text)
    std::string str() const;
};

/// Dense tag-string <-> id mapping discovered from a corpus; ids follow the
/// lexicographic order of the tag strings. Continuation pieces that carry no
/// label of their own use kIgnoreIndex.
class TagScheme {
 public:
    static constexpr int kIgnoreIndex = -1;

    static TagScheme from_names(std::vector<std::string> names);  // sorts + dedups

    int id_of(const std::string& tag) const;  // -1 when unknown
    const std::string& name_of(int id) const { return names_.at(static_cast<size_t>(id)); }
    size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    int o_id() const { return id_of("O"); }

 private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

struct AnnotatedSentence {
    std::string sentence_id;
    std::vector<std::string> words;
    std::vector<std::string> tags;  // parallel to words

    std::string text() const;  // words joined by single spaces
};

struct Corpus {
    std::vector<AnnotatedSentence> sentences;

    size_t size() const { return sentences.size(); }
    TagScheme tag_scheme() const;
};

// Three-column TSV with the exact header "sentence_id\tword\ttag", LF line
// endings and no BOM. Consecutive rows sharing a sentence_id form one
// sentence. Throws EmptyFile / MalformedLine / InvalidTag.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_file(const std::filesystem::path& file);
Corpus parse_corpus_string(const std::string& text);

void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::filesystem::path& file);

// Advisory annotation-consistency check; parsing never enforces these.
struct ValidationIssue {
    std::string sentence_id;
    size_t word_index;
    std::string rule;
};
struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool clean() const { return issues.empty(); }
};
// Flags tags outside the grammar plus I-x and E-x tags that do not continue
// a B-x/I-x run of the same category.
ValidationReport validate_corpus(const Corpus& corpus);

struct CorpusStats {
    long long n_sentences = 0;
    long long n_tokens = 0;
    long long n_unique_words = 0;
    long long n_unique_tags = 0;
    std::map<std::string, long long> tag_counts;
    std::map<std::string, long long> category_counts;  // per entity category, O excluded
};
CorpusStats corpus_stats(const Corpus& corpus);

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};
struct CorpusSplit {
    Corpus train;
    Corpus val;
    Corpus test;
};
// Deterministic shuffle + partition. Sizes are floor(ratio*N + 1e-9) for
// train and val; test takes the remainder. Throws BadRatios.
CorpusSplit split_corpus(const Corpus& corpus, const SplitRatios& ratios, uint64_t seed);

// Piece-level label ids for one sentence: the first piece of every word
// carries the word's tag id, continuation pieces carry kIgnoreIndex.
// Throws AlignmentMismatch when the encoding's word count differs from
// tags.size().
std::vector<int> align_labels(const Encoding& enc, const std::vector<std::string>& tags,
                              const TagScheme& scheme);

}  // namespace kurdner

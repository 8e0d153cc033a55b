#include "kurdner/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kurdner/rng.hpp"

namespace kurdner {

namespace {

const std::string kHeader = "sentence_id\tword\ttag";

bool has_whitespace(const std::string& s) {
    return s.find_first_of(" \t\r\n\f\v") != std::string::npos;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

}  // namespace

bool Tag::valid(const std::string& text) {
    if (text == "O") return true;
    if (text.size() < 3 || text[1] != '-') return false;
    if (text[0] != 'B' && text[0] != 'I' && text[0] != 'E') return false;
    const std::string category = text.substr(2);
    return !category.empty() && !has_whitespace(category);
}

Tag Tag::parse(const std::string& text) {
    Tag tag;
    if (text == "O") return tag;
    switch (text[0]) {
        case 'B': tag.position = Position::B; break;
        case 'I': tag.position = Position::I; break;
        default: tag.position = Position::E; break;
    }
    tag.category = text.substr(2);
    return tag;
}

std::string Tag::str() const {
    switch (position) {
        case Position::O: return "O";
        case Position::B: return "B-" + category;
        case Position::I: return "I-" + category;
        default: return "E-" + category;
    }
}

TagScheme TagScheme::from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    TagScheme scheme;
    scheme.names_ = std::move(names);
    for (size_t i = 0; i < scheme.names_.size(); ++i)
        scheme.index_[scheme.names_[i]] = static_cast<int>(i);
    return scheme;
}

int TagScheme::id_of(const std::string& tag) const {
    const auto it = index_.find(tag);
    return it == index_.end() ? -1 : it->second;
}

std::string AnnotatedSentence::text() const {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

TagScheme Corpus::tag_scheme() const {
    std::vector<std::string> names;
    for (const auto& s : sentences)
        names.insert(names.end(), s.tags.begin(), s.tags.end());
    return TagScheme::from_names(std::move(names));
}

Corpus parse_corpus_string(const std::string& text) {
    if (text.empty()) throw EmptyFile();
    if (text.rfind("\xEF\xBB\xBF", 0) == 0)
        throw MalformedLine(1, "file starts with a UTF-8 byte-order mark");

    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }

    if (lines.empty()) throw EmptyFile();
    if (lines[0] != kHeader)
        throw MalformedLine(1, "expected header \"" + kHeader + "\"");

    Corpus corpus;
    for (size_t i = 1; i < lines.size(); ++i) {
        const size_t line_no = i + 1;
        const std::string& line = lines[i];
        if (line.find('\r') != std::string::npos)
            throw MalformedLine(line_no, "carriage return; lines must end with LF only");
        if (line.empty())
            throw MalformedLine(line_no, "blank line");

        const auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw MalformedLine(line_no, "expected 3 tab-separated columns, got " +
                                             std::to_string(fields.size()));
        const std::string& id = fields[0];
        const std::string& word = fields[1];
        const std::string& tag = fields[2];
        if (id.empty()) throw MalformedLine(line_no, "empty sentence_id");
        if (word.empty() || has_whitespace(word))
            throw MalformedLine(line_no, "word column must be a single non-empty token");
        if (!Tag::valid(tag)) throw InvalidTag(line_no, tag);

        if (corpus.sentences.empty() || corpus.sentences.back().sentence_id != id) {
            AnnotatedSentence s;
            s.sentence_id = id;
            corpus.sentences.push_back(std::move(s));
        }
        corpus.sentences.back().words.push_back(word);
        corpus.sentences.back().tags.push_back(tag);
    }
    return corpus;
}

Corpus parse_corpus(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_corpus_string(text);
}

Corpus parse_corpus_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + file.string());
    return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    out << kHeader << '\n';
    for (const auto& s : corpus.sentences)
        for (size_t i = 0; i < s.words.size(); ++i)
            out << s.sentence_id << '\t' << s.words[i] << '\t' << s.tags[i] << '\n';
}

void write_corpus_file(const Corpus& corpus, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus file: " + file.string());
    write_corpus(corpus, out);
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    for (const auto& s : corpus.sentences) {
        for (size_t wi = 0; wi < s.tags.size(); ++wi) {
            if (!Tag::valid(s.tags[wi])) {
                report.issues.push_back(
                    {s.sentence_id, wi, "tag \"" + s.tags[wi] + "\" does not match the grammar"});
                continue;
            }
            const Tag tag = Tag::parse(s.tags[wi]);
            if (tag.position != Tag::Position::I && tag.position != Tag::Position::E) continue;

            bool continues = false;
            if (wi > 0 && Tag::valid(s.tags[wi - 1])) {
                const Tag prev = Tag::parse(s.tags[wi - 1]);
                continues = (prev.position == Tag::Position::B ||
                             prev.position == Tag::Position::I) &&
                            prev.category == tag.category;
            }
            if (!continues)
                report.issues.push_back(
                    {s.sentence_id, wi,
                     s.tags[wi] + " does not continue a " + tag.category + " entity"});
        }
    }
    return report;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    std::set<std::string> unique_words;
    stats.n_sentences = static_cast<long long>(corpus.sentences.size());
    for (const auto& s : corpus.sentences) {
        stats.n_tokens += static_cast<long long>(s.words.size());
        for (const auto& w : s.words) unique_words.insert(w);
        for (const auto& t : s.tags) {
            ++stats.tag_counts[t];
            const Tag tag = Tag::parse(t);
            if (tag.position != Tag::Position::O) ++stats.category_counts[tag.category];
        }
    }
    stats.n_unique_words = static_cast<long long>(unique_words.size());
    stats.n_unique_tags = static_cast<long long>(stats.tag_counts.size());
    return stats;
}

CorpusSplit split_corpus(const Corpus& corpus, const SplitRatios& ratios, uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw BadRatios();

    const size_t n = corpus.sentences.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    // floor with a small nudge so ratios like 0.7 * 10 don't land just
    // below the integer they represent exactly.
    const auto take = [n](double r) {
        return static_cast<size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    };
    const size_t n_train = take(ratios.train);
    const size_t n_val = take(ratios.val);

    CorpusSplit split;
    for (size_t i = 0; i < n; ++i) {
        const AnnotatedSentence& s = corpus.sentences[order[i]];
        if (i < n_train)
            split.train.sentences.push_back(s);
        else if (i < n_train + n_val)
            split.val.sentences.push_back(s);
        else
            split.test.sentences.push_back(s);
    }
    return split;
}

std::vector<int> align_labels(const Encoding& enc, const std::vector<std::string>& tags,
                              const TagScheme& scheme) {
    const size_t n_words = enc.word_index.empty() ? 0 : static_cast<size_t>(enc.word_index.back()) + 1;
    if (n_words != tags.size()) throw AlignmentMismatch(n_words, tags.size());

    std::vector<int> labels(enc.size(), TagScheme::kIgnoreIndex);
    int prev_word = -1;
    for (size_t i = 0; i < enc.size(); ++i) {
        if (enc.word_index[i] == prev_word) continue;  // continuation piece
        prev_word = enc.word_index[i];
        const std::string& tag = tags[static_cast<size_t>(prev_word)];
        const int id = scheme.id_of(tag);
        if (id < 0) throw std::invalid_argument("tag not present in scheme: " + tag);
        labels[i] = id;
    }
    return labels;
}

}  // namespace kurdner

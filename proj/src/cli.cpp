#include "kurdner/cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kurdner/corpus.hpp"
#include "kurdner/model.hpp"
#include "kurdner/rng.hpp"
#include "kurdner/text.hpp"
#include "kurdner/tokenizer.hpp"
#include "kurdner/trainer.hpp"

namespace kurdner::cli {

namespace {

constexpr const char* kToolVersion = "kurdner 1.0.0";

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Input lines, tolerant of a trailing newline and CRLF endings.
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string digest_hex(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// ---------------------------------------------------------------------------
// Run manifest: one per invocation, recording the command, the effective
// settings, the seed, and content digests of every input file.

struct Manifest {
    std::string command_line;
    uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;  // path -> digest
    std::vector<std::string> outputs;
    std::string started_at;
};

std::string manifest_json(const Manifest& m) {
    ordered_json j;
    j["tool"] = kToolVersion;
    j["command"] = m.command_line;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["started_at"] = m.started_at;
    j["finished_at"] = now_iso8601();
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Options shared across subcommands.

struct Opts {
    // global
    uint64_t seed = 0;
    unsigned threads = 1;  // accepted for symmetry; all reductions are order-independent
    bool json = false;
    std::string manifest_path;

    // per-subcommand inputs/outputs
    std::string in, out, audit, charmap;
    std::string method;
    size_t vocab = 4000;
    std::string model_path, ckpt, corpus_path, tokenizer_path, config_path;
    std::string out_prefix, out_dir;
};

// The manifest lands next to the command's primary output; commands that only
// write to stdout send it to the diagnostic stream instead. `--manifest FILE`
// overrides either way.
void emit_manifest(const Manifest& m, const Opts& o, const std::string& default_path,
                   std::ostream& err) {
    const std::string text = manifest_json(m);
    if (!o.manifest_path.empty())
        write_file(o.manifest_path, text);
    else if (!default_path.empty())
        write_file(default_path, text);
    else
        err << text;
}

double parse_double(const std::string& key, const std::string& value) {
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": not a number: " + value);
    }
    if (used != value.size())
        throw std::runtime_error("config key " + key + ": not a number: " + value);
    return v;
}

uint64_t parse_uint(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v < 0 || v != std::floor(v))
        throw std::runtime_error("config key " + key + ": not a non-negative integer: " + value);
    return static_cast<uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config key " + key + ": not a boolean: " + value);
}

// Applies a parsed config file to the model/train settings. One `seed` key
// drives both, matching the single --seed flag.
void apply_config(const std::map<std::string, std::string>& kv, ModelConfig& mc, TrainConfig& tc,
                  size_t* tokenizer_vocab) {
    for (const auto& [key, value] : kv) {
        if (key == "d_model") mc.d_model = parse_uint(key, value);
        else if (key == "n_heads") mc.n_heads = parse_uint(key, value);
        else if (key == "n_layers") mc.n_layers = parse_uint(key, value);
        else if (key == "d_ffn") mc.d_ffn = parse_uint(key, value);
        else if (key == "max_seq_len") mc.max_seq_len = parse_uint(key, value);
        else if (key == "adapter_enabled") mc.adapter_enabled = parse_bool(key, value);
        else if (key == "head_kind") mc.head_kind = value;
        else if (key == "d_head") mc.d_head = parse_uint(key, value);
        else if (key == "learning_rate") tc.learning_rate = parse_double(key, value);
        else if (key == "batch_size") tc.batch_size = parse_uint(key, value);
        else if (key == "epochs") tc.epochs = parse_uint(key, value);
        else if (key == "shuffle") tc.shuffle = parse_bool(key, value);
        else if (key == "seed") { tc.seed = parse_uint(key, value); mc.seed = tc.seed; }
        else if (key == "tokenizer_vocab" && tokenizer_vocab)
            *tokenizer_vocab = parse_uint(key, value);
        else throw std::runtime_error("unknown config key: " + key);
    }
}

std::map<std::string, std::string> config_snapshot(const ModelConfig& mc, const TrainConfig& tc) {
    std::map<std::string, std::string> kv;
    kv["d_model"] = std::to_string(mc.d_model);
    kv["n_heads"] = std::to_string(mc.n_heads);
    kv["n_layers"] = std::to_string(mc.n_layers);
    kv["d_ffn"] = std::to_string(mc.d_ffn);
    kv["max_seq_len"] = std::to_string(mc.max_seq_len);
    kv["adapter_enabled"] = mc.adapter_enabled ? "true" : "false";
    kv["head_kind"] = mc.head_kind;
    kv["d_head"] = std::to_string(mc.d_head);
    kv["vocab_size"] = std::to_string(mc.vocab_size);
    kv["n_tags"] = std::to_string(mc.n_tags);
    kv["learning_rate"] = std::to_string(tc.learning_rate);
    kv["batch_size"] = std::to_string(tc.batch_size);
    kv["epochs"] = std::to_string(tc.epochs);
    kv["shuffle"] = tc.shuffle ? "true" : "false";
    kv["seed"] = std::to_string(tc.seed);
    return kv;
}

std::string fmt1(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_one_decimal(x));
    return buf;
}

ordered_json eval_json(const EvalResult& r) {
    ordered_json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["accuracy"] = r.accuracy;
    j["accuracy_excluding_o"] = r.accuracy_excluding_o;
    j["n_tokens"] = r.n_tokens;
    return j;
}

void print_eval(const EvalResult& r, bool json, std::ostream& out) {
    if (json) {
        out << eval_json(r).dump(2) << "\n";
        return;
    }
    out << "precision\t" << fmt1(r.precision) << "\n"
        << "recall\t" << fmt1(r.recall) << "\n"
        << "f1\t" << fmt1(r.f1) << "\n"
        << "accuracy\t" << fmt1(r.accuracy) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.

int run_normalize(const Opts& o, std::ostream&, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    const std::string text = read_file(o.in);
    man.inputs[o.in] = digest_hex(text);
    Normalizer norm;
    if (!o.charmap.empty()) {
        man.inputs[o.charmap] = digest_hex(read_file(o.charmap));
        norm = Normalizer(CharMap::load_tsv(o.charmap));
    }

    std::string normalized;
    ordered_json audit_rows = ordered_json::array();
    const std::vector<std::string> lines = split_lines(text);
    for (size_t i = 0; i < lines.size(); ++i) {
        std::vector<AuditRecord> audit;
        normalized += norm.normalize(lines[i], o.audit.empty() ? nullptr : &audit);
        normalized += '\n';
        for (const auto& rec : audit) {
            ordered_json row;
            row["line"] = i + 1;
            row["op"] = rec.op;
            row["position"] = rec.position;
            row["before"] = rec.before;
            row["after"] = rec.after;
            audit_rows.push_back(std::move(row));
        }
    }

    write_file(o.out, normalized);
    man.outputs.push_back(o.out);
    if (!o.audit.empty()) {
        write_file(o.audit, audit_rows.dump(2) + "\n");
        man.outputs.push_back(o.audit);
    }
    emit_manifest(man, o, o.out + ".manifest.json", err);
    return 0;
}

int run_segment(const Opts& o, std::ostream&, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    const std::string text = read_file(o.in);
    man.inputs[o.in] = digest_hex(text);
    const Normalizer norm;  // segmentation expects normalized text
    std::string result;
    for (const std::string& s : segment_sentences(norm.normalize(text)).sentences)
        result += s + "\n";
    write_file(o.out, result);
    man.outputs.push_back(o.out);
    emit_manifest(man, o, o.out + ".manifest.json", err);
    return 0;
}

int run_tokenizer_train(const Opts& o, std::ostream&, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    const std::string text = read_file(o.in);
    man.inputs[o.in] = digest_hex(text);
    man.config["method"] = o.method;
    man.config["vocab"] = std::to_string(o.vocab);

    std::vector<std::string> sentences;
    for (std::string& line : split_lines(text))
        if (line.find_first_not_of(" \t") != std::string::npos) sentences.push_back(std::move(line));

    Tokenizer tok = [&]() -> Tokenizer {
        if (o.method == "bpe") return Tokenizer(BpeModel::train(sentences, o.vocab));
        if (o.method == "word") return Tokenizer(WordVocab::build(sentences, o.vocab));
        UnigramModel::TrainOptions opt;
        opt.target_vocab = o.vocab;
        return Tokenizer(UnigramModel::train(sentences, opt));
    }();
    tok.save(o.out);
    man.outputs.push_back(o.out);
    emit_manifest(man, o, o.out + ".manifest.json", err);
    return 0;
}

int run_tokenizer_encode(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    const std::string model_text = read_file(o.model_path);
    man.inputs[o.model_path] = digest_hex(model_text);
    const Tokenizer tok = Tokenizer::from_json_string(model_text);

    const std::string text = read_file(o.in);
    man.inputs[o.in] = digest_hex(text);
    for (const std::string& line : split_lines(text)) {
        const Encoding enc = tok.encode(line);
        for (size_t i = 0; i < enc.pieces.size(); ++i) {
            if (i) out << ' ';
            out << enc.pieces[i];
        }
        out << '\n';
    }
    emit_manifest(man, o, "", err);
    return 0;
}

int run_corpus_stats(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    man.inputs[o.in] = digest_hex(read_file(o.in));
    const CorpusStats stats = corpus_stats(parse_corpus_file(o.in));
    if (o.json) {
        ordered_json j;
        j["n_sentences"] = stats.n_sentences;
        j["n_tokens"] = stats.n_tokens;
        j["n_unique_words"] = stats.n_unique_words;
        j["n_unique_tags"] = stats.n_unique_tags;
        j["tag_counts"] = stats.tag_counts;
        j["category_counts"] = stats.category_counts;
        out << j.dump(2) << "\n";
    } else {
        out << "sentences\t" << stats.n_sentences << "\n"
            << "tokens\t" << stats.n_tokens << "\n"
            << "unique words\t" << stats.n_unique_words << "\n"
            << "unique tags\t" << stats.n_unique_tags << "\n";
        for (const auto& [tag, count] : stats.tag_counts)
            out << "tag\t" << tag << "\t" << count << "\n";
        for (const auto& [cat, count] : stats.category_counts)
            out << "category\t" << cat << "\t" << count << "\n";
    }
    emit_manifest(man, o, "", err);
    return 0;
}

int run_corpus_validate(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    man.inputs[o.in] = digest_hex(read_file(o.in));
    const ValidationReport report = validate_corpus(parse_corpus_file(o.in));
    if (o.json) {
        ordered_json j;
        j["clean"] = report.clean();
        j["issues"] = ordered_json::array();
        for (const auto& issue : report.issues) {
            ordered_json row;
            row["sentence_id"] = issue.sentence_id;
            row["word_index"] = issue.word_index;
            row["rule"] = issue.rule;
            j["issues"].push_back(std::move(row));
        }
        out << j.dump(2) << "\n";
    } else if (report.clean()) {
        out << "ok\n";
    } else {
        for (const auto& issue : report.issues)
            out << issue.sentence_id << "\t" << issue.word_index << "\t" << issue.rule << "\n";
    }
    emit_manifest(man, o, "", err);
    return report.clean() ? 0 : 2;
}

int run_corpus_split(const Opts& o, std::ostream&, std::ostream& err, Manifest& man) {
    man.seed = o.seed;
    man.inputs[o.in] = digest_hex(read_file(o.in));
    const CorpusSplit split = split_corpus(parse_corpus_file(o.in), SplitRatios{}, o.seed);
    const std::string train_path = o.out_prefix + ".train.tsv";
    const std::string val_path = o.out_prefix + ".val.tsv";
    const std::string test_path = o.out_prefix + ".test.tsv";
    write_corpus_file(split.train, train_path);
    write_corpus_file(split.val, val_path);
    write_corpus_file(split.test, test_path);
    man.outputs = {train_path, val_path, test_path};
    emit_manifest(man, o, o.out_prefix + ".manifest.json", err);
    return 0;
}

int run_train(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    const std::string corpus_text = read_file(o.corpus_path);
    const std::string tok_text = read_file(o.tokenizer_path);
    const std::string config_text = read_file(o.config_path);
    man.inputs[o.corpus_path] = digest_hex(corpus_text);
    man.inputs[o.tokenizer_path] = digest_hex(tok_text);
    man.inputs[o.config_path] = digest_hex(config_text);

    ModelConfig mc;
    TrainConfig tc;
    tc.seed = o.seed;
    mc.seed = o.seed;
    apply_config(parse_flat_config(config_text), mc, tc, nullptr);

    const Corpus corpus = parse_corpus_string(corpus_text);
    const Tokenizer tok = Tokenizer::from_json_string(tok_text);
    const TagScheme scheme = corpus.tag_scheme();
    mc.vocab_size = tok.vocab_size();
    mc.n_tags = scheme.size();
    man.config = config_snapshot(mc, tc);
    man.seed = tc.seed;

    Model model = Model::init(mc, scheme.names());
    const CorpusSplit split = split_corpus(corpus, SplitRatios{}, tc.seed);
    const std::vector<EpochRecord> history = train(model, split.train, split.val, tok, tc);

    if (o.json) {
        ordered_json j = ordered_json::array();
        for (const auto& rec : history) {
            ordered_json row;
            row["epoch"] = rec.epoch;
            row["mean_train_loss"] = rec.mean_train_loss;
            row["validation"] = eval_json(rec.validation);
            j.push_back(std::move(row));
        }
        out << j.dump(2) << "\n";
    } else {
        for (const auto& rec : history) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "epoch %zu\tloss %.4f\tval_f1 %s\n", rec.epoch,
                          rec.mean_train_loss, fmt1(rec.validation.f1).c_str());
            out << buf;
        }
    }

    model.save(o.out);
    man.outputs.push_back(o.out);
    emit_manifest(man, o, o.out + ".manifest.json", err);
    return 0;
}

int run_eval(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    const std::string ckpt_text = read_file(o.ckpt);
    const std::string tok_text = read_file(o.tokenizer_path);
    const std::string corpus_text = read_file(o.corpus_path);
    man.inputs[o.ckpt] = digest_hex(ckpt_text);
    man.inputs[o.tokenizer_path] = digest_hex(tok_text);
    man.inputs[o.corpus_path] = digest_hex(corpus_text);

    const Model model = Model::from_json_string(ckpt_text);
    const Tokenizer tok = Tokenizer::from_json_string(tok_text);
    const EvalResult r = evaluate(model, parse_corpus_string(corpus_text), tok);
    print_eval(r, o.json, out);
    emit_manifest(man, o, "", err);
    return 0;
}

int run_benchmark(const Opts& o, std::ostream& out, std::ostream& err, Manifest& man) {
    const std::string corpus_text = read_file(o.corpus_path);
    man.inputs[o.corpus_path] = digest_hex(corpus_text);

    BenchmarkOptions opt;
    opt.train.seed = o.seed;
    opt.model.seed = o.seed;
    opt.tokenizer_vocab = o.vocab;
    if (!o.config_path.empty()) {
        const std::string config_text = read_file(o.config_path);
        man.inputs[o.config_path] = digest_hex(config_text);
        apply_config(parse_flat_config(config_text), opt.model, opt.train, &opt.tokenizer_vocab);
    }
    man.seed = opt.train.seed;
    man.config = config_snapshot(opt.model, opt.train);
    man.config["tokenizer_vocab"] = std::to_string(opt.tokenizer_vocab);

    const Corpus corpus = parse_corpus_string(corpus_text);
    const std::vector<ComparisonRow> rows = benchmark(corpus, default_benchmark_specs(), opt);

    std::vector<ImprovementRow> improvements;
    for (const auto& row : rows) {
        if (row.model_name != "adapter") continue;
        for (auto& imp : improvement_table(rows, row)) improvements.push_back(std::move(imp));
    }

    std::filesystem::create_directories(o.out_dir);
    const auto path = [&](const char* name) { return o.out_dir + "/" + name; };
    write_file(path("comparison.tsv"), comparison_table_tsv(rows));
    write_file(path("comparison.json"), comparison_table_json(rows));
    write_file(path("improvement.tsv"), improvement_table_tsv(improvements));
    write_file(path("improvement.json"), improvement_table_json(improvements));
    for (const char* name : {"comparison.tsv", "comparison.json", "improvement.tsv",
                             "improvement.json"})
        man.outputs.push_back(path(name));

    out << comparison_table_tsv(rows);
    emit_manifest(man, o, path("manifest.json"), err);
    return 0;
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    size_t line_no = 0;
    for (std::string line : split_lines(text)) {
        ++line_no;
        if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto trim = [](std::string s) {
            const size_t a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            return s.substr(a, s.find_last_not_of(" \t") - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        if (!kv.emplace(key, value).second)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    return kv;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Opts o;
    CLI::App app{"Kurdish (Sorani) named-entity recognition pipeline"};
    app.name("kurdner");
    app.require_subcommand(1);

    app.add_option("--seed", o.seed, "Seed for all randomness (default 0)");
    app.add_option("--threads", o.threads, "Worker threads; never affects results")
        ->check(CLI::PositiveNumber);
    app.add_flag("--json", o.json, "Emit JSON instead of plain text where applicable");
    app.add_option("--manifest", o.manifest_path, "Write the run manifest to this path");

    const auto sub = [&](CLI::App* parent, const char* name, const char* desc) {
        CLI::App* s = parent->add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    int rc = 0;
    Manifest man;
    for (int i = 0; i < argc; ++i) {
        if (i) man.command_line += ' ';
        man.command_line += argv[i];
    }
    man.started_at = now_iso8601();

    CLI::App* normalize = sub(&app, "normalize", "Normalize Sorani text, one line at a time");
    normalize->add_option("--in", o.in, "Input text file")->required();
    normalize->add_option("--out", o.out, "Normalized output file")->required();
    normalize->add_option("--audit", o.audit, "Write a JSON audit of every substitution");
    normalize->add_option("--charmap", o.charmap, "Replacement table (TSV) overriding the built-in");
    normalize->callback([&] { rc = run_normalize(o, out, err, man); });

    CLI::App* segment = sub(&app, "segment", "Split text into sentences, one per output line");
    segment->add_option("--in", o.in, "Input text file")->required();
    segment->add_option("--out", o.out, "Sentence file to write")->required();
    segment->callback([&] { rc = run_segment(o, out, err, man); });

    CLI::App* tokenizer = sub(&app, "tokenizer", "Subword tokenizer commands");
    tokenizer->require_subcommand(1);
    CLI::App* tok_train = sub(tokenizer, "train", "Train a tokenizer on one-sentence-per-line text");
    tok_train->add_option("--method", o.method, "bpe, unigram or word")
        ->required()
        ->check(CLI::IsMember({"bpe", "unigram", "word"}));
    tok_train->add_option("--vocab", o.vocab, "Target vocabulary size (default 4000)");
    tok_train->add_option("--in", o.in, "Training text, one sentence per line")->required();
    tok_train->add_option("--out", o.out, "Model file to write")->required();
    tok_train->callback([&] { rc = run_tokenizer_train(o, out, err, man); });

    CLI::App* tok_encode = sub(tokenizer, "encode", "Encode text, one piece sequence per line");
    tok_encode->add_option("--model", o.model_path, "Trained tokenizer model")->required();
    tok_encode->add_option("--in", o.in, "Input text file")->required();
    tok_encode->callback([&] { rc = run_tokenizer_encode(o, out, err, man); });

    CLI::App* corpus = sub(&app, "corpus", "Annotated corpus commands");
    corpus->require_subcommand(1);
    CLI::App* stats = sub(corpus, "stats", "Print corpus statistics");
    stats->add_option("--in", o.in, "Corpus TSV")->required();
    stats->callback([&] { rc = run_corpus_stats(o, out, err, man); });

    CLI::App* validate = sub(corpus, "validate", "Check tag-sequence consistency");
    validate->add_option("--in", o.in, "Corpus TSV")->required();
    validate->callback([&] { rc = run_corpus_validate(o, out, err, man); });

    CLI::App* split = sub(corpus, "split", "Seeded train/val/test split (70/15/15)");
    split->add_option("--in", o.in, "Corpus TSV")->required();
    split->add_option("--out-prefix", o.out_prefix, "Prefix for the three output files")->required();
    split->callback([&] { rc = run_corpus_split(o, out, err, man); });

    CLI::App* train_cmd = sub(&app, "train", "Fine-tune on a corpus and save a checkpoint");
    train_cmd->add_option("--corpus", o.corpus_path, "Annotated corpus TSV")->required();
    train_cmd->add_option("--tokenizer", o.tokenizer_path, "Trained tokenizer model")->required();
    train_cmd->add_option("--config", o.config_path, "Run configuration (key = value)")->required();
    train_cmd->add_option("--out", o.out, "Checkpoint file to write")->required();
    train_cmd->callback([&] { rc = run_train(o, out, err, man); });

    CLI::App* eval_cmd = sub(&app, "eval", "Evaluate a checkpoint on a corpus");
    eval_cmd->add_option("--ckpt", o.ckpt, "Checkpoint file")->required();
    eval_cmd->add_option("--corpus", o.corpus_path, "Annotated corpus TSV")->required();
    eval_cmd->add_option("--tokenizer", o.tokenizer_path, "Tokenizer used at training time")
        ->required();
    eval_cmd->callback([&] { rc = run_eval(o, out, err, man); });

    CLI::App* bench = sub(&app, "benchmark", "Run the model x tokenization comparison grid");
    bench->add_option("--corpus", o.corpus_path, "Annotated corpus TSV")->required();
    bench->add_option("--out", o.out_dir, "Directory for report files")->required();
    bench->add_option("--config", o.config_path, "Run configuration (key = value)");
    bench->add_option("--vocab", o.vocab, "Tokenizer vocabulary size (default 4000)");
    bench->callback([&] { rc = run_benchmark(o, out, err, man); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}

int dispatch(int argc, const char* const* argv) {
    return dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace kurdner::cli

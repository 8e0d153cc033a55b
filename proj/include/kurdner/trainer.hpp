#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kurdner/corpus.hpp"
#include "kurdner/model.hpp"
#include "kurdner/tokenizer.hpp"

namespace kurdner {

struct SchemeMismatch : std::runtime_error {
    explicit SchemeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct LengthMismatch : std::runtime_error {
    LengthMismatch(size_t pred, size_t gold)
        : std::runtime_error("got " + std::to_string(pred) + " predictions for " +
                             std::to_string(gold) + " gold tags") {}
};
struct MissingBaseline : std::runtime_error {
    explicit MissingBaseline(const std::string& what) : std::runtime_error(what) {}
};

struct TrainConfig {
    double learning_rate = 3e-5;
    size_t batch_size = 16;
    size_t epochs = 10;
    uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;  // positive learning rate and batch size
};

struct TagCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
};

/// Token-level micro-averaged metrics, as percentages in [0, 100].
struct EvalResult {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0;              // over all tokens, O included
    double accuracy_excluding_o = 0;  // over tokens whose gold tag is an entity
    long long n_tokens = 0;
    std::map<std::string, TagCounts> per_tag;  // entity tags only
};

struct EpochRecord {
    size_t epoch = 0;  // 1-based
    double mean_train_loss = 0;
    EvalResult validation;
};

struct ComparisonRow {
    std::string model_name;
    std::string tokenization_method;  // "BPE" | "Word-level" | "Sentence-piece"
    EvalResult result;
};

struct ImprovementRow {
    std::string comparison;  // baseline model name
    std::string tokenization_method;
    double delta_f1 = 0;  // proposed F1 minus baseline F1, percentage points
};

/// Adam with per-tensor first/second moment state; step counts are shared
/// across tensors so bias correction matches the usual formulation.
class Adam {
 public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(const std::vector<std::pair<Matrix*, const Matrix*>>& grads);
    size_t steps_taken() const { return t_; }

 private:
    struct Moments {
        Matrix m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    size_t t_ = 0;
    std::map<Matrix*, Moments> state_;
};

// Micro-averaged token metrics over parallel tag-string lists. `scheme` must
// contain every tag that appears. Throws LengthMismatch.
EvalResult token_metrics(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                         const TagScheme& scheme);

// Fine-tunes the trainable parameters (adapters + head) in place and returns
// the per-epoch history. Seeded shuffle per epoch; the last partial batch is
// kept. Throws SchemeMismatch when a corpus tag is unknown to the model.
std::vector<EpochRecord> train(Model& m, const Corpus& train_corpus, const Corpus& val_corpus,
                               const Tokenizer& tok, const TrainConfig& cfg);

// Greedy per-token prediction (argmax at each word's first piece) scored
// against the gold tags. Words lost to max_seq_len truncation are predicted
// as O.
EvalResult evaluate(const Model& m, const Corpus& corpus, const Tokenizer& tok);

// evaluate() on a model that has seen no training steps.
EvalResult zero_shot_eval(const Model& m, const Corpus& corpus, const Tokenizer& tok);

struct BenchmarkSpec {
    std::string model_variant;        // "adapter" | "zero-shot" | "mlp-head"
    std::string tokenization_method;  // "BPE" | "Word-level" | "Sentence-piece"
};

// The full grid: three model variants x three tokenization methods.
std::vector<BenchmarkSpec> default_benchmark_specs();

struct BenchmarkOptions {
    size_t tokenizer_vocab = 4000;
    ModelConfig model;    // dims only; vocab_size/n_tags/head/adapters set per run
    TrainConfig train;    // seed here drives the split and all per-run seeds
    SplitRatios ratios;
};

// For each spec: train the tokenizer on the corpus, split, train the model
// variant (zero-shot variants skip training) and evaluate on the test split.
std::vector<ComparisonRow> benchmark(const Corpus& corpus, const std::vector<BenchmarkSpec>& specs,
                                     const BenchmarkOptions& opt);

// F1 deltas of the proposed row against every other row sharing its
// tokenization method. Throws MissingBaseline when there is none.
std::vector<ImprovementRow> improvement_table(const std::vector<ComparisonRow>& rows,
                                              const ComparisonRow& proposed);

// Report files: TSV rounds percentages to one decimal (half away from zero);
// JSON keeps full precision and the accuracy-excluding-O figure.
std::string comparison_table_tsv(const std::vector<ComparisonRow>& rows);
std::string comparison_table_json(const std::vector<ComparisonRow>& rows);
std::string improvement_table_tsv(const std::vector<ImprovementRow>& rows);
std::string improvement_table_json(const std::vector<ImprovementRow>& rows);

// One-decimal rounding with ties away from zero, the convention used in all
// TSV reports.
double round_one_decimal(double x);

}  // namespace kurdner

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kurdner/autograd.hpp"
#include "kurdner/tensor.hpp"

namespace kurdner {

struct BadConfig : std::runtime_error {
    explicit BadConfig(const std::string& what) : std::runtime_error(what) {}
};
struct SequenceTooLong : std::runtime_error {
    SequenceTooLong(size_t len, size_t max_len)
        : std::runtime_error("sequence length " + std::to_string(len) +
                             " exceeds max_seq_len " + std::to_string(max_len)) {}
};
struct AllIgnored : std::runtime_error {
    AllIgnored() : std::runtime_error("no position contributes to the loss") {}
};

// Label value excluded from loss and metrics; matches TagScheme::kIgnoreIndex.
constexpr int kIgnoreLabel = -1;

struct ModelConfig {
    size_t d_model = 128;
    size_t n_heads = 4;
    size_t n_layers = 2;
    size_t d_ffn = 256;
    size_t vocab_size = 0;
    size_t n_tags = 0;
    size_t max_seq_len = 128;
    bool adapter_enabled = true;
    std::string head_kind = "linear";  // "linear" | "mlp"
    size_t d_head = 0;                 // mlp hidden width; 0 means d_model
    uint64_t seed = 0;

    size_t head_hidden() const { return d_head ? d_head : d_model; }
    void validate() const;  // throws BadConfig
};

struct AttentionParams {
    Matrix w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;  // weights d x d, biases 1 x d
};

struct BaseLayerParams {
    AttentionParams attn;
    Matrix w1, b1, w2, b2;  // FFN: d x d_ffn, 1 x d_ffn, d_ffn x d, 1 x d
    Matrix ln1_gain, ln1_shift, ln2_gain, ln2_shift;  // each 1 x d
};

// Extra attention path added to a frozen layer. w_o and every bias start at
// exactly zero, so the adapter contributes nothing until trained.
struct AdapterParams {
    AttentionParams attn;
};

struct HeadParams {
    Matrix w1, b1;  // linear: d x n_tags; mlp: d x d_head
    Matrix w2, b2;  // mlp only: d_head x n_tags; empty for linear
};

/// Rectangular batch; shorter sequences are padded with the PAD id, padded
/// and continuation positions carry kIgnoreLabel, mask marks real tokens.
struct Batch {
    size_t batch_size = 0;
    size_t seq_len = 0;
    std::vector<int> ids;     // batch_size * seq_len, row-major
    std::vector<int> labels;  // same layout; kIgnoreLabel allowed
    std::vector<char> mask;   // 1 = real token

    static Batch from_sequences(const std::vector<std::vector<int>>& ids,
                                const std::vector<std::vector<int>>& labels);

    int id_at(size_t b, size_t t) const { return ids[b * seq_len + t]; }
    int label_at(size_t b, size_t t) const { return labels[b * seq_len + t]; }
    bool real_at(size_t b, size_t t) const { return mask[b * seq_len + t] != 0; }
};

struct Model {
    ModelConfig config;
    std::vector<std::string> tag_names;  // id -> tag string, size n_tags
    Matrix embedding;                    // vocab_size x d_model, frozen
    std::vector<BaseLayerParams> layers;
    std::vector<AdapterParams> adapters;  // one per layer when adapter_enabled
    HeadParams head;

    // Seeded construction (cfg.seed): base and head weights ~ N(0, 0.02^2),
    // layer norms at identity, every bias zero, adapter w_o exactly zero.
    static Model init(const ModelConfig& cfg, std::vector<std::string> tag_names);

    struct NamedParam {
        std::string name;
        Matrix* tensor;
        bool trainable;  // adapters + head only
    };
    std::vector<NamedParam> named_params();

    std::string to_json_string() const;
    static Model from_json_string(std::string_view json_text);
    void save(const std::filesystem::path& file) const;
    static Model load(const std::filesystem::path& file);
};

// Deterministic sin/cos position table (max_len x d_model); not a parameter.
Matrix sinusoidal_positions(size_t max_len, size_t d_model);

// ---------------------------------------------------------------------------
// Layer operations at value level. These run the same kernels as the
// recorded training forward, so equivalence checks compare identical
// arithmetic. `mask[t] != 0` marks key positions attention may look at.

Matrix multi_head_attention(const Matrix& x, const AttentionParams& p, size_t n_heads,
                            const std::vector<char>& mask);
// Per-head attention weight matrices, for inspecting the softmax rows.
std::vector<Matrix> attention_weights(const Matrix& x, const AttentionParams& p, size_t n_heads,
                                      const std::vector<char>& mask);
Matrix add_norm(const Matrix& x, const Matrix& h, const Matrix& gain, const Matrix& shift);
Matrix ffn(const Matrix& x, const Matrix& w1, const Matrix& b1, const Matrix& w2,
           const Matrix& b2);
Matrix standard_layer_forward(const Matrix& x, const BaseLayerParams& base, size_t n_heads,
                              const std::vector<char>& mask);
Matrix adapter_attention(const Matrix& x, const AdapterParams& a, size_t n_heads,
                         const std::vector<char>& mask);
Matrix modified_layer_forward(const Matrix& x, const BaseLayerParams& base,
                              const AdapterParams& a, size_t n_heads,
                              const std::vector<char>& mask);

// Mean of -log softmax(logits)[label] over rows with label >= 0, with
// max-subtraction. Throws AllIgnored when no row contributes.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Full forward pass; one seq_len x n_tags logits matrix per sequence.
// Padding positions produce rows too; callers mask them out downstream.
std::vector<Matrix> model_forward(const Model& m, const Batch& b);

/// One recorded training step's forward state: the tape, the mean-loss node
/// and the tape bindings of every trainable parameter.
struct BatchGraph {
    Graph graph;
    int loss_node = -1;
    size_t n_contributing = 0;  // positions entering the loss mean
    std::vector<int> logits_nodes;  // per sequence
    std::vector<std::pair<Matrix*, int>> trainable;  // model tensor -> tape node
};

// Records forward + cross-entropy on a fresh tape. Frozen tensors enter as
// constants and never receive gradient storage. Throws AllIgnored when every
// label in the batch is kIgnoreLabel.
BatchGraph record_batch(Model& m, const Batch& b);

}  // namespace kurdner

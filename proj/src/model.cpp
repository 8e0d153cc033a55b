#include "kurdner/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "kurdner/rng.hpp"
#include "kurdner/tokenizer.hpp"

namespace kurdner {

void ModelConfig::validate() const {
    if (!d_model || !n_heads || !n_layers || !d_ffn || !vocab_size || !n_tags || !max_seq_len)
        throw BadConfig("every model dimension must be at least 1");
    if (d_model % n_heads != 0)
        throw BadConfig("n_heads " + std::to_string(n_heads) + " must divide d_model " +
                        std::to_string(d_model));
    if (head_kind != "linear" && head_kind != "mlp")
        throw BadConfig("head_kind must be \"linear\" or \"mlp\", got \"" + head_kind + "\"");
}

Batch Batch::from_sequences(const std::vector<std::vector<int>>& ids,
                            const std::vector<std::vector<int>>& labels) {
    if (ids.size() != labels.size())
        throw ShapeMismatch("batch: " + std::to_string(ids.size()) + " id sequences vs " +
                            std::to_string(labels.size()) + " label sequences");
    Batch b;
    b.batch_size = ids.size();
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i].size() != labels[i].size())
            throw ShapeMismatch("batch sequence " + std::to_string(i) +
                                ": ids and labels lengths differ");
        b.seq_len = std::max(b.seq_len, ids[i].size());
    }
    b.ids.assign(b.batch_size * b.seq_len, kPadId);
    b.labels.assign(b.batch_size * b.seq_len, kIgnoreLabel);
    b.mask.assign(b.batch_size * b.seq_len, 0);
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t t = 0; t < ids[i].size(); ++t) {
            b.ids[i * b.seq_len + t] = ids[i][t];
            b.labels[i * b.seq_len + t] = labels[i][t];
            b.mask[i * b.seq_len + t] = 1;
        }
    return b;
}

Matrix sinusoidal_positions(size_t max_len, size_t d_model) {
    Matrix pe(max_len, d_model);
    for (size_t pos = 0; pos < max_len; ++pos)
        for (size_t j = 0; j < d_model; ++j) {
            const double exponent = static_cast<double>(j - (j % 2)) / static_cast<double>(d_model);
            const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            pe(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

namespace {

constexpr double kInitStddev = 0.02;

AttentionParams allocate_attention(size_t d) {
    AttentionParams p;
    p.w_q = Matrix(d, d);
    p.b_q = Matrix(1, d);
    p.w_k = Matrix(d, d);
    p.b_k = Matrix(1, d);
    p.w_v = Matrix(d, d);
    p.b_v = Matrix(1, d);
    p.w_o = Matrix(d, d);
    p.b_o = Matrix(1, d);
    return p;
}

// Weight tensors are Gaussian-initialized; biases, layer-norm shifts and the
// adapter output projection stay zero (layer-norm gains stay one).
bool gaussian_initialized(const std::string& name) {
    const size_t dot = name.rfind('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    if (name == "embedding") return true;
    if (leaf.empty() || leaf[0] != 'w') return false;
    if (leaf == "w_o" && name.find(".adapter.") != std::string::npos) return false;
    return true;
}

}  // namespace

Model Model::init(const ModelConfig& cfg, std::vector<std::string> tag_names) {
    cfg.validate();
    if (tag_names.size() != cfg.n_tags)
        throw BadConfig("got " + std::to_string(tag_names.size()) + " tag names for n_tags " +
                        std::to_string(cfg.n_tags));

    Model m;
    m.config = cfg;
    m.tag_names = std::move(tag_names);

    m.embedding = Matrix(cfg.vocab_size, cfg.d_model);
    for (size_t l = 0; l < cfg.n_layers; ++l) {
        BaseLayerParams base;
        base.attn = allocate_attention(cfg.d_model);
        base.w1 = Matrix(cfg.d_model, cfg.d_ffn);
        base.b1 = Matrix(1, cfg.d_ffn);
        base.w2 = Matrix(cfg.d_ffn, cfg.d_model);
        base.b2 = Matrix(1, cfg.d_model);
        base.ln1_gain = Matrix(1, cfg.d_model, 1.0);
        base.ln1_shift = Matrix(1, cfg.d_model);
        base.ln2_gain = Matrix(1, cfg.d_model, 1.0);
        base.ln2_shift = Matrix(1, cfg.d_model);
        m.layers.push_back(std::move(base));
        if (cfg.adapter_enabled) m.adapters.push_back({allocate_attention(cfg.d_model)});
    }
    if (cfg.head_kind == "linear") {
        m.head.w1 = Matrix(cfg.d_model, cfg.n_tags);
        m.head.b1 = Matrix(1, cfg.n_tags);
    } else {
        m.head.w1 = Matrix(cfg.d_model, cfg.head_hidden());
        m.head.b1 = Matrix(1, cfg.head_hidden());
        m.head.w2 = Matrix(cfg.head_hidden(), cfg.n_tags);
        m.head.b2 = Matrix(1, cfg.n_tags);
    }

    // Each tensor draws from its own stream, seeded by the model seed mixed
    // with the tensor name. The same seed therefore yields the same base
    // weights whether or not adapters are attached and whichever head is
    // chosen.
    for (const auto& p : m.named_params())
        if (gaussian_initialized(p.name)) {
            Rng rng(mix_seed(cfg.seed, fnv1a64(p.name)));
            for (double& v : p.tensor->data()) v = rng.gaussian(0.0, kInitStddev);
        }
    return m;
}

std::vector<Model::NamedParam> Model::named_params() {
    std::vector<NamedParam> out;
    out.push_back({"embedding", &embedding, false});
    const auto attn_params = [&out](const std::string& prefix, AttentionParams& p,
                                    bool trainable) {
        out.push_back({prefix + ".w_q", &p.w_q, trainable});
        out.push_back({prefix + ".b_q", &p.b_q, trainable});
        out.push_back({prefix + ".w_k", &p.w_k, trainable});
        out.push_back({prefix + ".b_k", &p.b_k, trainable});
        out.push_back({prefix + ".w_v", &p.w_v, trainable});
        out.push_back({prefix + ".b_v", &p.b_v, trainable});
        out.push_back({prefix + ".w_o", &p.w_o, trainable});
        out.push_back({prefix + ".b_o", &p.b_o, trainable});
    };
    for (size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = "layers." + std::to_string(l);
        attn_params(prefix + ".attn", layers[l].attn, false);
        out.push_back({prefix + ".ffn.w1", &layers[l].w1, false});
        out.push_back({prefix + ".ffn.b1", &layers[l].b1, false});
        out.push_back({prefix + ".ffn.w2", &layers[l].w2, false});
        out.push_back({prefix + ".ffn.b2", &layers[l].b2, false});
        out.push_back({prefix + ".ln1.gain", &layers[l].ln1_gain, false});
        out.push_back({prefix + ".ln1.shift", &layers[l].ln1_shift, false});
        out.push_back({prefix + ".ln2.gain", &layers[l].ln2_gain, false});
        out.push_back({prefix + ".ln2.shift", &layers[l].ln2_shift, false});
        if (config.adapter_enabled) attn_params(prefix + ".adapter", adapters[l].attn, true);
    }
    out.push_back({"head.w1", &head.w1, true});
    out.push_back({"head.b1", &head.b1, true});
    if (config.head_kind == "mlp") {
        out.push_back({"head.w2", &head.w2, true});
        out.push_back({"head.b2", &head.b2, true});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graph construction shared by the value-level ops and training.

namespace {

struct AttnNodes {
    int w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
};

struct LayerNodes {
    AttnNodes attn;
    int w1, b1, w2, b2;
    int ln1_gain, ln1_shift, ln2_gain, ln2_shift;
    bool has_adapter = false;
    AttnNodes adapter;
};

AttnNodes bind_attn_const(Graph& g, const AttentionParams& p) {
    return {g.constant(p.w_q), g.constant(p.b_q), g.constant(p.w_k), g.constant(p.b_k),
            g.constant(p.w_v), g.constant(p.b_v), g.constant(p.w_o), g.constant(p.b_o)};
}

AttnNodes bind_attn_train(Graph& g, AttentionParams& p,
                          std::vector<std::pair<Matrix*, int>>& reg) {
    const auto bind = [&](Matrix& m) {
        const int id = g.param(m);
        reg.emplace_back(&m, id);
        return id;
    };
    return {bind(p.w_q), bind(p.b_q), bind(p.w_k), bind(p.b_k),
            bind(p.w_v), bind(p.b_v), bind(p.w_o), bind(p.b_o)};
}

void check_attention_shapes(const Matrix& x, const AttentionParams& p, size_t n_heads,
                            const std::vector<char>& mask) {
    const size_t d = x.cols();
    if (n_heads == 0 || d % n_heads != 0)
        throw ShapeMismatch("attention: n_heads " + std::to_string(n_heads) +
                            " must divide feature width " + std::to_string(d));
    p.w_q.require_shape(d, d, "attention w_q");
    p.w_k.require_shape(d, d, "attention w_k");
    p.w_v.require_shape(d, d, "attention w_v");
    p.w_o.require_shape(d, d, "attention w_o");
    if (mask.size() != x.rows())
        throw ShapeMismatch("attention: mask length " + std::to_string(mask.size()) + " vs " +
                            std::to_string(x.rows()) + " positions");
}

int attention_forward(Graph& g, int x, const AttnNodes& p, size_t n_heads,
                      const std::vector<char>& mask) {
    const size_t d = g.value(x).cols();
    const size_t dh = d / n_heads;
    const int q = g.add_bias(g.matmul(x, p.w_q), p.b_q);
    const int k = g.add_bias(g.matmul(x, p.w_k), p.b_k);
    const int v = g.add_bias(g.matmul(x, p.w_v), p.b_v);

    std::vector<int> heads;
    heads.reserve(n_heads);
    for (size_t h = 0; h < n_heads; ++h) {
        const int qh = g.slice_cols(q, h * dh, dh);
        const int kh = g.slice_cols(k, h * dh, dh);
        const int vh = g.slice_cols(v, h * dh, dh);
        const int scores = g.scale(g.matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
        const int probs = g.softmax_masked(scores, mask);
        heads.push_back(g.matmul(probs, vh));
    }
    return g.add_bias(g.matmul(g.concat_cols(heads), p.w_o), p.b_o);
}

int ffn_forward(Graph& g, int x, int w1, int b1, int w2, int b2) {
    return g.add_bias(g.matmul(g.gelu(g.add_bias(g.matmul(x, w1), b1)), w2), b2);
}

int layer_forward(Graph& g, int x, const LayerNodes& nodes, size_t n_heads,
                  const std::vector<char>& mask) {
    const int h_attn = attention_forward(g, x, nodes.attn, n_heads, mask);
    const int h_combined =
        nodes.has_adapter ? g.add(h_attn, attention_forward(g, x, nodes.adapter, n_heads, mask))
                          : h_attn;
    const int h_add1 = g.layer_norm(g.add(x, h_combined), nodes.ln1_gain, nodes.ln1_shift);
    const int f = ffn_forward(g, h_add1, nodes.w1, nodes.b1, nodes.w2, nodes.b2);
    return g.layer_norm(g.add(h_add1, f), nodes.ln2_gain, nodes.ln2_shift);
}

LayerNodes bind_layer_const(Graph& g, const BaseLayerParams& base, const AdapterParams* adapter) {
    LayerNodes nodes;
    nodes.attn = bind_attn_const(g, base.attn);
    nodes.w1 = g.constant(base.w1);
    nodes.b1 = g.constant(base.b1);
    nodes.w2 = g.constant(base.w2);
    nodes.b2 = g.constant(base.b2);
    nodes.ln1_gain = g.constant(base.ln1_gain);
    nodes.ln1_shift = g.constant(base.ln1_shift);
    nodes.ln2_gain = g.constant(base.ln2_gain);
    nodes.ln2_shift = g.constant(base.ln2_shift);
    if (adapter) {
        nodes.has_adapter = true;
        nodes.adapter = bind_attn_const(g, adapter->attn);
    }
    return nodes;
}

int head_forward(Graph& g, int x, const ModelConfig& cfg, int w1, int b1, int w2, int b2) {
    if (cfg.head_kind == "linear") return g.add_bias(g.matmul(x, w1), b1);
    return g.add_bias(g.matmul(g.gelu(g.add_bias(g.matmul(x, w1), b1)), w2), b2);
}

// Token embeddings plus position encodings for one sequence.
Matrix embed_sequence(const Model& m, const Batch& b, size_t row, const Matrix& positions) {
    Matrix x(b.seq_len, m.config.d_model);
    for (size_t t = 0; t < b.seq_len; ++t) {
        const int id = b.id_at(row, t);
        if (id < 0 || static_cast<size_t>(id) >= m.config.vocab_size)
            throw std::out_of_range("token id " + std::to_string(id) +
                                    " outside vocab of size " +
                                    std::to_string(m.config.vocab_size));
        for (size_t j = 0; j < m.config.d_model; ++j)
            x(t, j) = m.embedding(static_cast<size_t>(id), j) + positions(t, j);
    }
    return x;
}

std::vector<char> sequence_mask(const Batch& b, size_t row) {
    std::vector<char> mask(b.seq_len);
    for (size_t t = 0; t < b.seq_len; ++t) mask[t] = b.mask[row * b.seq_len + t];
    return mask;
}

}  // namespace

// ---------------------------------------------------------------------------
// Value-level ops.

Matrix multi_head_attention(const Matrix& x, const AttentionParams& p, size_t n_heads,
                            const std::vector<char>& mask) {
    check_attention_shapes(x, p, n_heads, mask);
    Graph g;
    const int out = attention_forward(g, g.constant(x), bind_attn_const(g, p), n_heads, mask);
    return g.value(out);
}

std::vector<Matrix> attention_weights(const Matrix& x, const AttentionParams& p, size_t n_heads,
                                      const std::vector<char>& mask) {
    check_attention_shapes(x, p, n_heads, mask);
    const size_t d = x.cols(), dh = d / n_heads;
    Graph g;
    const int xn = g.constant(x);
    const AttnNodes nodes = bind_attn_const(g, p);
    const int q = g.add_bias(g.matmul(xn, nodes.w_q), nodes.b_q);
    const int k = g.add_bias(g.matmul(xn, nodes.w_k), nodes.b_k);
    std::vector<Matrix> weights;
    for (size_t h = 0; h < n_heads; ++h) {
        const int qh = g.slice_cols(q, h * dh, dh);
        const int kh = g.slice_cols(k, h * dh, dh);
        const int scores = g.scale(g.matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
        weights.push_back(g.value(g.softmax_masked(scores, mask)));
    }
    return weights;
}

Matrix add_norm(const Matrix& x, const Matrix& h, const Matrix& gain, const Matrix& shift) {
    if (!x.same_shape(h)) throw ShapeMismatch("add_norm: operand shapes differ");
    Graph g;
    const int out = g.layer_norm(g.add(g.constant(x), g.constant(h)), g.constant(gain),
                                 g.constant(shift));
    return g.value(out);
}

Matrix ffn(const Matrix& x, const Matrix& w1, const Matrix& b1, const Matrix& w2,
           const Matrix& b2) {
    Graph g;
    const int out = ffn_forward(g, g.constant(x), g.constant(w1), g.constant(b1), g.constant(w2),
                                g.constant(b2));
    return g.value(out);
}

Matrix standard_layer_forward(const Matrix& x, const BaseLayerParams& base, size_t n_heads,
                              const std::vector<char>& mask) {
    check_attention_shapes(x, base.attn, n_heads, mask);
    Graph g;
    const int out =
        layer_forward(g, g.constant(x), bind_layer_const(g, base, nullptr), n_heads, mask);
    return g.value(out);
}

Matrix adapter_attention(const Matrix& x, const AdapterParams& a, size_t n_heads,
                         const std::vector<char>& mask) {
    check_attention_shapes(x, a.attn, n_heads, mask);
    Graph g;
    const int out = attention_forward(g, g.constant(x), bind_attn_const(g, a.attn), n_heads, mask);
    return g.value(out);
}

Matrix modified_layer_forward(const Matrix& x, const BaseLayerParams& base,
                              const AdapterParams& a, size_t n_heads,
                              const std::vector<char>& mask) {
    check_attention_shapes(x, base.attn, n_heads, mask);
    check_attention_shapes(x, a.attn, n_heads, mask);
    Graph g;
    const int out = layer_forward(g, g.constant(x), bind_layer_const(g, base, &a), n_heads, mask);
    return g.value(out);
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows())
        throw ShapeMismatch("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(logits.rows()) + " rows");
    Graph g;
    const int sum = g.cross_entropy_sum(g.constant(logits), labels);
    size_t count = 0;
    for (int lbl : labels)
        if (lbl >= 0) ++count;
    if (count == 0) throw AllIgnored();
    return g.value(sum)(0, 0) / static_cast<double>(count);
}

std::vector<Matrix> model_forward(const Model& m, const Batch& b) {
    m.config.validate();
    if (b.seq_len > m.config.max_seq_len) throw SequenceTooLong(b.seq_len, m.config.max_seq_len);

    const Matrix positions = sinusoidal_positions(b.seq_len, m.config.d_model);
    std::vector<Matrix> logits;
    logits.reserve(b.batch_size);
    for (size_t s = 0; s < b.batch_size; ++s) {
        Graph g;
        const std::vector<char> mask = sequence_mask(b, s);
        int h = g.constant(embed_sequence(m, b, s, positions));
        for (size_t l = 0; l < m.layers.size(); ++l) {
            const AdapterParams* adapter = m.config.adapter_enabled ? &m.adapters[l] : nullptr;
            h = layer_forward(g, h, bind_layer_const(g, m.layers[l], adapter), m.config.n_heads,
                              mask);
        }
        const int w1 = g.constant(m.head.w1);
        const int b1 = g.constant(m.head.b1);
        const int w2 = m.head.w2.empty() ? -1 : g.constant(m.head.w2);
        const int b2 = m.head.b2.empty() ? -1 : g.constant(m.head.b2);
        logits.push_back(g.value(head_forward(g, h, m.config, w1, b1, w2, b2)));
    }
    return logits;
}

BatchGraph record_batch(Model& m, const Batch& b) {
    m.config.validate();
    if (b.seq_len > m.config.max_seq_len) throw SequenceTooLong(b.seq_len, m.config.max_seq_len);

    BatchGraph bg;
    Graph& g = bg.graph;

    // Trainable tensors are bound once so gradients pool across the batch.
    std::vector<LayerNodes> layer_nodes;
    for (size_t l = 0; l < m.layers.size(); ++l) {
        LayerNodes nodes = bind_layer_const(g, m.layers[l], nullptr);
        if (m.config.adapter_enabled) {
            nodes.has_adapter = true;
            nodes.adapter = bind_attn_train(g, m.adapters[l].attn, bg.trainable);
        }
        layer_nodes.push_back(nodes);
    }
    const auto bind_head = [&](Matrix& t) {
        const int id = g.param(t);
        bg.trainable.emplace_back(&t, id);
        return id;
    };
    const int hw1 = bind_head(m.head.w1);
    const int hb1 = bind_head(m.head.b1);
    const int hw2 = m.head.w2.empty() ? -1 : bind_head(m.head.w2);
    const int hb2 = m.head.b2.empty() ? -1 : bind_head(m.head.b2);

    const Matrix positions = sinusoidal_positions(b.seq_len, m.config.d_model);
    int total = -1;
    for (size_t s = 0; s < b.batch_size; ++s) {
        const std::vector<char> mask = sequence_mask(b, s);
        int h = g.constant(embed_sequence(m, b, s, positions));
        for (const LayerNodes& nodes : layer_nodes)
            h = layer_forward(g, h, nodes, m.config.n_heads, mask);
        const int logits = head_forward(g, h, m.config, hw1, hb1, hw2, hb2);
        bg.logits_nodes.push_back(logits);

        std::vector<int> labels(b.seq_len);
        for (size_t t = 0; t < b.seq_len; ++t) {
            const int lbl = b.label_at(s, t);
            labels[t] = (b.real_at(s, t) && lbl >= 0) ? lbl : kIgnoreLabel;
            if (labels[t] >= 0) ++bg.n_contributing;
        }
        const int ce = g.cross_entropy_sum(logits, std::move(labels));
        total = (total < 0) ? ce : g.add(total, ce);
    }
    if (bg.n_contributing == 0) throw AllIgnored();
    bg.loss_node = g.scale(total, 1.0 / static_cast<double>(bg.n_contributing));
    return bg;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization.

std::string Model::to_json_string() const {
    nlohmann::ordered_json j;
    j["format"] = "kurdner-checkpoint";
    j["version"] = 1;
    j["config"] = {{"d_model", config.d_model},
                   {"n_heads", config.n_heads},
                   {"n_layers", config.n_layers},
                   {"d_ffn", config.d_ffn},
                   {"vocab_size", config.vocab_size},
                   {"n_tags", config.n_tags},
                   {"max_seq_len", config.max_seq_len},
                   {"adapter_enabled", config.adapter_enabled},
                   {"head_kind", config.head_kind},
                   {"d_head", config.d_head},
                   {"seed", config.seed}};
    j["tags"] = tag_names;
    auto& tensors = j["tensors"] = nlohmann::ordered_json::array();
    for (const auto& p : const_cast<Model*>(this)->named_params()) {
        nlohmann::ordered_json t;
        t["name"] = p.name;
        t["shape"] = {p.tensor->rows(), p.tensor->cols()};
        t["trainable"] = p.trainable;
        t["data"] = p.tensor->data();
        tensors.push_back(std::move(t));
    }
    return j.dump(2) + "\n";
}

Model Model::from_json_string(std::string_view json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.contains("format") || j["format"] != "kurdner-checkpoint" || j.value("version", 0) != 1)
        throw std::runtime_error("not a version-1 checkpoint file");

    const auto& c = j.at("config");
    ModelConfig cfg;
    cfg.d_model = c.at("d_model");
    cfg.n_heads = c.at("n_heads");
    cfg.n_layers = c.at("n_layers");
    cfg.d_ffn = c.at("d_ffn");
    cfg.vocab_size = c.at("vocab_size");
    cfg.n_tags = c.at("n_tags");
    cfg.max_seq_len = c.at("max_seq_len");
    cfg.adapter_enabled = c.at("adapter_enabled");
    cfg.head_kind = c.at("head_kind");
    cfg.d_head = c.at("d_head");
    cfg.seed = c.at("seed");

    Model m = Model::init(cfg, j.at("tags").get<std::vector<std::string>>());
    std::map<std::string, Matrix*> by_name;
    for (const auto& p : m.named_params()) by_name[p.name] = p.tensor;

    size_t loaded = 0;
    for (const auto& t : j.at("tensors")) {
        const std::string name = t.at("name");
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw BadConfig("checkpoint tensor \"" + name + "\" does not exist in this config");
        const size_t rows = t.at("shape").at(0), cols = t.at("shape").at(1);
        it->second->require_shape(rows, cols, ("checkpoint tensor " + name).c_str());
        const auto data = t.at("data").get<std::vector<double>>();
        if (data.size() != rows * cols)
            throw BadConfig("checkpoint tensor \"" + name + "\" has wrong element count");
        it->second->data() = data;
        ++loaded;
    }
    if (loaded != by_name.size())
        throw BadConfig("checkpoint is missing " + std::to_string(by_name.size() - loaded) +
                        " tensors");
    return m;
}

void Model::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + file.string());
    out << to_json_string();
}

Model Model::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace kurdner

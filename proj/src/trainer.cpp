#include "kurdner/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "kurdner/rng.hpp"

namespace kurdner {

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw BadConfig("learning_rate must be positive");
    if (batch_size == 0) throw BadConfig("batch_size must be positive");
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<std::pair<Matrix*, const Matrix*>>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const auto& [param, grad] : grads) {
        if (!param->same_shape(*grad))
            throw ShapeMismatch("adam: parameter and gradient shapes differ");
        Moments& mom = state_[param];
        if (mom.m.empty()) {
            mom.m = Matrix(param->rows(), param->cols());
            mom.v = Matrix(param->rows(), param->cols());
        }
        for (size_t i = 0; i < param->size(); ++i) {
            const double g = grad->data()[i];
            double& mi = mom.m.data()[i];
            double& vi = mom.v.data()[i];
            mi = beta1_ * mi + (1.0 - beta1_) * g;
            vi = beta2_ * vi + (1.0 - beta2_) * g * g;
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            param->data()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics

EvalResult token_metrics(const std::vector<std::string>& pred,
                         const std::vector<std::string>& gold, const TagScheme& scheme) {
    if (pred.size() != gold.size()) throw LengthMismatch(pred.size(), gold.size());

    EvalResult r;
    r.n_tokens = static_cast<long long>(pred.size());
    for (const auto& name : scheme.names())
        if (name != "O") r.per_tag[name];  // zero-filled row per entity tag

    long long correct = 0, entity_gold = 0, entity_gold_correct = 0;
    long long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const std::string& p = pred[i];
        const std::string& g = gold[i];
        if (scheme.id_of(p) < 0)
            throw std::invalid_argument("predicted tag not in scheme: " + p);
        if (scheme.id_of(g) < 0) throw std::invalid_argument("gold tag not in scheme: " + g);

        if (p == g) ++correct;
        if (g != "O") {
            ++entity_gold;
            if (p == g) ++entity_gold_correct;
        }

        if (p == g && g != "O") {
            ++tp;
            ++r.per_tag[g].tp;
        }
        if (p != "O" && p != g) {
            ++fp;
            ++r.per_tag[p].fp;
        }
        if (g != "O" && p != g) {
            ++fn;
            ++r.per_tag[g].fn;
        }
    }

    const auto pct = [](long long num, long long den) {
        return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    r.precision = pct(tp, tp + fp);
    r.recall = pct(tp, tp + fn);
    r.f1 = (r.precision + r.recall > 0)
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.accuracy = pct(correct, r.n_tokens);
    r.accuracy_excluding_o = pct(entity_gold_correct, entity_gold);
    return r;
}

// ---------------------------------------------------------------------------
// Sentence preparation shared by train and evaluate

namespace {

struct PreparedSentence {
    std::vector<int> ids;     // <s> + piece ids (possibly truncated) + </s>
    std::vector<int> labels;  // parallel; specials and continuations carry kIgnoreLabel
    std::vector<int> word_first_pos;  // per word: row in ids, or -1 if truncated away
};

PreparedSentence prepare_sentence(const AnnotatedSentence& s, const Tokenizer& tok,
                                  const TagScheme& model_scheme, size_t max_seq_len) {
    const Encoding enc = tok.encode(s.text());
    const std::vector<int> piece_labels = align_labels(enc, s.tags, model_scheme);

    const size_t max_pieces = max_seq_len >= 2 ? max_seq_len - 2 : 0;
    const size_t n_pieces = std::min(enc.size(), max_pieces);

    PreparedSentence prep;
    prep.ids.push_back(kBosId);
    prep.labels.push_back(kIgnoreLabel);
    prep.word_first_pos.assign(s.words.size(), -1);
    for (size_t i = 0; i < n_pieces; ++i) {
        if (piece_labels[i] != TagScheme::kIgnoreIndex)
            prep.word_first_pos[static_cast<size_t>(enc.word_index[i])] =
                static_cast<int>(prep.ids.size());
        prep.ids.push_back(enc.ids[i]);
        prep.labels.push_back(piece_labels[i]);
    }
    prep.ids.push_back(kEosId);
    prep.labels.push_back(kIgnoreLabel);
    return prep;
}

TagScheme model_scheme_of(const Model& m) {
    TagScheme scheme = TagScheme::from_names(m.tag_names);
    if (scheme.size() != m.tag_names.size())
        throw SchemeMismatch("model tag names are not unique");
    // Model logits index tags by their position in tag_names; the scheme has
    // to agree so aligned label ids address the right logit column.
    for (size_t i = 0; i < m.tag_names.size(); ++i)
        if (scheme.id_of(m.tag_names[i]) != static_cast<int>(i))
            throw SchemeMismatch("model tag names must be in sorted order");
    return scheme;
}

void require_tags_known(const Corpus& corpus, const TagScheme& scheme, const char* which) {
    for (const auto& s : corpus.sentences)
        for (const auto& t : s.tags)
            if (scheme.id_of(t) < 0)
                throw SchemeMismatch(std::string(which) + " corpus tag \"" + t +
                                     "\" is unknown to the model");
}

}  // namespace

// ---------------------------------------------------------------------------
// Training

std::vector<EpochRecord> train(Model& m, const Corpus& train_corpus, const Corpus& val_corpus,
                               const Tokenizer& tok, const TrainConfig& cfg) {
    cfg.validate();
    const TagScheme scheme = model_scheme_of(m);
    require_tags_known(train_corpus, scheme, "train");
    require_tags_known(val_corpus, scheme, "validation");

    std::vector<PreparedSentence> prepared;
    prepared.reserve(train_corpus.sentences.size());
    for (const auto& s : train_corpus.sentences)
        prepared.push_back(prepare_sentence(s, tok, scheme, m.config.max_seq_len));

    Adam adam(cfg.learning_rate);
    std::vector<EpochRecord> history;
    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<size_t> order(prepared.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (cfg.shuffle) {
            Rng rng(mix_seed(cfg.seed, epoch));
            rng.shuffle(order);
        }

        double loss_sum = 0;
        size_t loss_count = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::vector<int>> ids, labels;
            for (size_t i = start; i < end; ++i) {
                ids.push_back(prepared[order[i]].ids);
                labels.push_back(prepared[order[i]].labels);
            }

            BatchGraph bg = record_batch(m, Batch::from_sequences(ids, labels));
            bg.graph.backward(bg.loss_node);
            loss_sum += bg.graph.value(bg.loss_node)(0, 0) *
                        static_cast<double>(bg.n_contributing);
            loss_count += bg.n_contributing;

            std::vector<std::pair<Matrix*, const Matrix*>> grads;
            grads.reserve(bg.trainable.size());
            for (const auto& [tensor, node] : bg.trainable)
                grads.emplace_back(tensor, &bg.graph.grad(node));
            adam.step(grads);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        rec.validation = evaluate(m, val_corpus, tok);
        history.push_back(std::move(rec));
    }
    return history;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalResult evaluate(const Model& m, const Corpus& corpus, const Tokenizer& tok) {
    const TagScheme scheme = model_scheme_of(m);
    require_tags_known(corpus, scheme, "evaluation");

    std::vector<std::string> pred, gold;
    for (const auto& s : corpus.sentences) {
        const PreparedSentence prep = prepare_sentence(s, tok, scheme, m.config.max_seq_len);
        const Batch batch = Batch::from_sequences({prep.ids}, {prep.labels});
        const Matrix logits = model_forward(m, batch)[0];

        for (size_t w = 0; w < s.words.size(); ++w) {
            gold.push_back(s.tags[w]);
            const int pos = prep.word_first_pos[w];
            if (pos < 0) {  // lost to truncation
                pred.push_back("O");
                continue;
            }
            size_t best = 0;
            for (size_t j = 1; j < logits.cols(); ++j)
                if (logits(static_cast<size_t>(pos), j) > logits(static_cast<size_t>(pos), best))
                    best = j;
            pred.push_back(m.tag_names[best]);
        }
    }
    return token_metrics(pred, gold, scheme);
}

EvalResult zero_shot_eval(const Model& m, const Corpus& corpus, const Tokenizer& tok) {
    return evaluate(m, corpus, tok);
}

// ---------------------------------------------------------------------------
// Benchmark harness

std::vector<BenchmarkSpec> default_benchmark_specs() {
    std::vector<BenchmarkSpec> specs;
    for (const char* variant : {"adapter", "zero-shot", "mlp-head"})
        for (const char* method : {"BPE", "Word-level", "Sentence-piece"})
            specs.push_back({variant, method});
    return specs;
}

namespace {

Tokenizer train_tokenizer_for(const std::string& method, const std::vector<std::string>& texts,
                              size_t vocab) {
    if (method == "BPE") return Tokenizer(BpeModel::train(texts, vocab));
    if (method == "Word-level") return Tokenizer(WordVocab::build(texts, vocab));
    if (method == "Sentence-piece") {
        UnigramModel::TrainOptions opt;
        opt.target_vocab = vocab;
        return Tokenizer(UnigramModel::train(texts, opt));
    }
    throw std::invalid_argument("unknown tokenization method: " + method);
}

}  // namespace

std::vector<ComparisonRow> benchmark(const Corpus& corpus, const std::vector<BenchmarkSpec>& specs,
                                     const BenchmarkOptions& opt) {
    std::vector<std::string> texts;
    texts.reserve(corpus.sentences.size());
    for (const auto& s : corpus.sentences) texts.push_back(s.text());
    const TagScheme scheme = corpus.tag_scheme();
    const CorpusSplit split = split_corpus(corpus, opt.ratios, opt.train.seed);

    std::vector<ComparisonRow> rows;
    for (size_t i = 0; i < specs.size(); ++i) {
        const BenchmarkSpec& spec = specs[i];
        const Tokenizer tok =
            train_tokenizer_for(spec.tokenization_method, texts, opt.tokenizer_vocab);

        ModelConfig cfg = opt.model;
        cfg.vocab_size = tok.vocab_size();
        cfg.n_tags = scheme.size();
        cfg.seed = mix_seed(opt.train.seed, i);
        if (spec.model_variant == "adapter") {
            cfg.adapter_enabled = true;
            cfg.head_kind = "linear";
        } else if (spec.model_variant == "zero-shot") {
            cfg.adapter_enabled = true;
            cfg.head_kind = "linear";
        } else if (spec.model_variant == "mlp-head") {
            cfg.adapter_enabled = false;
            cfg.head_kind = "mlp";
        } else {
            throw std::invalid_argument("unknown model variant: " + spec.model_variant);
        }

        Model model = Model::init(cfg, scheme.names());
        ComparisonRow row{spec.model_variant, spec.tokenization_method, {}};
        if (spec.model_variant == "zero-shot") {
            row.result = zero_shot_eval(model, split.test, tok);
        } else {
            TrainConfig tc = opt.train;
            tc.seed = mix_seed(opt.train.seed, i);
            train(model, split.train, split.val, tok, tc);
            row.result = evaluate(model, split.test, tok);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ImprovementRow> improvement_table(const std::vector<ComparisonRow>& rows,
                                              const ComparisonRow& proposed) {
    std::vector<ImprovementRow> out;
    for (const auto& row : rows) {
        if (row.tokenization_method != proposed.tokenization_method) continue;
        if (row.model_name == proposed.model_name) continue;
        out.push_back({row.model_name, row.tokenization_method,
                       proposed.result.f1 - row.result.f1});
    }
    if (out.empty())
        throw MissingBaseline("no baseline row shares tokenization method \"" +
                              proposed.tokenization_method + "\"");
    return out;
}

// ---------------------------------------------------------------------------
// Reports

double round_one_decimal(double x) { return std::round(x * 10.0) / 10.0; }

namespace {

std::string fmt1(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_one_decimal(x));
    return buf;
}

}  // namespace

std::string comparison_table_tsv(const std::vector<ComparisonRow>& rows) {
    std::string out = "model\ttokenization\tprecision\trecall\tf1\taccuracy\n";
    for (const auto& r : rows) {
        out += r.model_name + "\t" + r.tokenization_method + "\t" + fmt1(r.result.precision) +
               "\t" + fmt1(r.result.recall) + "\t" + fmt1(r.result.f1) + "\t" +
               fmt1(r.result.accuracy) + "\n";
    }
    return out;
}

std::string comparison_table_json(const std::vector<ComparisonRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["model"] = r.model_name;
        row["tokenization"] = r.tokenization_method;
        row["precision"] = r.result.precision;
        row["recall"] = r.result.recall;
        row["f1"] = r.result.f1;
        row["accuracy"] = r.result.accuracy;
        row["accuracy_excluding_o"] = r.result.accuracy_excluding_o;
        row["n_tokens"] = r.result.n_tokens;
        j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string improvement_table_tsv(const std::vector<ImprovementRow>& rows) {
    std::string out = "comparison\ttokenization\tdelta_f1\n";
    for (const auto& r : rows) {
        double d = round_one_decimal(r.delta_f1);
        if (d == 0) d = 0;  // never print -0.0
        out += r.comparison + "\t" + r.tokenization_method + "\t" + (d >= 0 ? "+" : "") +
               fmt1(d) + "\n";
    }
    return out;
}

std::string improvement_table_json(const std::vector<ImprovementRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["comparison"] = r.comparison;
        row["tokenization"] = r.tokenization_method;
        row["delta_f1"] = r.delta_f1;
        j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

}  // namespace kurdner

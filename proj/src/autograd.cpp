#include "kurdner/autograd.hpp"

#include <cmath>
#include <limits>

namespace kurdner {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440;    // 1/sqrt(2)
constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * kSqrt1_2)); }

double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * kSqrt1_2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

}  // namespace

// Back closures take the graph as a parameter instead of capturing `this`,
// which keeps Graph safely movable.
int Graph::push(Matrix value, bool needs_grad, std::function<void(Graph&)> back) {
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs_grad;
    if (needs_grad) {
        node.grad = Matrix(node.value.rows(), node.value.cols());
        node.back = std::move(back);
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int Graph::constant(Matrix value) { return push(std::move(value), false, {}); }

int Graph::param(Matrix value) { return push(std::move(value), true, {}); }

const Matrix& Graph::grad(int id) const {
    const Node& n = nodes_.at(static_cast<size_t>(id));
    if (!n.needs_grad) throw NoGraph("node has no gradient: it is on a frozen path");
    return n.grad;
}

void Graph::backward(int root) {
    if (nodes_.empty()) throw NoGraph("backward called before any forward was recorded");
    if (root < 0 || static_cast<size_t>(root) >= nodes_.size())
        throw NoGraph("backward root is not on the tape");
    Node& r = nodes_[static_cast<size_t>(root)];
    if (r.value.rows() != 1 || r.value.cols() != 1)
        throw NoGraph("backward root must be a scalar node");
    if (!r.needs_grad) throw NoGraph("backward root does not depend on any trainable input");

    r.grad(0, 0) += 1.0;
    for (int i = root; i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        if (n.needs_grad && n.back) n.back(*this);
    }
}

int Graph::matmul(int a, int b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.rows())
        throw ShapeMismatch("matmul: " + std::to_string(av.rows()) + "x" +
                            std::to_string(av.cols()) + " * " + std::to_string(bv.rows()) + "x" +
                            std::to_string(bv.cols()));
    Matrix out(av.rows(), bv.cols());
    for (size_t i = 0; i < av.rows(); ++i)
        for (size_t k = 0; k < av.cols(); ++k) {
            const double aik = av(i, k);
            for (size_t j = 0; j < bv.cols(); ++j) out(i, j) += aik * bv(k, j);
        }

    const bool ng = needs_grad(a) || needs_grad(b);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, a, b](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            const Matrix& av2 = gr.value(a);
            const Matrix& bv2 = gr.value(b);
            if (gr.needs_grad(a)) {  // dA += g * B^T
                Matrix& ga = gr.grad_ref(a);
                for (size_t i = 0; i < av2.rows(); ++i)
                    for (size_t j = 0; j < bv2.cols(); ++j) {
                        const double gij = g(i, j);
                        for (size_t k = 0; k < av2.cols(); ++k) ga(i, k) += gij * bv2(k, j);
                    }
            }
            if (gr.needs_grad(b)) {  // dB += A^T * g
                Matrix& gb = gr.grad_ref(b);
                for (size_t i = 0; i < av2.rows(); ++i)
                    for (size_t k = 0; k < av2.cols(); ++k) {
                        const double aik = av2(i, k);
                        for (size_t j = 0; j < bv2.cols(); ++j) gb(k, j) += aik * g(i, j);
                    }
            }
        };
    return id;
}

int Graph::matmul_nt(int a, int b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.cols())
        throw ShapeMismatch("matmul_nt: inner dimensions " + std::to_string(av.cols()) + " vs " +
                            std::to_string(bv.cols()));
    Matrix out(av.rows(), bv.rows());
    for (size_t i = 0; i < av.rows(); ++i)
        for (size_t j = 0; j < bv.rows(); ++j) {
            double s = 0;
            for (size_t k = 0; k < av.cols(); ++k) s += av(i, k) * bv(j, k);
            out(i, j) = s;
        }

    const bool ng = needs_grad(a) || needs_grad(b);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, a, b](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            const Matrix& av2 = gr.value(a);
            const Matrix& bv2 = gr.value(b);
            if (gr.needs_grad(a)) {  // dA += g * B
                Matrix& ga = gr.grad_ref(a);
                for (size_t i = 0; i < av2.rows(); ++i)
                    for (size_t j = 0; j < bv2.rows(); ++j) {
                        const double gij = g(i, j);
                        for (size_t k = 0; k < av2.cols(); ++k) ga(i, k) += gij * bv2(j, k);
                    }
            }
            if (gr.needs_grad(b)) {  // dB += g^T * A
                Matrix& gb = gr.grad_ref(b);
                for (size_t i = 0; i < av2.rows(); ++i)
                    for (size_t j = 0; j < bv2.rows(); ++j) {
                        const double gij = g(i, j);
                        for (size_t k = 0; k < av2.cols(); ++k) gb(j, k) += gij * av2(i, k);
                    }
            }
        };
    return id;
}

int Graph::add(int a, int b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) throw ShapeMismatch("add: operand shapes differ");
    Matrix out = av;
    for (size_t i = 0; i < out.size(); ++i) out.data()[i] += bv.data()[i];

    const bool ng = needs_grad(a) || needs_grad(b);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, a, b](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            if (gr.needs_grad(a)) {
                Matrix& ga = gr.grad_ref(a);
                for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
            }
            if (gr.needs_grad(b)) {
                Matrix& gb = gr.grad_ref(b);
                for (size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i];
            }
        };
    return id;
}

int Graph::add_bias(int x, int bias) {
    const Matrix& xv = value(x);
    const Matrix& bv = value(bias);
    if (bv.rows() != 1 || bv.cols() != xv.cols())
        throw ShapeMismatch("add_bias: bias must be 1x" + std::to_string(xv.cols()));
    Matrix out = xv;
    for (size_t i = 0; i < out.rows(); ++i)
        for (size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);

    const bool ng = needs_grad(x) || needs_grad(bias);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, x, bias](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            if (gr.needs_grad(x)) {
                Matrix& gx = gr.grad_ref(x);
                for (size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i];
            }
            if (gr.needs_grad(bias)) {
                Matrix& gb = gr.grad_ref(bias);
                for (size_t i = 0; i < g.rows(); ++i)
                    for (size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
            }
        };
    return id;
}

int Graph::scale(int x, double s) {
    Matrix out = value(x);
    for (double& v : out.data()) v *= s;

    const bool ng = needs_grad(x);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, x, s](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            Matrix& gx = gr.grad_ref(x);
            for (size_t i = 0; i < g.size(); ++i) gx.data()[i] += s * g.data()[i];
        };
    return id;
}

int Graph::gelu(int x) {
    Matrix out = value(x);
    for (double& v : out.data()) v = gelu_value(v);

    const bool ng = needs_grad(x);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, x](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            const Matrix& xv = gr.value(x);
            Matrix& gx = gr.grad_ref(x);
            for (size_t i = 0; i < g.size(); ++i)
                gx.data()[i] += g.data()[i] * gelu_derivative(xv.data()[i]);
        };
    return id;
}

int Graph::layer_norm(int x, int gain, int shift, double eps) {
    const Matrix& xv = value(x);
    const Matrix& gv = value(gain);
    const Matrix& sv = value(shift);
    if (gv.rows() != 1 || gv.cols() != xv.cols() || sv.rows() != 1 || sv.cols() != xv.cols())
        throw ShapeMismatch("layer_norm: gain/shift must be 1x" + std::to_string(xv.cols()));

    const size_t rows = xv.rows(), cols = xv.cols();
    Matrix xhat(rows, cols);
    std::vector<double> inv_std(rows);
    for (size_t i = 0; i < rows; ++i) {
        double mean = 0;
        for (size_t j = 0; j < cols; ++j) mean += xv(i, j);
        mean /= static_cast<double>(cols);
        double var = 0;
        for (size_t j = 0; j < cols; ++j) {
            const double d = xv(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (size_t j = 0; j < cols; ++j) xhat(i, j) = (xv(i, j) - mean) * inv_std[i];
    }
    Matrix out(rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) out(i, j) = gv(0, j) * xhat(i, j) + sv(0, j);

    const bool ng = needs_grad(x) || needs_grad(gain) || needs_grad(shift);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, x, gain, shift, xhat = std::move(xhat),
                              inv_std = std::move(inv_std)](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            const Matrix& gv2 = gr.value(gain);
            const size_t rs = g.rows(), cs = g.cols();
            if (gr.needs_grad(gain)) {
                Matrix& gg = gr.grad_ref(gain);
                for (size_t i = 0; i < rs; ++i)
                    for (size_t j = 0; j < cs; ++j) gg(0, j) += g(i, j) * xhat(i, j);
            }
            if (gr.needs_grad(shift)) {
                Matrix& gs = gr.grad_ref(shift);
                for (size_t i = 0; i < rs; ++i)
                    for (size_t j = 0; j < cs; ++j) gs(0, j) += g(i, j);
            }
            if (gr.needs_grad(x)) {
                Matrix& gx = gr.grad_ref(x);
                for (size_t i = 0; i < rs; ++i) {
                    double mean_gy = 0, mean_gy_xhat = 0;
                    for (size_t j = 0; j < cs; ++j) {
                        const double gy = g(i, j) * gv2(0, j);
                        mean_gy += gy;
                        mean_gy_xhat += gy * xhat(i, j);
                    }
                    mean_gy /= static_cast<double>(cs);
                    mean_gy_xhat /= static_cast<double>(cs);
                    for (size_t j = 0; j < cs; ++j) {
                        const double gy = g(i, j) * gv2(0, j);
                        gx(i, j) += inv_std[i] * (gy - mean_gy - xhat(i, j) * mean_gy_xhat);
                    }
                }
            }
        };
    return id;
}

int Graph::softmax_masked(int scores, std::vector<char> key_valid) {
    const Matrix& sv = value(scores);
    if (key_valid.size() != sv.cols())
        throw ShapeMismatch("softmax_masked: mask length " + std::to_string(key_valid.size()) +
                            " vs " + std::to_string(sv.cols()) + " key positions");

    Matrix out(sv.rows(), sv.cols());
    for (size_t i = 0; i < sv.rows(); ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < sv.cols(); ++j)
            if (key_valid[j]) m = std::max(m, sv(i, j));
        double z = 0;
        for (size_t j = 0; j < sv.cols(); ++j)
            if (key_valid[j]) z += std::exp(sv(i, j) - m);
        for (size_t j = 0; j < sv.cols(); ++j)
            out(i, j) = key_valid[j] ? std::exp(sv(i, j) - m) / z : 0.0;
    }

    const bool ng = needs_grad(scores);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, scores](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            const Matrix& p = gr.value(id);
            Matrix& gs = gr.grad_ref(scores);
            for (size_t i = 0; i < g.rows(); ++i) {
                double dot = 0;
                for (size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * p(i, j);
                for (size_t j = 0; j < g.cols(); ++j) gs(i, j) += p(i, j) * (g(i, j) - dot);
            }
        };
    return id;
}

int Graph::slice_cols(int x, size_t start, size_t len) {
    const Matrix& xv = value(x);
    if (start + len > xv.cols()) throw ShapeMismatch("slice_cols: range exceeds column count");
    Matrix out(xv.rows(), len);
    for (size_t i = 0; i < xv.rows(); ++i)
        for (size_t j = 0; j < len; ++j) out(i, j) = xv(i, start + j);

    const bool ng = needs_grad(x);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, x, start, len](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            Matrix& gx = gr.grad_ref(x);
            for (size_t i = 0; i < g.rows(); ++i)
                for (size_t j = 0; j < len; ++j) gx(i, start + j) += g(i, j);
        };
    return id;
}

int Graph::concat_cols(const std::vector<int>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no parts");
    const size_t rows = value(parts[0]).rows();
    size_t cols = 0;
    bool ng = false;
    for (int p : parts) {
        if (value(p).rows() != rows) throw ShapeMismatch("concat_cols: row counts differ");
        cols += value(p).cols();
        ng = ng || needs_grad(p);
    }
    Matrix out(rows, cols);
    size_t off = 0;
    for (int p : parts) {
        const Matrix& pv = value(p);
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < pv.cols(); ++j) out(i, off + j) = pv(i, j);
        off += pv.cols();
    }

    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, parts](Graph& gr) {
            const Matrix& g = gr.grad_ref(id);
            size_t off2 = 0;
            for (int p : parts) {
                const size_t w = gr.value(p).cols();
                if (gr.needs_grad(p)) {
                    Matrix& gp = gr.grad_ref(p);
                    for (size_t i = 0; i < g.rows(); ++i)
                        for (size_t j = 0; j < w; ++j) gp(i, j) += g(i, off2 + j);
                }
                off2 += w;
            }
        };
    return id;
}

int Graph::cross_entropy_sum(int logits, std::vector<int> labels) {
    const Matrix& lv = value(logits);
    if (labels.size() != lv.rows())
        throw ShapeMismatch("cross_entropy_sum: " + std::to_string(labels.size()) +
                            " labels for " + std::to_string(lv.rows()) + " rows");
    for (int lbl : labels)
        if (lbl >= static_cast<int>(lv.cols()))
            throw ShapeMismatch("cross_entropy_sum: label id exceeds class count");

    double total = 0;
    for (size_t i = 0; i < lv.rows(); ++i) {
        if (labels[i] < 0) continue;
        double m = lv(i, 0);
        for (size_t j = 1; j < lv.cols(); ++j) m = std::max(m, lv(i, j));
        double z = 0;
        for (size_t j = 0; j < lv.cols(); ++j) z += std::exp(lv(i, j) - m);
        total += m + std::log(z) - lv(i, static_cast<size_t>(labels[i]));
    }
    Matrix out(1, 1);
    out(0, 0) = total;

    const bool ng = needs_grad(logits);
    const int id = push(std::move(out), ng, {});
    if (ng)
        nodes_.back().back = [id, logits, labels = std::move(labels)](Graph& gr) {
            const double g = gr.grad_ref(id)(0, 0);
            const Matrix& lv2 = gr.value(logits);
            Matrix& gl = gr.grad_ref(logits);
            for (size_t i = 0; i < lv2.rows(); ++i) {
                if (labels[i] < 0) continue;
                double m = lv2(i, 0);
                for (size_t j = 1; j < lv2.cols(); ++j) m = std::max(m, lv2(i, j));
                double z = 0;
                for (size_t j = 0; j < lv2.cols(); ++j) z += std::exp(lv2(i, j) - m);
                for (size_t j = 0; j < lv2.cols(); ++j) {
                    const double p = std::exp(lv2(i, j) - m) / z;
                    gl(i, j) += g * (p - (static_cast<int>(j) == labels[i] ? 1.0 : 0.0));
                }
            }
        };
    return id;
}

}  // namespace kurdner

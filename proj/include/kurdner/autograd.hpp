#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "kurdner/tensor.hpp"

namespace kurdner {

struct NoGraph : std::runtime_error {
    explicit NoGraph(const std::string& what) : std::runtime_error(what) {}
};

/// Reverse-mode autodiff tape. Each op records its forward value and a
/// closure that routes the upstream gradient to its inputs; backward()
/// replays the tape in reverse creation order. Nodes built with constant()
/// act as frozen inputs: no gradient is ever allocated for them or for any
/// node that depends only on them.
class Graph {
 public:
    // Frozen input; participates in forward only.
    int constant(Matrix value);
    // Trainable input; receives a gradient on backward().
    int param(Matrix value);

    int matmul(int a, int b);     // A (m x k) * B (k x n)
    int matmul_nt(int a, int b);  // A (m x k) * B^T, B given as (n x k)
    int add(int a, int b);        // same shape
    int add_bias(int x, int bias);  // bias shape (1 x cols), broadcast over rows
    int scale(int x, double s);
    int gelu(int x);  // exact erf form
    int layer_norm(int x, int gain, int shift, double eps = 1e-5);  // row-wise
    // Row-wise softmax over key positions where key_valid != 0; invalid
    // positions get exactly zero weight.
    int softmax_masked(int scores, std::vector<char> key_valid);
    int slice_cols(int x, size_t start, size_t len);
    int concat_cols(const std::vector<int>& parts);
    // Sum over rows with label >= 0 of -log softmax(row)[label], with
    // max-subtraction; 1x1 result. Rows with label < 0 contribute nothing.
    int cross_entropy_sum(int logits, std::vector<int> labels);

    const Matrix& value(int id) const { return nodes_.at(static_cast<size_t>(id)).value; }
    // Gradient accumulated by backward(); only nodes on a trainable path
    // have one.
    const Matrix& grad(int id) const;
    bool needs_grad(int id) const { return nodes_.at(static_cast<size_t>(id)).needs_grad; }

    // Seeds d(root)/d(root) = 1 and propagates to every trainable input.
    // root must be a 1x1 node on the tape.
    void backward(int root);

 private:
    struct Node {
        Matrix value;
        Matrix grad;  // empty unless needs_grad
        bool needs_grad = false;
        std::function<void(Graph&)> back;  // empty for inputs / frozen subtrees
    };

    int push(Matrix value, bool needs_grad, std::function<void(Graph&)> back);
    Matrix& grad_ref(int id) { return nodes_[static_cast<size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

}  // namespace kurdner

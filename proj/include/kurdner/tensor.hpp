#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kurdner/rng.hpp"

namespace kurdner {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix of doubles. Row vectors double as bias vectors
/// (shape 1 x n). All numerics in the project run in 64-bit precision.
class Matrix {
 public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix randn(size_t rows, size_t cols, Rng& rng, double stddev) {
        Matrix m(rows, cols);
        for (double& v : m.data_) v = rng.gaussian(0.0, stddev);
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
    double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void require_shape(size_t rows, size_t cols, const char* what) const {
        if (rows_ != rows || cols_ != cols)
            throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
    }

 private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace kurdner

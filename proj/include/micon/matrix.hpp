#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace micon::math {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 as convenient.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
    double operator()(size_t r, size_t c) const { return data[r * cols + c]; }

    std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool all_finite() const;
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a^T * b  (a is k x m, b is k x n, result m x n)
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// c = a * b^T  (a is m x k, b is n x k, result m x n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

// Cosine of the angle between a and b; throws on zero vectors or length
// mismatch. Scale-invariant in either argument.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

std::string shape_str(const Matrix& m);

}  // namespace micon::math

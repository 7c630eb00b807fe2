#pragma once

#include <cstddef>
#include <vector>

namespace classp {

/// Dense row-major matrix of doubles. The one value type every other
/// module stores parameters, gradients and batches in.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

enum class ElementwiseOp { add, sub, mul };

// Standard product; throws DimensionError unless a.cols == b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

// Elementwise add/sub/mul of two same-shape matrices.
Matrix elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op);

Matrix transpose(const Matrix& m);

} // namespace classp

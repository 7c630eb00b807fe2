#include "classp/matrix.hpp"

#include <string>

#include "classp/error.hpp"

namespace classp {

namespace {

std::string shape_str(const Matrix& m) {
    return "(" + std::to_string(m.rows) + "x" + std::to_string(m.cols) + ")";
}

} // namespace

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {
    if (r == 0 || c == 0) {
        throw DimensionError("matrix dimensions must be >= 1, got " + shape_str(*this));
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul shape mismatch: " + shape_str(a) + " x " + shape_str(b));
    }
    Matrix out(a.rows, b.cols, 0.0);
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* orow = &out.data[i * out.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Matrix elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op) {
    if (!a.same_shape(b)) {
        throw DimensionError("elementwise shape mismatch: " + shape_str(a) + " vs " + shape_str(b));
    }
    Matrix out(a.rows, a.cols);
    switch (op) {
    case ElementwiseOp::add:
        for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] + b.data[i];
        break;
    case ElementwiseOp::sub:
        for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] - b.data[i];
        break;
    case ElementwiseOp::mul:
        for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
        break;
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out(j, i) = m(i, j);
        }
    }
    return out;
}

} // namespace classp

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "classp/matrix.hpp"
#include "classp/rng.hpp"

namespace classp {

struct DenseLayer {
    Matrix w; // (fan_in, fan_out)
    Matrix b; // (1, fan_out)
};

/// Parameters of an input -> hidden ReLU layers -> linear output classifier.
/// Flattening order (used by the optimizers and for checkpoints) is
/// layer 0 W row-major, layer 0 b, layer 1 W, layer 1 b, ...
struct MlpParams {
    std::vector<DenseLayer> layers;

    // He-normal weights (std = sqrt(2/fan_in)), zero biases.
    // sizes = {fan_in, hidden..., num_classes}, at least two entries.
    static MlpParams he_init(std::span<const std::size_t> sizes, Pcg32& rng);

    static MlpParams zeros(std::span<const std::size_t> sizes);

    std::size_t element_count() const;
    std::size_t num_classes() const { return layers.back().w.cols; }
    std::size_t input_dim() const { return layers.front().w.rows; }

    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);
};

/// Per-layer gradients, shape-identical to the MlpParams they came from.
struct GradientSet {
    std::vector<DenseLayer> layers;

    std::vector<double> flatten() const;
};

/// Batch intermediates kept by the forward pass for the backward pass.
struct ForwardCache {
    Matrix input;                 // (B, fan_in)
    std::vector<Matrix> pre;      // pre-activations per layer, (B, fan_out)
    std::vector<Matrix> act;      // post-ReLU activations per hidden layer
};

// Forward pass; hidden layers use ReLU, the last layer is linear.
// Fills *cache when given (needed for mlp_backward).
Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache* cache = nullptr);

// Row-wise softmax with max subtraction for stability.
Matrix softmax_rows(const Matrix& logits);

struct LossGrad {
    double loss = 0.0;
    Matrix dlogits; // (softmax - onehot) / B
};

// Mean softmax cross-entropy over the batch plus its gradient w.r.t. logits.
LossGrad cross_entropy_loss(const Matrix& logits, std::span<const int> labels);

// Exact gradients of the scalar loss w.r.t. every parameter element, given
// the cache produced by the matching forward call.
GradientSet mlp_backward(const MlpParams& params, const ForwardCache& cache,
                         const Matrix& dlogits);

} // namespace classp

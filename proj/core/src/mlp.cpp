#include "classp/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "classp/error.hpp"

namespace classp {

namespace {

void check_sizes(std::span<const std::size_t> sizes) {
    if (sizes.size() < 2) {
        throw ArgumentError("MLP needs at least input and output sizes");
    }
    for (std::size_t s : sizes) {
        if (s == 0) throw ArgumentError("MLP layer sizes must be >= 1");
    }
}

} // namespace

MlpParams MlpParams::he_init(std::span<const std::size_t> sizes, Pcg32& rng) {
    check_sizes(sizes);
    MlpParams p;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const std::size_t fan_in = sizes[k];
        const std::size_t fan_out = sizes[k + 1];
        DenseLayer layer;
        layer.w = rand_normal(rng, fan_in, fan_out, 0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        layer.b = Matrix(1, fan_out, 0.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

MlpParams MlpParams::zeros(std::span<const std::size_t> sizes) {
    check_sizes(sizes);
    MlpParams p;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        p.layers.push_back({Matrix(sizes[k], sizes[k + 1], 0.0), Matrix(1, sizes[k + 1], 0.0)});
    }
    return p;
}

std::size_t MlpParams::element_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
    return n;
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(element_count());
    for (const auto& layer : layers) {
        flat.insert(flat.end(), layer.w.data.begin(), layer.w.data.end());
        flat.insert(flat.end(), layer.b.data.begin(), layer.b.data.end());
    }
    return flat;
}

void MlpParams::assign_flat(std::span<const double> flat) {
    if (flat.size() != element_count()) {
        throw DimensionError("assign_flat: expected " + std::to_string(element_count()) +
                             " elements, got " + std::to_string(flat.size()));
    }
    std::size_t offset = 0;
    for (auto& layer : layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.w.size(),
                    layer.w.data.begin());
        offset += layer.w.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.b.size(),
                    layer.b.data.begin());
        offset += layer.b.size();
    }
}

std::vector<double> GradientSet::flatten() const {
    std::vector<double> flat;
    for (const auto& layer : layers) {
        flat.insert(flat.end(), layer.w.data.begin(), layer.w.data.end());
        flat.insert(flat.end(), layer.b.data.begin(), layer.b.data.end());
    }
    return flat;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache* cache) {
    if (params.layers.empty()) throw ArgumentError("mlp_forward: empty parameter set");
    if (x.cols != params.input_dim()) {
        throw DimensionError("mlp_forward: input has " + std::to_string(x.cols) +
                             " features, model expects " + std::to_string(params.input_dim()));
    }
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->act.clear();
    }
    Matrix h = x;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const DenseLayer& layer = params.layers[k];
        Matrix z = matmul(h, layer.w);
        for (std::size_t i = 0; i < z.rows; ++i) {
            for (std::size_t j = 0; j < z.cols; ++j) {
                z(i, j) += layer.b(0, j);
            }
        }
        if (cache) cache->pre.push_back(z);
        if (k + 1 < params.layers.size()) {
            for (double& v : z.data) v = std::max(v, 0.0);
            if (cache) cache->act.push_back(z);
        }
        h = std::move(z);
    }
    return h;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double row_max = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) row_max = std::max(row_max, logits(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp(logits(i, j) - row_max);
            out(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) out(i, j) /= sum;
    }
    return out;
}

LossGrad cross_entropy_loss(const Matrix& logits, std::span<const int> labels) {
    if (labels.size() != logits.rows) {
        throw DimensionError("cross_entropy_loss: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(logits.rows) + " rows");
    }
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= logits.cols) {
            throw ArgumentError("cross_entropy_loss: label " + std::to_string(label) +
                                " out of range [0, " + std::to_string(logits.cols) + ")");
        }
    }
    const double inv_b = 1.0 / static_cast<double>(logits.rows);
    LossGrad out;
    out.dlogits = softmax_rows(logits);
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        // log softmax computed directly from the shifted logits for accuracy
        double row_max = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) row_max = std::max(row_max, logits(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) sum += std::exp(logits(i, j) - row_max);
        loss -= (logits(i, y) - row_max - std::log(sum));
        out.dlogits(i, y) -= 1.0;
    }
    for (double& v : out.dlogits.data) v *= inv_b;
    out.loss = loss * inv_b;
    return out;
}

GradientSet mlp_backward(const MlpParams& params, const ForwardCache& cache,
                         const Matrix& dlogits) {
    const std::size_t num_layers = params.layers.size();
    if (cache.pre.size() != num_layers || cache.act.size() + 1 != num_layers) {
        throw ArgumentError("mlp_backward: cache does not match this network");
    }
    if (!dlogits.same_shape(cache.pre.back())) {
        throw ArgumentError("mlp_backward: dlogits shape does not match cached logits");
    }
    if (cache.input.rows != dlogits.rows || cache.input.cols != params.input_dim()) {
        throw ArgumentError("mlp_backward: cache batch does not match the forward call");
    }

    GradientSet grads;
    grads.layers.resize(num_layers);

    Matrix delta = dlogits; // gradient w.r.t. the current layer's pre-activation
    for (std::size_t k = num_layers; k-- > 0;) {
        const Matrix& layer_in = (k == 0) ? cache.input : cache.act[k - 1];
        grads.layers[k].w = matmul(transpose(layer_in), delta);
        Matrix db(1, delta.cols, 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            for (std::size_t j = 0; j < delta.cols; ++j) db(0, j) += delta(i, j);
        }
        grads.layers[k].b = std::move(db);
        if (k > 0) {
            delta = matmul(delta, transpose(params.layers[k].w));
            // ReLU mask from the previous layer's pre-activation
            const Matrix& pre = cache.pre[k - 1];
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (pre.data[i] <= 0.0) delta.data[i] = 0.0;
            }
        }
    }
    return grads;
}

} // namespace classp

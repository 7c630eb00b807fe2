#include "classp/optim.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "classp/error.hpp"

namespace classp {

namespace {

using nlohmann::json;

void check_lengths(std::size_t params, std::size_t grads, std::size_t state,
                   const char* who) {
    if (params != grads || params != state) {
        throw DimensionError(std::string(who) + ": length mismatch (params " +
                             std::to_string(params) + ", grads " + std::to_string(grads) +
                             ", state " + std::to_string(state) + ")");
    }
}

void check_finite(std::span<const double> grads, const char* who) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericError(std::string(who) + ": non-finite gradient at element " +
                               std::to_string(i) + "; step rejected");
        }
    }
}

// |g|^p and x^(1/p) with exact fast paths for the common powers so the p=2
// case stays bit-identical to the AdaGrad reference.
inline double abs_pow(double g, double p) {
    if (p == 1.0) return std::fabs(g);
    if (p == 2.0) return g * g;
    return std::pow(std::fabs(g), p);
}

inline double root_p(double x, double p) {
    if (p == 1.0) return x;
    if (p == 2.0) return std::sqrt(x);
    return std::pow(x, 1.0 / p);
}

} // namespace

void ClasspConfig::validate() const {
    if (!(alpha > 0.0)) throw ArgumentError("classp: alpha must be > 0");
    if (!(epsilon > 0.0)) throw ArgumentError("classp: epsilon must be > 0");
    if (threshold < 0.0) throw ArgumentError("classp: threshold must be >= 0");
    if (!(p >= 1.0)) throw ArgumentError("classp: p must be >= 1");
}

void classp_step(std::span<double> params, std::span<const double> grads, ClasspState& state,
                 const ClasspConfig& cfg) {
    cfg.validate();
    check_lengths(params.size(), grads.size(), state.grad_sum.size(), "classp_step");
    check_finite(grads, "classp_step");

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!(g * g > cfg.threshold)) continue; // strict gate; g=0 never passes

        if (cfg.exclude_current) {
            const double denom = root_p(cfg.epsilon + state.grad_sum[i], cfg.p);
            state.grad_sum[i] += abs_pow(g, cfg.p);
            params[i] -= cfg.apply_decay ? cfg.alpha * g / denom : cfg.alpha * g;
        } else {
            state.grad_sum[i] += abs_pow(g, cfg.p);
            if (cfg.apply_decay) {
                params[i] -= cfg.alpha * g / root_p(cfg.epsilon + state.grad_sum[i], cfg.p);
            } else {
                params[i] -= cfg.alpha * g;
            }
        }
    }
    ++state.step_count;
}

void adagrad_step(std::span<double> params, std::span<const double> grads, AdagradState& state,
                  double alpha, double epsilon) {
    if (!(alpha > 0.0)) throw ArgumentError("adagrad: alpha must be > 0");
    if (!(epsilon >= 0.0)) throw ArgumentError("adagrad: epsilon must be >= 0");
    check_lengths(params.size(), grads.size(), state.accum.size(), "adagrad_step");
    check_finite(grads, "adagrad_step");

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.accum[i] += g * g;
        if (g != 0.0) {
            params[i] -= alpha * g / std::sqrt(epsilon + state.accum[i]);
        }
    }
}

void sgd_step(std::span<double> params, std::span<const double> grads, double alpha) {
    if (params.size() != grads.size()) {
        throw DimensionError("sgd_step: params/grads length mismatch");
    }
    check_finite(grads, "sgd_step");
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= alpha * grads[i];
    }
}

void AdamConfig::validate() const {
    if (!(alpha > 0.0)) throw ArgumentError("adam: alpha must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw ArgumentError("adam: beta1 must be in [0, 1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw ArgumentError("adam: beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ArgumentError("adam: epsilon must be > 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
    cfg.validate();
    check_lengths(params.size(), grads.size(), state.m.size(), "adam_step");
    if (state.v.size() != state.m.size()) {
        throw DimensionError("adam_step: moment buffers out of sync");
    }
    check_finite(grads, "adam_step");

    const auto t = static_cast<double>(++state.t);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

std::vector<double> ewc_fisher_diag(const MlpParams& params, const Dataset& dataset,
                                    std::size_t sample_count, Pcg32& rng) {
    if (dataset.size() == 0) throw ArgumentError("ewc_fisher_diag: empty dataset");
    if (sample_count == 0) throw ArgumentError("ewc_fisher_diag: sample_count must be >= 1");

    const std::size_t n = dataset.size();
    const bool full_sweep = sample_count >= n;
    const std::size_t draws = full_sweep ? n : sample_count;

    std::vector<double> fisher(params.element_count(), 0.0);
    Matrix xrow(1, dataset.features());
    for (std::size_t s = 0; s < draws; ++s) {
        const std::size_t idx =
            full_sweep ? s : rng.next_below(static_cast<std::uint32_t>(n));
        std::copy_n(dataset.x.data.begin() + static_cast<std::ptrdiff_t>(idx * dataset.features()),
                    dataset.features(), xrow.data.begin());
        const int label = dataset.y[idx];

        ForwardCache cache;
        const Matrix logits = mlp_forward(params, xrow, &cache);
        const LossGrad lg = cross_entropy_loss(logits, std::span<const int>(&label, 1));
        const GradientSet grads = mlp_backward(params, cache, lg.dlogits);
        // d log p / d w = -d CE / d w; the square drops the sign
        const std::vector<double> flat = grads.flatten();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            fisher[i] += flat[i] * flat[i];
        }
    }
    for (double& f : fisher) f /= static_cast<double>(draws);
    return fisher;
}

void ewc_penalized_grads(std::span<double> grads, std::span<const double> params,
                         const EwcState& ewc) {
    if (grads.size() != params.size() || grads.size() != ewc.anchor.size() ||
        grads.size() != ewc.fisher.size()) {
        throw DimensionError("ewc_penalized_grads: shape mismatch");
    }
    if (ewc.lambda < 0.0) throw ArgumentError("ewc: lambda must be >= 0");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        grads[i] += ewc.lambda * ewc.fisher[i] * (params[i] - ewc.anchor[i]);
    }
}

std::string to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::classp: return "classp";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adagrad: return "adagrad";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::ewc: return "ewc";
    }
    return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "classp") return OptimizerKind::classp;
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adagrad") return OptimizerKind::adagrad;
    if (name == "adam") return OptimizerKind::adam;
    if (name == "ewc") return OptimizerKind::ewc;
    throw ArgumentError("unknown optimizer kind: " + name);
}

std::size_t aux_memory_count(OptimizerKind kind, std::size_t param_count) {
    switch (kind) {
    case OptimizerKind::classp: return param_count;      // grad_sum
    case OptimizerKind::sgd: return 0;
    case OptimizerKind::adagrad: return param_count;     // squared-gradient accumulator
    case OptimizerKind::adam: return 2 * param_count;    // two moment buffers
    case OptimizerKind::ewc: return 2 * param_count;     // anchor weights + Fisher diagonal
    }
    throw ArgumentError("aux_memory_count: unknown optimizer kind");
}

// ---------------------------------------------------------------------------
// Polymorphic wrappers
// ---------------------------------------------------------------------------

namespace {

std::vector<double> json_to_vector(const json& j, const char* key, std::size_t expected) {
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != expected) {
        throw FormatError(std::string("optimizer state: bad '") + key + "' array");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

class ClasspOptimizer final : public Optimizer {
public:
    ClasspOptimizer(const ClasspSpec& spec, std::size_t n) : cfg_(spec.config), state_(n) {
        cfg_.validate();
    }

    void step(std::span<double> params, std::span<const double> grads) override {
        classp_step(params, grads, state_, cfg_);
    }
    OptimizerKind kind() const override { return OptimizerKind::classp; }
    std::size_t param_count() const override { return state_.grad_sum.size(); }
    std::size_t updated_elements() const override {
        std::size_t n = 0;
        for (double v : state_.grad_sum) n += (v > 0.0);
        return n;
    }
    void set_threshold(double threshold) override { cfg_.threshold = threshold; }
    void set_apply_decay(bool apply_decay) override { cfg_.apply_decay = apply_decay; }

    std::string state_json() const override {
        json j;
        j["kind"] = "classp";
        j["step_count"] = state_.step_count;
        j["grad_sum"] = state_.grad_sum;
        return j.dump();
    }
    void load_state(const std::string& text) override {
        const json j = json::parse(text);
        if (j.at("kind").get<std::string>() != "classp") {
            throw FormatError("optimizer state: kind mismatch, expected classp");
        }
        state_.grad_sum = json_to_vector(j, "grad_sum", param_count());
        state_.step_count = j.at("step_count").get<std::uint64_t>();
    }

    const ClasspState& state() const { return state_; }

private:
    ClasspConfig cfg_;
    ClasspState state_;
};

class SgdOptimizer final : public Optimizer {
public:
    SgdOptimizer(const SgdSpec& spec, std::size_t n) : alpha_(spec.alpha), touched_(n, false) {
        if (!(alpha_ > 0.0)) throw ArgumentError("sgd: alpha must be > 0");
    }

    void step(std::span<double> params, std::span<const double> grads) override {
        sgd_step(params, grads, alpha_);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            if (grads[i] != 0.0) touched_[i] = true;
        }
    }
    OptimizerKind kind() const override { return OptimizerKind::sgd; }
    std::size_t param_count() const override { return touched_.size(); }
    std::size_t updated_elements() const override {
        std::size_t n = 0;
        for (bool t : touched_) n += t;
        return n;
    }

    std::string state_json() const override {
        json j;
        j["kind"] = "sgd";
        return j.dump();
    }
    void load_state(const std::string& text) override {
        const json j = json::parse(text);
        if (j.at("kind").get<std::string>() != "sgd") {
            throw FormatError("optimizer state: kind mismatch, expected sgd");
        }
    }

protected:
    double alpha_;

private:
    std::vector<bool> touched_; // instrumentation only, not optimizer state
};

class AdagradOptimizer final : public Optimizer {
public:
    AdagradOptimizer(const AdagradSpec& spec, std::size_t n)
        : alpha_(spec.alpha), epsilon_(spec.epsilon), state_(n) {}

    void step(std::span<double> params, std::span<const double> grads) override {
        adagrad_step(params, grads, state_, alpha_, epsilon_);
    }
    OptimizerKind kind() const override { return OptimizerKind::adagrad; }
    std::size_t param_count() const override { return state_.accum.size(); }
    std::size_t updated_elements() const override {
        std::size_t n = 0;
        for (double v : state_.accum) n += (v > 0.0);
        return n;
    }

    std::string state_json() const override {
        json j;
        j["kind"] = "adagrad";
        j["accum"] = state_.accum;
        return j.dump();
    }
    void load_state(const std::string& text) override {
        const json j = json::parse(text);
        if (j.at("kind").get<std::string>() != "adagrad") {
            throw FormatError("optimizer state: kind mismatch, expected adagrad");
        }
        state_.accum = json_to_vector(j, "accum", param_count());
    }

private:
    double alpha_;
    double epsilon_;
    AdagradState state_;
};

class AdamOptimizer final : public Optimizer {
public:
    AdamOptimizer(const AdamSpec& spec, std::size_t n) : cfg_(spec.config), state_(n) {
        cfg_.validate();
    }

    void step(std::span<double> params, std::span<const double> grads) override {
        adam_step(params, grads, state_, cfg_);
    }
    OptimizerKind kind() const override { return OptimizerKind::adam; }
    std::size_t param_count() const override { return state_.m.size(); }
    std::size_t updated_elements() const override {
        std::size_t n = 0;
        for (double v : state_.v) n += (v > 0.0);
        return n;
    }

    std::string state_json() const override {
        json j;
        j["kind"] = "adam";
        j["t"] = state_.t;
        j["m"] = state_.m;
        j["v"] = state_.v;
        return j.dump();
    }
    void load_state(const std::string& text) override {
        const json j = json::parse(text);
        if (j.at("kind").get<std::string>() != "adam") {
            throw FormatError("optimizer state: kind mismatch, expected adam");
        }
        state_.m = json_to_vector(j, "m", param_count());
        state_.v = json_to_vector(j, "v", param_count());
        state_.t = j.at("t").get<std::uint64_t>();
    }

private:
    AdamConfig cfg_;
    AdamState state_;
};

// SGD inner steps plus the quadratic anchor penalty once a task has finished.
class EwcOptimizer final : public Optimizer {
public:
    EwcOptimizer(const EwcSpec& spec, std::size_t n)
        : alpha_(spec.alpha), fisher_samples_(spec.fisher_samples), touched_(n, false) {
        if (!(alpha_ > 0.0)) throw ArgumentError("ewc: alpha must be > 0");
        if (spec.lambda < 0.0) throw ArgumentError("ewc: lambda must be >= 0");
        if (fisher_samples_ == 0) throw ArgumentError("ewc: fisher_samples must be >= 1");
        state_.lambda = spec.lambda;
    }

    void step(std::span<double> params, std::span<const double> grads) override {
        sgd_step(params, grads, alpha_);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            if (grads[i] != 0.0) touched_[i] = true;
        }
    }
    void adjust_grads(std::span<double> grads, std::span<const double> params) const override {
        if (state_.has_anchor()) {
            ewc_penalized_grads(grads, params, state_);
        }
    }
    void on_phase_end(const MlpParams& params, const Dataset& dataset, Pcg32& rng) override {
        state_.anchor = params.flatten();
        state_.fisher = ewc_fisher_diag(params, dataset, fisher_samples_, rng);
    }
    OptimizerKind kind() const override { return OptimizerKind::ewc; }
    std::size_t param_count() const override { return touched_.size(); }
    std::size_t updated_elements() const override {
        std::size_t n = 0;
        for (bool t : touched_) n += t;
        return n;
    }

    std::string state_json() const override {
        json j;
        j["kind"] = "ewc";
        j["lambda"] = state_.lambda;
        j["anchor"] = state_.anchor;
        j["fisher"] = state_.fisher;
        return j.dump();
    }
    void load_state(const std::string& text) override {
        const json j = json::parse(text);
        if (j.at("kind").get<std::string>() != "ewc") {
            throw FormatError("optimizer state: kind mismatch, expected ewc");
        }
        state_.lambda = j.at("lambda").get<double>();
        const auto& anchor = j.at("anchor");
        if (anchor.empty()) {
            state_.anchor.clear();
            state_.fisher.clear();
        } else {
            state_.anchor = json_to_vector(j, "anchor", param_count());
            state_.fisher = json_to_vector(j, "fisher", param_count());
        }
    }

    const EwcState& state() const { return state_; }

private:
    double alpha_;
    std::size_t fisher_samples_;
    EwcState state_;
    std::vector<bool> touched_;
};

} // namespace

std::unique_ptr<Optimizer> make_optimizer(const ClasspSpec& spec, std::size_t n) {
    return std::make_unique<ClasspOptimizer>(spec, n);
}
std::unique_ptr<Optimizer> make_optimizer(const SgdSpec& spec, std::size_t n) {
    return std::make_unique<SgdOptimizer>(spec, n);
}
std::unique_ptr<Optimizer> make_optimizer(const AdagradSpec& spec, std::size_t n) {
    return std::make_unique<AdagradOptimizer>(spec, n);
}
std::unique_ptr<Optimizer> make_optimizer(const AdamSpec& spec, std::size_t n) {
    return std::make_unique<AdamOptimizer>(spec, n);
}
std::unique_ptr<Optimizer> make_optimizer(const EwcSpec& spec, std::size_t n) {
    return std::make_unique<EwcOptimizer>(spec, n);
}

} // namespace classp

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "classp/dataset.hpp"
#include "classp/mlp.hpp"
#include "classp/rng.hpp"

namespace classp {

// ---------------------------------------------------------------------------
// CLASSP: per-element learning-rate decay driven by accumulated |g|^p,
// gated by a squared-gradient threshold.
// ---------------------------------------------------------------------------

struct ClasspConfig {
    double alpha = 0.2;       // learning rate
    double threshold = 0.0;   // gate: element updates only when g^2 > threshold
    double p = 1.0;           // accumulation power; p=2 with threshold=0 is AdaGrad
    bool apply_decay = true;  // false: plain update w -= alpha*g, still accumulating
    double epsilon = 1e-8;    // inside the p-th root: (epsilon + grad_sum)^(1/p)
    // Study variant: compute the scaling factor from grad_sum *before* adding
    // the current |g|^p. Off by default; the default (inclusive) convention is
    // the one that reduces to canonical AdaGrad at p=2.
    bool exclude_current = false;

    void validate() const; // throws ArgumentError naming the bad field
};

struct ClasspState {
    std::vector<double> grad_sum; // per element, >= 0, non-decreasing
    std::uint64_t step_count = 0;

    ClasspState() = default;
    explicit ClasspState(std::size_t n) : grad_sum(n, 0.0) {}
};

// One CLASSP step over flat parameter/gradient views. Elements are treated
// independently: gate on g^2 > threshold, accumulate |g|^p, then either the
// decayed update alpha*g/(eps+grad_sum)^(1/p) or the plain alpha*g.
// A non-finite gradient rejects the whole step atomically.
void classp_step(std::span<double> params, std::span<const double> grads, ClasspState& state,
                 const ClasspConfig& cfg);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct AdagradState {
    std::vector<double> accum; // per element sum of g^2

    AdagradState() = default;
    explicit AdagradState(std::size_t n) : accum(n, 0.0) {}
};

// accum += g^2; w -= alpha * g / sqrt(epsilon + accum). Epsilon sits inside
// the root so the p=2 CLASSP special case coincides elementwise.
void adagrad_step(std::span<double> params, std::span<const double> grads, AdagradState& state,
                  double alpha, double epsilon);

void sgd_step(std::span<double> params, std::span<const double> grads, double alpha);

struct AdamConfig {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct AdamState {
    std::vector<double> m; // first moment
    std::vector<double> v; // second moment
    std::uint64_t t = 0;   // completed steps

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Standard bias-corrected Adam; increments state.t (first call runs at t=1).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

// ---------------------------------------------------------------------------
// EWC baseline: quadratic penalty anchored at the previous task's weights,
// weighted by a Fisher-diagonal importance estimate.
// ---------------------------------------------------------------------------

struct EwcState {
    std::vector<double> anchor; // parameter snapshot w*
    std::vector<double> fisher; // per-element Fisher diagonal, >= 0
    double lambda = 100.0;

    bool has_anchor() const { return !anchor.empty(); }
};

// Mean over sampled examples of the squared log-likelihood gradient per
// parameter element. Draws sample_count examples with replacement; when
// sample_count >= dataset size every example is visited exactly once.
std::vector<double> ewc_fisher_diag(const MlpParams& params, const Dataset& dataset,
                                    std::size_t sample_count, Pcg32& rng);

// grads[i] += lambda * fisher[i] * (params[i] - anchor[i])
void ewc_penalized_grads(std::span<double> grads, std::span<const double> params,
                         const EwcState& ewc);

// ---------------------------------------------------------------------------
// Accounting and the polymorphic wrapper the training loop drives
// ---------------------------------------------------------------------------

enum class OptimizerKind { classp, sgd, adagrad, adam, ewc };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

// Persistent auxiliary real values per optimizer for a model with
// param_count elements: CLASSP N, SGD 0, AdaGrad N, Adam 2N, EWC 2N on top
// of its inner optimizer.
std::size_t aux_memory_count(OptimizerKind kind, std::size_t param_count);

/// Everything the harness needs from an optimizer: a step over flat views,
/// phase-boundary bookkeeping, and checkpointable state.
class Optimizer {
public:
    virtual ~Optimizer() = default;

    virtual void step(std::span<double> params, std::span<const double> grads) = 0;
    virtual OptimizerKind kind() const = 0;
    virtual std::size_t param_count() const = 0;

    // Number of elements that have received at least one update (for CLASSP
    // exactly the elements with grad_sum > 0).
    virtual std::size_t updated_elements() const = 0;

    // Gradient adjustment applied before step(); only EWC overrides this.
    virtual void adjust_grads(std::span<double> /*grads*/,
                              std::span<const double> /*params*/) const {}

    // Called by the harness when a phase finishes training; EWC re-anchors
    // and re-estimates its Fisher diagonal here.
    virtual void on_phase_end(const MlpParams& /*params*/, const Dataset& /*dataset*/,
                              Pcg32& /*rng*/) {}

    // Per-phase CLASSP schedule overrides; no-ops for the other optimizers.
    virtual void set_threshold(double /*threshold*/) {}
    virtual void set_apply_decay(bool /*apply_decay*/) {}

    // Flat JSON dump of the optimizer state, element order = parameter
    // flattening order. load_state() restores it exactly.
    virtual std::string state_json() const = 0;
    virtual void load_state(const std::string& json_text) = 0;
};

struct ClasspSpec {
    ClasspConfig config;
};
struct SgdSpec {
    double alpha = 0.1;
};
struct AdagradSpec {
    double alpha = 0.1;
    double epsilon = 1e-8;
};
struct AdamSpec {
    AdamConfig config;
};
struct EwcSpec {
    double alpha = 0.1; // inner SGD learning rate
    double lambda = 100.0;
    std::size_t fisher_samples = 200;
};

std::unique_ptr<Optimizer> make_optimizer(const ClasspSpec& spec, std::size_t param_count);
std::unique_ptr<Optimizer> make_optimizer(const SgdSpec& spec, std::size_t param_count);
std::unique_ptr<Optimizer> make_optimizer(const AdagradSpec& spec, std::size_t param_count);
std::unique_ptr<Optimizer> make_optimizer(const AdamSpec& spec, std::size_t param_count);
std::unique_ptr<Optimizer> make_optimizer(const EwcSpec& spec, std::size_t param_count);

} // namespace classp

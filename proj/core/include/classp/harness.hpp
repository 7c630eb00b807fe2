#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "classp/dataset.hpp"
#include "classp/mlp.hpp"
#include "classp/optim.hpp"

namespace classp {

/// One training phase: a dataset, an epoch budget and optional per-phase
/// optimizer overrides (threshold / apply_decay apply to CLASSP only).
struct PhaseSpec {
    std::shared_ptr<const Dataset> dataset;
    std::size_t epochs = 1;
    std::size_t batch_size = 64;
    std::optional<double> threshold;
    std::optional<bool> apply_decay;
    std::optional<double> loss_stop; // end the phase once epoch-mean loss <= this
};

struct TaskSequence {
    std::vector<PhaseSpec> phases;
    std::vector<std::shared_ptr<const Dataset>> eval_sets; // evaluated after every phase

    void validate() const; // shared feature dim and label space
};

using OptimizerSpec = std::variant<ClasspSpec, SgdSpec, AdagradSpec, AdamSpec, EwcSpec>;

OptimizerKind spec_kind(const OptimizerSpec& spec);
std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t param_count);

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t repeats = 1;              // repeat r uses seed + r
    std::vector<std::size_t> layer_sizes; // {features, hidden..., classes}
    OptimizerSpec optimizer;
    TaskSequence tasks;
    bool parallel_repeats = true;
};

struct PhaseReport {
    std::size_t phase = 0;
    std::vector<double> eval_accuracy; // percent, one per eval set
    double updated_fraction = 0.0;     // elements with grad_sum > 0 (or analogue)
    std::size_t aux_memory = 0;        // persistent auxiliary reals of the optimizer
    double train_loss = 0.0;           // final epoch-mean loss
    std::size_t epochs_run = 0;        // < epochs when loss_stop triggered
};

struct ForgettingReport {
    double acc_initial = 0.0; // first eval set, right after phase 1
    double acc_final = 0.0;   // first eval set, after the last phase
    double rate = 0.0;        // 100 * (initial - final) / initial
};

struct RepeatReport {
    std::uint64_t seed = 0;
    std::vector<PhaseReport> phases;
    ForgettingReport forgetting;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0; // population formula (n divisor)
};

MetricStats aggregate(const std::vector<double>& values);

struct RunResult {
    std::vector<RepeatReport> repeats;
    // [phase][eval_set] accuracy stats across repeats
    std::vector<std::vector<MetricStats>> accuracy;
    std::vector<MetricStats> updated_fraction; // per phase
    MetricStats forgetting_rate;
};

// Fraction of argmax predictions equal to the labels, x100.
// Ties break toward the lowest class index.
double accuracy(const MlpParams& params, const Dataset& d);

// 100 * (acc_initial - acc_final) / acc_initial; acc_initial must be > 0.
double forgetting_rate(double acc_initial, double acc_final);

// Fraction of elements with grad_sum > 0 (sparsity is 1 minus this).
double updated_fraction(const ClasspState& state);

// Trains the task sequence once per repeat (seeded init + shuffling,
// per-phase overrides, optional loss stop, per-phase evaluation) and
// aggregates across repeats. Deterministic for a fixed config.
RunResult run_sequence(const RunConfig& cfg);

} // namespace classp

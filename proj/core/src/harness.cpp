#include "classp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <type_traits>

#include "classp/error.hpp"

namespace classp {

void TaskSequence::validate() const {
    if (phases.empty()) throw ArgumentError("task sequence: needs at least one phase");
    if (eval_sets.empty()) throw ArgumentError("task sequence: needs at least one eval set");
    const std::size_t features = phases.front().dataset->features();
    const int classes = phases.front().dataset->num_classes;
    for (const auto& phase : phases) {
        if (!phase.dataset) throw ArgumentError("task sequence: phase without dataset");
        if (phase.epochs == 0) throw ArgumentError("task sequence: epochs must be >= 1");
        if (phase.batch_size == 0) throw ArgumentError("task sequence: batch_size must be >= 1");
        if (phase.dataset->features() != features || phase.dataset->num_classes != classes) {
            throw DimensionError("task sequence: phases disagree on features/classes");
        }
    }
    for (const auto& eval : eval_sets) {
        if (!eval) throw ArgumentError("task sequence: null eval set");
        if (eval->features() != features || eval->num_classes != classes) {
            throw DimensionError("task sequence: eval set disagrees on features/classes");
        }
    }
}

OptimizerKind spec_kind(const OptimizerSpec& spec) {
    return std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ClasspSpec>) return OptimizerKind::classp;
            else if constexpr (std::is_same_v<T, SgdSpec>) return OptimizerKind::sgd;
            else if constexpr (std::is_same_v<T, AdagradSpec>) return OptimizerKind::adagrad;
            else if constexpr (std::is_same_v<T, AdamSpec>) return OptimizerKind::adam;
            else return OptimizerKind::ewc;
        },
        spec);
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t param_count) {
    return std::visit(
        [param_count](const auto& s) { return make_optimizer(s, param_count); }, spec);
}

MetricStats aggregate(const std::vector<double>& values) {
    MetricStats out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / n;
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / n);
    return out;
}

double accuracy(const MlpParams& params, const Dataset& d) {
    if (d.size() == 0) throw ArgumentError("accuracy: empty dataset");
    const Matrix logits = mlp_forward(params, d.x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols; ++j) {
            if (logits(i, j) > logits(i, best)) best = j; // ties keep the lowest index
        }
        if (static_cast<int>(best) == d.y[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(d.size());
}

double forgetting_rate(double acc_initial, double acc_final) {
    if (!(acc_initial > 0.0)) {
        throw ArgumentError("forgetting_rate: acc_initial must be > 0");
    }
    return 100.0 * (acc_initial - acc_final) / acc_initial;
}

double updated_fraction(const ClasspState& state) {
    if (state.grad_sum.empty()) return 0.0;
    std::size_t n = 0;
    for (double v : state.grad_sum) n += (v > 0.0);
    return static_cast<double>(n) / static_cast<double>(state.grad_sum.size());
}

namespace {

// Mini-batch views over a dataset, rows picked by a shuffled index list.
void gather_batch(const Dataset& d, std::span<const std::size_t> order, std::size_t begin,
                  std::size_t count, Matrix& x_out, std::vector<int>& y_out) {
    x_out = Matrix(count, d.features());
    y_out.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t src = order[begin + r];
        std::copy_n(d.x.data.begin() + static_cast<std::ptrdiff_t>(src * d.features()),
                    d.features(), x_out.data.begin() + static_cast<std::ptrdiff_t>(r * d.features()));
        y_out[r] = d.y[src];
    }
}

RepeatReport run_one_repeat(const RunConfig& cfg, std::size_t repeat_index) {
    const std::uint64_t seed = cfg.seed + repeat_index;
    Pcg32 rng(seed);
    MlpParams params = MlpParams::he_init(cfg.layer_sizes, rng);
    const std::size_t n = params.element_count();
    std::unique_ptr<Optimizer> opt = make_optimizer(cfg.optimizer, n);

    std::vector<double> flat_params = params.flatten();

    RepeatReport report;
    report.seed = seed;

    for (std::size_t phase_idx = 0; phase_idx < cfg.tasks.phases.size(); ++phase_idx) {
        const PhaseSpec& phase = cfg.tasks.phases[phase_idx];
        const Dataset& train = *phase.dataset;
        if (phase.threshold) opt->set_threshold(*phase.threshold);
        if (phase.apply_decay) opt->set_apply_decay(*phase.apply_decay);

        double epoch_loss = 0.0;
        std::size_t epochs_run = 0;
        Matrix xb;
        std::vector<int> yb;
        for (std::size_t epoch = 0; epoch < phase.epochs; ++epoch) {
            const std::vector<std::size_t> order = rng.permutation(train.size());
            double loss_sum = 0.0;
            for (std::size_t begin = 0; begin < train.size(); begin += phase.batch_size) {
                const std::size_t count = std::min(phase.batch_size, train.size() - begin);
                gather_batch(train, order, begin, count, xb, yb);

                ForwardCache cache;
                const Matrix logits = mlp_forward(params, xb, &cache);
                const LossGrad lg = cross_entropy_loss(logits, yb);
                const GradientSet grads = mlp_backward(params, cache, lg.dlogits);

                std::vector<double> flat_grads = grads.flatten();
                opt->adjust_grads(flat_grads, flat_params);
                try {
                    opt->step(flat_params, flat_grads);
                } catch (const NumericError& e) {
                    throw NumericError(std::string(e.what()) + " (repeat " +
                                       std::to_string(repeat_index) + ", phase " +
                                       std::to_string(phase_idx + 1) + ", epoch " +
                                       std::to_string(epoch + 1) + ")");
                }
                params.assign_flat(flat_params);
                loss_sum += lg.loss * static_cast<double>(count);
            }
            epoch_loss = loss_sum / static_cast<double>(train.size());
            ++epochs_run;
            if (phase.loss_stop && epoch_loss <= *phase.loss_stop) break;
        }

        // EWC re-anchors on the task that just finished (skipped after the
        // final phase, where nothing would consume it).
        if (phase_idx + 1 < cfg.tasks.phases.size()) {
            opt->on_phase_end(params, train, rng);
        }

        PhaseReport pr;
        pr.phase = phase_idx + 1;
        for (const auto& eval : cfg.tasks.eval_sets) {
            pr.eval_accuracy.push_back(accuracy(params, *eval));
        }
        pr.updated_fraction =
            static_cast<double>(opt->updated_elements()) / static_cast<double>(n);
        pr.aux_memory = aux_memory_count(opt->kind(), n);
        pr.train_loss = epoch_loss;
        pr.epochs_run = epochs_run;
        report.phases.push_back(std::move(pr));
    }

    report.forgetting.acc_initial = report.phases.front().eval_accuracy.at(0);
    report.forgetting.acc_final = report.phases.back().eval_accuracy.at(0);
    // zero initial accuracy means nothing was learned, so nothing was forgotten
    report.forgetting.rate =
        report.forgetting.acc_initial > 0.0
            ? forgetting_rate(report.forgetting.acc_initial, report.forgetting.acc_final)
            : 0.0;
    return report;
}

} // namespace

RunResult run_sequence(const RunConfig& cfg) {
    if (cfg.repeats == 0) throw ArgumentError("run_sequence: repeats must be >= 1");
    if (cfg.layer_sizes.size() < 2) throw ArgumentError("run_sequence: model needs >= 2 layer sizes");
    cfg.tasks.validate();
    const Dataset& first = *cfg.tasks.phases.front().dataset;
    if (cfg.layer_sizes.front() != first.features()) {
        throw DimensionError("run_sequence: model input size != dataset features");
    }
    if (cfg.layer_sizes.back() < static_cast<std::size_t>(first.num_classes)) {
        throw DimensionError("run_sequence: model output size < number of classes");
    }
    std::visit([](const auto& s) { make_optimizer(s, 1); }, cfg.optimizer); // validates

    RunResult result;
    result.repeats.resize(cfg.repeats);
    if (cfg.parallel_repeats && cfg.repeats > 1) {
        std::vector<std::future<RepeatReport>> futures;
        futures.reserve(cfg.repeats);
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            futures.push_back(std::async(std::launch::async,
                                         [&cfg, r] { return run_one_repeat(cfg, r); }));
        }
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            result.repeats[r] = futures[r].get();
        }
    } else {
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            result.repeats[r] = run_one_repeat(cfg, r);
        }
    }

    const std::size_t num_phases = cfg.tasks.phases.size();
    const std::size_t num_evals = cfg.tasks.eval_sets.size();
    result.accuracy.assign(num_phases, std::vector<MetricStats>(num_evals));
    result.updated_fraction.resize(num_phases);
    std::vector<double> values;
    for (std::size_t p = 0; p < num_phases; ++p) {
        for (std::size_t e = 0; e < num_evals; ++e) {
            values.clear();
            for (const auto& rep : result.repeats) values.push_back(rep.phases[p].eval_accuracy[e]);
            result.accuracy[p][e] = aggregate(values);
        }
        values.clear();
        for (const auto& rep : result.repeats) values.push_back(rep.phases[p].updated_fraction);
        result.updated_fraction[p] = aggregate(values);
    }
    values.clear();
    for (const auto& rep : result.repeats) values.push_back(rep.forgetting.rate);
    result.forgetting_rate = aggregate(values);
    return result;
}

} // namespace classp

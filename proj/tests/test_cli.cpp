#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "classp/cli.hpp"
#include "classp/config.hpp"
#include "classp/error.hpp"
#include "classp/results.hpp"

using namespace classp;
namespace fs = std::filesystem;

namespace {

std::string base_config() {
    return R"(# two-phase class-split fixture over gaussian blobs
name = "demo"
seed = 7
repeats = 2
model.layers = [8, 10, 4]

optimizer.kind = "classp"
optimizer.alpha = 0.2
optimizer.threshold = 0.1
optimizer.p = 1

dataset.source = "blobs"
dataset.classes = 4
dataset.features = 8
dataset.per_class = 20
dataset.std = 0.05

task.kind = "split"
phase.1.epochs = 2
phase.1.batch_size = 16
phase.2.epochs = 2
phase.2.batch_size = 16
)";
}

fs::path scratch_dir(const std::string& sub) {
    const fs::path dir = fs::temp_directory_path() / "classp-cli-tests" / sub;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// synthetic arm with formulaic metrics, for serialization tests
ArmResult fake_arm(const std::string& name, std::size_t repeats, std::size_t phases,
                   std::size_t evals) {
    ArmResult a;
    a.arm = name;
    a.run_id = name + "-0123456789abcdef";
    a.config = {{"name", "\"" + name + "\""}, {"optimizer.kind", "\"sgd\""}};
    a.config_hash = fnv1a64(canonical_config_text(a.config));
    a.base_seed = 7;
    for (std::size_t e = 0; e < evals; ++e) a.eval_names.push_back("task" + std::to_string(e + 1));
    a.wall_time_sec = 1.5;

    std::vector<std::vector<std::vector<double>>> acc(phases); // [phase][eval][repeat]
    std::vector<std::vector<double>> uf(phases);
    std::vector<double> rates;
    for (std::size_t p = 0; p < phases; ++p) acc[p].resize(evals);

    for (std::size_t r = 0; r < repeats; ++r) {
        RepeatReport rep;
        rep.seed = a.base_seed + r;
        for (std::size_t p = 0; p < phases; ++p) {
            PhaseReport ph;
            ph.phase = p + 1;
            for (std::size_t e = 0; e < evals; ++e) {
                // dyadic fractions survive any round trip bit-exactly
                const double v = 50.0 + 8.0 * static_cast<double>(r) +
                                 2.0 * static_cast<double>(p) + 0.125 * static_cast<double>(e);
                ph.eval_accuracy.push_back(v);
                acc[p][e].push_back(v);
            }
            ph.updated_fraction = 0.5 + 0.0625 * static_cast<double>(p);
            ph.aux_memory = 100 + p;
            ph.train_loss = 0.25;
            ph.epochs_run = 1;
            uf[p].push_back(ph.updated_fraction);
            rep.phases.push_back(std::move(ph));
        }
        rep.forgetting.acc_initial = rep.phases.front().eval_accuracy[0];
        rep.forgetting.acc_final = rep.phases.back().eval_accuracy[0];
        rep.forgetting.rate = 3.5 + static_cast<double>(r);
        rates.push_back(rep.forgetting.rate);
        a.result.repeats.push_back(std::move(rep));
    }
    for (std::size_t p = 0; p < phases; ++p) {
        std::vector<MetricStats> per_eval;
        for (std::size_t e = 0; e < evals; ++e) per_eval.push_back(aggregate(acc[p][e]));
        a.result.accuracy.push_back(std::move(per_eval));
        a.result.updated_fraction.push_back(aggregate(uf[p]));
    }
    a.result.forgetting_rate = aggregate(rates);
    return a;
}

std::size_t count_rows(const std::vector<CsvRow>& rows, const std::string& metric,
                       bool numeric_seed) {
    std::size_t n = 0;
    for (const CsvRow& row : rows) {
        const bool is_numeric = row.seed != "mean" && row.seed != "std";
        if (row.metric == metric && is_numeric == numeric_seed) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("config parsing applies defaults and reads every value type") {
    const auto cfg = ExperimentConfig::parse(base_config(), "fallback");
    CHECK(cfg.name() == "demo");
    CHECK(cfg.seed() == 7);
    CHECK(cfg.repeats() == 2);
    CHECK(cfg.output_dir() == "results");
    CHECK(cfg.entries().at("model.layers") == "[8, 10, 4]");
    CHECK(cfg.entries().at("optimizer.kind") == "\"classp\"");

    const auto minimal = ExperimentConfig::parse(
        "model.layers = [4, 2]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n", "fallback");
    CHECK(minimal.name() == "fallback");
    CHECK(minimal.seed() == 42);
    CHECK(minimal.repeats() == 1);

    const auto typed = ExperimentConfig::parse(
        "model.layers = [4, 2]   # trailing comment\n"
        "optimizer.kind = \"classp\"\n"
        "optimizer.alpha = 1e-1\n"
        "optimizer.apply_decay = false\n"
        "\n"
        "   # indented comment only\n"
        "optimizer.threshold = 0.5\n",
        "typed");
    CHECK(typed.entries().at("optimizer.apply_decay") == "false");
    CHECK(typed.entries().count("optimizer.threshold") == 1);
}

TEST_CASE("config errors name the offending key") {
    auto parse = [](const std::string& text) { return ExperimentConfig::parse(text, "x"); };
    const std::string ok = "model.layers = [4, 2]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n";

    CHECK_THROWS_WITH_AS(parse(ok + "optimizre.alpha = 1\n"), "unknown key optimizre.alpha",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse("model.layers = [4, 2]\noptimizer.kind = \"sgd\"\n"
                               "optimizer.alpha = -0.5\n"),
                         "key optimizer.alpha must be > 0", ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "seed = -1\n"), "key seed must be >= 0", ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "repeats = 0\n"), "key repeats must be >= 1", ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "eval.holdout = 1.0\n"), "key eval.holdout must be in [0, 1)",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "optimizer.alpha = 0.2\n"), "duplicate key optimizer.alpha",
                         ConfigError);
    CHECK_THROWS_AS(parse(ok + "just some words\n"), ConfigError);
    CHECK_THROWS_AS(parse("[optimizer]\nkind = \"sgd\"\n"), ConfigError);
    CHECK_THROWS_AS(parse("model.layers = [4, 2]\noptimizer.kind = \"sgd\"\n"
                          "optimizer.alpha = \"fast\"\n"),
                    ConfigError);
    CHECK_THROWS_WITH_AS(parse("optimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"),
                         "missing required key model.layers", ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "optimizer.p = 2\n"),
                         "key optimizer.p is not used by optimizer.kind=sgd", ConfigError);
    CHECK_THROWS_WITH_AS(parse(ok + "task.kind = \"rotated\"\n"),
                         "key task.kind must be split, pair or permuted", ConfigError);
    CHECK_THROWS_AS(parse(ok + "phase.3.epochs = 2\n"), ConfigError); // split task has 2 phases
    CHECK_THROWS_AS(parse(ok + "model.layers = [4]\n"), ConfigError);
}

TEST_CASE("overrides replace values and fall back to bare strings") {
    const auto cfg = ExperimentConfig::parse(
        base_config(), "x",
        {"optimizer.alpha=0.5", "dataset.source=blobs", "optimizer.kind=classp", "repeats=3"});
    CHECK(cfg.repeats() == 3);
    CHECK(cfg.entries().at("optimizer.alpha") == "0.5");
    CHECK(cfg.entries().at("dataset.source") == "\"blobs\""); // bare word read as string
    CHECK_THROWS_AS(ExperimentConfig::parse(base_config(), "x", {"optimizer.alpha"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(base_config(), "x", {"bad key!=1"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(base_config(), "x", {"optimizer.alpha=-1"}),
                    ConfigError);
}

TEST_CASE("canonical text is sorted and the hash tracks content, not spelling") {
    const auto cfg = ExperimentConfig::parse(base_config(), "x");
    CHECK(cfg.canonical() == canonical_config_text(cfg.entries()));
    CHECK(cfg.hash() == fnv1a64(cfg.canonical()));

    // keys sorted
    std::string previous;
    std::istringstream lines(cfg.canonical());
    std::string line;
    while (std::getline(lines, line)) {
        const std::string key = line.substr(0, line.find(" = "));
        CHECK(previous < key);
        previous = key;
    }

    // reordering lines or respelling numbers leaves the hash unchanged
    const auto respelled = ExperimentConfig::parse(
        "optimizer.alpha = 2e-1\nseed = 7\nrepeats = 2\nname = \"demo\"\n"
        "optimizer.threshold = 0.10\noptimizer.p = 1.0\noptimizer.kind = \"classp\"\n"
        "model.layers = [8, 10, 4]\ndataset.source = \"blobs\"\ndataset.classes = 4\n"
        "dataset.features = 8\ndataset.per_class = 20\ndataset.std = 0.05\n"
        "task.kind = \"split\"\nphase.1.epochs = 2\nphase.1.batch_size = 16\n"
        "phase.2.epochs = 2\nphase.2.batch_size = 16\n",
        "x");
    CHECK(respelled.canonical() == cfg.canonical());
    CHECK(respelled.hash() == cfg.hash());

    const auto changed = ExperimentConfig::parse(base_config(), "x", {"optimizer.alpha=0.3"});
    CHECK(changed.hash() != cfg.hash());
}

TEST_CASE("task signature ignores arm-specific settings") {
    const auto cfg = ExperimentConfig::parse(base_config(), "x");
    const auto sgd_arm = ExperimentConfig::parse(
        "name = \"other\"\nout = \"elsewhere\"\nseed = 7\nrepeats = 2\n"
        "model.layers = [8, 10, 4]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.01\n"
        "dataset.source = \"blobs\"\ndataset.classes = 4\ndataset.features = 8\n"
        "dataset.per_class = 20\ndataset.std = 0.05\ntask.kind = \"split\"\n"
        "phase.1.epochs = 2\nphase.1.batch_size = 16\nphase.1.loss_stop = 0.01\n"
        "phase.2.epochs = 2\nphase.2.batch_size = 16\nphase.2.apply_decay = true\n",
        "x");
    CHECK(sgd_arm.task_signature() == cfg.task_signature());
    CHECK(sgd_arm.hash() != cfg.hash());

    const auto other_data = ExperimentConfig::parse(base_config(), "x", {"dataset.per_class=21"});
    CHECK(other_data.task_signature() != cfg.task_signature());
    const auto other_seed = ExperimentConfig::parse(base_config(), "x", {"seed=8"});
    CHECK(other_seed.task_signature() != cfg.task_signature());
    const auto other_epochs = ExperimentConfig::parse(base_config(), "x", {"phase.1.epochs=3"});
    CHECK(other_epochs.task_signature() != cfg.task_signature());
}

TEST_CASE("to_run_config builds the split task with per-phase overrides") {
    const auto cfg = ExperimentConfig::parse(
        base_config(), "x",
        {"phase.1.threshold=0.5", "phase.1.apply_decay=false", "phase.2.threshold=0",
         "phase.2.apply_decay=true", "phase.2.loss_stop=0.05"});
    const RunConfig run = cfg.to_run_config(fs::current_path());

    CHECK(run.seed == 7);
    CHECK(run.repeats == 2);
    CHECK(run.layer_sizes == std::vector<std::size_t>{8, 10, 4});
    CHECK(spec_kind(run.optimizer) == OptimizerKind::classp);

    REQUIRE(run.tasks.phases.size() == 2);
    CHECK(run.tasks.phases[0].epochs == 2);
    CHECK(run.tasks.phases[0].batch_size == 16);
    REQUIRE(run.tasks.phases[0].threshold.has_value());
    CHECK(*run.tasks.phases[0].threshold == 0.5);
    REQUIRE(run.tasks.phases[0].apply_decay.has_value());
    CHECK_FALSE(*run.tasks.phases[0].apply_decay);
    CHECK_FALSE(run.tasks.phases[0].loss_stop.has_value());
    CHECK(*run.tasks.phases[1].threshold == 0.0);
    CHECK(*run.tasks.phases[1].apply_decay);
    CHECK(*run.tasks.phases[1].loss_stop == 0.05);

    REQUIRE(run.tasks.eval_sets.size() == 2);
    CHECK(run.tasks.eval_sets[0]->name == "task1");
    CHECK(run.tasks.eval_sets[1]->name == "task2");
    CHECK(run.tasks.eval_sets[0] == run.tasks.phases[0].dataset); // no holdout: eval on train

    // default first_classes is the lower half of the label space
    for (int label : run.tasks.phases[0].dataset->y) CHECK(label < 2);
    for (int label : run.tasks.phases[1].dataset->y) CHECK(label >= 2);
    CHECK(run.tasks.phases[0].dataset->num_classes == 4);
    CHECK(run.tasks.phases[0].dataset->size() + run.tasks.phases[1].dataset->size() == 80);

    const auto custom = ExperimentConfig::parse(base_config(), "x", {"task.first_classes=[0,3]"});
    const RunConfig run2 = custom.to_run_config(fs::current_path());
    for (int label : run2.tasks.phases[0].dataset->y) CHECK((label == 0 || label == 3));
    for (int label : run2.tasks.phases[1].dataset->y) CHECK((label == 1 || label == 2));
}

TEST_CASE("to_run_config maps each optimizer kind") {
    const std::string tail =
        "model.layers = [8, 10, 4]\ndataset.source = \"blobs\"\ndataset.classes = 4\n"
        "dataset.features = 8\ndataset.per_class = 10\n";
    auto kind_of = [&](const std::string& head) {
        return spec_kind(
            ExperimentConfig::parse(head + tail, "x").to_run_config(fs::current_path()).optimizer);
    };
    CHECK(kind_of("optimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n") == OptimizerKind::sgd);
    CHECK(kind_of("optimizer.kind = \"adagrad\"\noptimizer.alpha = 0.1\n") ==
          OptimizerKind::adagrad);
    CHECK(kind_of("optimizer.kind = \"adam\"\noptimizer.alpha = 0.001\n") == OptimizerKind::adam);
    CHECK(kind_of("optimizer.kind = \"ewc\"\noptimizer.alpha = 0.1\noptimizer.lambda = 50\n") ==
          OptimizerKind::ewc);
}

TEST_CASE("to_run_config builds permuted and paired tasks") {
    const std::string permuted_text =
        "seed = 3\nmodel.layers = [16, 8, 3]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"blobs\"\ndataset.classes = 3\ndataset.features = 16\n"
        "dataset.per_class = 10\ntask.kind = \"permuted\"\ntask.phases = 3\n";
    const RunConfig permuted =
        ExperimentConfig::parse(permuted_text, "x").to_run_config(fs::current_path());
    REQUIRE(permuted.tasks.phases.size() == 3);
    // phase 1 keeps the original feature order; later phases shuffle columns
    const Dataset& p1 = *permuted.tasks.phases[0].dataset;
    const Dataset& p2 = *permuted.tasks.phases[1].dataset;
    CHECK(p1.x.data != p2.x.data);
    CHECK(p1.y == p2.y);
    // per-row multisets of feature values are preserved by a permutation
    std::vector<double> row1(p1.x.data.begin(), p1.x.data.begin() + 16);
    std::vector<double> row2(p2.x.data.begin(), p2.x.data.begin() + 16);
    std::sort(row1.begin(), row1.end());
    std::sort(row2.begin(), row2.end());
    CHECK(row1 == row2);

    // the same permute_seed reproduces the tasks; a different one does not
    const RunConfig again =
        ExperimentConfig::parse(permuted_text, "x").to_run_config(fs::current_path());
    CHECK(again.tasks.phases[1].dataset->x.data == p2.x.data);
    const RunConfig reseeded =
        ExperimentConfig::parse(permuted_text + "task.permute_seed = 99\n", "x")
            .to_run_config(fs::current_path());
    CHECK(reseeded.tasks.phases[1].dataset->x.data != p2.x.data);

    const std::string pair_text =
        "model.layers = [8, 6, 5]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"blobs\"\ndataset.classes = 5\ndataset.features = 8\n"
        "dataset.per_class = 10\ndataset2.source = \"blobs\"\ndataset2.classes = 3\n"
        "dataset2.features = 8\ndataset2.per_class = 10\ntask.kind = \"pair\"\n";
    const RunConfig paired = ExperimentConfig::parse(pair_text, "x").to_run_config(fs::current_path());
    REQUIRE(paired.tasks.phases.size() == 2);
    CHECK(paired.tasks.phases[0].dataset->num_classes == 5); // shared label space is the max
    CHECK(paired.tasks.phases[1].dataset->num_classes == 5);

    const std::string mismatched =
        "model.layers = [8, 6, 5]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"blobs\"\ndataset.classes = 5\ndataset.features = 8\n"
        "dataset.per_class = 10\ndataset2.source = \"blobs\"\ndataset2.classes = 3\n"
        "dataset2.features = 9\ndataset2.per_class = 10\ntask.kind = \"pair\"\n";
    CHECK_THROWS_AS(ExperimentConfig::parse(mismatched, "x").to_run_config(fs::current_path()),
                    ConfigError);
    const std::string missing_second =
        "model.layers = [8, 6, 5]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"blobs\"\ndataset.classes = 5\ndataset.features = 8\n"
        "dataset.per_class = 10\ntask.kind = \"pair\"\n";
    CHECK_THROWS_AS(ExperimentConfig::parse(missing_second, "x"), ConfigError);
}

TEST_CASE("holdout reserves part of each task for evaluation") {
    const auto cfg = ExperimentConfig::parse(base_config(), "x", {"eval.holdout=0.25"});
    const RunConfig run = cfg.to_run_config(fs::current_path());
    REQUIRE(run.tasks.eval_sets.size() == 2);
    CHECK(run.tasks.eval_sets[0] != run.tasks.phases[0].dataset);
    CHECK(run.tasks.eval_sets[0]->name == "task1");
    // 40 examples per split task, 25% held out
    CHECK(run.tasks.phases[0].dataset->size() == 30);
    CHECK(run.tasks.eval_sets[0]->size() == 10);
    CHECK(run.tasks.phases[1].dataset->size() == 30);
    CHECK(run.tasks.eval_sets[1]->size() == 10);
}

TEST_CASE("idx datasets resolve relative to the data root") {
    const fs::path dir = scratch_dir("idx");
    SynthImageOptions opts;
    opts.num_classes = 4;
    opts.per_class = 6;
    opts.side = 8;
    Pcg32 rng(3);
    const Dataset d = make_synth_images(rng, opts);
    write_idx(d, 8, dir / "train-images.idx", dir / "train-labels.idx");

    const std::string text =
        "model.layers = [64, 8, 4]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"idx\"\ndataset.images = \"train-images.idx\"\n"
        "dataset.labels = \"train-labels.idx\"\n";
    const RunConfig run = ExperimentConfig::parse(text, "x").to_run_config(dir);
    CHECK(run.tasks.phases[0].dataset->features() == 64);

    CHECK_THROWS_AS(ExperimentConfig::parse(text, "x").to_run_config(scratch_dir("idx-empty")),
                    DataError);
}

TEST_CASE("format_double survives a parse round trip") {
    const double values[] = {0.0,    1.0,        -1.0,   0.1,     1.0 / 3.0, 1e-300,
                             1e300,  12345.6789, -0.125, 2.5e-10, 99.999,    42.0};
    for (double v : values) {
        const std::string text = format_double(v);
        CHECK(std::stod(text) == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("results_csv layout and determinism") {
    const std::vector<ArmResult> arms = {fake_arm("demo", 2, 2, 2)};
    const std::string csv = results_csv(arms);
    CHECK(csv == results_csv(arms)); // byte-identical on re-serialization

    const auto rows = parse_csv(csv);
    // 2 repeats x 2 phases x 2 evals x 3 metrics, plus 1 forgetting row per repeat
    CHECK(count_rows(rows, "accuracy", true) == 8);
    CHECK(count_rows(rows, "updated_fraction", true) == 8);
    CHECK(count_rows(rows, "aux_memory", true) == 8);
    CHECK(count_rows(rows, "forgetting_rate", true) == 2);
    // aggregates: mean+std per phase x eval for accuracy, per phase for
    // updated_fraction, once for forgetting
    CHECK(count_rows(rows, "accuracy", false) == 8);
    CHECK(count_rows(rows, "updated_fraction", false) == 4);
    CHECK(count_rows(rows, "forgetting_rate", false) == 2);
    CHECK(rows.size() == 40);

    for (const CsvRow& row : rows) {
        CHECK(row.run_id == "demo-0123456789abcdef");
        CHECK(row.arm == "demo");
        CHECK((row.phase == "1" || row.phase == "2"));
        CHECK((row.eval_set == "task1" || row.eval_set == "task2"));
    }

    // spot-check an exact value: repeat 0, phase 1, eval task2
    bool found = false;
    for (const CsvRow& row : rows) {
        if (row.seed == "7" && row.phase == "1" && row.eval_set == "task2" &&
            row.metric == "accuracy") {
            CHECK(row.value == format_double(50.125));
            found = true;
        }
    }
    CHECK(found);
    CHECK(csv.find("wall") == std::string::npos); // timing never enters the CSV
}

TEST_CASE("results_json embeds the config snapshot whose hash matches") {
    const std::vector<ArmResult> arms = {fake_arm("a", 2, 2, 1), fake_arm("b", 2, 2, 1)};
    const std::string text = results_json(arms);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc.at("schema") == "classp-results-v1");
    REQUIRE(doc.at("arms").size() == 2);
    for (const auto& arm : doc.at("arms")) {
        const auto snapshot = arm.at("config").get<std::map<std::string, std::string>>();
        char expect[17];
        std::snprintf(expect, sizeof(expect), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canonical_config_text(snapshot))));
        CHECK(arm.at("config_hash").get<std::string>() == expect);
        CHECK(arm.at("wall_time_sec").get<double>() == 1.5);
        CHECK(arm.at("repeats").size() == 2);
        CHECK(arm.at("aggregate").contains("forgetting_rate"));
    }
}

TEST_CASE("plotdata_csv rebuilds exactly the per-repeat product rows") {
    const std::vector<ArmResult> arms = {fake_arm("a", 10, 2, 2), fake_arm("b", 10, 2, 2)};
    const std::string csv = plotdata_csv(results_json(arms));
    const auto rows = parse_csv(csv);
    CHECK(rows.size() == 240); // 2 arms x 10 repeats x 2 phases x 2 evals x 3 metrics
    for (const CsvRow& row : rows) {
        CHECK(row.seed != "mean");
        CHECK(row.seed != "std");
        CHECK(row.metric != "forgetting_rate");
    }

    // every product row of the full CSV appears verbatim, values included
    const auto full = parse_csv(results_csv(arms));
    std::size_t matched = 0;
    for (const CsvRow& row : full) {
        const bool product = row.metric == "accuracy" || row.metric == "updated_fraction" ||
                             row.metric == "aux_memory";
        if (!product || row.seed == "mean" || row.seed == "std") continue;
        ++matched;
        bool present = false;
        for (const CsvRow& p : rows) {
            if (p.run_id == row.run_id && p.seed == row.seed && p.phase == row.phase &&
                p.eval_set == row.eval_set && p.metric == row.metric && p.value == row.value) {
                present = true;
                break;
            }
        }
        CHECK(present);
    }
    CHECK(matched == 240);
}

TEST_CASE("plotdata_csv of an empty result set is header-only") {
    CHECK(plotdata_csv(results_json({})) == "run_id,arm,seed,phase,eval_set,metric,value\n");
    CHECK(results_csv({}) == "run_id,arm,seed,phase,eval_set,metric,value\n");
}

TEST_CASE("plotdata_csv rejects documents that are not results") {
    CHECK_THROWS_AS(plotdata_csv("this is not json"), FormatError);
    CHECK_THROWS_AS(plotdata_csv("{}"), FormatError);
    CHECK_THROWS_AS(plotdata_csv("[1, 2, 3]"), FormatError);
    CHECK_THROWS_AS(plotdata_csv(R"({"arms": [{"run_id": "x"}]})"), FormatError);
    CHECK_THROWS_AS(
        plotdata_csv(R"({"arms": [{"run_id": "x", "arm": "x", "eval_names": ["e"],
                      "repeats": [{"seed": "not a number", "phases": []}]}]})"),
        FormatError);
}

TEST_CASE("parse_csv is strict about header and field count") {
    CHECK_THROWS_AS(parse_csv("wrong,header\n"), FormatError);
    CHECK_THROWS_AS(parse_csv(""), FormatError);
    const std::string header = "run_id,arm,seed,phase,eval_set,metric,value\n";
    CHECK(parse_csv(header).empty());
    CHECK_THROWS_AS(parse_csv(header + "a,b,c\n"), FormatError);
    CHECK_THROWS_AS(parse_csv(header + "a,b,c,d,e,f,g,h\n"), FormatError);
    const auto rows = parse_csv(header + "a,b,c,d,e,f,g\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].run_id == "a");
    CHECK(rows[0].value == "g");
}

TEST_CASE("cmd_run writes deterministic outputs") {
    const fs::path dir = scratch_dir("run");
    const fs::path config = write_text(dir / "demo.toml", base_config());
    cli::CommonArgs args;
    args.out_dir = (dir / "out").string();

    REQUIRE(cli::cmd_run(config.string(), args) == 0);
    const fs::path csv_path = dir / "out" / "demo.csv";
    const fs::path json_path = dir / "out" / "demo.json";
    REQUIRE(fs::exists(csv_path));
    REQUIRE(fs::exists(json_path));
    const std::string first = read_text(csv_path);

    REQUIRE(cli::cmd_run(config.string(), args) == 0);
    CHECK(read_text(csv_path) == first); // byte-identical across invocations

    const auto rows = parse_csv(first);
    CHECK(count_rows(rows, "accuracy", true) == 2 * 2 * 2);
    CHECK(count_rows(rows, "forgetting_rate", true) == 2);

    const auto doc = nlohmann::json::parse(read_text(json_path));
    CHECK(doc.at("schema") == "classp-results-v1");
    const auto& arm = doc.at("arms").at(0);
    const auto snapshot = arm.at("config").get<std::map<std::string, std::string>>();
    char expect[17];
    std::snprintf(expect, sizeof(expect), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config_text(snapshot))));
    CHECK(arm.at("config_hash").get<std::string>() == expect);
    CHECK(arm.at("run_id").get<std::string>() == std::string("demo-") + expect);

    // flag overrides reshape the run
    cli::CommonArgs flags = args;
    flags.repeats = 1;
    flags.seed = 11;
    REQUIRE(cli::cmd_run(config.string(), flags) == 0);
    const auto flagged = parse_csv(read_text(csv_path));
    CHECK(count_rows(flagged, "accuracy", true) == 1 * 2 * 2);
    bool seed_seen = false;
    for (const CsvRow& row : flagged) seed_seen |= row.seed == "11";
    CHECK(seed_seen);
}

TEST_CASE("cmd_run maps failures to documented exit codes") {
    const fs::path dir = scratch_dir("run-fail");
    cli::CommonArgs args;
    args.out_dir = (dir / "out").string();

    CHECK(cli::cmd_run((dir / "absent.toml").string(), args) == 2);

    const fs::path bad = write_text(dir / "bad.toml", base_config() + "optimizer.alpha = -1\n");
    CHECK(cli::cmd_run(bad.string(), args) == 2); // duplicate key

    const fs::path negative =
        write_text(dir / "neg.toml",
                   "model.layers = [4, 2]\noptimizer.kind = \"sgd\"\noptimizer.alpha = -0.5\n");
    CHECK(cli::cmd_run(negative.string(), args) == 2);

    const fs::path missing_data = write_text(
        dir / "nodata.toml",
        "model.layers = [64, 4, 2]\noptimizer.kind = \"sgd\"\noptimizer.alpha = 0.1\n"
        "dataset.source = \"idx\"\ndataset.images = \"absent-images.idx\"\n"
        "dataset.labels = \"absent-labels.idx\"\n");
    setenv("CLASSP_DATA_DIR", dir.c_str(), 1);
    CHECK(cli::cmd_run(missing_data.string(), args) == 3);
    unsetenv("CLASSP_DATA_DIR");

    const fs::path blowup = write_text(
        dir / "blowup.toml",
        "repeats = 1\nmodel.layers = [8, 6, 4]\noptimizer.kind = \"sgd\"\n"
        "optimizer.alpha = 1e300\ndataset.source = \"blobs\"\ndataset.classes = 4\n"
        "dataset.features = 8\ndataset.per_class = 10\n");
    CHECK(cli::cmd_run(blowup.string(), args) == 4);
}

TEST_CASE("cmd_compare joins arms that share a task and rejects ones that do not") {
    const fs::path dir = scratch_dir("compare");
    const fs::path a = write_text(dir / "classp.toml", base_config());
    const std::string sgd_text =
        "name = \"sgd\"\nseed = 7\nrepeats = 2\nmodel.layers = [8, 10, 4]\n"
        "optimizer.kind = \"sgd\"\noptimizer.alpha = 0.2\n"
        "dataset.source = \"blobs\"\ndataset.classes = 4\ndataset.features = 8\n"
        "dataset.per_class = 20\ndataset.std = 0.05\ntask.kind = \"split\"\n"
        "phase.1.epochs = 2\nphase.1.batch_size = 16\n"
        "phase.2.epochs = 2\nphase.2.batch_size = 16\n";
    const fs::path b = write_text(dir / "sgd.toml", sgd_text);
    cli::CommonArgs args;
    args.out_dir = (dir / "out").string();

    REQUIRE(cli::cmd_compare({a.string(), b.string()}, args) == 0);
    const auto rows = parse_csv(read_text(dir / "out" / "compare.csv"));
    bool saw_demo = false, saw_sgd = false;
    for (const CsvRow& row : rows) {
        saw_demo |= row.arm == "demo";
        saw_sgd |= row.arm == "sgd";
    }
    CHECK(saw_demo);
    CHECK(saw_sgd);
    CHECK(fs::exists(dir / "out" / "compare.json"));

    // identical settings produce identical metric rows under different names
    std::string renamed = base_config();
    renamed.replace(renamed.find("name = \"demo\""), 13, "name = \"twin\"");
    const fs::path a2 = write_text(dir / "classp2.toml", renamed);
    cli::CommonArgs args2;
    args2.out_dir = (dir / "out2").string();
    REQUIRE(cli::cmd_compare({a.string(), a2.string()}, args2) == 0);
    const auto twin_rows = parse_csv(read_text(dir / "out2" / "compare.csv"));
    std::map<std::string, std::vector<std::string>> by_arm;
    for (const CsvRow& row : twin_rows) {
        by_arm[row.arm].push_back(row.seed + "|" + row.phase + "|" + row.eval_set + "|" +
                                  row.metric + "|" + row.value);
    }
    REQUIRE(by_arm.size() == 2);
    CHECK(by_arm.begin()->second == std::next(by_arm.begin())->second);

    // a different task is not comparable
    const fs::path c = write_text(dir / "othertask.toml", sgd_text + "dataset.per_class = 21\n");
    CHECK(cli::cmd_compare({a.string(), c.string()}, args) == 2);
    CHECK(cli::cmd_compare({a.string()}, args) == 2); // needs at least two arms
}

TEST_CASE("cmd_emit_plotdata reads a results file and writes the product rows") {
    const fs::path dir = scratch_dir("emit");
    const fs::path config = write_text(dir / "demo.toml", base_config());
    cli::CommonArgs args;
    args.out_dir = (dir / "out").string();
    REQUIRE(cli::cmd_run(config.string(), args) == 0);

    const std::string plots_dir = (dir / "plots").string();
    REQUIRE(cli::cmd_emit_plotdata((dir / "out" / "demo.json").string(), plots_dir) == 0);
    const auto rows = parse_csv(read_text(dir / "plots" / "plotdata.csv"));
    CHECK(rows.size() == 2 * 2 * 2 * 3); // repeats x phases x evals x metrics

    CHECK(cli::cmd_emit_plotdata((dir / "nope.json").string(), plots_dir) == 2);
    const fs::path garbage = write_text(dir / "garbage.json", "{\"schema\": 12}");
    CHECK(cli::cmd_emit_plotdata(garbage.string(), plots_dir) == 2);
}

#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "classp/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"continual-learning experiments with selective-plasticity optimizers"};
    app.require_subcommand(1);

    std::string run_config;
    std::vector<std::string> compare_configs;
    std::string results_path;
    std::vector<std::string> sets;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::uint64_t repeats = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--set", sets, "override a config key (key=value, repeatable)");
        cmd->add_option("--out", out_dir, "output directory (default: the config's `out` key)");
        cmd->add_option("--seed", seed, "override the base seed");
        cmd->add_option("--repeats", repeats, "override the repeat count");
    };

    CLI::App* run = app.add_subcommand("run", "train one experiment arm and write CSV + JSON");
    run->add_option("--config", run_config, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(run);

    CLI::App* compare = app.add_subcommand(
        "compare", "train several arms with paired seeds and print a comparison");
    compare->add_option("--config", compare_configs, "config file per arm (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(compare);

    CLI::App* emit = app.add_subcommand(
        "emit-plotdata", "rewrite a results JSON file as long-format per-repeat CSV");
    emit->add_option("results", results_path, "results JSON file written by run or compare")
        ->required();
    emit->add_option("--out", out_dir, "directory for plotdata.csv (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    CLI::App* cmd = app.get_subcommands().front();
    if (cmd == emit) {
        std::optional<std::string> out;
        if (emit->count("--out")) out = out_dir;
        return classp::cli::cmd_emit_plotdata(results_path, out);
    }

    classp::cli::CommonArgs common;
    common.overrides = sets;
    if (cmd->count("--out")) common.out_dir = out_dir;
    if (cmd->count("--seed")) common.seed = seed;
    if (cmd->count("--repeats")) common.repeats = repeats;
    if (cmd == run) return classp::cli::cmd_run(run_config, common);
    return classp::cli::cmd_compare(compare_configs, common);
}

#include "classp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "classp/config.hpp"
#include "classp/error.hpp"
#include "classp/results.hpp"

namespace classp::cli {

namespace {

std::vector<std::string> merged_overrides(const CommonArgs& args) {
    std::vector<std::string> overrides = args.overrides;
    if (args.seed) overrides.push_back("seed=" + std::to_string(*args.seed));
    if (args.repeats) overrides.push_back("repeats=" + std::to_string(*args.repeats));
    return overrides;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ArmResult run_arm(const ExperimentConfig& cfg) {
    const RunConfig run = cfg.to_run_config(data_root());
    ArmResult arm;
    arm.arm = cfg.name();
    arm.config_hash = cfg.hash();
    arm.run_id = cfg.name() + "-" + hash_hex(arm.config_hash);
    arm.config = cfg.entries();
    arm.base_seed = run.seed;
    for (const auto& eval_set : run.tasks.eval_sets) arm.eval_names.push_back(eval_set->name);

    const auto start = std::chrono::steady_clock::now();
    arm.result = run_sequence(run);
    arm.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return arm;
}

void write_outputs(const std::filesystem::path& dir, const std::string& base,
                   const std::vector<ArmResult>& arms) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path csv_path = dir / (base + ".csv");
    const std::filesystem::path json_path = dir / (base + ".json");
    std::ofstream csv(csv_path, std::ios::binary);
    csv << results_csv(arms);
    std::ofstream js(json_path, std::ios::binary);
    js << results_json(arms);
    if (!csv || !js) throw DataError("cannot write results under " + dir.string());
    std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << "\n";
}

// Shared error-to-exit-code mapping for commands that train.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

std::filesystem::path data_root() {
    if (const char* env = std::getenv("CLASSP_DATA_DIR"); env && *env) {
        return std::filesystem::path(env);
    }
    return std::filesystem::current_path();
}

int cmd_run(const std::string& config_path, const CommonArgs& args) {
    return guarded([&] {
        const ExperimentConfig cfg = ExperimentConfig::load(config_path, merged_overrides(args));
        const ArmResult arm = run_arm(cfg);
        const std::filesystem::path out = args.out_dir ? *args.out_dir : cfg.output_dir();
        std::cout << comparison_table({arm});
        write_outputs(out, cfg.name(), {arm});
        return 0;
    });
}

int cmd_compare(const std::vector<std::string>& config_paths, const CommonArgs& args) {
    return guarded([&] {
        if (config_paths.size() < 2) {
            throw ConfigError("compare needs at least two config files");
        }
        std::vector<ExperimentConfig> configs;
        for (const std::string& path : config_paths) {
            configs.push_back(ExperimentConfig::load(path, merged_overrides(args)));
        }
        for (std::size_t i = 1; i < configs.size(); ++i) {
            if (configs[i].task_signature() != configs.front().task_signature()) {
                throw ConfigError("config " + config_paths[i] +
                                  " runs a different task sequence than " + config_paths.front() +
                                  "; arms must share model, seeds, datasets and phases");
            }
        }
        std::vector<ArmResult> arms;
        arms.reserve(configs.size());
        for (const ExperimentConfig& cfg : configs) arms.push_back(run_arm(cfg));
        std::cout << comparison_table(arms);
        const std::filesystem::path out =
            args.out_dir ? *args.out_dir : configs.front().output_dir();
        write_outputs(out, "compare", arms);
        return 0;
    });
}

int cmd_emit_plotdata(const std::string& results_path,
                      const std::optional<std::string>& out_dir) {
    try {
        std::ifstream in(results_path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot open results file: " << results_path << "\n";
            return 2;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const std::string csv = plotdata_csv(text);
        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            const std::filesystem::path path = std::filesystem::path(*out_dir) / "plotdata.csv";
            std::ofstream out(path, std::ios::binary);
            out << csv;
            if (!out) {
                std::cerr << "cannot write " << path.string() << "\n";
                return 2;
            }
            std::cout << "wrote " << path.string() << "\n";
        } else {
            std::cout << csv;
        }
        return 0;
    } catch (const FormatError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace classp::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace classp::cli {

/// Flags shared by the run and compare commands. --seed / --repeats are
/// sugar applied after --set overrides.
struct CommonArgs {
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> repeats;
};

// Dataset-path root: $CLASSP_DATA_DIR when set, else the working directory.
std::filesystem::path data_root();

// Exit codes: 0 success, 2 invalid config or mismatched comparison,
// 3 missing or unreadable dataset files, 4 numeric failure.
int cmd_run(const std::string& config_path, const CommonArgs& args);
int cmd_compare(const std::vector<std::string>& config_paths, const CommonArgs& args);
int cmd_emit_plotdata(const std::string& results_path,
                      const std::optional<std::string>& out_dir);

} // namespace classp::cli

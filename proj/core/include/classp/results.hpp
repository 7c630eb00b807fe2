#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "classp/harness.hpp"

namespace classp {

/// Everything recorded about one experiment arm: identity, the config
/// snapshot it ran from, and the per-repeat plus aggregate metrics.
struct ArmResult {
    std::string arm;                           // config name
    std::string run_id;                        // "<arm>-<config hash hex>"
    std::uint64_t config_hash = 0;
    std::map<std::string, std::string> config; // canonical key -> value text
    std::vector<std::string> eval_names;
    std::uint64_t base_seed = 42;
    RunResult result;
    double wall_time_sec = 0.0; // metadata only, never part of the CSV body
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Long-format CSV with columns run_id,arm,seed,phase,eval_set,metric,value.
// Per repeat: accuracy / updated_fraction / aux_memory per phase and eval
// set, plus one forgetting_rate row. Aggregates use seed = mean / std.
// Deterministic: equal results serialize to equal bytes.
std::string results_csv(const std::vector<ArmResult>& arms);

// Full nested record (config snapshot + hash embedded, wall time kept out
// of the deterministic CSV and stored here instead). 2-space indent.
std::string results_json(const std::vector<ArmResult>& arms);

// Rebuilds the per-repeat metric rows (accuracy, updated_fraction,
// aux_memory) from a results JSON document. Throws FormatError when the
// document does not look like results_json output.
std::string plotdata_csv(const std::string& results_json_text);

struct CsvRow {
    std::string run_id, arm, seed, phase, eval_set, metric, value;
};

// Strict reader for the CSV layout above; throws FormatError on any
// deviation (wrong header, wrong field count).
std::vector<CsvRow> parse_csv(const std::string& text);

// Side-by-side mean +/- std table over all arms followed by pairwise
// win counts on final-phase first-eval-set accuracy per paired seed.
std::string comparison_table(const std::vector<ArmResult>& arms);

} // namespace classp

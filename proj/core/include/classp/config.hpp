#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "classp/harness.hpp"

namespace classp {

/// Parsed experiment configuration.
///
/// The file format is TOML restricted to flat dotted keys: one
/// `dotted.key = value` per line, `#` comments, values being strings,
/// numbers, booleans or flat arrays. Table headers and nesting are
/// rejected. Every key is validated against the schema before any
/// training starts; unknown keys are errors.
class ExperimentConfig {
public:
    // Loads a config file and applies `key=value` overrides on top.
    static ExperimentConfig load(const std::filesystem::path& path,
                                 const std::vector<std::string>& overrides = {});

    // Parses config text directly (used by tests and --set handling).
    static ExperimentConfig parse(const std::string& text, const std::string& default_name,
                                  const std::vector<std::string>& overrides = {});

    const std::string& name() const { return name_; }
    std::uint64_t seed() const;
    std::size_t repeats() const;
    std::string output_dir() const;

    // Canonical `key = value` serialization (sorted keys) and its FNV-1a
    // hash; the hash identifies the experiment in result files.
    std::string canonical() const;
    std::uint64_t hash() const;

    // Signature of the parts every arm of a comparison must share: model,
    // seeds, datasets, phase structure. Optimizer settings and per-phase
    // threshold/decay/loss-stop overrides are arm-specific and excluded.
    std::string task_signature() const;

    // Builds the runnable config; resolves relative dataset paths against
    // data_root (the CLASSP_DATA_DIR mechanism). Throws DataError when a
    // referenced file is missing.
    RunConfig to_run_config(const std::filesystem::path& data_root) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    void validate() const;

    std::string name_;
    std::map<std::string, std::string> values_; // canonical string form per key
};

std::uint64_t fnv1a64(const std::string& text);

// Sorted "key = value" lines; hashing this text yields the config hash.
std::string canonical_config_text(const std::map<std::string, std::string>& values);

} // namespace classp

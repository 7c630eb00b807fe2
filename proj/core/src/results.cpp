#include "classp/results.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "classp/config.hpp"
#include "classp/error.hpp"

namespace classp {

namespace {

using nlohmann::json;

constexpr const char* kHeader = "run_id,arm,seed,phase,eval_set,metric,value";

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void append_row(std::string& out, const std::string& run_id, const std::string& arm,
                const std::string& seed, std::size_t phase, const std::string& eval_set,
                const std::string& metric, const std::string& value) {
    out += run_id;
    out += ',';
    out += arm;
    out += ',';
    out += seed;
    out += ',';
    out += std::to_string(phase);
    out += ',';
    out += eval_set;
    out += ',';
    out += metric;
    out += ',';
    out += value;
    out += '\n';
}

// The three per-phase metrics shared by results_csv and plotdata_csv.
void append_product_rows(std::string& out, const std::string& run_id, const std::string& arm,
                         const std::string& seed, std::size_t phase,
                         const std::vector<std::string>& eval_names,
                         const std::vector<double>& accuracy, double updated_fraction,
                         double aux_memory) {
    for (std::size_t e = 0; e < eval_names.size(); ++e) {
        append_row(out, run_id, arm, seed, phase, eval_names[e], "accuracy",
                   format_double(accuracy.at(e)));
        append_row(out, run_id, arm, seed, phase, eval_names[e], "updated_fraction",
                   format_double(updated_fraction));
        append_row(out, run_id, arm, seed, phase, eval_names[e], "aux_memory",
                   format_double(aux_memory));
    }
}

json arm_to_json(const ArmResult& a) {
    json arm;
    arm["arm"] = a.arm;
    arm["run_id"] = a.run_id;
    arm["config_hash"] = hash_hex(a.config_hash);
    arm["config"] = a.config;
    arm["base_seed"] = a.base_seed;
    arm["eval_names"] = a.eval_names;
    arm["wall_time_sec"] = a.wall_time_sec;

    json repeats = json::array();
    for (const RepeatReport& rep : a.result.repeats) {
        json jr;
        jr["seed"] = rep.seed;
        json phases = json::array();
        for (const PhaseReport& ph : rep.phases) {
            json jp;
            jp["phase"] = ph.phase;
            jp["accuracy"] = ph.eval_accuracy;
            jp["updated_fraction"] = ph.updated_fraction;
            jp["aux_memory"] = ph.aux_memory;
            jp["train_loss"] = ph.train_loss;
            jp["epochs_run"] = ph.epochs_run;
            phases.push_back(std::move(jp));
        }
        jr["phases"] = std::move(phases);
        jr["forgetting"] = {{"initial", rep.forgetting.acc_initial},
                            {"final", rep.forgetting.acc_final},
                            {"rate", rep.forgetting.rate}};
        repeats.push_back(std::move(jr));
    }
    arm["repeats"] = std::move(repeats);

    json agg;
    json acc_mean = json::array(), acc_std = json::array();
    for (const auto& per_eval : a.result.accuracy) {
        json row_mean = json::array(), row_std = json::array();
        for (const MetricStats& s : per_eval) {
            row_mean.push_back(s.mean);
            row_std.push_back(s.stddev);
        }
        acc_mean.push_back(std::move(row_mean));
        acc_std.push_back(std::move(row_std));
    }
    agg["accuracy"] = {{"mean", std::move(acc_mean)}, {"std", std::move(acc_std)}};
    json uf_mean = json::array(), uf_std = json::array();
    for (const MetricStats& s : a.result.updated_fraction) {
        uf_mean.push_back(s.mean);
        uf_std.push_back(s.stddev);
    }
    agg["updated_fraction"] = {{"mean", std::move(uf_mean)}, {"std", std::move(uf_std)}};
    agg["forgetting_rate"] = {{"mean", a.result.forgetting_rate.mean},
                              {"std", a.result.forgetting_rate.stddev}};
    arm["aggregate"] = std::move(agg);
    return arm;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericError("cannot format value");
    return std::string(buf, ptr);
}

std::string results_csv(const std::vector<ArmResult>& arms) {
    std::string out = kHeader;
    out += '\n';
    for (const ArmResult& a : arms) {
        const std::size_t num_phases = a.result.updated_fraction.size();
        for (const RepeatReport& rep : a.result.repeats) {
            const std::string seed = std::to_string(rep.seed);
            for (const PhaseReport& ph : rep.phases) {
                append_product_rows(out, a.run_id, a.arm, seed, ph.phase, a.eval_names,
                                    ph.eval_accuracy, ph.updated_fraction,
                                    static_cast<double>(ph.aux_memory));
            }
            append_row(out, a.run_id, a.arm, seed, rep.phases.back().phase, a.eval_names.front(),
                       "forgetting_rate", format_double(rep.forgetting.rate));
        }
        for (std::size_t k = 0; k < num_phases; ++k) {
            for (std::size_t e = 0; e < a.eval_names.size(); ++e) {
                append_row(out, a.run_id, a.arm, "mean", k + 1, a.eval_names[e], "accuracy",
                           format_double(a.result.accuracy.at(k).at(e).mean));
                append_row(out, a.run_id, a.arm, "std", k + 1, a.eval_names[e], "accuracy",
                           format_double(a.result.accuracy.at(k).at(e).stddev));
            }
            append_row(out, a.run_id, a.arm, "mean", k + 1, a.eval_names.front(),
                       "updated_fraction", format_double(a.result.updated_fraction[k].mean));
            append_row(out, a.run_id, a.arm, "std", k + 1, a.eval_names.front(),
                       "updated_fraction", format_double(a.result.updated_fraction[k].stddev));
        }
        append_row(out, a.run_id, a.arm, "mean", num_phases, a.eval_names.front(),
                   "forgetting_rate", format_double(a.result.forgetting_rate.mean));
        append_row(out, a.run_id, a.arm, "std", num_phases, a.eval_names.front(),
                   "forgetting_rate", format_double(a.result.forgetting_rate.stddev));
    }
    return out;
}

std::string results_json(const std::vector<ArmResult>& arms) {
    json doc;
    doc["schema"] = "classp-results-v1";
    json arr = json::array();
    for (const ArmResult& a : arms) arr.push_back(arm_to_json(a));
    doc["arms"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::string plotdata_csv(const std::string& results_json_text) {
    json doc;
    try {
        doc = json::parse(results_json_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed results: ") + e.what());
    }
    std::string out = kHeader;
    out += '\n';
    try {
        if (!doc.is_object() || !doc.contains("arms") || !doc["arms"].is_array()) {
            throw FormatError("malformed results: missing arms array");
        }
        for (const json& arm : doc["arms"]) {
            const auto run_id = arm.at("run_id").get<std::string>();
            const auto arm_name = arm.at("arm").get<std::string>();
            const auto eval_names = arm.at("eval_names").get<std::vector<std::string>>();
            for (const json& rep : arm.at("repeats")) {
                const std::string seed = std::to_string(rep.at("seed").get<std::uint64_t>());
                for (const json& ph : rep.at("phases")) {
                    append_product_rows(out, run_id, arm_name, seed,
                                        ph.at("phase").get<std::size_t>(), eval_names,
                                        ph.at("accuracy").get<std::vector<double>>(),
                                        ph.at("updated_fraction").get<double>(),
                                        ph.at("aux_memory").get<double>());
                }
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed results: ") + e.what());
    }
    return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw FormatError("unexpected CSV header");
    }
    std::vector<CsvRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 7) {
            throw FormatError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                              std::to_string(fields.size()));
        }
        rows.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5],
                        fields[6]});
    }
    return rows;
}

std::string comparison_table(const std::vector<ArmResult>& arms) {
    std::ostringstream out;
    if (arms.empty()) return "";
    const auto& eval_names = arms.front().eval_names;
    const std::size_t last = arms.front().result.accuracy.size() - 1;

    auto cell = [](double mean, double std) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.2f +/- %.2f", mean, std);
        return std::string(buf);
    };

    out << "final accuracy per evaluation set (mean +/- std over repeats)\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s", "arm");
    out << line;
    for (const std::string& name : eval_names) {
        std::snprintf(line, sizeof(line), "%-20s", name.c_str());
        out << line;
    }
    out << "forgetting\n";
    for (const ArmResult& a : arms) {
        std::snprintf(line, sizeof(line), "%-24s", a.arm.c_str());
        out << line;
        for (std::size_t e = 0; e < eval_names.size(); ++e) {
            const MetricStats& s = a.result.accuracy.at(last).at(e);
            std::snprintf(line, sizeof(line), "%-20s", cell(s.mean, s.stddev).c_str());
            out << line;
        }
        out << cell(a.result.forgetting_rate.mean, a.result.forgetting_rate.stddev) << "\n";
    }

    out << "\npairwise wins on final " << eval_names.front()
        << " accuracy (row beats column, per paired seed)\n";
    std::snprintf(line, sizeof(line), "%-24s", "");
    out << line;
    for (const ArmResult& a : arms) {
        std::snprintf(line, sizeof(line), "%-16s", a.arm.c_str());
        out << line;
    }
    out << "\n";
    for (const ArmResult& a : arms) {
        std::snprintf(line, sizeof(line), "%-24s", a.arm.c_str());
        out << line;
        for (const ArmResult& b : arms) {
            if (&a == &b) {
                std::snprintf(line, sizeof(line), "%-16s", "-");
            } else {
                std::size_t wins = 0;
                const std::size_t n = std::min(a.result.repeats.size(), b.result.repeats.size());
                for (std::size_t r = 0; r < n; ++r) {
                    const double av = a.result.repeats[r].phases.back().eval_accuracy.front();
                    const double bv = b.result.repeats[r].phases.back().eval_accuracy.front();
                    if (av > bv) ++wins;
                }
                const std::string c = std::to_string(wins) + "/" + std::to_string(n);
                std::snprintf(line, sizeof(line), "%-16s", c.c_str());
            }
            out << line;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace classp

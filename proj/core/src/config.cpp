#include "classp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "classp/error.hpp"

namespace classp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    bool prev_dot = false;
    for (char c : key) {
        if (!is_key_char(c)) return false;
        if (c == '.') {
            if (prev_dot) return false;
            prev_dot = true;
        } else {
            prev_dot = false;
        }
    }
    return true;
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool parse_number(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

// Canonicalizes one scalar or array token; throws ConfigError when malformed.
std::string canonical_value(const std::string& raw, const std::string& key) {
    const std::string token = trim(raw);
    if (token.empty()) throw ConfigError("empty value for key " + key);

    if (token.front() == '"') {
        if (token.size() < 2 || token.back() != '"') {
            throw ConfigError("unterminated string for key " + key);
        }
        return token;
    }
    if (token == "true" || token == "false") return token;
    if (token.front() == '[') {
        if (token.back() != ']') throw ConfigError("unterminated array for key " + key);
        const std::string inner = trim(token.substr(1, token.size() - 2));
        std::string out = "[";
        if (!inner.empty()) {
            std::size_t start = 0;
            bool in_string = false;
            std::vector<std::string> parts;
            for (std::size_t i = 0; i <= inner.size(); ++i) {
                if (i < inner.size() && inner[i] == '"') in_string = !in_string;
                if (i == inner.size() || (inner[i] == ',' && !in_string)) {
                    parts.push_back(inner.substr(start, i - start));
                    start = i + 1;
                }
            }
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const std::string element = trim(parts[i]);
                if (element.empty() || element.front() == '[') {
                    throw ConfigError("malformed array for key " + key);
                }
                if (i) out += ", ";
                out += canonical_value(element, key);
            }
        }
        out += "]";
        return out;
    }
    double value = 0.0;
    if (!parse_number(token, value)) {
        throw ConfigError("cannot parse value '" + token + "' for key " + key);
    }
    // shortest round-trip form, so respellings like 2e-1 and 0.20 hash alike
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw ConfigError("cannot canonicalize value for key " + key);
    return std::string(buf, ptr);
}

// ---- typed access over the canonical string map ----

struct Reader {
    const std::map<std::string, std::string>& values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string raw(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) throw ConfigError("missing required key " + key);
        return it->second;
    }

    std::string get_string(const std::string& key) const {
        const std::string v = raw(key);
        if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
            throw ConfigError("key " + key + " must be a string");
        }
        return v.substr(1, v.size() - 2);
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const {
        double out = 0.0;
        if (!parse_number(raw(key), out)) throw ConfigError("key " + key + " must be a number");
        return out;
    }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long long get_int(const std::string& key) const {
        const double v = get_double(key);
        if (std::floor(v) != v) throw ConfigError("key " + key + " must be an integer");
        return static_cast<long long>(v);
    }
    long long get_int(const std::string& key, long long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    bool get_bool(const std::string& key) const {
        const std::string v = raw(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw ConfigError("key " + key + " must be true or false");
    }
    bool get_bool(const std::string& key, bool fallback) const {
        return has(key) ? get_bool(key) : fallback;
    }

    std::vector<long long> get_int_list(const std::string& key) const {
        const std::string v = raw(key);
        if (v.empty() || v.front() != '[' || v.back() != ']') {
            throw ConfigError("key " + key + " must be an array");
        }
        std::vector<long long> out;
        const std::string inner = v.substr(1, v.size() - 2);
        std::stringstream ss(inner);
        std::string part;
        while (std::getline(ss, part, ',')) {
            part = trim(part);
            if (part.empty()) continue;
            double num = 0.0;
            if (!parse_number(part, num) || std::floor(num) != num) {
                throw ConfigError("key " + key + " must be an array of integers");
            }
            out.push_back(static_cast<long long>(num));
        }
        return out;
    }
};

// ---- schema ----

const std::set<std::string>& fixed_keys() {
    static const std::set<std::string> keys = {
        "name", "seed", "repeats", "out", "parallel",
        "model.layers",
        "optimizer.kind", "optimizer.alpha", "optimizer.threshold", "optimizer.p",
        "optimizer.apply_decay", "optimizer.epsilon", "optimizer.exclude_current",
        "optimizer.beta1", "optimizer.beta2", "optimizer.lambda", "optimizer.fisher_samples",
        "task.kind", "task.first_classes", "task.phases", "task.permute_seed",
        "eval.holdout",
    };
    return keys;
}

const std::set<std::string>& dataset_fields() {
    static const std::set<std::string> keys = {
        "source", "images", "labels", "name", "classes", "per_class",
        "features", "std", "noise", "side", "max_shift", "seed",
    };
    return keys;
}

const std::set<std::string>& phase_fields() {
    static const std::set<std::string> keys = {
        "epochs", "batch_size", "threshold", "apply_decay", "loss_stop",
    };
    return keys;
}

bool parse_phase_key(const std::string& key, std::size_t& index, std::string& field) {
    if (key.rfind("phase.", 0) != 0) return false;
    const std::string rest = key.substr(6);
    const std::size_t dot = rest.find('.');
    if (dot == std::string::npos) return false;
    const std::string num = rest.substr(0, dot);
    field = rest.substr(dot + 1);
    if (num.empty() || !std::all_of(num.begin(), num.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
        })) {
        return false;
    }
    index = static_cast<std::size_t>(std::stoull(num));
    return index >= 1;
}

void check_known_key(const std::string& key) {
    if (fixed_keys().count(key)) return;
    if (key.rfind("dataset.", 0) == 0 && dataset_fields().count(key.substr(8))) return;
    if (key.rfind("dataset2.", 0) == 0 && dataset_fields().count(key.substr(9))) return;
    std::size_t index = 0;
    std::string field;
    if (parse_phase_key(key, index, field) && phase_fields().count(field)) return;
    throw ConfigError("unknown key " + key);
}

const std::set<std::string>& allowed_optimizer_keys(const std::string& kind) {
    static const std::set<std::string> classp = {"optimizer.kind", "optimizer.alpha",
                                                 "optimizer.threshold", "optimizer.p",
                                                 "optimizer.apply_decay", "optimizer.epsilon",
                                                 "optimizer.exclude_current"};
    static const std::set<std::string> sgd = {"optimizer.kind", "optimizer.alpha"};
    static const std::set<std::string> adagrad = {"optimizer.kind", "optimizer.alpha",
                                                  "optimizer.epsilon"};
    static const std::set<std::string> adam = {"optimizer.kind", "optimizer.alpha",
                                               "optimizer.beta1", "optimizer.beta2",
                                               "optimizer.epsilon"};
    static const std::set<std::string> ewc = {"optimizer.kind", "optimizer.alpha",
                                              "optimizer.lambda", "optimizer.fisher_samples"};
    if (kind == "classp") return classp;
    if (kind == "sgd") return sgd;
    if (kind == "adagrad") return adagrad;
    if (kind == "adam") return adam;
    if (kind == "ewc") return ewc;
    throw ConfigError("optimizer.kind must be one of classp, sgd, adagrad, adam, ewc");
}

Dataset build_source_dataset(const Reader& r, const std::string& prefix,
                             std::uint64_t default_seed,
                             const std::filesystem::path& data_root) {
    const std::string source = r.get_string(prefix + ".source", "synth");
    const auto gen_seed =
        static_cast<std::uint64_t>(r.get_int(prefix + ".seed",
                                             static_cast<long long>(default_seed)));
    Dataset d;
    if (source == "idx") {
        auto resolve = [&](const std::string& key) {
            const std::filesystem::path p = r.get_string(key);
            return p.is_absolute() ? p : data_root / p;
        };
        d = load_idx(resolve(prefix + ".images"), resolve(prefix + ".labels"));
    } else if (source == "synth") {
        SynthImageOptions opts;
        opts.num_classes = static_cast<int>(r.get_int(prefix + ".classes", 10));
        opts.per_class = static_cast<std::size_t>(r.get_int(prefix + ".per_class", 200));
        opts.side = static_cast<std::size_t>(r.get_int(prefix + ".side", 28));
        opts.noise = r.get_double(prefix + ".noise", 0.15);
        opts.max_shift = static_cast<int>(r.get_int(prefix + ".max_shift", 2));
        Pcg32 rng(gen_seed);
        d = make_synth_images(rng, opts);
    } else if (source == "blobs") {
        const auto classes = static_cast<std::size_t>(r.get_int(prefix + ".classes", 3));
        const auto features = static_cast<std::size_t>(r.get_int(prefix + ".features", 16));
        const auto per_class = static_cast<std::size_t>(r.get_int(prefix + ".per_class", 100));
        const double stddev = r.get_double(prefix + ".std", 0.1);
        Pcg32 rng(gen_seed);
        std::vector<std::vector<double>> centers(classes, std::vector<double>(features));
        for (auto& center : centers) {
            for (double& v : center) v = rng.next_unit();
        }
        d = make_blobs(rng, per_class, centers, stddev);
    } else {
        throw ConfigError("key " + prefix + ".source must be idx, synth or blobs");
    }
    if (r.has(prefix + ".name")) d.name = r.get_string(prefix + ".name");
    return d;
}

} // namespace

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& default_name,
                                         const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": table headers are not supported, use flat dotted keys");
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" + key + "'");
        }
        if (cfg.values_.count(key)) {
            throw ConfigError("duplicate key " + key);
        }
        cfg.values_[key] = canonical_value(line.substr(eq + 1), key);
    }

    for (const std::string& override_kv : overrides) {
        const std::size_t eq = override_kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + override_kv + "' must look like key=value");
        }
        const std::string key = trim(override_kv.substr(0, eq));
        if (!valid_key(key)) throw ConfigError("override has invalid key '" + key + "'");
        const std::string raw_value = trim(override_kv.substr(eq + 1));
        std::string canon;
        try {
            canon = canonical_value(raw_value, key);
        } catch (const ConfigError&) {
            // bare words in overrides are taken as strings
            canon = "\"" + raw_value + "\"";
        }
        cfg.values_[key] = canon;
    }

    Reader r{cfg.values_};
    cfg.name_ = r.get_string("name", default_name);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.stem().string(), overrides);
}

void ExperimentConfig::validate() const {
    for (const auto& [key, value] : values_) {
        (void)value;
        check_known_key(key);
    }
    Reader r{values_};

    if (r.get_int("seed", 42) < 0) throw ConfigError("key seed must be >= 0");
    if (r.get_int("repeats", 1) < 1) throw ConfigError("key repeats must be >= 1");

    const auto layers = r.get_int_list("model.layers");
    if (layers.size() < 2) throw ConfigError("key model.layers needs at least [input, output]");
    for (long long l : layers) {
        if (l < 1) throw ConfigError("key model.layers entries must be >= 1");
    }

    const std::string kind = r.get_string("optimizer.kind");
    const auto& allowed = allowed_optimizer_keys(kind);
    for (const auto& [key, value] : values_) {
        (void)value;
        if (key.rfind("optimizer.", 0) == 0 && !allowed.count(key)) {
            throw ConfigError("key " + key + " is not used by optimizer.kind=" + kind);
        }
    }
    if (!(r.get_double("optimizer.alpha") > 0.0)) {
        throw ConfigError("key optimizer.alpha must be > 0");
    }
    if (kind == "classp") {
        if (r.get_double("optimizer.threshold", 0.0) < 0.0) {
            throw ConfigError("key optimizer.threshold must be >= 0");
        }
        if (r.get_double("optimizer.p", 1.0) < 1.0) {
            throw ConfigError("key optimizer.p must be >= 1");
        }
        if (!(r.get_double("optimizer.epsilon", 1e-8) > 0.0)) {
            throw ConfigError("key optimizer.epsilon must be > 0");
        }
    } else if (kind == "adam") {
        const double b1 = r.get_double("optimizer.beta1", 0.9);
        const double b2 = r.get_double("optimizer.beta2", 0.999);
        if (b1 < 0.0 || b1 >= 1.0) throw ConfigError("key optimizer.beta1 must be in [0, 1)");
        if (b2 < 0.0 || b2 >= 1.0) throw ConfigError("key optimizer.beta2 must be in [0, 1)");
    } else if (kind == "ewc") {
        if (r.get_double("optimizer.lambda", 100.0) < 0.0) {
            throw ConfigError("key optimizer.lambda must be >= 0");
        }
        if (r.get_int("optimizer.fisher_samples", 200) < 1) {
            throw ConfigError("key optimizer.fisher_samples must be >= 1");
        }
    }

    const std::string task_kind = r.get_string("task.kind", "split");
    if (task_kind != "split" && task_kind != "pair" && task_kind != "permuted") {
        throw ConfigError("key task.kind must be split, pair or permuted");
    }
    if (task_kind == "pair" && !r.has("dataset2.source") && !r.has("dataset2.images")) {
        throw ConfigError("task.kind=pair requires a dataset2.* block");
    }
    std::size_t num_phases = 2;
    if (task_kind == "permuted") {
        const long long p = r.get_int("task.phases", 2);
        if (p < 2) throw ConfigError("key task.phases must be >= 2");
        num_phases = static_cast<std::size_t>(p);
    }
    for (const auto& [key, value] : values_) {
        (void)value;
        std::size_t index = 0;
        std::string field;
        if (parse_phase_key(key, index, field)) {
            if (index > num_phases) {
                throw ConfigError("key " + key + " refers to phase " + std::to_string(index) +
                                  " but the task has " + std::to_string(num_phases) + " phases");
            }
            if (field == "epochs" && r.get_int(key) < 1) {
                throw ConfigError("key " + key + " must be >= 1");
            }
            if (field == "batch_size" && r.get_int(key) < 1) {
                throw ConfigError("key " + key + " must be >= 1");
            }
            if (field == "threshold" && r.get_double(key) < 0.0) {
                throw ConfigError("key " + key + " must be >= 0");
            }
        }
    }

    const double holdout = r.get_double("eval.holdout", 0.0);
    if (holdout < 0.0 || holdout >= 1.0) {
        throw ConfigError("key eval.holdout must be in [0, 1)");
    }
}

std::uint64_t ExperimentConfig::seed() const {
    return static_cast<std::uint64_t>(Reader{values_}.get_int("seed", 42));
}

std::size_t ExperimentConfig::repeats() const {
    return static_cast<std::size_t>(Reader{values_}.get_int("repeats", 1));
}

std::string ExperimentConfig::output_dir() const {
    return Reader{values_}.get_string("out", "results");
}

std::string canonical_config_text(const std::map<std::string, std::string>& values) {
    std::string out;
    for (const auto& [key, value] : values) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    }
    return out;
}

std::string ExperimentConfig::canonical() const { return canonical_config_text(values_); }

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::string ExperimentConfig::task_signature() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        const bool shared =
            key == "seed" || key == "repeats" || key == "model.layers" ||
            key.rfind("dataset.", 0) == 0 || key.rfind("dataset2.", 0) == 0 ||
            key.rfind("task.", 0) == 0 || key == "eval.holdout" ||
            (key.rfind("phase.", 0) == 0 &&
             (key.ends_with(".epochs") || key.ends_with(".batch_size")));
        if (shared) {
            out += key;
            out += " = ";
            out += value;
            out += "\n";
        }
    }
    return out;
}

RunConfig ExperimentConfig::to_run_config(const std::filesystem::path& data_root) const {
    Reader r{values_};
    RunConfig run;
    run.seed = seed();
    run.repeats = repeats();
    run.parallel_repeats = r.get_bool("parallel", true);
    for (long long l : r.get_int_list("model.layers")) {
        run.layer_sizes.push_back(static_cast<std::size_t>(l));
    }

    const std::string kind = r.get_string("optimizer.kind");
    if (kind == "classp") {
        ClasspSpec spec;
        spec.config.alpha = r.get_double("optimizer.alpha");
        spec.config.threshold = r.get_double("optimizer.threshold", 0.0);
        spec.config.p = r.get_double("optimizer.p", 1.0);
        spec.config.apply_decay = r.get_bool("optimizer.apply_decay", true);
        spec.config.epsilon = r.get_double("optimizer.epsilon", 1e-8);
        spec.config.exclude_current = r.get_bool("optimizer.exclude_current", false);
        run.optimizer = spec;
    } else if (kind == "sgd") {
        run.optimizer = SgdSpec{r.get_double("optimizer.alpha")};
    } else if (kind == "adagrad") {
        run.optimizer = AdagradSpec{r.get_double("optimizer.alpha"),
                                    r.get_double("optimizer.epsilon", 1e-8)};
    } else if (kind == "adam") {
        AdamSpec spec;
        spec.config.alpha = r.get_double("optimizer.alpha");
        spec.config.beta1 = r.get_double("optimizer.beta1", 0.9);
        spec.config.beta2 = r.get_double("optimizer.beta2", 0.999);
        spec.config.epsilon = r.get_double("optimizer.epsilon", 1e-8);
        run.optimizer = spec;
    } else {
        EwcSpec spec;
        spec.alpha = r.get_double("optimizer.alpha");
        spec.lambda = r.get_double("optimizer.lambda", 100.0);
        spec.fisher_samples = static_cast<std::size_t>(r.get_int("optimizer.fisher_samples", 200));
        run.optimizer = spec;
    }

    // task datasets
    const Dataset base = build_source_dataset(r, "dataset", run.seed, data_root);
    const std::string task_kind = r.get_string("task.kind", "split");
    std::vector<Dataset> task_data;
    if (task_kind == "split") {
        std::vector<int> first;
        if (r.has("task.first_classes")) {
            for (long long c : r.get_int_list("task.first_classes")) {
                first.push_back(static_cast<int>(c));
            }
        } else {
            for (int c = 0; c < base.num_classes / 2; ++c) first.push_back(c);
        }
        std::vector<int> second;
        for (int c = 0; c < base.num_classes; ++c) {
            if (std::find(first.begin(), first.end(), c) == first.end()) second.push_back(c);
        }
        if (first.empty() || second.empty()) {
            throw ConfigError("task.first_classes must leave classes for both tasks");
        }
        task_data.push_back(split_classes(base, first));
        task_data.push_back(split_classes(base, second));
    } else if (task_kind == "pair") {
        Dataset second = build_source_dataset(r, "dataset2", run.seed + 1, data_root);
        if (second.features() != base.features()) {
            throw ConfigError("dataset and dataset2 disagree on feature count");
        }
        const int classes = std::max(base.num_classes, second.num_classes);
        task_data.push_back(base);
        task_data.push_back(std::move(second));
        for (auto& d : task_data) d.num_classes = classes;
    } else { // permuted
        const auto num_phases = static_cast<std::size_t>(r.get_int("task.phases", 2));
        const auto permute_seed = static_cast<std::uint64_t>(
            r.get_int("task.permute_seed", static_cast<long long>(run.seed) + 1000));
        Pcg32 perm_rng(permute_seed);
        task_data.push_back(base);
        for (std::size_t k = 1; k < num_phases; ++k) {
            task_data.push_back(permute_features(base, perm_rng.permutation(base.features())));
        }
    }

    // optional held-out evaluation split
    const double holdout = r.get_double("eval.holdout", 0.0);
    std::vector<Dataset> eval_data;
    if (holdout > 0.0) {
        for (auto& d : task_data) {
            Pcg32 split_rng(run.seed ^ 0x9e3779b97f4a7c15ULL);
            const std::vector<std::size_t> order = split_rng.permutation(d.size());
            const auto train_count = static_cast<std::size_t>(
                std::ceil(static_cast<double>(d.size()) * (1.0 - holdout)));
            if (train_count == 0 || train_count == d.size()) {
                throw ConfigError("eval.holdout leaves an empty train or eval split");
            }
            Dataset train;
            train.x = Matrix(train_count, d.features());
            Dataset eval;
            eval.x = Matrix(d.size() - train_count, d.features());
            train.num_classes = eval.num_classes = d.num_classes;
            train.name = d.name;
            eval.name = d.name + "-heldout";
            for (std::size_t i = 0; i < d.size(); ++i) {
                Dataset& dst = (i < train_count) ? train : eval;
                const std::size_t row = (i < train_count) ? i : i - train_count;
                std::copy_n(d.x.data.begin() +
                                static_cast<std::ptrdiff_t>(order[i] * d.features()),
                            d.features(),
                            dst.x.data.begin() + static_cast<std::ptrdiff_t>(row * d.features()));
                dst.y.push_back(d.y[order[i]]);
            }
            eval_data.push_back(std::move(eval));
            d = std::move(train);
        }
    }

    for (std::size_t k = 0; k < task_data.size(); ++k) {
        task_data[k].name = "task" + std::to_string(k + 1);
        PhaseSpec phase;
        phase.dataset = std::make_shared<Dataset>(std::move(task_data[k]));
        const std::string prefix = "phase." + std::to_string(k + 1) + ".";
        phase.epochs = static_cast<std::size_t>(r.get_int(prefix + "epochs", 1));
        phase.batch_size = static_cast<std::size_t>(r.get_int(prefix + "batch_size", 64));
        if (r.has(prefix + "threshold")) phase.threshold = r.get_double(prefix + "threshold");
        if (r.has(prefix + "apply_decay")) phase.apply_decay = r.get_bool(prefix + "apply_decay");
        if (r.has(prefix + "loss_stop")) phase.loss_stop = r.get_double(prefix + "loss_stop");
        run.tasks.phases.push_back(std::move(phase));
    }
    if (holdout > 0.0) {
        for (std::size_t k = 0; k < eval_data.size(); ++k) {
            eval_data[k].name = "task" + std::to_string(k + 1);
            run.tasks.eval_sets.push_back(std::make_shared<Dataset>(std::move(eval_data[k])));
        }
    } else {
        for (const auto& phase : run.tasks.phases) {
            run.tasks.eval_sets.push_back(phase.dataset);
        }
    }
    run.tasks.validate();
    return run;
}

} // namespace classp

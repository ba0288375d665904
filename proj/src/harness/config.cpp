#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "peano/harness.hpp"

namespace peano::harness {

using nlohmann::json;

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
    static const std::vector<std::pair<Experiment, std::string>> names{
        {Experiment::simulate, "simulate"},     {Experiment::select_prob, "select-prob"},
        {Experiment::exit_time, "exit-time"},   {Experiment::box_exit, "box-exit"},
        {Experiment::ramp, "ramp"},             {Experiment::scaling_report, "scaling-report"},
        {Experiment::validate_noise, "validate-noise"}};
    return names;
}

template <class T>
T get_field(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

double get_number(const json& j, const std::string& key, const std::string& path, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(path + key, "expected a number");
    return j.at(key).get<double>();
}

// Default option values per experiment; null means "derived per epsilon".
json default_options(Experiment e) {
    switch (e) {
        case Experiment::simulate:
            return {{"x0", 0.0},
                    {"scheme", "grid"},
                    {"step", nullptr},
                    {"steps_per_transition_time", 50.0},
                    {"min_steps", 200.0}};
        case Experiment::select_prob:
            return {{"steps_per_transition_time", 50.0}, {"min_steps", 200.0}};
        case Experiment::exit_time:
            return {{"barrier", nullptr}, {"clamp", 0.1}, {"x0", nullptr}, {"m_scale", 1.0}, {"rho", nullptr}};
        case Experiment::box_exit:
            return {{"t_hat_factor", 1.0}, {"clamp", 0.1}, {"vartheta", nullptr}, {"rho", nullptr}};
        case Experiment::ramp:
            return {{"s_factor", 1.0}, {"clamp", 0.1}, {"rho", nullptr}};
        case Experiment::scaling_report:
            return {{"vartheta", nullptr}, {"rho", nullptr}, {"Gamma", nullptr}};
        case Experiment::validate_noise:
            return {{"n_cauchy", 1000000},
                    {"n_samples", 100000},
                    {"cf_z", {0.1, 0.5, 1.0, 2.0, 5.0}},
                    {"reassembly_epsilon", 0.1},
                    {"reassembly_rho", 0.5},
                    {"self_similarity_a", 4.0},
                    {"sigma_override", nullptr}};
    }
    return json::object();
}

}  // namespace

std::string to_string(Experiment e) {
    for (const auto& [k, v] : experiment_names()) {
        if (k == e) return v;
    }
    return "unknown";
}

Experiment experiment_from_string(const std::string& s) {
    for (const auto& [k, v] : experiment_names()) {
        if (v == s) return k;
    }
    throw ConfigError("experiment", "unknown experiment '" + s + "'");
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    ExperimentConfig cfg;
    cfg.experiment = experiment_from_string(get_field<std::string>(j, "experiment", "", "select-prob"));

    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (!p.is_object()) throw ConfigError("params", "expected an object");
        for (const auto& [key, _] : p.items()) {
            static const std::vector<std::string> known{"alpha", "beta_plus", "beta_minus", "B_plus", "B_minus", "c"};
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ConfigError("params." + key, "unknown parameter");
            }
        }
        cfg.params.alpha = get_number(p, "alpha", "params.", cfg.params.alpha);
        cfg.params.beta_plus = get_number(p, "beta_plus", "params.", cfg.params.beta_plus);
        cfg.params.beta_minus = get_number(p, "beta_minus", "params.", cfg.params.beta_minus);
        cfg.params.B_plus = get_number(p, "B_plus", "params.", cfg.params.B_plus);
        cfg.params.B_minus = get_number(p, "B_minus", "params.", cfg.params.B_minus);
        cfg.params.c = get_number(p, "c", "params.", cfg.params.c);
    }
    if (j.contains("eps_grid")) {
        const auto& g = j.at("eps_grid");
        if (!g.is_array() || g.empty()) throw ConfigError("eps_grid", "expected a non-empty array");
        cfg.eps_grid.clear();
        for (const auto& v : g) {
            if (!v.is_number()) throw ConfigError("eps_grid", "entries must be numbers");
            const double e = v.get<double>();
            if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps_grid", "entries must lie in (0,1)");
            cfg.eps_grid.push_back(e);
        }
    }
    cfg.n_paths = get_field<long>(j, "n_paths", "", cfg.n_paths);
    if (cfg.n_paths < 1) throw ConfigError("n_paths", "must be >= 1");
    cfg.horizon = get_number(j, "horizon", "", cfg.horizon);
    if (!(cfg.horizon > 0.0)) throw ConfigError("horizon", "must be positive");
    cfg.master_seed = get_field<std::uint64_t>(j, "master_seed", "", cfg.master_seed);

    if (j.contains("workers") && !j.at("workers").is_null()) {
        const auto& w = j.at("workers");
        if (w.is_string()) {
            if (w.get<std::string>() != "auto") throw ConfigError("workers", "expected a positive integer or \"auto\"");
        } else if (w.is_number_integer() && w.get<long>() >= 1) {
            cfg.workers = static_cast<int>(w.get<long>());
        } else {
            throw ConfigError("workers", "expected a positive integer or \"auto\"");
        }
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (!o.is_object()) throw ConfigError("output", "expected an object");
        cfg.output_path = get_field<std::string>(o, "path", "output.", "");
        const auto fmt = get_field<std::string>(o, "format", "output.", "csv");
        if (fmt == "csv") {
            cfg.format = Format::csv;
        } else if (fmt == "json") {
            cfg.format = Format::json;
        } else {
            throw ConfigError("output.format", "expected csv or json");
        }
    }
    cfg.timing = get_field<bool>(j, "timing", "", false);

    cfg.options = default_options(cfg.experiment);
    if (j.contains("options")) {
        const auto& o = j.at("options");
        if (!o.is_object()) throw ConfigError("options", "expected an object");
        for (const auto& [key, value] : o.items()) {
            if (!cfg.options.contains(key)) {
                throw ConfigError("options." + key, "not an option of experiment " + to_string(cfg.experiment));
            }
            cfg.options[key] = value;
        }
    }

    if (cfg.experiment != Experiment::validate_noise) {
        auto probe = cfg.params;
        probe.epsilon = cfg.eps_grid.front();
        try {
            probe.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("params", e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json materialize(ExperimentConfig& cfg) {
    json j;
    j["experiment"] = to_string(cfg.experiment);
    j["params"] = {{"alpha", cfg.params.alpha},     {"beta_plus", cfg.params.beta_plus},
                   {"beta_minus", cfg.params.beta_minus}, {"B_plus", cfg.params.B_plus},
                   {"B_minus", cfg.params.B_minus}, {"c", cfg.params.c}};
    j["eps_grid"] = cfg.eps_grid;
    j["n_paths"] = cfg.n_paths;
    j["horizon"] = cfg.horizon;
    j["master_seed"] = cfg.master_seed;
    j["workers"] = cfg.workers ? json(*cfg.workers) : json("auto");
    j["output"] = {{"path", cfg.output_path}, {"format", cfg.format == Format::csv ? "csv" : "json"}};
    j["timing"] = cfg.timing;
    j["options"] = cfg.options;
    return j;
}

int resolve_workers(const ExperimentConfig& cfg) {
    if (cfg.workers) return *cfg.workers;
    if (const char* env = std::getenv("PEANO_WORKERS")) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || w < 1) throw ConfigError("PEANO_WORKERS", "must be a positive integer");
        return static_cast<int>(w);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace peano::harness

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "peano/error.hpp"
#include "peano/harness.hpp"

using namespace peano::harness;
using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App app{"Zero-noise selection experiments for a singular-drift SDE driven by alpha-stable noise"};
    app.require_subcommand(1);

    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    bool timing = false;
    const char* names[] = {"simulate", "select-prob", "exit-time", "box-exit", "ramp", "scaling-report", "validate-noise"};
    for (const char* name : names) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--timing", timing, "fill runtime_ms (breaks byte-identical reruns)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("--config", "cannot open '" + config_path + "'");
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
            }
            if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
        }
        j["experiment"] = app.get_subcommands().front()->get_name();
        if (seed) j["master_seed"] = *seed;
        if (!out_path.empty() || !format.empty()) {
            json out = j.contains("output") && j["output"].is_object() ? j["output"] : json::object();
            if (!out_path.empty()) out["path"] = out_path;
            if (!format.empty()) out["format"] = format;
            j["output"] = out;
        }
        if (timing) j["timing"] = true;

        ExperimentConfig cfg = parse_config(j);
        // CSV on stdout keeps the table out of the way on stderr.
        std::ostream& summary = cfg.output_path.empty() ? std::cerr : std::cout;
        return run(cfg, summary, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const peano::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <entlat/entlat.hpp>

namespace {

const char* flag_help(const std::string& key) {
    static const std::map<std::string, const char*> help = {
        {"mode", "single | scan_j | scan_n"},
        {"n", "qubit count (even)"},
        {"rows", "lattice rows (rows*cols = n)"},
        {"gamma", "coupling anisotropy in [0,1]"},
        {"delta", "on-site disorder width"},
        {"delta0", "level spacing"},
        {"j", "coupling bound for single runs"},
        {"j_values", "comma-separated couplings for scans"},
        {"n_values", "comma-separated sizes for scan_n"},
        {"initial", "bell | separable"},
        {"n_realizations", "disorder draws per point"},
        {"n_realizations_by_n", "per-size overrides, e.g. 12:30,14:20"},
        {"master_seed", "seed for the whole run (alias --seed)"},
        {"t_max", "evolution horizon (auto = per-point rule)"},
        {"samples", "time samples per curve (auto)"},
        {"grid_kind", "uniform | log"},
        {"log_t_min", "first positive time of the log grid"},
        {"evolution", "sector | full"},
        {"propagator", "auto | exact | krylov"},
        {"dense_cap", "largest dimension diagonalized densely"},
        {"krylov_order", "Lanczos subspace size"},
        {"krylov_tol", "local Krylov error tolerance"},
        {"saturation_fraction", "trailing fraction averaged for C_inf"},
        {"auto_extend", "double t_max until the plateau is stable"},
        {"max_extensions", "doubling limit"},
        {"tc_threshold", "concurrence level defining the decay time scale"},
        {"tc_mode", "averaged | per_realization"},
        {"workers", "threads per point (0 = auto)"},
        {"archive", "none | summary | series"},
        {"pair", "qubit pair watched for concurrence, e.g. 1,2"},
        {"fits", "write fits.json for scans"},
    };
    const auto it = help.find(key);
    return it != help.end() ? it->second : "";
}

int do_run(const std::string& config_path, const std::string& preset, const std::string& out_dir,
           const std::vector<std::pair<std::string, std::string>>& overrides) {
    nlohmann::json root = nlohmann::json::object();
    std::string source = "cli";
    std::string text;
    if (!config_path.empty() && !preset.empty())
        throw entlat::config_error("--config and --preset are mutually exclusive");
    if (!config_path.empty()) {
        try {
            text = entlat::io::read_text(config_path);
        } catch (const std::exception& e) {
            throw entlat::config_error(e.what());
        }
        root = entlat::parse_config_json(text, config_path);
        source = config_path;
    } else if (!preset.empty()) {
        root = entlat::preset_config(preset);
        source = "preset " + preset;
    }
    for (const auto& [key, value] : overrides) entlat::apply_override(root, key, value);

    entlat::RunConfig config = entlat::config_from_json(root, source, text);
    config.ensemble.workers = entlat::resolve_workers(std::nullopt, config.ensemble.workers);
    config.validate();
    const entlat::RunSummary summary = entlat::execute_run(
        config, out_dir, [](const std::string& line) {
            std::puts(line.c_str());
            std::fflush(stdout);
        });
    std::printf("wrote %s\n", summary.dir.string().c_str());
    return 0;
}

int do_verify() { return entlat::selftest::run_all(std::cout) ? 0 : 1; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement dynamics on a disordered qubit lattice"};
    app.set_version_flag("--version", entlat::version_string);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "simulate and write an output directory");
    std::string config_path, preset, out_dir = "entlat_out";
    run->add_option("--config", config_path,
                    "JSON config (or a manifest.json from a previous run)");
    run->add_option("--preset", preset, "built-in configuration: fig1 .. fig4");
    run->add_option("--out", out_dir, "output directory")->capture_default_str();

    const auto& schema = entlat::cfg::schema();
    std::vector<std::string> values(schema.size());
    std::vector<CLI::Option*> options(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        std::string flags = std::string("--") + schema[i].name;
        if (std::string(schema[i].name) == "master_seed") flags += ",--seed";
        options[i] = run->add_option(flags, values[i], flag_help(schema[i].name));
    }

    auto* verify = app.add_subcommand("verify", "run the built-in oracle checks");
    bool self_test = true;
    verify->add_flag("--self-test", self_test, "run the oracle battery (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (run->parsed()) {
            std::vector<std::pair<std::string, std::string>> overrides;
            for (std::size_t i = 0; i < schema.size(); ++i)
                if (options[i]->count() > 0) overrides.emplace_back(schema[i].name, values[i]);
            return do_run(config_path, preset, out_dir, overrides);
        }
        return do_verify();
    } catch (const entlat::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

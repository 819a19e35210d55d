#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "entlat/analysis.hpp"
#include "entlat/config.hpp"
#include "entlat/ensemble.hpp"
#include "entlat/io.hpp"
#include "entlat/version.hpp"

namespace entlat {

// flag > config > ENTLAT_WORKERS > hardware.
inline int resolve_workers(std::optional<int> cli_value, int config_value) {
    if (cli_value && *cli_value > 0) return *cli_value;
    if (config_value > 0) return config_value;
    if (const char* env = std::getenv("ENTLAT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct RunSummary {
    std::filesystem::path dir;
    std::vector<PointResult> points;
};

namespace detail {

struct PointSpec {
    int n;
    double j;
};

inline std::vector<PointSpec> enumerate_points(const RunConfig& config) {
    std::vector<PointSpec> out;
    if (config.mode == "single") {
        out.push_back({config.ensemble.params.n, config.ensemble.params.j_strength});
    } else if (config.mode == "scan_j") {
        for (double j : config.j_values) out.push_back({config.ensemble.params.n, j});
    } else {
        for (int n : config.n_values)
            for (double j : config.j_values) out.push_back({n, j});
    }
    return out;
}

inline EnsembleConfig point_config(const RunConfig& config, const PointSpec& spec) {
    EnsembleConfig e = config.ensemble;
    e.params.n = spec.n;
    e.params.cols = spec.n / e.params.rows;
    e.params.j_strength = spec.j;
    if (auto it = e.n_realizations_by_n.find(spec.n); it != e.n_realizations_by_n.end())
        e.n_realizations = it->second;
    return e;
}

inline std::string point_dir_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", index);
    return buf;
}

inline nlohmann::json point_summary_json(const PointResult& p) {
    nlohmann::json tcs = nlohmann::json::array();
    for (const auto& tc : p.per_real_tc)
        tcs.push_back(tc ? nlohmann::json(*tc) : nlohmann::json(nullptr));
    return {{"j", p.j},
            {"n", p.n},
            {"gamma", p.gamma},
            {"c_inf", p.c_inf},
            {"c_inf_stderr", p.c_inf_stderr},
            {"t_c", p.t_c ? nlohmann::json(*p.t_c) : nlohmann::json(nullptr)},
            {"t_c_avg_curve",
             p.t_c_avg_curve ? nlohmann::json(*p.t_c_avg_curve) : nlohmann::json(nullptr)},
            {"t_c_defined_count", p.t_c_defined_count},
            {"stable", p.stable},
            {"n_realizations", p.n_realizations},
            {"child_seeds", p.child_seeds},
            {"per_real_c_inf", p.per_real_cinf},
            {"per_real_t_c", std::move(tcs)},
            {"extensions", p.extensions},
            {"t_max", p.t_max},
            {"samples", p.samples},
            {"wall_s", p.wall_s}};
}

inline void write_point_dir(const std::filesystem::path& dir, const PointResult& point,
                            const std::string& archive) {
    std::filesystem::create_directories(dir);
    io::write_time_series_csv(dir / "avg_C.csv", point.avg_c);
    io::write_time_series_csv(dir / "avg_f.csv", point.avg_f);
    if (archive != "none")
        io::write_text(dir / "point.json", point_summary_json(point).dump(2) + "\n");
    if (archive == "series")
        io::write_gz(dir / "realizations.json.gz", io::realizations_to_json(point).dump() + "\n");
}

struct NamedWindow {
    const char* name;
    std::pair<double, double> window;
};

// One fit group per lattice size present in the scan.
inline nlohmann::json fits_for_group(const RunConfig& config, int n,
                                     const std::vector<const PointResult*>& points) {
    double j_max = 0.0;
    for (const auto* p : points) j_max = std::max(j_max, p->j);
    ModelParams params = config.ensemble.params;
    params.n = n;
    const FitWindows windows = default_fit_windows(model_decay_rates(params), j_max);

    std::vector<std::pair<double, double>> tc_table, cinf_table, loss_table;
    for (const auto* p : points) {
        if (p->t_c) tc_table.push_back({p->j, *p->t_c});
        cinf_table.push_back({p->j, p->c_inf});
        loss_table.push_back({p->j, 1.0 - p->c_inf});
    }

    nlohmann::json fits = nlohmann::json::array();
    nlohmann::json skipped = nlohmann::json::array();
    auto attempt = [&](const char* name, auto&& run) {
        try {
            nlohmann::json f = io::fit_to_json(run());
            f["name"] = name;
            fits.push_back(std::move(f));
        } catch (const std::exception& e) {
            skipped.push_back({{"name", name}, {"reason", e.what()}});
        }
    };
    attempt("t_c_fgr", [&] { return fit_power_law(tc_table, windows.fgr.first, windows.fgr.second); });
    attempt("t_c_ergodic",
            [&] { return fit_power_law(tc_table, windows.ergodic.first, windows.ergodic.second); });
    attempt("c_inf_exponential",
            [&] { return fit_exponential_cinf(cinf_table, windows.cinf.first, windows.cinf.second); });
    attempt("c_inf_perturbative", [&] {
        return fit_power_law(cinf_table, windows.perturbative.first, windows.perturbative.second);
    });
    attempt("one_minus_c_inf_perturbative", [&] {
        return fit_power_law(loss_table, windows.perturbative.first, windows.perturbative.second);
    });

    nlohmann::json out{{"n", n},
                       {"windows",
                        {{"fgr", {windows.fgr.first, windows.fgr.second}},
                         {"ergodic", {windows.ergodic.first, windows.ergodic.second}},
                         {"cinf", {windows.cinf.first, windows.cinf.second}},
                         {"perturbative",
                          {windows.perturbative.first, windows.perturbative.second}}}},
                       {"fits", std::move(fits)}};
    if (!skipped.empty()) out["skipped"] = std::move(skipped);
    return out;
}

inline nlohmann::json build_fits_json(const RunConfig& config,
                                      const std::vector<PointResult>& points) {
    std::vector<int> sizes;
    for (const auto& p : points)
        if (std::find(sizes.begin(), sizes.end(), p.n) == sizes.end()) sizes.push_back(p.n);
    nlohmann::json groups = nlohmann::json::array();
    for (int n : sizes) {
        std::vector<const PointResult*> group;
        for (const auto& p : points)
            if (p.n == n) group.push_back(&p);
        groups.push_back(fits_for_group(config, n, group));
    }
    return {{"groups", std::move(groups)}};
}

} // namespace detail

using ProgressFn = std::function<void(const std::string&)>;

// Runs the configured scan and writes the output tree:
//   manifest.json, scan_table.csv, fits.json, points/NNN/{avg_C.csv, avg_f.csv,
//   point.json, realizations.json.gz}. Single-point runs mirror the averaged
//   curves at the top level.
inline RunSummary execute_run(RunConfig config, const std::filesystem::path& out_dir,
                              const ProgressFn& progress = {}) {
    config.validate();
    const auto specs = detail::enumerate_points(config);
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "points");

    RunSummary summary;
    summary.dir = out_dir;
    nlohmann::json manifest_points = nlohmann::json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const EnsembleConfig point_cfg = detail::point_config(config, specs[i]);
        PointResult point = run_ensemble(point_cfg);
        const std::string rel = "points/" + detail::point_dir_name(static_cast<int>(i));
        detail::write_point_dir(out_dir / rel, point, config.archive);
        if (progress) {
            char line[160];
            std::snprintf(line, sizeof(line),
                          "[%zu/%zu] n=%d J=%g C_inf=%.4f +- %.4f t_c=%s %s", i + 1,
                          specs.size(), point.n, point.j, point.c_inf, point.c_inf_stderr,
                          point.t_c ? io::format_double(*point.t_c, 6).c_str() : "-",
                          point.stable ? "stable" : "unstable");
            progress(line);
        }
        manifest_points.push_back(
            {{"index", i}, {"dir", rel}, {"n", point.n}, {"j", point.j}});
        point.realizations.clear();
        point.realizations.shrink_to_fit();
        summary.points.push_back(std::move(point));
    }

    io::write_scan_table_csv(out_dir / "scan_table.csv", summary.points);
    if (summary.points.size() == 1) {
        io::write_time_series_csv(out_dir / "avg_C.csv", summary.points.front().avg_c);
        io::write_time_series_csv(out_dir / "avg_f.csv", summary.points.front().avg_f);
    }
    if (config.fits && config.mode != "single")
        io::write_text(out_dir / "fits.json",
                       detail::build_fits_json(config, summary.points).dump(2) + "\n");

    nlohmann::json manifest{{"entlat_version", version_string},
                            {"command", "run"},
                            {"config", config_to_json(config)},
                            {"points", std::move(manifest_points)}};
    io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

} // namespace entlat

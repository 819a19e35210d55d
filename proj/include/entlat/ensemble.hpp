#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "entlat/errors.hpp"
#include "entlat/hamiltonian.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/lattice.hpp"
#include "entlat/observables.hpp"
#include "entlat/propagator.hpp"
#include "entlat/rng.hpp"

namespace entlat {

enum class Evolution { sector, full };
enum class PropagatorKind { automatic, exact, krylov };

struct GridPolicy {
    std::optional<double> t_max;  // empty: per-point auto rule
    std::optional<int> samples;   // empty: auto (>= 2000)
    std::string kind = "uniform"; // "uniform" | "log"
    double log_t_min = 1e-2;
};

struct EnsembleConfig {
    ModelParams params;
    std::string initial = "bell"; // "bell" | "separable"
    int n_realizations = 50;
    std::uint64_t master_seed = 20240601;
    GridPolicy grid;
    Evolution evolution = Evolution::sector;
    PropagatorKind propagator = PropagatorKind::automatic;
    int dense_cap = default_dense_cap;
    KrylovOptions krylov;
    double saturation_fraction = 0.1;
    bool auto_extend = true;
    int max_extensions = 3;
    double tc_threshold = 0.96;
    std::string tc_mode = "averaged"; // "averaged" | "per_realization"
    std::map<int, int> n_realizations_by_n; // per-size overrides for size scans
    int workers = 0;                        // 0: resolve from environment at run time
    bool keep_series = false; // retain per-realization curves in the result
    int pair_a = 1, pair_b = 2;

    void validate() const {
        params.validate();
        if (initial != "bell" && initial != "separable")
            throw config_error("initial must be 'bell' or 'separable'");
        if (n_realizations < 1) throw config_error("n_realizations must be >= 1");
        if (grid.kind != "uniform" && grid.kind != "log")
            throw config_error("grid kind must be 'uniform' or 'log'");
        if (saturation_fraction <= 0.0 || saturation_fraction > 1.0)
            throw config_error("saturation_fraction must lie in (0,1]");
        if (max_extensions < 0) throw config_error("max_extensions must be >= 0");
        if (tc_mode != "averaged" && tc_mode != "per_realization")
            throw config_error("tc_mode must be 'averaged' or 'per_realization'");
        if (workers < 0) throw config_error("workers must be >= 0 (0 = auto)");
        if (tc_threshold <= 0.0 || tc_threshold >= 1.0)
            throw config_error("tc_threshold must lie in (0,1)");
    }
};

struct RealizationRecord {
    std::uint64_t seed = 0;
    std::vector<double> concurrence;
    std::vector<double> fidelity;
};

struct PointResult {
    double j = 0.0;
    int n = 0;
    double gamma = 0.0;
    TimeSeries avg_c, avg_f;
    double c_inf = 0.0, c_inf_stderr = 0.0;
    std::optional<double> t_c;           // per the configured tc_mode
    std::optional<double> t_c_avg_curve; // always computed on the averaged curve
    int t_c_defined_count = 0;           // realizations with a crossing (per-realization mode)
    bool stable = false;
    int n_realizations = 0;
    std::vector<std::uint64_t> child_seeds;
    std::vector<double> per_real_cinf;
    std::vector<std::optional<double>> per_real_tc;
    int extensions = 0;
    double t_max = 0.0;
    int samples = 0;
    double wall_s = 0.0;
    std::vector<RealizationRecord> realizations; // populated when keep_series
};

struct ScanResult {
    std::vector<PointResult> points;
};

// Time-window heuristics. Saturation of the trailing average needs a few
// decay times: ~1/J in the ergodic regime, ~delta/J^2 in the golden-rule
// regime, plus the slow ~delta oscillations of the perturbative regime. The
// stability check doubles t_max when the guess falls short.
inline double auto_t_max(const ModelParams& p) {
    const double j = p.j_strength, d = p.delta;
    if (j <= 0.0) return d > 0.0 ? 50.0 / d : 50.0;
    if (d <= 0.0) return 20.0 / j;
    if (j >= d) return 30.0 / j;
    const double t = std::max({50.0 / d, 20.0 / j, 4.0 * d / (j * j)});
    return std::min(t, 4.0e4);
}

inline int auto_samples(double t_max) {
    const double wanted = std::ceil(t_max / 2.5) + 1.0;
    return std::clamp(static_cast<int>(wanted), 2000, 16000);
}

inline TimeGrid make_grid(const GridPolicy& policy, double t_max, int samples) {
    if (policy.kind == "log") return make_log_grid(policy.log_t_min, t_max, samples);
    return make_uniform_grid(t_max, samples);
}

namespace detail {

// Evolves one disorder draw and samples C(t) and f(t) on the grid.
inline void run_realization(const EnsembleConfig& cfg, const LatticeGeometry& geometry,
                            const SectorBasis& basis, std::uint64_t seed,
                            const TimeGrid& grid, std::vector<double>& c_out,
                            std::vector<double>& f_out) {
    const auto disorder = draw_disorder(cfg.params, geometry, seed);
    StateVector psi0 = initial_state(basis, cfg.initial);
    SparseHamiltonian h;
    if (cfg.evolution == Evolution::sector) {
        h = build_sector(cfg.params, geometry, disorder, basis);
    } else {
        h = build_full(cfg.params, geometry, disorder);
        psi0 = embed_sector(psi0, basis);
    }
    bool exact = true;
    switch (cfg.propagator) {
    case PropagatorKind::automatic: exact = h.dimension <= cfg.dense_cap; break;
    case PropagatorKind::exact: exact = true; break;
    case PropagatorKind::krylov: exact = false; break;
    }

    const std::size_t count = grid.samples.size();
    c_out.resize(count);
    f_out.resize(count);
    PairReducer reduce(basis, psi0.basis, cfg.pair_a, cfg.pair_b);
    std::vector<std::pair<Eigen::Index, cplx>> support;
    for (Eigen::Index i = 0; i < psi0.amps.size(); ++i)
        if (psi0.amps[i] != cplx(0.0, 0.0)) support.emplace_back(i, psi0.amps[i]);
    auto visit = [&](int i, double, const Eigen::VectorXcd& amps) {
        cplx overlap(0.0, 0.0);
        for (const auto& [idx, a] : support) overlap += std::conj(a) * amps[idx];
        f_out[i] = std::norm(overlap);
        c_out[i] = concurrence(reduce(amps)).value;
    };
    if (exact) {
        const Eigensystem es = diagonalize(h, cfg.dense_cap);
        evolve_exact_visit(es, psi0.amps, grid, visit);
    } else {
        evolve_krylov_visit(h, psi0.amps, grid, visit, cfg.krylov);
    }
}

// One pass over all realizations on a fixed grid. Workers pull realization
// indices; results land in per-index slots, so the merge order and therefore
// every output byte is independent of scheduling.
inline void run_attempt(const EnsembleConfig& cfg, const LatticeGeometry& geometry,
                        const SectorBasis& basis, const std::vector<std::uint64_t>& seeds,
                        const TimeGrid& grid, std::vector<std::vector<double>>& c_all,
                        std::vector<std::vector<double>>& f_all) {
    const int nr = cfg.n_realizations;
    c_all.assign(nr, {});
    f_all.assign(nr, {});
    std::vector<std::string> failures(nr);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (int r = next.fetch_add(1); r < nr; r = next.fetch_add(1)) {
            try {
                run_realization(cfg, geometry, basis, seeds[r], grid, c_all[r], f_all[r]);
            } catch (const std::exception& e) {
                failures[r] = e.what();
                failed.store(true);
            }
        }
    };
    const int workers = std::clamp(cfg.workers, 1, nr);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) {
        for (int r = 0; r < nr; ++r)
            if (!failures[r].empty())
                throw std::runtime_error("realization " + std::to_string(r + 1) + " (seed " +
                                         std::to_string(seeds[r]) + "): " + failures[r]);
    }
}

inline TimeSeries average_series(const TimeGrid& grid,
                                 const std::vector<std::vector<double>>& rows,
                                 const std::string& label) {
    TimeSeries s;
    s.label = label;
    s.times = grid.samples;
    s.values.assign(grid.samples.size(), 0.0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) s.values[i] += row[i];
    for (auto& v : s.values) v /= static_cast<double>(rows.size());
    return s;
}

} // namespace detail

// Disorder ensemble at fixed parameters: averaged C(t) and f(t), saturation
// value with stability flag (doubling t_max until the trailing average stops
// moving), and the concurrence time scale.
inline PointResult run_ensemble(const EnsembleConfig& cfg) {
    cfg.validate();
    const auto wall0 = std::chrono::steady_clock::now();
    const LatticeGeometry geometry = build_geometry(cfg.params);
    const SectorBasis basis = build_sector_basis(cfg.params.n);
    const int nr = cfg.n_realizations;
    std::vector<std::uint64_t> seeds(nr);
    for (int r = 0; r < nr; ++r) seeds[r] = child_seed(cfg.master_seed, r);

    double t_max = cfg.grid.t_max.value_or(auto_t_max(cfg.params));
    int samples = cfg.grid.samples.value_or(auto_samples(t_max));
    int extensions = 0;
    TimeGrid grid;
    std::vector<std::vector<double>> c_all, f_all;
    TimeSeries avg_c;
    bool stable = false;
    while (true) {
        grid = make_grid(cfg.grid, t_max, samples);
        detail::run_attempt(cfg, geometry, basis, seeds, grid, c_all, f_all);
        avg_c = detail::average_series(grid, c_all, "concurrence");
        const double s_full = saturation_value(avg_c, cfg.saturation_fraction);
        // Stability probe: the plateau should look the same at half the
        // horizon. Short explicit grids may not resolve the half-horizon
        // window; such runs simply cannot be certified stable.
        stable = false;
        try {
            const double s_half =
                saturation_value_prefix(avg_c, t_max / 2.0, cfg.saturation_fraction);
            stable = std::abs(s_full - s_half) <= 0.02;
        } catch (const dimension_error&) {
        }
        if (stable || !cfg.auto_extend || extensions >= cfg.max_extensions) break;
        ++extensions;
        t_max *= 2.0;
        samples = std::min(samples * 2, 16000);
    }

    PointResult out;
    out.j = cfg.params.j_strength;
    out.n = cfg.params.n;
    out.gamma = cfg.params.gamma;
    out.avg_c = std::move(avg_c);
    out.avg_f = detail::average_series(grid, f_all, "fidelity");
    out.n_realizations = nr;
    out.child_seeds = seeds;
    out.extensions = extensions;
    out.t_max = t_max;
    out.samples = static_cast<int>(grid.samples.size());
    out.stable = stable;

    out.per_real_cinf.reserve(nr);
    out.per_real_tc.reserve(nr);
    double mean = 0.0;
    for (int r = 0; r < nr; ++r) {
        TimeSeries s{grid.samples, c_all[r], "concurrence"};
        const double ci = saturation_value(s, cfg.saturation_fraction);
        out.per_real_cinf.push_back(ci);
        mean += ci;
        const auto tc = concurrence_timescale(s, cfg.tc_threshold);
        out.per_real_tc.push_back(tc);
        if (tc) ++out.t_c_defined_count;
    }
    mean /= nr;
    out.c_inf = mean;
    if (nr > 1) {
        double ss = 0.0;
        for (double ci : out.per_real_cinf) ss += (ci - mean) * (ci - mean);
        out.c_inf_stderr = std::sqrt(ss / (nr - 1)) / std::sqrt(double(nr));
    }
    out.t_c_avg_curve = concurrence_timescale(out.avg_c, cfg.tc_threshold);
    if (cfg.tc_mode == "averaged") {
        out.t_c = out.t_c_avg_curve;
    } else if (out.t_c_defined_count > 0) {
        double acc = 0.0;
        for (const auto& tc : out.per_real_tc)
            if (tc) acc += *tc;
        out.t_c = acc / out.t_c_defined_count;
    }

    if (cfg.keep_series) {
        out.realizations.resize(nr);
        for (int r = 0; r < nr; ++r)
            out.realizations[r] = {seeds[r], std::move(c_all[r]), std::move(f_all[r])};
    }
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return out;
}

// Ensemble per J value; j_values must be positive ascending.
inline ScanResult scan_j(const EnsembleConfig& cfg, const std::vector<double>& j_values) {
    if (j_values.empty()) throw config_error("scan_j needs at least one J value");
    for (std::size_t i = 0; i < j_values.size(); ++i) {
        if (j_values[i] <= 0.0) throw config_error("scan_j values must be positive");
        if (i > 0 && j_values[i] <= j_values[i - 1])
            throw config_error("scan_j values must be strictly ascending");
    }
    ScanResult out;
    out.points.reserve(j_values.size());
    for (double j : j_values) {
        EnsembleConfig point = cfg;
        point.params.j_strength = j;
        out.points.push_back(run_ensemble(point));
    }
    return out;
}

// Rebuilds the geometry per n and scans J for each; N_r follows the per-n
// override map when present.
inline ScanResult scan_n(const EnsembleConfig& cfg, const std::vector<int>& n_values,
                         const std::vector<double>& j_values) {
    if (n_values.empty()) throw config_error("scan_n needs at least one n value");
    ScanResult out;
    for (int n : n_values) {
        if (n < 2 || n % 2 != 0) throw config_error("scan_n values must be even and >= 2");
        EnsembleConfig per_n = cfg;
        per_n.params.n = n;
        if (n % per_n.params.rows != 0)
            throw config_error("n = " + std::to_string(n) + " not divisible by rows = " +
                               std::to_string(per_n.params.rows));
        per_n.params.cols = n / per_n.params.rows;
        if (auto it = cfg.n_realizations_by_n.find(n); it != cfg.n_realizations_by_n.end())
            per_n.n_realizations = it->second;
        ScanResult part = scan_j(per_n, j_values);
        for (auto& p : part.points) out.points.push_back(std::move(p));
    }
    return out;
}

} // namespace entlat

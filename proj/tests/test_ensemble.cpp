#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <entlat/ensemble.hpp>
#include <entlat/observables.hpp>

using namespace entlat;
using Catch::Matchers::WithinAbs;

namespace {

EnsembleConfig small_config() {
    EnsembleConfig cfg;
    cfg.params = make_params(6, 1.0, 0.2, 0.05);
    cfg.initial = "bell";
    cfg.n_realizations = 4;
    cfg.master_seed = 1717;
    cfg.grid.t_max = 50.0;
    cfg.grid.samples = 400;
    cfg.auto_extend = false;
    return cfg;
}

} // namespace

TEST_CASE("time horizon heuristics are the frozen rules", "[ensemble]") {
    REQUIRE_THAT(auto_t_max(make_params(10, 1.0, 0.2, 0.0)), WithinAbs(250.0, 1e-12));
    REQUIRE_THAT(auto_t_max(make_params(10, 1.0, 0.0, 0.5)), WithinAbs(40.0, 1e-12));
    REQUIRE_THAT(auto_t_max(make_params(10, 1.0, 0.2, 0.5)), WithinAbs(60.0, 1e-12));
    // below delta: max(50/delta, 20/J, 4 delta / J^2), capped at 4e4
    REQUIRE_THAT(auto_t_max(make_params(10, 1.0, 0.2, 0.01)), WithinAbs(8000.0, 1e-9));
    REQUIRE_THAT(auto_t_max(make_params(10, 1.0, 0.2, 0.002)), WithinAbs(4e4, 1e-9));

    REQUIRE(auto_samples(100.0) == 2000);
    REQUIRE(auto_samples(10000.0) == 4001);
    REQUIRE(auto_samples(1e6) == 16000);
}

TEST_CASE("ensemble runs are deterministic and seed-derived", "[ensemble]") {
    const EnsembleConfig cfg = small_config();
    const PointResult a = run_ensemble(cfg);
    const PointResult b = run_ensemble(cfg);

    REQUIRE(a.child_seeds.size() == 4);
    for (int r = 0; r < 4; ++r) REQUIRE(a.child_seeds[r] == child_seed(1717, r));

    REQUIRE(a.avg_c.values == b.avg_c.values); // bitwise
    REQUIRE(a.avg_f.values == b.avg_f.values);
    REQUIRE(a.c_inf == b.c_inf);

    EnsembleConfig threaded = cfg;
    threaded.workers = 3;
    const PointResult c = run_ensemble(threaded);
    REQUIRE(a.avg_c.values == c.avg_c.values); // merge order fixed by index

    EnsembleConfig other_seed = cfg;
    other_seed.master_seed = 1718;
    REQUIRE(run_ensemble(other_seed).avg_c.values != a.avg_c.values);
}

TEST_CASE("saturation statistics aggregate the per-realization values", "[ensemble]") {
    EnsembleConfig cfg = small_config();
    cfg.keep_series = true;
    const PointResult p = run_ensemble(cfg);

    REQUIRE(p.per_real_cinf.size() == 4);
    REQUIRE(p.realizations.size() == 4);
    REQUIRE(p.realizations[0].concurrence.size() == p.avg_c.times.size());

    double mean = 0.0;
    for (int r = 0; r < 4; ++r) {
        TimeSeries s{p.avg_c.times, p.realizations[r].concurrence, ""};
        REQUIRE_THAT(saturation_value(s, cfg.saturation_fraction),
                     WithinAbs(p.per_real_cinf[r], 1e-14));
        mean += p.per_real_cinf[r];
    }
    mean /= 4.0;
    REQUIRE_THAT(p.c_inf, WithinAbs(mean, 1e-14));

    double ss = 0.0;
    for (double ci : p.per_real_cinf) ss += (ci - mean) * (ci - mean);
    REQUIRE_THAT(p.c_inf_stderr, WithinAbs(std::sqrt(ss / 3.0) / 2.0, 1e-14));

    // The average curve saturation equals the mean by linearity.
    REQUIRE_THAT(saturation_value(p.avg_c, cfg.saturation_fraction), WithinAbs(p.c_inf, 1e-12));
}

TEST_CASE("decoupled lattice keeps the pair frozen", "[ensemble]") {
    EnsembleConfig cfg = small_config();
    cfg.params = make_params(6, 1.0, 0.2, 0.0); // J = 0
    cfg.n_realizations = 2;
    const PointResult p = run_ensemble(cfg);
    // The pair state stays maximally entangled; only the relative phase moves,
    // so fidelity oscillates while the concurrence is pinned at one.
    for (double v : p.avg_c.values) REQUIRE_THAT(v, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(p.avg_f.values.front(), WithinAbs(1.0, 1e-12));
    for (double v : p.avg_f.values) {
        REQUIRE(v >= -1e-12);
        REQUIRE(v <= 1.0 + 1e-12);
    }
    REQUIRE(!p.t_c.has_value());
    REQUIRE(p.stable);
    REQUIRE(p.extensions == 0);
}

TEST_CASE("full-register evolution matches the sector at gamma = 0", "[ensemble]") {
    EnsembleConfig cfg = small_config();
    cfg.params = make_params(6, 0.0, 0.2, 0.1);
    cfg.n_realizations = 2;
    cfg.grid.t_max = 30.0;
    cfg.grid.samples = 200;
    const PointResult sector = run_ensemble(cfg);
    EnsembleConfig full_cfg = cfg;
    full_cfg.evolution = Evolution::full;
    const PointResult full = run_ensemble(full_cfg);
    for (std::size_t i = 0; i < sector.avg_c.values.size(); ++i) {
        REQUIRE_THAT(full.avg_c.values[i], WithinAbs(sector.avg_c.values[i], 1e-9));
        REQUIRE_THAT(full.avg_f.values[i], WithinAbs(sector.avg_f.values[i], 1e-9));
    }
}

TEST_CASE("forced krylov reproduces the dense ensemble", "[ensemble]") {
    EnsembleConfig cfg = small_config();
    cfg.n_realizations = 2;
    cfg.grid.samples = 150;
    const PointResult dense = run_ensemble(cfg);
    EnsembleConfig kcfg = cfg;
    kcfg.propagator = PropagatorKind::krylov;
    const PointResult kry = run_ensemble(kcfg);
    for (std::size_t i = 0; i < dense.avg_c.values.size(); ++i)
        REQUIRE_THAT(kry.avg_c.values[i], WithinAbs(dense.avg_c.values[i], 1e-7));
}

TEST_CASE("scan inputs are validated", "[ensemble]") {
    const EnsembleConfig cfg = small_config();
    REQUIRE_THROWS_AS(scan_j(cfg, {}), config_error);
    REQUIRE_THROWS_AS(scan_j(cfg, {0.1, 0.05}), config_error);
    REQUIRE_THROWS_AS(scan_j(cfg, {-0.1, 0.05}), config_error);
    REQUIRE_THROWS_AS(scan_n(cfg, {5}, {0.05}), config_error);

    EnsembleConfig bad = cfg;
    bad.initial = "ghz";
    REQUIRE_THROWS_AS(run_ensemble(bad), config_error);
    bad = cfg;
    bad.tc_mode = "sometimes";
    REQUIRE_THROWS_AS(run_ensemble(bad), config_error);
}

TEST_CASE("size scans rebuild geometry and apply per-size counts", "[ensemble]") {
    EnsembleConfig cfg = small_config();
    cfg.n_realizations = 3;
    cfg.n_realizations_by_n[8] = 2;
    cfg.grid.t_max = 20.0;
    cfg.grid.samples = 120;
    const ScanResult scan = scan_n(cfg, {6, 8}, {0.05, 0.1});
    REQUIRE(scan.points.size() == 4);
    REQUIRE(scan.points[0].n == 6);
    REQUIRE(scan.points[0].j == 0.05);
    REQUIRE(scan.points[0].n_realizations == 3);
    REQUIRE(scan.points[2].n == 8);
    REQUIRE(scan.points[2].n_realizations == 2);
    REQUIRE(scan.points[3].j == 0.1);
}

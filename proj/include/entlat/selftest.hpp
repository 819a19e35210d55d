#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entlat/analysis.hpp"
#include "entlat/hamiltonian.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/lattice.hpp"
#include "entlat/observables.hpp"
#include "entlat/propagator.hpp"

// Quick oracle checks behind `entlat verify`: every item compares library
// output against an independent closed form or a second implementation.
// Sizes are capped at n = 8 so the whole battery stays under a minute.

namespace entlat::selftest {

struct CheckResult {
    bool ok = true;
    std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

inline CheckResult bound(double worst, double tol, const std::string& what) {
    if (worst <= tol) return {true, {}};
    return {false, what + " off by " + fmt(worst) + " (tol " + fmt(tol) + ")"};
}

inline Eigen::VectorXcd random_state(int dim, std::mt19937_64& eng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(eng), g(eng));
    v /= v.norm();
    return v;
}

// Partial trace written from scratch: group full-register amplitudes by the
// pattern of all qubits except (qa, qb), then sum outer products.
inline Eigen::Matrix4cd direct_pair_rho(const Eigen::VectorXcd& amps, int n, int qa, int qb) {
    const std::uint32_t ba = 1u << (n - qa);
    const std::uint32_t bb = 1u << (n - qb);
    std::map<std::uint32_t, std::array<cplx, 4>> groups;
    for (std::int64_t s = 0; s < amps.size(); ++s) {
        const auto u = static_cast<std::uint32_t>(s);
        const int p = ((u & ba) ? 2 : 0) | ((u & bb) ? 1 : 0);
        auto& slot = groups[u & ~(ba | bb)];
        slot[p] += amps[s];
    }
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (const auto& [rest, a] : groups)
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) rho(p, q) += a[p] * std::conj(a[q]);
    return rho;
}

} // namespace detail

// Werner family: C = max(0, (3p - 1)/2).
inline CheckResult check_werner_concurrence() {
    Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
    phi[0] = phi[3] = 1.0 / std::sqrt(2.0);
    double worst = 0.0;
    for (double p : {0.0, 0.25, 1.0 / 3.0, 0.4, 0.7, 1.0}) {
        const Eigen::Matrix4cd rho = p * (phi * phi.adjoint()) +
                                     (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity();
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        worst = std::max(worst, std::abs(concurrence(rho).value - expected));
    }
    return detail::bound(worst, 1e-9, "Werner concurrence");
}

// Pair reduction against the from-scratch partial trace, on full-register
// states and on sector states routed through the embedding.
inline CheckResult check_pair_reduction() {
    std::mt19937_64 eng(424242);
    double worst = 0.0;
    for (int n : {4, 6}) {
        const SectorBasis basis = build_sector_basis(n);
        for (int rep = 0; rep < 20; ++rep) {
            StateVector full{Basis::full, n, detail::random_state(1 << n, eng)};
            StateVector sect{Basis::sector, n, detail::random_state(basis.dim(), eng)};
            const StateVector emb = embed_sector(sect, basis);
            for (auto [qa, qb] : {std::pair{1, 2}, {2, 3}, {1, n}, {n - 1, n}}) {
                worst = std::max(worst,
                                 (reduce_to_pair(full, basis, qa, qb) -
                                  detail::direct_pair_rho(full.amps, n, qa, qb))
                                     .cwiseAbs()
                                     .maxCoeff());
                worst = std::max(worst,
                                 (reduce_to_pair(sect, basis, qa, qb) -
                                  detail::direct_pair_rho(emb.amps, n, qa, qb))
                                     .cwiseAbs()
                                     .maxCoeff());
            }
        }
    }
    return detail::bound(worst, 1e-12, "pair reduction");
}

// Two coupled sites against the closed-form Rabi solution.
inline CheckResult check_two_level_closed_form() {
    const ModelParams params = make_params(2);
    const LatticeGeometry geometry = build_geometry(params);
    const SectorBasis basis = build_sector_basis(2);
    DisorderRealization disorder;
    disorder.deltas = {0.07, -0.05};
    disorder.couplings = {0.2};
    const double d = disorder.deltas[0] - disorder.deltas[1];
    const double j = disorder.couplings[0];
    const SparseHamiltonian h = build_sector(params, geometry, disorder, basis);
    const StateVector psi0 = initial_state(basis, "separable");
    const TimeGrid grid = make_uniform_grid(60.0, 121);
    const TimeSeries oracle = two_qubit_oracle(d, j, grid);
    const auto states = evolve_exact(diagonalize(h), psi0, grid);
    const double omega2 = d * d + j * j;
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double t = grid.samples[i];
        const double sn = std::sin(std::sqrt(omega2) * t);
        const double w = (j * j / omega2) * sn * sn;
        const double c = concurrence(reduce_to_pair(states[i], basis, 1, 2)).value;
        worst = std::max(worst, std::abs(c - oracle.values[i]));
        worst = std::max(worst, std::abs(fidelity(psi0, states[i]) - (1.0 - w)));
    }
    return detail::bound(worst, 1e-9, "two-level closed form");
}

// Dense diagonalization and the Krylov stepper agree on n = 8.
inline CheckResult check_propagator_cross() {
    ModelParams params = make_params(8, 1.0, 0.2, 0.15);
    const LatticeGeometry geometry = build_geometry(params);
    const SectorBasis basis = build_sector_basis(8);
    const DisorderRealization disorder = draw_disorder(params, geometry, 77001);
    const SparseHamiltonian h = build_sector(params, geometry, disorder, basis);
    const StateVector psi0 = initial_state(basis, "bell");
    const TimeGrid grid = make_uniform_grid(20.0, 9);
    const auto dense = evolve_exact(diagonalize(h), psi0, grid);
    const auto kry = evolve_krylov(h, psi0, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i)
        worst = std::max(worst, (dense[i].amps - kry[i].amps).norm());
    return detail::bound(worst, 1e-8, "propagator cross-check");
}

// Pure two-qubit states: C = 2 |ad - bc|.
inline CheckResult check_pure_pair_concurrence() {
    std::mt19937_64 eng(90210);
    double worst = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
        const Eigen::VectorXcd v = detail::random_state(4, eng);
        const Eigen::Matrix4cd rho = v * v.adjoint();
        const double expected = 2.0 * std::abs(v[0] * v[3] - v[1] * v[2]);
        worst = std::max(worst, std::abs(concurrence(rho).value - expected));
    }
    return detail::bound(worst, 1e-10, "pure pair concurrence");
}

// With no double-flip term the sector evolution must match the full register
// exactly; the sector matrix itself must not depend on the anisotropy.
inline CheckResult check_sector_full_consistency() {
    ModelParams params = make_params(6, 0.0, 0.2, 0.12, 2);
    const LatticeGeometry geometry = build_geometry(params);
    const SectorBasis basis = build_sector_basis(6);
    const DisorderRealization disorder = draw_disorder(params, geometry, 31415);

    ModelParams iso = params;
    iso.gamma = 1.0;
    const Eigen::MatrixXd a = to_dense(build_sector(params, geometry, disorder, basis));
    const Eigen::MatrixXd b = to_dense(build_sector(iso, geometry, disorder, basis));
    if ((a - b).cwiseAbs().maxCoeff() != 0.0)
        return {false, "sector matrix depends on gamma"};

    const StateVector psi0 = initial_state(basis, "bell");
    const StateVector psi0_full = embed_sector(psi0, basis);
    const SparseHamiltonian h_s = build_sector(params, geometry, disorder, basis);
    const SparseHamiltonian h_f = build_full(params, geometry, disorder);
    const TimeGrid grid = make_uniform_grid(40.0, 17);
    const auto in_sector = evolve_exact(diagonalize(h_s), psi0, grid);
    const auto in_full = evolve_exact(diagonalize(h_f), psi0_full, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        const double cs = concurrence(reduce_to_pair(in_sector[i], basis, 1, 2)).value;
        const double cf = concurrence(reduce_to_pair(in_full[i], basis, 1, 2)).value;
        worst = std::max(worst, std::abs(cs - cf));
        worst = std::max(worst,
                         std::abs(fidelity(psi0, in_sector[i]) - fidelity(psi0_full, in_full[i])));
    }
    return detail::bound(worst, 1e-9, "sector vs full register");
}

// A single isolated bond with no detuning: f = cos^2(Jt), C = |sin 2Jt|, and
// the product-of-cosines fidelity model squared is exact.
inline CheckResult check_isolated_bond() {
    ModelParams params = make_params(2, 1.0, 0.0, 0.25);
    const LatticeGeometry geometry = build_geometry(params);
    const SectorBasis basis = build_sector_basis(2);
    DisorderRealization disorder;
    disorder.deltas = {0.0, 0.0};
    disorder.couplings = {0.25};
    const double j = disorder.couplings[0];
    const SparseHamiltonian h = build_full(params, geometry, disorder);
    const StateVector psi0 = embed_sector(initial_state(basis, "separable"), basis);
    const TimeGrid grid = make_uniform_grid(50.0, 101);
    const auto states = evolve_exact(diagonalize(h), psi0, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double t = grid.samples[i];
        const double f = fidelity(psi0, states[i]);
        const double c = concurrence(reduce_to_pair(states[i], basis, 1, 2)).value;
        const double cj = std::cos(j * t);
        worst = std::max(worst, std::abs(f - cj * cj));
        worst = std::max(worst, std::abs(c - std::abs(std::sin(2.0 * j * t))));
        const double model = model_fidelity_gaussian(disorder, t);
        worst = std::max(worst, std::abs(f - model * model));
    }
    return detail::bound(worst, 1e-9, "isolated bond");
}

struct Item {
    const char* name;
    CheckResult (*fn)();
};

inline const std::vector<Item>& items() {
    static const std::vector<Item> list = {
        {"werner_concurrence", check_werner_concurrence},
        {"pair_reduction_vs_direct_trace", check_pair_reduction},
        {"two_level_closed_form", check_two_level_closed_form},
        {"dense_vs_krylov_propagation", check_propagator_cross},
        {"pure_pair_concurrence", check_pure_pair_concurrence},
        {"sector_vs_full_register", check_sector_full_consistency},
        {"isolated_bond_exact_laws", check_isolated_bond},
    };
    return list;
}

inline bool run_all(std::ostream& out) {
    bool all = true;
    for (const auto& item : items()) {
        CheckResult r;
        try {
            r = item.fn();
        } catch (const std::exception& e) {
            r = {false, e.what()};
        }
        out << (r.ok ? "[PASS] " : "[FAIL] ") << item.name;
        if (!r.ok && !r.detail.empty()) out << ": " << r.detail;
        out << "\n";
        all = all && r.ok;
    }
    return all;
}

} // namespace entlat::selftest

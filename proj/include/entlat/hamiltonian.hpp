#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "entlat/errors.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/lattice.hpp"

namespace entlat {

// H = sum_i Delta_i sigma_i^z + sum_bonds J_ij [ (1+gamma)/2 XX + (1-gamma)/2 YY ]
// with Delta_i = delta0 + delta_i. Off-diagonal structure: J_ij between
// states differing by 01<->10 on a bond (flip-flop) and gamma*J_ij between
// 00<->11 (double flip). Everything is real symmetric.
struct SparseHamiltonian {
    Basis basis = Basis::sector;
    int n = 0;
    std::int64_t dimension = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    ModelParams params;
    DisorderRealization disorder;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
        if (v.size() != dimension) throw dimension_error("apply: vector does not match H");
        const Eigen::VectorXd re = matrix * v.real();
        const Eigen::VectorXd im = matrix * v.imag();
        Eigen::VectorXcd out(dimension);
        out.real() = re;
        out.imag() = im;
        return out;
    }

    StateVector apply(const StateVector& psi) const {
        if (psi.basis != basis) throw dimension_error("apply: basis mismatch");
        return StateVector{psi.basis, psi.n, apply(psi.amps)};
    }
};

inline double diagonal_energy(std::uint32_t s, int n, double delta0,
                              const std::vector<double>& deltas) {
    double e = 0.0;
    for (int q = 1; q <= n; ++q)
        e += (delta0 + deltas[q - 1]) * (1 - 2 * bit_of(s, n, q));
    return e;
}

namespace detail {

inline void check_build_inputs(const ModelParams& params, const LatticeGeometry& geometry,
                               const DisorderRealization& disorder) {
    params.validate();
    if (geometry.n != params.n)
        throw dimension_error("geometry does not match params.n");
    if (disorder.deltas.size() != static_cast<std::size_t>(params.n) ||
        disorder.couplings.size() != geometry.bonds.size())
        throw dimension_error("disorder arrays do not match the geometry");
}

} // namespace detail

// Full 2^n register space, both coupling channels present.
inline SparseHamiltonian build_full(const ModelParams& params, const LatticeGeometry& geometry,
                                    const DisorderRealization& disorder) {
    detail::check_build_inputs(params, geometry, disorder);
    if (params.n > max_qubits)
        throw dimension_error("n exceeds the exact-diagonalization cap");
    SparseHamiltonian h;
    h.basis = Basis::full;
    h.n = params.n;
    h.dimension = std::int64_t(1) << params.n;
    h.params = params;
    h.disorder = disorder;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(h.dimension) * (1 + geometry.bonds.size()));
    for (std::int64_t s = 0; s < h.dimension; ++s) {
        const auto reg = static_cast<std::uint32_t>(s);
        trip.emplace_back(s, s, diagonal_energy(reg, h.n, params.delta0, disorder.deltas));
        for (std::size_t b = 0; b < geometry.bonds.size(); ++b) {
            const std::uint32_t mask = (1u << bit_shift(h.n, geometry.bonds[b].a)) |
                                       (1u << bit_shift(h.n, geometry.bonds[b].b));
            const std::uint32_t other = reg ^ mask;
            const bool aligned = std::popcount(reg & mask) != 1;
            const double v = aligned ? params.gamma * disorder.couplings[b]
                                     : disorder.couplings[b];
            if (v != 0.0) trip.emplace_back(s, static_cast<std::int64_t>(other), v);
        }
    }
    h.matrix.resize(h.dimension, h.dimension);
    h.matrix.setFromTriplets(trip.begin(), trip.end());
    h.matrix.makeCompressed();
    return h;
}

// Projection onto the zero-magnetization sector. Double-flip terms change the
// magnetization by +-2 and drop out exactly, so the result has no gamma
// dependence at all.
inline SparseHamiltonian build_sector(const ModelParams& params, const LatticeGeometry& geometry,
                                      const DisorderRealization& disorder,
                                      const SectorBasis& basis) {
    detail::check_build_inputs(params, geometry, disorder);
    if (basis.n != params.n) throw dimension_error("sector basis does not match params.n");
    SparseHamiltonian h;
    h.basis = Basis::sector;
    h.n = params.n;
    h.dimension = basis.dim();
    h.params = params;
    h.disorder = disorder;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(h.dimension) * (1 + geometry.bonds.size() / 2));
    for (int a = 0; a < basis.dim(); ++a) {
        const std::uint32_t reg = basis.states[a];
        trip.emplace_back(a, a, diagonal_energy(reg, h.n, params.delta0, disorder.deltas));
        for (std::size_t b = 0; b < geometry.bonds.size(); ++b) {
            const std::uint32_t mask = (1u << bit_shift(h.n, geometry.bonds[b].a)) |
                                       (1u << bit_shift(h.n, geometry.bonds[b].b));
            if (std::popcount(reg & mask) != 1) continue;
            if (disorder.couplings[b] == 0.0) continue;
            trip.emplace_back(a, basis.index_of(reg ^ mask), disorder.couplings[b]);
        }
    }
    h.matrix.resize(h.dimension, h.dimension);
    h.matrix.setFromTriplets(trip.begin(), trip.end());
    h.matrix.makeCompressed();
    return h;
}

inline double energy_expectation(const SparseHamiltonian& h, const Eigen::VectorXcd& v) {
    return v.dot(h.apply(v)).real();
}

// Gershgorin bound on the spectral radius; used to size Krylov substeps.
inline double norm_bound(const SparseHamiltonian& h) {
    double best = 0.0;
    for (std::int64_t r = 0; r < h.matrix.outerSize(); ++r) {
        double row = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(h.matrix, r); it;
             ++it)
            row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

inline Eigen::MatrixXd to_dense(const SparseHamiltonian& h) {
    return Eigen::MatrixXd(h.matrix);
}

} // namespace entlat

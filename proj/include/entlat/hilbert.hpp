#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entlat/errors.hpp"

namespace entlat {

using cplx = std::complex<double>;

// Exact diagonalization cap: 2^20 register states, sector dim 184756.
inline constexpr int max_qubits = 20;

// Register convention: qubit 1 occupies the most significant bit, so the
// register reads left to right like the ket |q1 q2 ... qn>. Bit value 0 is
// sigma^z = +1.
inline int bit_shift(int n, int qubit) { return n - qubit; }

inline int bit_of(std::uint32_t s, int n, int qubit) {
    return (s >> bit_shift(n, qubit)) & 1u;
}

// Zero total magnetization subspace: register states with exactly n/2 set
// bits, kept in ascending order so membership is a binary search.
struct SectorBasis {
    int n = 0;
    std::vector<std::uint32_t> states;

    int dim() const { return static_cast<int>(states.size()); }

    int index_of(std::uint32_t s) const {
        auto it = std::lower_bound(states.begin(), states.end(), s);
        if (it == states.end() || *it != s)
            throw dimension_error("register state " + std::to_string(s) +
                                  " is not in the zero-magnetization sector");
        return static_cast<int>(it - states.begin());
    }

    bool contains(std::uint32_t s) const {
        return std::binary_search(states.begin(), states.end(), s);
    }
};

inline SectorBasis build_sector_basis(int n) {
    if (n < 2 || n % 2 != 0 || n > max_qubits)
        throw dimension_error("sector basis needs even n in [2," +
                              std::to_string(max_qubits) + "], got " + std::to_string(n));
    SectorBasis b;
    b.n = n;
    const std::uint32_t top = 1u << n;
    const int half = n / 2;
    for (std::uint32_t s = 0; s < top; ++s)
        if (std::popcount(s) == half) b.states.push_back(s);
    return b;
}

enum class Basis { full, sector };

struct StateVector {
    Basis basis = Basis::sector;
    int n = 0;
    Eigen::VectorXcd amps;
};

// |0101...>: odd qubits up, even qubits down. Zero magnetization for even n.
inline std::uint32_t alternating_pattern(int n) {
    std::uint32_t s = 0;
    for (int q = 2; q <= n; q += 2) s |= 1u << bit_shift(n, q);
    return s;
}

// kind "separable": the alternating product state. kind "bell": qubits 1 and
// 2 replaced by (|01> + |10>)/sqrt(2); both branches stay in the sector.
inline StateVector initial_state(const SectorBasis& basis, const std::string& kind) {
    StateVector psi;
    psi.basis = Basis::sector;
    psi.n = basis.n;
    psi.amps = Eigen::VectorXcd::Zero(basis.dim());
    const std::uint32_t alt = alternating_pattern(basis.n);
    if (kind == "separable") {
        psi.amps[basis.index_of(alt)] = 1.0;
    } else if (kind == "bell") {
        const std::uint32_t b1 = 1u << bit_shift(basis.n, 1);
        const std::uint32_t b2 = 1u << bit_shift(basis.n, 2);
        const std::uint32_t s01 = (alt & ~(b1 | b2)) | b2;
        const std::uint32_t s10 = (alt & ~(b1 | b2)) | b1;
        const double r = 1.0 / std::sqrt(2.0);
        psi.amps[basis.index_of(s01)] = r;
        psi.amps[basis.index_of(s10)] = r;
    } else {
        throw config_error("unknown initial state kind '" + kind + "'");
    }
    return psi;
}

inline StateVector embed_sector(const StateVector& psi, const SectorBasis& basis) {
    if (psi.basis != Basis::sector || psi.amps.size() != basis.dim())
        throw dimension_error("embed_sector expects a sector state matching the basis");
    StateVector out;
    out.basis = Basis::full;
    out.n = basis.n;
    out.amps = Eigen::VectorXcd::Zero(std::int64_t(1) << basis.n);
    for (int i = 0; i < basis.dim(); ++i) out.amps[basis.states[i]] = psi.amps[i];
    return out;
}

// Keeps the sector components; anything outside the sector above `tol`
// (norm lost, squared amplitude) is an error rather than silent truncation.
inline StateVector project_sector(const StateVector& psi, const SectorBasis& basis,
                                  double tol = 1e-10) {
    if (psi.basis != Basis::full || psi.amps.size() != (std::int64_t(1) << basis.n))
        throw dimension_error("project_sector expects a full-register state");
    StateVector out;
    out.basis = Basis::sector;
    out.n = basis.n;
    out.amps.resize(basis.dim());
    double kept = 0.0;
    for (int i = 0; i < basis.dim(); ++i) {
        out.amps[i] = psi.amps[basis.states[i]];
        kept += std::norm(out.amps[i]);
    }
    const double lost = psi.amps.squaredNorm() - kept;
    if (lost > tol)
        throw data_loss_error("projection would discard squared norm " + std::to_string(lost));
    return out;
}

// Removes the bits at shifts p_hi > p_lo and packs the remaining n-2 bits.
inline std::uint32_t drop_two_bits(std::uint32_t s, int p_hi, int p_lo) {
    const std::uint32_t low = s & ((1u << p_lo) - 1u);
    const std::uint32_t mid = (s >> (p_lo + 1)) & ((1u << (p_hi - p_lo - 1)) - 1u);
    const std::uint32_t high = s >> (p_hi + 1);
    return low | (mid << p_lo) | (high << (p_hi - 1));
}

namespace detail {

// Shared core: the reduced state of qubits (qa, qb) is rho = A A^dag where
// A[p][rest] collects amplitudes by pair value p = (va<<1)|vb and the
// packed state of the remaining qubits.
template <class EachState>
Eigen::Matrix4cd pair_density_from(int n, int qa, int qb, std::int64_t rest_dim,
                                   EachState&& for_each) {
    if (qa == qb || qa < 1 || qb < 1 || qa > n || qb > n)
        throw dimension_error("pair reduction needs two distinct qubits in [1,n]");
    const int pa = bit_shift(n, qa);
    const int pb = bit_shift(n, qb);
    const int p_hi = std::max(pa, pb);
    const int p_lo = std::min(pa, pb);
    std::vector<cplx> amp(static_cast<std::size_t>(4 * rest_dim), cplx(0.0, 0.0));
    for_each([&](std::uint32_t s, cplx a) {
        const int va = (s >> pa) & 1u;
        const int vb = (s >> pb) & 1u;
        const std::uint32_t rest = drop_two_bits(s, p_hi, p_lo);
        amp[static_cast<std::size_t>(rest) * 4 + (va << 1 | vb)] += a;
    });
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (std::int64_t r = 0; r < rest_dim; ++r) {
        const cplx* col = amp.data() + r * 4;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) rho(p, q) += col[p] * std::conj(col[q]);
    }
    return rho;
}

} // namespace detail

// Reduced 4x4 density matrix of qubits (qa, qb) in the |va vb> product
// ordering 00, 01, 10, 11.
inline Eigen::Matrix4cd reduce_to_pair(const StateVector& psi, const SectorBasis& basis,
                                       int qa, int qb) {
    const std::int64_t rest_dim = std::int64_t(1) << (basis.n - 2);
    if (psi.basis == Basis::sector) {
        if (psi.amps.size() != basis.dim())
            throw dimension_error("state size does not match sector basis");
        return detail::pair_density_from(basis.n, qa, qb, rest_dim, [&](auto&& emit) {
            for (int i = 0; i < basis.dim(); ++i) emit(basis.states[i], psi.amps[i]);
        });
    }
    if (psi.amps.size() != (std::int64_t(1) << basis.n))
        throw dimension_error("state size does not match full register");
    return detail::pair_density_from(basis.n, qa, qb, rest_dim, [&](auto&& emit) {
        for (std::int64_t s = 0; s < psi.amps.size(); ++s)
            emit(static_cast<std::uint32_t>(s), psi.amps[s]);
    });
}

// Reusable reduction kernel for time loops: precomputes the
// (pair value, rest pattern) split per basis state and keeps its scratch
// buffer across calls.
class PairReducer {
public:
    PairReducer(const SectorBasis& basis, Basis tag, int qa = 1, int qb = 2) {
        const int n = basis.n;
        if (qa == qb || qa < 1 || qb < 1 || qa > n || qb > n)
            throw dimension_error("pair reduction needs two distinct qubits in [1,n]");
        const int pa = bit_shift(n, qa);
        const int pb = bit_shift(n, qb);
        const int p_hi = std::max(pa, pb);
        const int p_lo = std::min(pa, pb);
        const std::int64_t dim =
            tag == Basis::sector ? basis.dim() : (std::int64_t(1) << n);
        slot_.resize(dim);
        for (std::int64_t i = 0; i < dim; ++i) {
            const std::uint32_t s =
                tag == Basis::sector ? basis.states[i] : static_cast<std::uint32_t>(i);
            const int p = ((s >> pa) & 1u) << 1 | ((s >> pb) & 1u);
            slot_[i] = static_cast<std::size_t>(drop_two_bits(s, p_hi, p_lo)) * 4 + p;
        }
        amp_.resize(std::size_t(4) << (n - 2));
    }

    Eigen::Matrix4cd operator()(const Eigen::VectorXcd& amps) {
        if (amps.size() != static_cast<Eigen::Index>(slot_.size()))
            throw dimension_error("state size does not match pair reducer");
        std::fill(amp_.begin(), amp_.end(), cplx(0.0, 0.0));
        for (std::size_t i = 0; i < slot_.size(); ++i) amp_[slot_[i]] += amps[i];
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        for (std::size_t r = 0; r < amp_.size(); r += 4) {
            const cplx* col = amp_.data() + r;
            for (int p = 0; p < 4; ++p) {
                if (col[p] == cplx(0.0, 0.0)) continue;
                for (int q = 0; q < 4; ++q) rho(p, q) += col[p] * std::conj(col[q]);
            }
        }
        return rho;
    }

private:
    std::vector<std::size_t> slot_;
    std::vector<cplx> amp_;
};

// <sum_i sigma_i^z> = sum_s |psi_s|^2 (n - 2 popcount(s)).
inline double magnetization(const StateVector& psi, const SectorBasis& basis) {
    double m = 0.0;
    if (psi.basis == Basis::sector) {
        for (int i = 0; i < basis.dim(); ++i)
            m += std::norm(psi.amps[i]) * (basis.n - 2 * std::popcount(basis.states[i]));
    } else {
        for (std::int64_t s = 0; s < psi.amps.size(); ++s)
            m += std::norm(psi.amps[s]) *
                 (basis.n - 2 * std::popcount(static_cast<std::uint32_t>(s)));
    }
    return m;
}

} // namespace entlat

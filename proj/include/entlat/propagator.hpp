#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entlat/errors.hpp"
#include "entlat/hamiltonian.hpp"
#include "entlat/hilbert.hpp"

namespace entlat {

struct Eigensystem {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // orthonormal columns
};

struct TimeGrid {
    double t_max = 0.0;
    std::vector<double> samples; // starts at 0, strictly increasing, ends at t_max

    void validate() const {
        if (samples.empty() || samples.front() != 0.0)
            throw config_error("time grid must start at t = 0");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (samples[i] <= samples[i - 1])
                throw config_error("time grid samples must be strictly increasing");
        if (samples.back() != t_max)
            throw config_error("time grid must end at t_max");
    }
};

inline TimeGrid make_uniform_grid(double t_max, int count) {
    if (t_max <= 0.0 || count < 2) throw config_error("uniform grid needs t_max > 0, count >= 2");
    TimeGrid g;
    g.samples.resize(count);
    const double dt = t_max / (count - 1);
    for (int i = 0; i < count; ++i) g.samples[i] = dt * i;
    g.samples.back() = t_max;
    g.t_max = t_max;
    return g;
}

// Log-spaced positive samples with t = 0 prepended; useful for short-time laws.
inline TimeGrid make_log_grid(double t_min, double t_max, int count) {
    if (!(0.0 < t_min && t_min < t_max) || count < 2)
        throw config_error("log grid needs 0 < t_min < t_max, count >= 2");
    TimeGrid g;
    g.samples.reserve(count + 1);
    g.samples.push_back(0.0);
    const double step = std::log(t_max / t_min) / (count - 1);
    for (int i = 0; i < count; ++i) g.samples.push_back(t_min * std::exp(step * i));
    g.samples.back() = t_max;
    g.t_max = t_max;
    g.validate();
    return g;
}

inline constexpr int default_dense_cap = 4096;

// Full real-symmetric eigendecomposition. Above the dense cap the cubic cost
// leaves desk scale; callers should switch to evolve_krylov.
inline Eigensystem diagonalize(const SparseHamiltonian& h, int dense_cap = default_dense_cap) {
    if (h.dimension > dense_cap)
        throw dimension_error("dimension " + std::to_string(h.dimension) +
                              " exceeds the dense cap " + std::to_string(dense_cap) +
                              "; use the Krylov propagator");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_dense(h));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// psi(t) = V diag(exp(-i E t)) V^T psi(0), evaluated in sample chunks so the
// two inner products per chunk run as real matrix products.
template <class Visitor>
void evolve_exact_visit(const Eigensystem& es, const Eigen::VectorXcd& psi0,
                        const TimeGrid& grid, Visitor&& visit, int chunk = 256) {
    grid.validate();
    const auto dim = es.eigenvalues.size();
    if (psi0.size() != dim) throw dimension_error("state does not match eigensystem");
    const Eigen::VectorXd c_re = es.eigenvectors.transpose() * psi0.real();
    const Eigen::VectorXd c_im = es.eigenvectors.transpose() * psi0.imag();
    const int total = static_cast<int>(grid.samples.size());
    Eigen::MatrixXd p_re(dim, chunk), p_im(dim, chunk);
    for (int s0 = 0; s0 < total; s0 += chunk) {
        const int cols = std::min(chunk, total - s0);
        for (int j = 0; j < cols; ++j) {
            const double t = grid.samples[s0 + j];
            for (Eigen::Index k = 0; k < dim; ++k) {
                const double th = es.eigenvalues[k] * t;
                const double c = std::cos(th), s = std::sin(th);
                p_re(k, j) = c_re[k] * c + c_im[k] * s;
                p_im(k, j) = c_im[k] * c - c_re[k] * s;
            }
        }
        const Eigen::MatrixXd u_re = es.eigenvectors * p_re.leftCols(cols);
        const Eigen::MatrixXd u_im = es.eigenvectors * p_im.leftCols(cols);
        Eigen::VectorXcd psi(dim);
        for (int j = 0; j < cols; ++j) {
            psi.real() = u_re.col(j);
            psi.imag() = u_im.col(j);
            visit(s0 + j, grid.samples[s0 + j], psi);
        }
    }
}

inline std::vector<StateVector> evolve_exact(const Eigensystem& es, const StateVector& psi0,
                                             const TimeGrid& grid) {
    std::vector<StateVector> out(grid.samples.size());
    evolve_exact_visit(es, psi0.amps, grid,
                       [&](int i, double, const Eigen::VectorXcd& psi) {
                           out[i] = StateVector{psi0.basis, psi0.n, psi};
                       });
    return out;
}

struct KrylovOptions {
    int order = 30;          // Lanczos subspace size per substep
    double local_tol = 1e-11;
    double max_theta = 8.0;  // bound on dt * ||H|| per substep
    int max_splits = 30;
};

namespace detail {

struct LanczosBasis {
    Eigen::MatrixXcd v; // dim x k orthonormal
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta; // k-1 entries
    int k = 0;
    bool breakdown = false;
};

inline LanczosBasis lanczos(const SparseHamiltonian& h, const Eigen::VectorXcd& start,
                            int m, double scale) {
    const auto dim = start.size();
    LanczosBasis b;
    m = static_cast<int>(std::min<std::int64_t>(m, dim));
    b.v.resize(dim, m);
    b.alpha.resize(m);
    b.beta.resize(std::max(0, m - 1));
    b.v.col(0) = start;
    Eigen::VectorXcd w;
    for (int j = 0; j < m; ++j) {
        w = h.apply(b.v.col(j));
        b.alpha[j] = w.dot(b.v.col(j)).real();
        w -= b.alpha[j] * b.v.col(j);
        if (j > 0) w -= b.beta[j - 1] * b.v.col(j - 1);
        // one full re-orthogonalization pass keeps the basis clean at these sizes
        w -= b.v.leftCols(j + 1) * (b.v.leftCols(j + 1).adjoint() * w);
        b.k = j + 1;
        if (j + 1 == m) break;
        const double nb = w.norm();
        if (nb <= 1e-13 * scale) {
            b.breakdown = true; // invariant subspace: the small problem is exact
            break;
        }
        b.beta[j] = nb;
        b.v.col(j + 1) = w / nb;
    }
    return b;
}

// One Krylov substep of exp(-i H dt) acting on psi (any sign of dt); splits
// the step recursively until the subspace error estimate passes local_tol.
inline void krylov_substep(const SparseHamiltonian& h, Eigen::VectorXcd& psi, double dt,
                           const KrylovOptions& opt, double hnorm, int depth) {
    const double nrm = psi.norm();
    if (nrm == 0.0) return;
    LanczosBasis lb = lanczos(h, psi / nrm, opt.order, std::max(hnorm, 1.0));
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(lb.k, lb.k);
    for (int i = 0; i < lb.k; ++i) {
        t(i, i) = lb.alpha[i];
        if (i + 1 < lb.k) t(i, i + 1) = t(i + 1, i) = lb.beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const Eigen::VectorXd first = small.eigenvectors().row(0);
    Eigen::VectorXcd y(lb.k);
    for (int i = 0; i < lb.k; ++i) {
        const cplx phase(std::cos(small.eigenvalues()[i] * dt),
                         -std::sin(small.eigenvalues()[i] * dt));
        y[i] = phase * first[i];
    }
    y = small.eigenvectors() * y;
    const double err = lb.breakdown ? 0.0 : std::abs(y[lb.k - 1]);
    if (err > opt.local_tol && depth < opt.max_splits) {
        krylov_substep(h, psi, dt / 2, opt, hnorm, depth + 1);
        krylov_substep(h, psi, dt / 2, opt, hnorm, depth + 1);
        return;
    }
    psi = lb.v.leftCols(lb.k) * (nrm * y);
    psi /= psi.norm();
}

} // namespace detail

// Propagates psi by an arbitrary time offset (either sign) in Krylov substeps.
inline void krylov_propagate(const SparseHamiltonian& h, Eigen::VectorXcd& psi, double dt,
                             const KrylovOptions& opt = {}, double hnorm_hint = 0.0) {
    if (opt.order < 4) throw config_error("Krylov order must be >= 4");
    if (dt == 0.0) return;
    const double hnorm = hnorm_hint > 0.0 ? hnorm_hint : norm_bound(h);
    const int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) * hnorm / opt.max_theta)));
    const double step = dt / nsub;
    for (int i = 0; i < nsub; ++i) detail::krylov_substep(h, psi, step, opt, hnorm, 0);
}

template <class Visitor>
void evolve_krylov_visit(const SparseHamiltonian& h, const Eigen::VectorXcd& psi0,
                         const TimeGrid& grid, Visitor&& visit,
                         const KrylovOptions& opt = {}) {
    grid.validate();
    if (psi0.size() != h.dimension) throw dimension_error("state does not match H");
    const double hnorm = norm_bound(h);
    Eigen::VectorXcd psi = psi0;
    visit(0, 0.0, psi);
    for (std::size_t i = 1; i < grid.samples.size(); ++i) {
        krylov_propagate(h, psi, grid.samples[i] - grid.samples[i - 1], opt, hnorm);
        visit(static_cast<int>(i), grid.samples[i], psi);
    }
}

inline std::vector<StateVector> evolve_krylov(const SparseHamiltonian& h, const StateVector& psi0,
                                              const TimeGrid& grid,
                                              const KrylovOptions& opt = {}) {
    std::vector<StateVector> out(grid.samples.size());
    evolve_krylov_visit(h, psi0.amps, grid,
                        [&](int i, double, const Eigen::VectorXcd& psi) {
                            out[i] = StateVector{psi0.basis, psi0.n, psi};
                        },
                        opt);
    return out;
}

} // namespace entlat

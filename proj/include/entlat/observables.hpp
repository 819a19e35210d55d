#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entlat/errors.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/propagator.hpp"

namespace entlat {

struct ConcurrenceResult {
    double value = 0.0;
    std::array<double, 4> lambdas{}; // descending
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string label;

    void validate() const {
        if (times.size() != values.size())
            throw dimension_error("time series length mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] <= times[i - 1])
                throw dimension_error("time series times must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw numeric_error("time series value not finite");
    }
};

// Order-of-magnitude regime scales; annotation only, no fitted constants.
struct RegimeEstimates {
    double j_p = 0.0;     // perturbative border delta/n
    double j_e = 0.0;     // ergodic border delta
    double gamma_c = 0.0; // FGR concurrence rate J^2/delta
    double rho_c = 0.0;   // 1/delta
    double rho_f = 0.0;   // n/delta
    bool valid = false;   // false when delta = 0
};

namespace detail {

inline Eigen::Matrix4cd sqrt_psd(const Eigen::Matrix4cd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(m);
    Eigen::Vector4d ev = solver.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        if (ev[i] < -1e-10)
            throw numeric_error(std::string(what) + ": eigenvalue " + std::to_string(ev[i]) +
                                " below -1e-10");
        ev[i] = ev[i] < 1e-12 ? 0.0 : std::sqrt(ev[i]);
    }
    return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}

// sigma^y x sigma^y in the standard basis: antidiagonal (-1, 1, 1, -1).
inline Eigen::Matrix4d spin_flip_matrix() {
    Eigen::Matrix4d y = Eigen::Matrix4d::Zero();
    y(0, 3) = -1.0;
    y(1, 2) = 1.0;
    y(2, 1) = 1.0;
    y(3, 0) = -1.0;
    return y;
}

// Core kept separate so a deliberately wrong flip matrix can be injected by
// the mutation test in the oracle suite.
inline ConcurrenceResult concurrence_with_flip(const Eigen::Matrix4cd& rho,
                                               const Eigen::Matrix4d& flip) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw numeric_error("concurrence input is not Hermitian within tolerance");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-10)
        throw numeric_error("concurrence input trace deviates from 1 beyond tolerance");
    const Eigen::Matrix4cd herm = 0.5 * (rho + rho.adjoint());
    const Eigen::Matrix4cd root = sqrt_psd(herm, "density matrix");
    const Eigen::Matrix4cd tilde = flip.cast<cplx>() * herm.conjugate() * flip.cast<cplx>();
    Eigen::Matrix4cd prod = root * tilde * root;
    prod = 0.5 * (prod + prod.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(prod);
    ConcurrenceResult out;
    for (int i = 0; i < 4; ++i) {
        double mu = solver.eigenvalues()[i];
        if (mu < -1e-10)
            throw numeric_error("rho * rho-tilde eigenvalue " + std::to_string(mu) +
                                " below -1e-10");
        // Rank-deficient rho leaves exact zeros here that come back as
        // +-O(eps); the square root would blow them up to ~1e-8, so anything
        // at rounding level counts as zero.
        out.lambdas[i] = mu < 1e-12 ? 0.0 : std::sqrt(mu);
    }
    std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());
    out.value = std::max(out.lambdas[0] - out.lambdas[1] - out.lambdas[2] - out.lambdas[3], 0.0);
    return out;
}

} // namespace detail

// Wootters concurrence via the Hermitian route sqrt(rho) rho~ sqrt(rho).
inline ConcurrenceResult concurrence(const Eigen::Matrix4cd& rho) {
    return detail::concurrence_with_flip(rho, detail::spin_flip_matrix());
}

// f = |<psi0|psit>|^2.
inline double fidelity(const StateVector& psi0, const StateVector& psit) {
    if (psi0.basis != psit.basis || psi0.n != psit.n || psi0.amps.size() != psit.amps.size())
        throw dimension_error("fidelity operands live in different bases");
    return std::norm(psi0.amps.dot(psit.amps));
}

// Shannon entropy (base 2) of each eigenvector's squared amplitudes over the
// register states of its basis; S ~ log2(dim) signals ergodicity.
inline Eigen::VectorXd eigenstate_entropy(const Eigensystem& es) {
    const auto dim = es.eigenvectors.cols();
    Eigen::VectorXd s(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < es.eigenvectors.rows(); ++a) {
            const double w = es.eigenvectors(a, i) * es.eigenvectors(a, i);
            if (w > 0.0) acc -= w * std::log2(w);
        }
        s[i] = acc;
    }
    return s;
}

namespace detail {

// Trapezoidal time average of the samples in [t_lo, t_hi].
inline double window_average(const TimeSeries& series, double t_lo, double t_hi) {
    const auto& t = series.times;
    const auto& v = series.values;
    if (t.empty() || t_hi < t.front())
        throw dimension_error("saturation window lies outside the series");
    const std::size_t i0 = std::lower_bound(t.begin(), t.end(), t_lo) - t.begin();
    std::size_t last = std::upper_bound(t.begin(), t.end(), t_hi) - t.begin() - 1;
    if (last < i0 || last - i0 + 1 < 10)
        throw dimension_error("saturation window holds fewer than 10 samples");
    double integral = 0.0;
    for (std::size_t i = i0 + 1; i <= last; ++i)
        integral += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    return integral / (t[last] - t[i0]);
}

} // namespace detail

// Trailing time average over the final fraction of the grid.
inline double saturation_value(const TimeSeries& series, double fraction = 0.1) {
    series.validate();
    if (fraction <= 0.0 || fraction > 1.0)
        throw config_error("saturation fraction must lie in (0,1]");
    const double t_end = series.times.back();
    const double t_lo = t_end - fraction * (t_end - series.times.front());
    return detail::window_average(series, t_lo, t_end);
}

// Same trailing average, but pretending the series stopped at t_end_prefix.
// Comparing against the full-grid value implements the "double t_max and see
// if C_inf moves" stability check.
inline double saturation_value_prefix(const TimeSeries& series, double t_end_prefix,
                                      double fraction = 0.1) {
    series.validate();
    const double t_lo = t_end_prefix - fraction * (t_end_prefix - series.times.front());
    return detail::window_average(series, t_lo, t_end_prefix);
}

// First crossing below the threshold, linearly interpolated; absence of a
// crossing is a valid outcome.
inline std::optional<double> concurrence_timescale(const TimeSeries& series,
                                                   double threshold = 0.96) {
    series.validate();
    const auto& t = series.times;
    const auto& v = series.values;
    if (v.empty()) return std::nullopt;
    if (v.front() < threshold) return t.front();
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < threshold) {
            const double frac = (threshold - v[i - 1]) / (v[i] - v[i - 1]);
            return t[i - 1] + frac * (t[i] - t[i - 1]);
        }
    }
    return std::nullopt;
}

} // namespace entlat

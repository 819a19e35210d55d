#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "entlat/errors.hpp"
#include "entlat/lattice.hpp"
#include "entlat/observables.hpp"

namespace entlat {

struct FitParam {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
};

struct FitResult {
    std::string model;
    double window_lo = 0.0, window_hi = 0.0;
    std::vector<FitParam> params;
    double residual_norm = 0.0;
    int points_used = 0;
    int points_excluded = 0; // nonpositive values dropped with a warning
};

namespace detail {

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double slope_err = 0.0, intercept_err = 0.0;
    double residual_norm = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw config_error("degenerate fit window: no spread in x");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual_norm = std::sqrt(ss);
    if (n > 2) {
        const double var = ss / (n - 2);
        f.slope_err = std::sqrt(var / sxx);
        f.intercept_err = std::sqrt(var * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

} // namespace detail

// Least-squares line in log-log coordinates: y = prefactor * x^exponent.
inline FitResult fit_power_law(const std::vector<std::pair<double, double>>& table,
                               double window_lo, double window_hi) {
    std::vector<double> lx, ly;
    int excluded = 0;
    for (const auto& [x, y] : table) {
        if (x < window_lo || x > window_hi) continue;
        if (x <= 0.0 || y <= 0.0) {
            ++excluded;
            continue;
        }
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    if (lx.size() < 4)
        throw config_error("degenerate fit window: fewer than 4 usable points");
    const auto line = detail::least_squares_line(lx, ly);
    FitResult out;
    out.model = "power_law";
    out.window_lo = window_lo;
    out.window_hi = window_hi;
    out.params = {{"exponent", line.slope, line.slope_err},
                  {"prefactor", std::exp(line.intercept), std::exp(line.intercept) * line.intercept_err}};
    out.residual_norm = line.residual_norm;
    out.points_used = static_cast<int>(lx.size());
    out.points_excluded = excluded;
    return out;
}

// ln C_inf regressed on J: C_inf(J) = exp(-A (J - J0)).
inline FitResult fit_exponential_cinf(const std::vector<std::pair<double, double>>& table,
                                      double window_lo, double window_hi) {
    std::vector<double> xs, ys;
    int excluded = 0;
    for (const auto& [j, c] : table) {
        if (j < window_lo || j > window_hi) continue;
        if (c <= 0.0) {
            ++excluded;
            continue;
        }
        xs.push_back(j);
        ys.push_back(std::log(c));
    }
    if (xs.size() < 3)
        throw config_error("degenerate fit window: fewer than 3 usable points");
    const auto line = detail::least_squares_line(xs, ys);
    const double a = -line.slope;
    if (a == 0.0) throw config_error("degenerate fit: zero decay slope");
    const double j0 = line.intercept / a;
    const double j0_err =
        std::abs(j0) * std::sqrt(std::pow(line.intercept_err / std::max(std::abs(line.intercept),
                                                                        1e-300), 2) +
                                 std::pow(line.slope_err / a, 2));
    FitResult out;
    out.model = "exponential_cinf";
    out.window_lo = window_lo;
    out.window_hi = window_hi;
    out.params = {{"A", a, line.slope_err}, {"J0", j0, j0_err}};
    out.residual_norm = line.residual_norm;
    out.points_used = static_cast<int>(xs.size());
    out.points_excluded = excluded;
    return out;
}

// Strong-coupling reference curve: product of cos(J_ij t) over bonds. This is
// the overlap amplitude; the measured fidelity corresponds to its square
// (verified exactly on a single isolated bond).
inline double model_fidelity_gaussian(const DisorderRealization& disorder, double t) {
    double p = 1.0;
    for (double j : disorder.couplings) p *= std::cos(j * t);
    return p;
}

inline RegimeEstimates model_decay_rates(const ModelParams& params) {
    RegimeEstimates r;
    if (params.delta <= 0.0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.j_p = r.j_e = r.gamma_c = r.rho_c = r.rho_f = nan;
        r.valid = false;
        return r;
    }
    r.j_p = params.delta / params.n;
    r.j_e = params.delta;
    r.gamma_c = params.j_strength * params.j_strength / params.delta;
    r.rho_c = 1.0 / params.delta;
    r.rho_f = params.n / params.delta;
    r.valid = true;
    return r;
}

// Exact two-level solution for one pair: level asymmetry d, coupling j.
// w(t) = (j^2/Omega^2) sin^2(Omega t), C = 2 sqrt(w (1-w)).
inline TimeSeries two_qubit_oracle(double d, double j, const TimeGrid& grid) {
    if (d == 0.0 && j == 0.0)
        throw config_error("two_qubit_oracle needs (d, j) != (0, 0)");
    grid.validate();
    TimeSeries s;
    s.label = "concurrence";
    s.times = grid.samples;
    s.values.reserve(grid.samples.size());
    const double omega2 = d * d + j * j;
    const double omega = std::sqrt(omega2);
    for (double t : grid.samples) {
        const double sn = std::sin(omega * t);
        const double w = (j * j / omega2) * sn * sn;
        s.values.push_back(2.0 * std::sqrt(std::max(w * (1.0 - w), 0.0)));
    }
    return s;
}

// Default fit windows, calibrated against the regime scales: the J^-2 law
// lives below J_p (above it the crossing happens during the initial
// quadratic transient), the J^-1 law around and above J_E.
struct FitWindows {
    std::pair<double, double> fgr;          // t_c ~ J^-2
    std::pair<double, double> ergodic;      // t_c ~ J^-1
    std::pair<double, double> cinf;         // C_inf ~ exp(-A (J - J0))
    std::pair<double, double> perturbative; // 1 - C_inf and separable C_inf laws
};

inline FitWindows default_fit_windows(const RegimeEstimates& r, double j_max) {
    if (!r.valid) throw config_error("fit windows need delta > 0");
    FitWindows w;
    w.fgr = {r.j_p / 10.0, r.j_p};
    w.ergodic = {r.j_e / 4.0, std::min(1.5 * r.j_e, j_max)};
    w.cinf = {r.j_p / 4.0, r.j_e};
    w.perturbative = {r.j_p / 20.0, r.j_p};
    return w;
}

} // namespace entlat

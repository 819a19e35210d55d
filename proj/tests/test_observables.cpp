#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <entlat/hilbert.hpp>
#include <entlat/observables.hpp>
#include <entlat/propagator.hpp>

using namespace entlat;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::Matrix4cd werner(double p) {
    Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
    phi[0] = phi[3] = 1.0 / std::sqrt(2.0);
    return p * (phi * phi.adjoint()) + (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity();
}

// The four maximally entangled two-qubit states.
Eigen::Vector4cd bell_vector(int which) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    const double r = 1.0 / std::sqrt(2.0);
    switch (which) {
    case 0: v[0] = r; v[3] = r; break;
    case 1: v[0] = r; v[3] = -r; break;
    case 2: v[1] = r; v[2] = r; break;
    default: v[1] = r; v[2] = -r; break;
    }
    return v;
}

} // namespace

TEST_CASE("werner states follow max(0, (3p-1)/2)", "[observables]") {
    for (double p : {0.0, 0.2, 1.0 / 3.0, 0.4, 0.6, 1.0}) {
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        REQUIRE_THAT(concurrence(werner(p)).value, WithinAbs(expected, 1e-9));
    }
}

TEST_CASE("pure pair states follow 2|ad - bc|", "[observables]") {
    std::mt19937_64 eng(17);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 30; ++rep) {
        Eigen::Vector4cd v;
        for (int i = 0; i < 4; ++i) v[i] = cplx(g(eng), g(eng));
        v /= v.norm();
        const double expected = 2.0 * std::abs(v[0] * v[3] - v[1] * v[2]);
        const auto r = concurrence(Eigen::Matrix4cd(v * v.adjoint()));
        REQUIRE_THAT(r.value, WithinAbs(expected, 1e-10));
        REQUIRE(r.lambdas[0] >= r.lambdas[1]);
        REQUIRE(r.lambdas[1] >= r.lambdas[2]);
        REQUIRE(r.lambdas[2] >= r.lambdas[3]);
        REQUIRE(r.lambdas[3] >= 0.0);
    }
}

TEST_CASE("maximally-entangled-mixture diagonals follow max(0, 2 p_max - 1)",
          "[observables]") {
    const double probs1[4] = {0.6, 0.2, 0.15, 0.05};
    const double probs2[4] = {0.4, 0.3, 0.2, 0.1};
    Eigen::Matrix4cd rho1 = Eigen::Matrix4cd::Zero(), rho2 = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < 4; ++k) {
        const Eigen::Vector4cd v = bell_vector(k);
        rho1 += probs1[k] * (v * v.adjoint());
        rho2 += probs2[k] * (v * v.adjoint());
    }
    REQUIRE_THAT(concurrence(rho1).value, WithinAbs(0.2, 1e-12));
    REQUIRE_THAT(concurrence(rho2).value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("non-physical density matrices are rejected", "[observables]") {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    rho(0, 0) = 1.1;
    rho(1, 1) = -0.1;
    REQUIRE_THROWS_AS(concurrence(rho), numeric_error);

    rho = werner(0.5);
    rho(0, 1) = 0.2; // asymmetric
    REQUIRE_THROWS_AS(concurrence(rho), numeric_error);

    rho = 1.2 * werner(0.5); // trace 1.2
    REQUIRE_THROWS_AS(concurrence(rho), numeric_error);

    // Tiny negative eigenvalues from rounding are clamped, not rejected.
    rho = werner(1.0);
    rho(0, 0) -= 5e-12;
    rho(1, 1) += 5e-12;
    REQUIRE_NOTHROW(concurrence(rho));
}

TEST_CASE("fidelity is the squared overlap with the start", "[observables]") {
    const SectorBasis basis = build_sector_basis(4);
    const StateVector bell = initial_state(basis, "bell");
    const StateVector sep = initial_state(basis, "separable");
    REQUIRE_THAT(fidelity(bell, bell), WithinAbs(1.0, 1e-14));
    // |<sep|bell>|^2 = 1/2: the separable state is one branch of the pair.
    REQUIRE_THAT(fidelity(sep, bell), WithinAbs(0.5, 1e-14));

    StateVector full{Basis::full, 4, Eigen::VectorXcd::Zero(16)};
    full.amps[5] = 1.0;
    REQUIRE_THROWS_AS(fidelity(bell, full), dimension_error);
}

TEST_CASE("eigenstate entropy is 0 for basis states, 1 bit for even mixing",
          "[observables]") {
    Eigensystem trivial;
    trivial.eigenvalues = Eigen::VectorXd::Zero(3);
    trivial.eigenvectors = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd s0 = eigenstate_entropy(trivial);
    for (int i = 0; i < 3; ++i) REQUIRE_THAT(s0[i], WithinAbs(0.0, 1e-14));

    Eigensystem mixed;
    mixed.eigenvalues = Eigen::VectorXd::Zero(2);
    mixed.eigenvectors.resize(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    mixed.eigenvectors << r, r, r, -r;
    const Eigen::VectorXd s1 = eigenstate_entropy(mixed);
    REQUIRE_THAT(s1[0], WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(s1[1], WithinAbs(1.0, 1e-12));
}

TEST_CASE("trailing averages use the requested window", "[observables]") {
    TimeSeries s;
    for (int i = 0; i < 100; ++i) {
        s.times.push_back(double(i));
        s.values.push_back(double(i));
    }
    // Linear data: trapezoid average over samples 90..99 is the midpoint.
    REQUIRE_THAT(saturation_value(s, 0.1), WithinAbs(94.5, 1e-12));
    REQUIRE_THAT(saturation_value_prefix(s, 99.0, 0.1), WithinAbs(saturation_value(s, 0.1), 0.0));
    // Prefix ending at t = 49.5 with a 20% window covers samples 40..49.
    REQUIRE_THAT(saturation_value_prefix(s, 49.5, 0.2), WithinAbs(44.5, 1e-12));

    REQUIRE_THROWS_AS(saturation_value(s, 0.0), config_error);
    REQUIRE_THROWS_AS(saturation_value(s, 1.5), config_error);

    TimeSeries tiny;
    tiny.times = {0.0, 1.0, 2.0};
    tiny.values = {1.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(saturation_value(tiny, 0.5), dimension_error);
}

TEST_CASE("threshold crossing time interpolates linearly", "[observables]") {
    TimeSeries s;
    for (int i = 0; i <= 200; ++i) {
        s.times.push_back(0.5 * i);
        s.values.push_back(1.0 - 0.01 * (0.5 * i)); // hits 0.96 at t = 4
    }
    const auto tc = concurrence_timescale(s, 0.96);
    REQUIRE(tc.has_value());
    REQUIRE_THAT(*tc, WithinAbs(4.0, 1e-12));

    TimeSeries low = s;
    for (auto& v : low.values) v -= 0.5; // starts below threshold
    REQUIRE(concurrence_timescale(low, 0.96) == 0.0);

    TimeSeries flat;
    flat.times = {0.0, 1.0, 2.0};
    flat.values = {1.0, 0.99, 0.98};
    REQUIRE(!concurrence_timescale(flat, 0.96).has_value());
}

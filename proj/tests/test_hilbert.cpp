#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <random>

#include <entlat/hilbert.hpp>

using namespace entlat;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXcd random_state(int dim, std::mt19937_64& eng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(eng), g(eng));
    v /= v.norm();
    return v;
}

} // namespace

TEST_CASE("sector basis has binomial dimension and sorted states", "[hilbert]") {
    REQUIRE(build_sector_basis(2).dim() == 2);
    REQUIRE(build_sector_basis(4).dim() == 6);
    REQUIRE(build_sector_basis(10).dim() == 252);
    REQUIRE(build_sector_basis(14).dim() == 3432);

    const SectorBasis b = build_sector_basis(6);
    for (int i = 0; i < b.dim(); ++i) {
        REQUIRE(std::popcount(b.states[i]) == 3);
        if (i > 0) REQUIRE(b.states[i] > b.states[i - 1]);
        REQUIRE(b.index_of(b.states[i]) == i);
    }
    REQUIRE(build_sector_basis(4).states == std::vector<std::uint32_t>{3, 5, 6, 9, 10, 12});
    REQUIRE_THROWS_AS(build_sector_basis(4).index_of(1), dimension_error);
}

TEST_CASE("qubit 1 is the most significant bit", "[hilbert]") {
    // n = 4, state 0b1000 = 8: qubit 1 set, qubits 2..4 clear.
    REQUIRE(bit_of(8, 4, 1) == 1);
    REQUIRE(bit_of(8, 4, 2) == 0);
    REQUIRE(bit_of(8, 4, 4) == 0);
    REQUIRE(bit_of(1, 4, 4) == 1);
    REQUIRE(alternating_pattern(4) == 5);    // 0101
    REQUIRE(alternating_pattern(10) == 341); // 0101010101
}

TEST_CASE("initial states are placed on frozen basis states", "[hilbert]") {
    const SectorBasis basis = build_sector_basis(4);

    const StateVector sep = initial_state(basis, "separable");
    REQUIRE(sep.basis == Basis::sector);
    for (int i = 0; i < basis.dim(); ++i)
        REQUIRE(sep.amps[i] == (basis.states[i] == 5u ? cplx(1.0) : cplx(0.0)));

    // Pair (1,2) in (|01> + |10>)/sqrt(2) on top of |..01> for qubits 3,4:
    // register states 0101 = 5 and 1001 = 9.
    const StateVector bell = initial_state(basis, "bell");
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < basis.dim(); ++i) {
        const bool on = basis.states[i] == 5u || basis.states[i] == 9u;
        REQUIRE_THAT(bell.amps[i].real(), WithinAbs(on ? r : 0.0, 1e-15));
        REQUIRE(bell.amps[i].imag() == 0.0);
    }
    REQUIRE_THAT(bell.amps.norm(), WithinAbs(1.0, 1e-14));

    REQUIRE_THROWS_AS(initial_state(basis, "ghz"), config_error);
}

TEST_CASE("embedding and projection round-trip; loss is detected", "[hilbert]") {
    const SectorBasis basis = build_sector_basis(6);
    std::mt19937_64 eng(7);
    const StateVector psi{Basis::sector, 6, random_state(basis.dim(), eng)};
    const StateVector full = embed_sector(psi, basis);
    REQUIRE(full.amps.size() == 64);
    REQUIRE_THAT(full.amps.norm(), WithinAbs(1.0, 1e-14));
    const StateVector back = project_sector(full, basis);
    REQUIRE((back.amps - psi.amps).norm() == 0.0);

    StateVector leaky = full;
    leaky.amps[0] = 0.1; // popcount 0: outside the sector
    REQUIRE_THROWS_AS(project_sector(leaky, basis), data_loss_error);
}

TEST_CASE("pair reduction of the entangled start is the frozen matrix", "[hilbert]") {
    const SectorBasis basis = build_sector_basis(4);
    const StateVector bell = initial_state(basis, "bell");

    // Qubits (1,2): pure (|01> + |10>)/sqrt(2).
    const Eigen::Matrix4cd rho12 = reduce_to_pair(bell, basis, 1, 2);
    Eigen::Matrix4cd expected = Eigen::Matrix4cd::Zero();
    expected(1, 1) = expected(1, 2) = expected(2, 1) = expected(2, 2) = 0.5;
    REQUIRE((rho12 - expected).cwiseAbs().maxCoeff() < 1e-15);

    // Qubits (3,4): both branches hold |01>, a pure product state.
    const Eigen::Matrix4cd rho34 = reduce_to_pair(bell, basis, 3, 4);
    expected = Eigen::Matrix4cd::Zero();
    expected(1, 1) = 1.0;
    REQUIRE((rho34 - expected).cwiseAbs().maxCoeff() < 1e-15);

    // Qubits (2,3): branches differ on qubit 1, so coherences vanish.
    const Eigen::Matrix4cd rho23 = reduce_to_pair(bell, basis, 2, 3);
    expected = Eigen::Matrix4cd::Zero();
    expected(0, 0) = expected(2, 2) = 0.5;
    REQUIRE((rho23 - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pair reduction preserves trace and positivity", "[hilbert]") {
    std::mt19937_64 eng(11);
    for (int n : {4, 6, 8}) {
        const SectorBasis basis = build_sector_basis(n);
        const StateVector psi{Basis::full, n, random_state(1 << n, eng)};
        const Eigen::Matrix4cd rho = reduce_to_pair(psi, basis, 1, n);
        REQUIRE_THAT(rho.trace().real(), WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(rho.trace().imag(), WithinAbs(0.0, 1e-14));
        REQUIRE((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
        REQUIRE(es.eigenvalues().minCoeff() > -1e-13);
    }
}

TEST_CASE("reusable reducer matches the one-shot reduction", "[hilbert]") {
    std::mt19937_64 eng(23);
    const int n = 6;
    const SectorBasis basis = build_sector_basis(n);
    for (auto [qa, qb] : {std::pair{1, 2}, {3, 4}, {2, 6}}) {
        PairReducer sector_red(basis, Basis::sector, qa, qb);
        PairReducer full_red(basis, Basis::full, qa, qb);
        for (int rep = 0; rep < 5; ++rep) {
            const StateVector s{Basis::sector, n, random_state(basis.dim(), eng)};
            const StateVector f{Basis::full, n, random_state(1 << n, eng)};
            REQUIRE((sector_red(s.amps) - reduce_to_pair(s, basis, qa, qb))
                        .cwiseAbs()
                        .maxCoeff() < 1e-14);
            REQUIRE((full_red(f.amps) - reduce_to_pair(f, basis, qa, qb))
                        .cwiseAbs()
                        .maxCoeff() < 1e-14);
        }
    }
    REQUIRE_THROWS_AS(PairReducer(basis, Basis::sector, 2, 2), dimension_error);
    REQUIRE_THROWS_AS(reduce_to_pair(initial_state(basis, "bell"), basis, 0, 3),
                      dimension_error);
}

TEST_CASE("magnetization vanishes on the sector and counts bits elsewhere", "[hilbert]") {
    const SectorBasis basis = build_sector_basis(6);
    std::mt19937_64 eng(31);
    const StateVector psi{Basis::sector, 6, random_state(basis.dim(), eng)};
    REQUIRE(magnetization(psi, basis) == 0.0);
    REQUIRE(magnetization(embed_sector(psi, basis), basis) == 0.0);

    StateVector up{Basis::full, 6, Eigen::VectorXcd::Zero(64)};
    up.amps[0] = 1.0; // all qubits |0>, sigma^z = +1 each
    REQUIRE(magnetization(up, basis) == 6.0);
    up.amps[0] = 0.0;
    up.amps[63] = 1.0;
    REQUIRE(magnetization(up, basis) == -6.0);
}

TEST_CASE("two-bit removal packs the remaining bits", "[hilbert]") {
    // s = 0b110101, drop bit positions 4 and 1 -> 0b1011.
    REQUIRE(drop_two_bits(0b110101u, 4, 1) == 0b1011u);
    REQUIRE(drop_two_bits(0b11u, 1, 0) == 0u);
    REQUIRE(drop_two_bits(0b100u, 1, 0) == 0b1u);
}

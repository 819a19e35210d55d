#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <entlat/lattice.hpp>
#include <entlat/rng.hpp>

using namespace entlat;

TEST_CASE("ladder geometry: row-major sites, horizontals then rungs", "[lattice]") {
    const LatticeGeometry g = build_geometry(make_params(10));
    REQUIRE(g.rows == 2);
    REQUIRE(g.cols == 5);
    REQUIRE(g.sites.size() == 10);
    REQUIRE(g.sites[0] == std::pair{0, 0});
    REQUIRE(g.sites[4] == std::pair{0, 4});
    REQUIRE(g.sites[5] == std::pair{1, 0});
    REQUIRE(g.sites[6] == std::pair{1, 1});

    const std::vector<Bond> expected = {
        {1, 2}, {2, 3}, {3, 4}, {4, 5},          // top row
        {6, 7}, {7, 8}, {8, 9}, {9, 10},         // bottom row
        {1, 6}, {2, 7}, {3, 8}, {4, 9}, {5, 10}, // rungs
    };
    REQUIRE(g.bonds == expected);
}

TEST_CASE("geometry supports chains and other aspect ratios", "[lattice]") {
    const LatticeGeometry chain = build_geometry(make_params(4, 1.0, 0.2, 0.0, 1));
    REQUIRE(chain.bonds == std::vector<Bond>{{1, 2}, {2, 3}, {3, 4}});

    const LatticeGeometry square = build_geometry(make_params(4));
    REQUIRE(square.bonds == std::vector<Bond>{{1, 2}, {3, 4}, {1, 3}, {2, 4}});

    // bond count rows*(cols-1) + cols*(rows-1)
    for (int n : {6, 8, 12}) {
        const LatticeGeometry g = build_geometry(make_params(n));
        REQUIRE(static_cast<int>(g.bonds.size()) == 2 * (n / 2 - 1) + n / 2);
    }
}

TEST_CASE("parameter validation rejects malformed inputs", "[lattice]") {
    REQUIRE_THROWS_AS(make_params(3), config_error);
    REQUIRE_THROWS_AS(make_params(0), config_error);
    REQUIRE_THROWS_AS(make_params(10, 1.5), config_error);
    REQUIRE_THROWS_AS(make_params(10, -0.1), config_error);
    REQUIRE_THROWS_AS(make_params(10, 1.0, -0.2), config_error);
    REQUIRE_THROWS_AS(make_params(10, 1.0, 0.2, -0.1), config_error);
    REQUIRE_THROWS_AS(make_params(10, 1.0, 0.2, 0.0, 3), config_error);

    ModelParams p = make_params(10);
    p.delta0 = 0.0;
    REQUIRE_THROWS_AS(p.validate(), config_error);
    p = make_params(10);
    p.cols = 4;
    REQUIRE_THROWS_AS(p.validate(), config_error);
}

TEST_CASE("disorder draw is seeded, bounded and in a frozen order", "[lattice]") {
    const ModelParams p = make_params(10, 1.0, 0.2, 0.1);
    const LatticeGeometry g = build_geometry(p);
    const DisorderRealization d = draw_disorder(p, g, 1234);

    REQUIRE(d.seed == 1234);
    REQUIRE(d.deltas.size() == 10);
    REQUIRE(d.couplings.size() == 13);
    for (double x : d.deltas) REQUIRE(std::abs(x) <= 0.1);
    for (double x : d.couplings) REQUIRE(std::abs(x) <= 0.1);

    REQUIRE(draw_disorder(p, g, 1234).deltas == d.deltas);
    REQUIRE(draw_disorder(p, g, 1234).couplings == d.couplings);
    REQUIRE(draw_disorder(p, g, 99).deltas != d.deltas);

    // Contract: one 53-bit uniform per site (1..n), then one per bond in
    // geometry order, from mt19937_64 seeded with the child seed.
    std::mt19937_64 eng(1234);
    auto unit = [&eng] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 10; ++i) REQUIRE(d.deltas[i] == -0.1 + 0.2 * unit());
    for (int b = 0; b < 13; ++b) REQUIRE(d.couplings[b] == -0.1 + 0.2 * unit());
}

TEST_CASE("child seeds reproduce the splitmix sequence", "[lattice][rng]") {
    auto mix = [](std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    };
    for (std::uint64_t i = 0; i < 5; ++i)
        REQUIRE(child_seed(20240601, i) == mix(20240601 + (i + 1) * 0x9E3779B97F4A7C15ull));
    REQUIRE(child_seed(1, 0) != child_seed(1, 1));
    REQUIRE(child_seed(1, 0) != child_seed(2, 0));
}

TEST_CASE("realization serializes to json and back", "[lattice]") {
    const ModelParams p = make_params(6, 1.0, 0.2, 0.05);
    const LatticeGeometry g = build_geometry(p);
    const DisorderRealization d = draw_disorder(p, g, 31337);

    const nlohmann::json j = realization_to_json(g, d);
    for (const char* key : {"n", "rows", "cols", "bonds", "deltas", "couplings", "seed"})
        REQUIRE(j.contains(key));

    const auto [g2, d2] = realization_from_json(j);
    REQUIRE(g2.n == g.n);
    REQUIRE(g2.rows == g.rows);
    REQUIRE(g2.cols == g.cols);
    REQUIRE(g2.bonds == g.bonds);
    REQUIRE(d2.deltas == d.deltas);
    REQUIRE(d2.couplings == d.couplings);
    REQUIRE(d2.seed == d.seed);
}

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entlat/errors.hpp"
#include "entlat/rng.hpp"

namespace entlat {

// Static model knobs. Energies are measured in units of the mean level
// spacing delta0 (default 1), times in its inverse.
struct ModelParams {
    int n = 10;              // qubit count, even
    double gamma = 1.0;      // anisotropy in [0,1]: 1 = Ising, 0 = XY
    double delta = 0.2;      // width of the on-site disorder distribution
    double j_strength = 0.0; // coupling bound: J_ij uniform in [-J, J]
    double delta0 = 1.0;     // level spacing
    int rows = 2;            // lattice rows; rows*cols == n
    int cols = 5;

    void validate() const {
        if (n < 2 || n % 2 != 0)
            throw config_error("n must be a positive even integer, got " + std::to_string(n));
        if (gamma < 0.0 || gamma > 1.0)
            throw config_error("gamma must lie in [0,1]");
        if (delta < 0.0) throw config_error("delta must be >= 0");
        if (j_strength < 0.0) throw config_error("j_strength must be >= 0");
        if (delta0 <= 0.0) throw config_error("delta0 must be > 0");
        if (rows < 1 || cols < 1 || rows * cols != n)
            throw config_error("rows*cols must equal n (got " + std::to_string(rows) + "x" +
                               std::to_string(cols) + " for n=" + std::to_string(n) + ")");
    }
};

// 2 x (n/2) ladder by default; n = 6, 10, 14 admit no square shape, and the
// ladder keeps every site on the border for all even n.
inline ModelParams make_params(int n, double gamma = 1.0, double delta = 0.2,
                               double j_strength = 0.0, int rows = 2) {
    ModelParams p;
    p.n = n;
    p.gamma = gamma;
    p.delta = delta;
    p.j_strength = j_strength;
    p.rows = rows;
    p.cols = (rows > 0 && n % rows == 0) ? n / rows : 0;
    p.validate();
    return p;
}

struct Bond {
    int a = 0, b = 0; // 1-based site ids, a < b
    friend bool operator==(const Bond&, const Bond&) = default;
};

// Rectangular lattice, row-major site numbering starting at 1 in the
// top-left corner, free boundaries. Qubits 1 and 2 are adjacent border
// sites by construction.
struct LatticeGeometry {
    int n = 0, rows = 0, cols = 0;
    std::vector<std::pair<int, int>> sites; // sites[k] = (row, col) of site k+1
    std::vector<Bond> bonds;                // nearest-neighbor pairs, each stored once
};

inline LatticeGeometry build_geometry(const ModelParams& params) {
    params.validate();
    LatticeGeometry g;
    g.n = params.n;
    g.rows = params.rows;
    g.cols = params.cols;
    g.sites.reserve(g.n);
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) g.sites.emplace_back(r, c);

    auto site_id = [&](int r, int c) { return r * g.cols + c + 1; };
    // Horizontal bonds row by row, then vertical rungs. The order fixes the
    // coupling draw order, so it is part of the reproducibility contract.
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c + 1 < g.cols; ++c)
            g.bonds.push_back({site_id(r, c), site_id(r, c + 1)});
    for (int r = 0; r + 1 < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c)
            g.bonds.push_back({site_id(r, c), site_id(r + 1, c)});
    return g;
}

// One draw of the static imperfections: per-site level offsets in
// [-delta/2, delta/2] and per-bond couplings in [-J, J].
struct DisorderRealization {
    std::vector<double> deltas;    // indexed by site - 1
    std::vector<double> couplings; // indexed by bond position in geometry order
    std::uint64_t seed = 0;
};

inline DisorderRealization draw_disorder(const ModelParams& params,
                                         const LatticeGeometry& geometry,
                                         std::uint64_t seed) {
    params.validate();
    if (geometry.n != params.n)
        throw dimension_error("geometry size does not match params.n");
    DisorderRealization d;
    d.seed = seed;
    std::mt19937_64 eng(seed);
    d.deltas.reserve(geometry.n);
    for (int i = 0; i < geometry.n; ++i)
        d.deltas.push_back(uniform_in(eng, -params.delta / 2.0, params.delta / 2.0));
    d.couplings.reserve(geometry.bonds.size());
    for (std::size_t b = 0; b < geometry.bonds.size(); ++b)
        d.couplings.push_back(uniform_in(eng, -params.j_strength, params.j_strength));
    return d;
}

// Audit/replay document for one realization.
inline nlohmann::json realization_to_json(const LatticeGeometry& geometry,
                                          const DisorderRealization& disorder) {
    nlohmann::json j;
    j["n"] = geometry.n;
    j["rows"] = geometry.rows;
    j["cols"] = geometry.cols;
    auto& jb = j["bonds"] = nlohmann::json::array();
    for (const auto& b : geometry.bonds) jb.push_back({b.a, b.b});
    j["deltas"] = disorder.deltas;
    j["couplings"] = disorder.couplings;
    j["seed"] = disorder.seed;
    return j;
}

inline std::pair<LatticeGeometry, DisorderRealization>
realization_from_json(const nlohmann::json& j) {
    LatticeGeometry g;
    g.n = j.at("n").get<int>();
    g.rows = j.at("rows").get<int>();
    g.cols = j.at("cols").get<int>();
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) g.sites.emplace_back(r, c);
    for (const auto& jb : j.at("bonds"))
        g.bonds.push_back({jb.at(0).get<int>(), jb.at(1).get<int>()});
    DisorderRealization d;
    d.deltas = j.at("deltas").get<std::vector<double>>();
    d.couplings = j.at("couplings").get<std::vector<double>>();
    d.seed = j.at("seed").get<std::uint64_t>();
    return {std::move(g), std::move(d)};
}

} // namespace entlat

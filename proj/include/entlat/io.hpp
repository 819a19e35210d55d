#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <zlib.h>

#include "entlat/analysis.hpp"
#include "entlat/ensemble.hpp"
#include "entlat/errors.hpp"
#include "entlat/hamiltonian.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/observables.hpp"

namespace entlat {

namespace io {

inline std::string format_double(double v, int sig = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string time_series_csv(const TimeSeries& series) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        out += format_double(series.times[i]);
        out += ',';
        out += format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

inline void write_time_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
    write_text(path, time_series_csv(series));
}

inline TimeSeries read_time_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "t,value")
        throw std::runtime_error(path.string() + ": expected header 't,value'");
    TimeSeries s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        s.times.push_back(std::stod(line.substr(0, comma)));
        s.values.push_back(std::stod(line.substr(comma + 1)));
    }
    return s;
}

inline std::string scan_table_csv(const std::vector<PointResult>& points) {
    std::string out = "J,n,gamma,C_inf,C_inf_stderr,t_c,stable_flag\n";
    for (const auto& p : points) {
        out += format_double(p.j);
        out += ',' + std::to_string(p.n);
        out += ',' + format_double(p.gamma);
        out += ',' + format_double(p.c_inf);
        out += ',' + format_double(p.c_inf_stderr);
        out += ',';
        out += p.t_c ? format_double(*p.t_c) : std::string("nan");
        out += ',';
        out += p.stable ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline void write_scan_table_csv(const std::filesystem::path& path,
                                 const std::vector<PointResult>& points) {
    write_text(path, scan_table_csv(points));
}

// Plain-text sparse dump, one nonzero per line, 1-based "row col value".
inline std::string hamiltonian_triplets(const SparseHamiltonian& h) {
    std::string out;
    char buf[96];
    for (int k = 0; k < h.matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(h.matrix, k); it;
             ++it) {
            std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", long(it.row()) + 1,
                          long(it.col()) + 1, it.value());
            out += buf;
        }
    }
    return out;
}

inline void write_hamiltonian_triplets(const std::filesystem::path& path,
                                       const SparseHamiltonian& h) {
    write_text(path, hamiltonian_triplets(h));
}

inline const char* basis_tag(Basis b) { return b == Basis::full ? "full" : "sector"; }

inline Basis basis_from_tag(const std::string& tag) {
    if (tag == "full") return Basis::full;
    if (tag == "sector") return Basis::sector;
    throw std::runtime_error("unknown basis tag '" + tag + "'");
}

inline nlohmann::json state_to_json(const StateVector& psi) {
    nlohmann::json amps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < psi.amps.size(); ++i)
        amps.push_back({psi.amps[i].real(), psi.amps[i].imag()});
    return {{"basis", basis_tag(psi.basis)}, {"n", psi.n}, {"amps", std::move(amps)}};
}

inline StateVector state_from_json(const nlohmann::json& j) {
    StateVector psi;
    psi.basis = basis_from_tag(j.at("basis").get<std::string>());
    psi.n = j.at("n").get<int>();
    const auto& amps = j.at("amps");
    psi.amps.resize(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i)
        psi.amps[static_cast<Eigen::Index>(i)] = cplx(amps[i][0].get<double>(),
                                                      amps[i][1].get<double>());
    return psi;
}

inline void write_state_json(const std::filesystem::path& path, const StateVector& psi) {
    write_text(path, state_to_json(psi).dump(2) + "\n");
}

inline StateVector read_state_json(const std::filesystem::path& path) {
    return state_from_json(nlohmann::json::parse(read_text(path)));
}

// Binary layout: magic "entlatsv", u32 version, u32 basis (0 full / 1 sector),
// u32 n, u64 dim, then dim little-endian (re, im) double pairs.
inline void write_state_binary(const std::filesystem::path& path, const StateVector& psi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const char magic[8] = {'e', 'n', 't', 'l', 'a', 't', 's', 'v'};
    out.write(magic, 8);
    auto put_u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(1u);
    put_u32(psi.basis == Basis::full ? 0u : 1u);
    put_u32(static_cast<std::uint32_t>(psi.n));
    const std::uint64_t dim = static_cast<std::uint64_t>(psi.amps.size());
    out.write(reinterpret_cast<const char*>(&dim), 8);
    for (Eigen::Index i = 0; i < psi.amps.size(); ++i) {
        const double re = psi.amps[i].real(), im = psi.amps[i].imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline StateVector read_state_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "entlatsv", 8) != 0)
        throw std::runtime_error(path.string() + ": not a state dump");
    auto get_u32 = [&in] {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != 1u)
        throw std::runtime_error(path.string() + ": unsupported version " +
                                 std::to_string(version));
    StateVector psi;
    psi.basis = get_u32() == 0u ? Basis::full : Basis::sector;
    psi.n = static_cast<int>(get_u32());
    std::uint64_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 8);
    psi.amps.resize(static_cast<Eigen::Index>(dim));
    for (std::uint64_t i = 0; i < dim; ++i) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        psi.amps[static_cast<Eigen::Index>(i)] = cplx(re, im);
    }
    if (!in) throw std::runtime_error(path.string() + ": truncated state dump");
    return psi;
}

inline void write_gz(const std::filesystem::path& path, const std::string& content) {
    gzFile gz = gzopen(path.string().c_str(), "wb9");
    if (!gz) throw std::runtime_error("cannot open " + path.string() + " for writing");
    std::size_t off = 0;
    while (off < content.size()) {
        const unsigned chunk =
            static_cast<unsigned>(std::min<std::size_t>(content.size() - off, 1u << 20));
        if (gzwrite(gz, content.data() + off, chunk) != static_cast<int>(chunk)) {
            gzclose(gz);
            throw std::runtime_error("gzwrite failed for " + path.string());
        }
        off += chunk;
    }
    if (gzclose(gz) != Z_OK) throw std::runtime_error("gzclose failed for " + path.string());
}

inline std::string read_gz(const std::filesystem::path& path) {
    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz) throw std::runtime_error("cannot open " + path.string());
    std::string out;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(got));
    const bool bad = got < 0;
    gzclose(gz);
    if (bad) throw std::runtime_error("gzread failed for " + path.string());
    return out;
}

// Per-point archive body: the shared time grid plus every realization's
// concurrence and fidelity curve. Requires run with keep_series.
inline nlohmann::json realizations_to_json(const PointResult& point) {
    nlohmann::json reals = nlohmann::json::array();
    for (const auto& r : point.realizations)
        reals.push_back({{"seed", r.seed},
                         {"concurrence", r.concurrence},
                         {"fidelity", r.fidelity}});
    return {{"j", point.j},
            {"n", point.n},
            {"gamma", point.gamma},
            {"times", point.avg_c.times},
            {"realizations", std::move(reals)}};
}

inline nlohmann::json fit_to_json(const FitResult& fit) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : fit.params)
        params.push_back({{"name", p.name}, {"value", p.value}, {"stderr", p.stderr_}});
    return {{"model", fit.model},
            {"window", {fit.window_lo, fit.window_hi}},
            {"params", std::move(params)},
            {"residual_norm", fit.residual_norm},
            {"points_used", fit.points_used},
            {"points_excluded", fit.points_excluded}};
}

} // namespace io

} // namespace entlat

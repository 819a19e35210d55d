#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlat/ensemble.hpp"
#include "entlat/errors.hpp"

namespace entlat {

struct RunConfig {
    std::string mode = "single"; // "single" | "scan_j" | "scan_n"
    EnsembleConfig ensemble;
    std::vector<double> j_values;
    std::vector<int> n_values;
    std::string archive = "summary"; // "none" | "summary" | "series"
    bool fits = true;

    void validate() const {
        ensemble.validate();
        if (mode != "single" && mode != "scan_j" && mode != "scan_n")
            throw config_error("mode must be 'single', 'scan_j' or 'scan_n'");
        if (mode != "single" && j_values.empty())
            throw config_error("mode '" + mode + "' requires j_values");
        if (mode == "scan_n" && n_values.empty())
            throw config_error("mode 'scan_n' requires n_values");
        if (mode != "scan_n" && !n_values.empty())
            throw config_error("n_values requires mode 'scan_n'");
        if (archive != "none" && archive != "summary" && archive != "series")
            throw config_error("archive must be 'none', 'summary' or 'series'");
        if (ensemble.pair_a < 1 || ensemble.pair_b <= ensemble.pair_a ||
            ensemble.pair_b > ensemble.params.n)
            throw config_error("pair must satisfy 1 <= a < b <= n");
    }
};

namespace cfg {

enum class Kind { integer, unsigned_integer, number, boolean, string, number_list, integer_list,
                  integer_map, integer_pair, optional_number, optional_integer };

struct KeySpec {
    const char* name;
    Kind kind;
};

// Every key here is also a CLI flag of the same name.
inline const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = {
        {"mode", Kind::string},
        {"n", Kind::integer},
        {"rows", Kind::integer},
        {"gamma", Kind::number},
        {"delta", Kind::number},
        {"delta0", Kind::number},
        {"j", Kind::number},
        {"j_values", Kind::number_list},
        {"n_values", Kind::integer_list},
        {"initial", Kind::string},
        {"n_realizations", Kind::integer},
        {"n_realizations_by_n", Kind::integer_map},
        {"master_seed", Kind::unsigned_integer},
        {"t_max", Kind::optional_number},
        {"samples", Kind::optional_integer},
        {"grid_kind", Kind::string},
        {"log_t_min", Kind::number},
        {"evolution", Kind::string},
        {"propagator", Kind::string},
        {"dense_cap", Kind::integer},
        {"krylov_order", Kind::integer},
        {"krylov_tol", Kind::number},
        {"saturation_fraction", Kind::number},
        {"auto_extend", Kind::boolean},
        {"max_extensions", Kind::integer},
        {"tc_threshold", Kind::number},
        {"tc_mode", Kind::string},
        {"workers", Kind::integer},
        {"archive", Kind::string},
        {"pair", Kind::integer_pair},
        {"fits", Kind::boolean},
    };
    return keys;
}

inline const KeySpec* find_key(const std::string& name) {
    for (const auto& k : schema())
        if (name == k.name) return &k;
    return nullptr;
}

// 1-based line of the first occurrence of "key" in the raw text, for
// error messages that point back into the file.
inline int line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find('"' + key + '"');
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

inline std::string anchor(const std::string& source, const std::string& text,
                          const std::string& key) {
    const int line = line_of_key(text, key);
    if (line > 0) return source + ":" + std::to_string(line);
    return source;
}

inline void check_kind(const nlohmann::json& v, Kind kind, const std::string& where,
                       const std::string& key) {
    auto fail = [&](const char* expected) {
        throw config_error(where + ": key '" + key + "' expects " + expected);
    };
    switch (kind) {
    case Kind::integer:
        if (!v.is_number_integer()) fail("an integer");
        break;
    case Kind::unsigned_integer:
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail("a non-negative integer");
        break;
    case Kind::number:
        if (!v.is_number()) fail("a number");
        break;
    case Kind::boolean:
        if (!v.is_boolean()) fail("a boolean");
        break;
    case Kind::string:
        if (!v.is_string()) fail("a string");
        break;
    case Kind::number_list:
        if (!v.is_array()) fail("an array of numbers");
        for (const auto& e : v)
            if (!e.is_number()) fail("an array of numbers");
        break;
    case Kind::integer_list:
        if (!v.is_array()) fail("an array of integers");
        for (const auto& e : v)
            if (!e.is_number_integer()) fail("an array of integers");
        break;
    case Kind::integer_map:
        if (!v.is_object()) fail("an object mapping n to a count");
        for (const auto& [mk, mv] : v.items()) {
            if (mk.empty() || mk.find_first_not_of("0123456789") != std::string::npos)
                fail("an object mapping n to a count");
            if (!mv.is_number_integer()) fail("an object mapping n to a count");
        }
        break;
    case Kind::integer_pair:
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
            !v[1].is_number_integer())
            fail("an array of two integers");
        break;
    case Kind::optional_number:
        if (!v.is_null() && !v.is_number()) fail("a number or null");
        break;
    case Kind::optional_integer:
        if (!v.is_null() && !v.is_number_integer()) fail("an integer or null");
        break;
    }
}

inline Evolution evolution_from_string(const std::string& s) {
    if (s == "sector") return Evolution::sector;
    if (s == "full") return Evolution::full;
    throw config_error("evolution must be 'sector' or 'full'");
}

inline PropagatorKind propagator_from_string(const std::string& s) {
    if (s == "auto") return PropagatorKind::automatic;
    if (s == "exact") return PropagatorKind::exact;
    if (s == "krylov") return PropagatorKind::krylov;
    throw config_error("propagator must be 'auto', 'exact' or 'krylov'");
}

inline const char* evolution_to_string(Evolution e) {
    return e == Evolution::sector ? "sector" : "full";
}

inline const char* propagator_to_string(PropagatorKind p) {
    switch (p) {
    case PropagatorKind::exact: return "exact";
    case PropagatorKind::krylov: return "krylov";
    default: return "auto";
    }
}

} // namespace cfg

// Applies a validated JSON object onto a RunConfig. `source` and `text` feed
// the error anchors; pass an empty text for non-file sources.
inline RunConfig config_from_json(const nlohmann::json& root, const std::string& source = "config",
                                  const std::string& text = {}) {
    if (!root.is_object()) throw config_error(source + ": top level must be a JSON object");
    for (const auto& [key, value] : root.items()) {
        const cfg::KeySpec* spec = cfg::find_key(key);
        if (!spec)
            throw config_error(cfg::anchor(source, text, key) + ": unknown key '" + key + "'");
        cfg::check_kind(value, spec->kind, cfg::anchor(source, text, key), key);
    }

    RunConfig out;
    EnsembleConfig& e = out.ensemble;
    auto has = [&root](const char* k) { return root.contains(k) && !root.at(k).is_null(); };

    if (has("mode")) out.mode = root.at("mode").get<std::string>();
    if (has("n")) e.params.n = root.at("n").get<int>();
    if (has("rows")) e.params.rows = root.at("rows").get<int>();
    if (e.params.n % std::max(e.params.rows, 1) == 0)
        e.params.cols = e.params.n / std::max(e.params.rows, 1);
    if (has("gamma")) e.params.gamma = root.at("gamma").get<double>();
    if (has("delta")) e.params.delta = root.at("delta").get<double>();
    if (has("delta0")) e.params.delta0 = root.at("delta0").get<double>();
    if (has("j")) e.params.j_strength = root.at("j").get<double>();
    if (has("j_values")) out.j_values = root.at("j_values").get<std::vector<double>>();
    if (has("n_values")) out.n_values = root.at("n_values").get<std::vector<int>>();
    if (has("initial")) e.initial = root.at("initial").get<std::string>();
    if (has("n_realizations")) e.n_realizations = root.at("n_realizations").get<int>();
    if (has("n_realizations_by_n"))
        for (const auto& [k, v] : root.at("n_realizations_by_n").items())
            e.n_realizations_by_n[std::stoi(k)] = v.get<int>();
    if (has("master_seed")) e.master_seed = root.at("master_seed").get<std::uint64_t>();
    if (has("t_max")) e.grid.t_max = root.at("t_max").get<double>();
    if (has("samples")) e.grid.samples = root.at("samples").get<int>();
    if (has("grid_kind")) e.grid.kind = root.at("grid_kind").get<std::string>();
    if (has("log_t_min")) e.grid.log_t_min = root.at("log_t_min").get<double>();
    if (has("evolution"))
        e.evolution = cfg::evolution_from_string(root.at("evolution").get<std::string>());
    if (has("propagator"))
        e.propagator = cfg::propagator_from_string(root.at("propagator").get<std::string>());
    if (has("dense_cap")) e.dense_cap = root.at("dense_cap").get<int>();
    if (has("krylov_order")) e.krylov.order = root.at("krylov_order").get<int>();
    if (has("krylov_tol")) e.krylov.local_tol = root.at("krylov_tol").get<double>();
    if (has("saturation_fraction"))
        e.saturation_fraction = root.at("saturation_fraction").get<double>();
    if (has("auto_extend")) e.auto_extend = root.at("auto_extend").get<bool>();
    if (has("max_extensions")) e.max_extensions = root.at("max_extensions").get<int>();
    if (has("tc_threshold")) e.tc_threshold = root.at("tc_threshold").get<double>();
    if (has("tc_mode")) e.tc_mode = root.at("tc_mode").get<std::string>();
    if (has("workers")) e.workers = root.at("workers").get<int>();
    if (has("archive")) out.archive = root.at("archive").get<std::string>();
    if (has("pair")) {
        e.pair_a = root.at("pair")[0].get<int>();
        e.pair_b = root.at("pair")[1].get<int>();
    }
    if (has("fits")) out.fits = root.at("fits").get<bool>();
    e.keep_series = out.archive == "series";
    return out;
}

// Serializes the fully resolved configuration; reloading the result recreates
// the run byte for byte.
inline nlohmann::json config_to_json(const RunConfig& config) {
    const EnsembleConfig& e = config.ensemble;
    nlohmann::json root{
        {"mode", config.mode},
        {"n", e.params.n},
        {"rows", e.params.rows},
        {"gamma", e.params.gamma},
        {"delta", e.params.delta},
        {"delta0", e.params.delta0},
        {"j", e.params.j_strength},
        {"initial", e.initial},
        {"n_realizations", e.n_realizations},
        {"master_seed", e.master_seed},
        {"t_max", e.grid.t_max ? nlohmann::json(*e.grid.t_max) : nlohmann::json(nullptr)},
        {"samples", e.grid.samples ? nlohmann::json(*e.grid.samples) : nlohmann::json(nullptr)},
        {"grid_kind", e.grid.kind},
        {"log_t_min", e.grid.log_t_min},
        {"evolution", cfg::evolution_to_string(e.evolution)},
        {"propagator", cfg::propagator_to_string(e.propagator)},
        {"dense_cap", e.dense_cap},
        {"krylov_order", e.krylov.order},
        {"krylov_tol", e.krylov.local_tol},
        {"saturation_fraction", e.saturation_fraction},
        {"auto_extend", e.auto_extend},
        {"max_extensions", e.max_extensions},
        {"tc_threshold", e.tc_threshold},
        {"tc_mode", e.tc_mode},
        {"workers", e.workers},
        {"archive", config.archive},
        {"pair", {e.pair_a, e.pair_b}},
        {"fits", config.fits},
    };
    if (!config.j_values.empty()) root["j_values"] = config.j_values;
    if (!config.n_values.empty()) root["n_values"] = config.n_values;
    if (!e.n_realizations_by_n.empty()) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [n, nr] : e.n_realizations_by_n) m[std::to_string(n)] = nr;
        root["n_realizations_by_n"] = std::move(m);
    }
    return root;
}

// Parses a config document to JSON, anchoring parse errors to their line.
// A manifest written by a previous run embeds the resolved configuration
// under "config"; feeding the manifest back in reruns the scan with
// identical outputs.
inline nlohmann::json parse_config_json(const std::string& text, const std::string& source) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        const std::size_t byte = err.byte > 0 ? err.byte - 1 : 0;
        const std::size_t upto = std::min(byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw config_error(source + ":" + std::to_string(line) + ": " + err.what());
    }
    if (root.is_object() && root.contains("config") && root.contains("entlat_version"))
        return root.at("config");
    return root;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& source) {
    return config_from_json(parse_config_json(text, source), source, text);
}

// Applies one "--key value" override on top of the JSON form of a config.
inline void apply_override(nlohmann::json& root, const std::string& key,
                           const std::string& value) {
    const cfg::KeySpec* spec = cfg::find_key(key);
    if (!spec) throw config_error("unknown config key '" + key + "'");
    auto bad = [&](const char* expected) {
        throw config_error("value '" + value + "' for '" + key + "' is not " + expected);
    };
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto comma = s.find(',', start);
            if (comma == std::string::npos) {
                parts.push_back(s.substr(start));
                break;
            }
            parts.push_back(s.substr(start, comma - start));
            start = comma + 1;
        }
        return parts;
    };
    try {
        switch (spec->kind) {
        case cfg::Kind::integer: root[key] = std::stoll(value); break;
        case cfg::Kind::unsigned_integer: root[key] = std::stoull(value); break;
        case cfg::Kind::number: root[key] = std::stod(value); break;
        case cfg::Kind::boolean:
            if (value == "true" || value == "1") root[key] = true;
            else if (value == "false" || value == "0") root[key] = false;
            else bad("a boolean (true/false)");
            break;
        case cfg::Kind::string: root[key] = value; break;
        case cfg::Kind::number_list: {
            std::vector<double> vs;
            for (const auto& p : split(value)) vs.push_back(std::stod(p));
            root[key] = vs;
            break;
        }
        case cfg::Kind::integer_list: {
            std::vector<long long> vs;
            for (const auto& p : split(value)) vs.push_back(std::stoll(p));
            root[key] = vs;
            break;
        }
        case cfg::Kind::integer_map: {
            nlohmann::json m = nlohmann::json::object();
            for (const auto& p : split(value)) {
                const auto colon = p.find(':');
                if (colon == std::string::npos) bad("a list like '12:30,14:20'");
                m[p.substr(0, colon)] = std::stoll(p.substr(colon + 1));
            }
            root[key] = std::move(m);
            break;
        }
        case cfg::Kind::integer_pair: {
            const auto parts = split(value);
            if (parts.size() != 2) bad("a pair like '1,2'");
            root[key] = {std::stoll(parts[0]), std::stoll(parts[1])};
            break;
        }
        case cfg::Kind::optional_number:
            if (value == "auto" || value == "null") root[key] = nullptr;
            else root[key] = std::stod(value);
            break;
        case cfg::Kind::optional_integer:
            if (value == "auto" || value == "null") root[key] = nullptr;
            else root[key] = std::stoll(value);
            break;
        }
    } catch (const std::invalid_argument&) {
        bad("parseable");
    } catch (const std::out_of_range&) {
        bad("in range");
    }
}

// The coupling grid shared by the J scans: close to log-uniform,
// 24 values across 1e-3 .. 2.
inline std::vector<double> figure_j_grid() {
    return {1.0e-3, 1.4e-3, 2.0e-3, 2.8e-3, 4.0e-3, 5.6e-3, 8.0e-3, 1.12e-2,
            1.6e-2, 2.0e-2, 2.8e-2, 4.0e-2, 5.6e-2, 8.0e-2, 1.0e-1, 1.4e-1,
            2.0e-1, 2.8e-1, 4.0e-1, 5.6e-1, 8.0e-1, 1.13,   1.6,    2.0};
}

inline std::vector<double> short_time_j_list() {
    return {1e-4, 2e-4, 1e-3, 2e-3, 1e-2, 2e-2, 1e-1, 2e-1};
}

// Canned configurations for the four standard figures.
inline nlohmann::json preset_config(const std::string& name) {
    nlohmann::json base{
        {"mode", "scan_j"}, {"n", 10},          {"rows", 2},       {"gamma", 1.0},
        {"delta", 0.2},     {"delta0", 1.0},    {"initial", "bell"}, {"n_realizations", 50},
        {"master_seed", 20240601},
    };
    if (name == "fig1" || name == "fig2") {
        base["j_values"] = figure_j_grid();
        return base;
    }
    if (name == "fig3") {
        base["initial"] = "separable";
        base["j_values"] = short_time_j_list();
        return base;
    }
    if (name == "fig4") {
        base["initial"] = "separable";
        base["j_values"] = figure_j_grid();
        return base;
    }
    throw config_error("unknown preset '" + name + "' (expected fig1..fig4)");
}

} // namespace entlat

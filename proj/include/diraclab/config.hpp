#pragma once

// Plain-text key = value configuration. Every source (defaults, the
// DIRACLAB_SEED environment variable, a config file, command-line flags, a
// manifest) is reduced to a string map and resolved into Settings in one
// place, so all of them are validated the same way.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "diraclab/error.hpp"
#include "diraclab/estimators.hpp"

namespace diraclab::config {

using KeyValues = std::map<std::string, std::string>;

/// Keys that shape results. `out`, `threads` and `dump_operators` only say
/// where and how fast, so they stay out of manifests.
inline const std::set<std::string>& result_keys() {
    static const std::set<std::string> k{"manifold", "dim",   "delta_u",        "alpha",         "n_grid",
                                         "repeats",  "seed",  "sign",           "function",      "family",
                                         "lambda_squared",    "hoeffding_eps",  "t_grid",        "hbar_grid"};
    return k;
}

inline bool known_key(const std::string& k) {
    return result_keys().count(k) || k == "out" || k == "threads" || k == "dump_operators";
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Parses `key = value` lines; '#' starts a comment. Keys may use '-' or '_'.
inline KeyValues parse_config(std::istream& in, const std::string& source = "config") {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        for (char& c : key)
            if (c == '-') c = '_';
        const std::string value = trim(line.substr(eq + 1));
        if (!known_key(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline KeyValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

// ---------------------------------------------------------------------------

struct Settings {
    std::string manifold = "flat";
    std::optional<int> dim;
    double delta_u = -1.0;
    double alpha = 0.2;
    std::vector<long long> n_grid{1000, 10000, 100000};
    int repeats = 50;
    std::uint64_t seed = 20240607;
    int sign = graphdirac::kCalibratedSign;
    std::string function;
    bool family = true;
    bool lambda_squared = false;
    double hoeffding_eps = 0.1;
    std::vector<double> t_grid{0.2, 0.1, 0.05, 0.02};
    std::vector<double> hbar_grid{1.0, 0.5, 0.1, 0.05};
    std::string out = "diraclab-out";
    int threads = 1;
    std::string dump_operators;
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T x{};
    is >> x;
    if (!is || !is.eof()) throw ConfigError("bad value for '" + key + "': '" + v + "'");
    return x;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number<T>(key, item));
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

}  // namespace detail

inline Settings resolve(const KeyValues& kv) {
    Settings s;
    for (const auto& [k, v] : kv) {
        if (k == "manifold") {
            if (v != "flat" && v != "sphere") throw ConfigError("manifold must be flat or sphere");
            s.manifold = v;
        } else if (k == "dim") {
            s.dim = detail::parse_number<int>(k, v);
            if (*s.dim < 2 || *s.dim > 8) throw ConfigError("dim must be in [2, 8]");
        } else if (k == "delta_u") {
            s.delta_u = detail::parse_number<double>(k, v);
        } else if (k == "alpha") {
            s.alpha = detail::parse_number<double>(k, v);
            if (!(s.alpha > 0.0)) throw ConfigError("alpha must be positive");
        } else if (k == "n_grid") {
            s.n_grid = detail::parse_list<long long>(k, v);
            for (std::size_t i = 0; i < s.n_grid.size(); ++i)
                if (s.n_grid[i] < 1 || (i > 0 && s.n_grid[i] <= s.n_grid[i - 1]))
                    throw ConfigError("n_grid must be positive and strictly increasing");
        } else if (k == "repeats") {
            s.repeats = detail::parse_number<int>(k, v);
            if (s.repeats < 1) throw ConfigError("repeats must be positive");
        } else if (k == "seed") {
            s.seed = detail::parse_number<std::uint64_t>(k, v);
        } else if (k == "sign") {
            const int sg = detail::parse_number<int>(k, v);
            if (sg != 1 && sg != -1) throw ConfigError("sign must be +1 or -1");
            s.sign = sg;
        } else if (k == "function") {
            s.function = v;
        } else if (k == "family") {
            s.family = detail::parse_bool(k, v);
        } else if (k == "lambda_squared") {
            s.lambda_squared = detail::parse_bool(k, v);
        } else if (k == "hoeffding_eps") {
            s.hoeffding_eps = detail::parse_number<double>(k, v);
        } else if (k == "t_grid") {
            s.t_grid = detail::parse_list<double>(k, v);
        } else if (k == "hbar_grid") {
            s.hbar_grid = detail::parse_list<double>(k, v);
        } else if (k == "out") {
            s.out = v;
        } else if (k == "threads") {
            s.threads = detail::parse_number<int>(k, v);
            if (s.threads < 1) throw ConfigError("threads must be positive");
        } else if (k == "dump_operators") {
            s.dump_operators = v;
        } else {
            throw ConfigError("unknown key '" + k + "'");
        }
    }
    return s;
}

/// The result-shaping keys of `kv`, for manifests.
inline KeyValues manifest_view(const KeyValues& kv) {
    KeyValues out;
    for (const auto& [k, v] : kv)
        if (result_keys().count(k)) out[k] = v;
    return out;
}

namespace detail {

inline std::string fmt(double x) { return estimators::format_double(x); }

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

/// Every result-shaping setting in canonical string form; resolving the
/// returned map gives back the same Settings.
inline KeyValues to_key_values(const Settings& s, int default_dim) {
    KeyValues kv;
    kv["manifold"] = s.manifold;
    kv["dim"] = std::to_string(s.dim.value_or(default_dim));
    kv["delta_u"] = detail::fmt(s.delta_u);
    kv["alpha"] = detail::fmt(s.alpha);
    kv["n_grid"] = detail::join(s.n_grid);
    kv["repeats"] = std::to_string(s.repeats);
    kv["seed"] = std::to_string(s.seed);
    kv["sign"] = std::to_string(s.sign);
    if (!s.function.empty()) kv["function"] = s.function;
    kv["family"] = s.family ? "true" : "false";
    kv["lambda_squared"] = s.lambda_squared ? "true" : "false";
    kv["hoeffding_eps"] = detail::fmt(s.hoeffding_eps);
    kv["t_grid"] = detail::join(s.t_grid);
    kv["hbar_grid"] = detail::join(s.hbar_grid);
    return kv;
}

inline estimators::RunConfig run_config(const Settings& s, estimators::Mode mode) {
    estimators::RunConfig c;
    c.manifold = s.manifold;
    c.d = s.dim.value_or(2);
    c.delta_u = s.delta_u;
    c.alpha = s.alpha;
    c.n_grid = s.n_grid;
    c.repeats = s.repeats;
    c.seed = s.seed;
    c.sigma = s.sign;
    c.mode = mode;
    c.function = s.function;
    c.family = s.family;
    c.lambda_squared = s.lambda_squared;
    c.hoeffding_eps = s.hoeffding_eps;
    c.threads = s.threads;
    return c;
}

}  // namespace diraclab::config

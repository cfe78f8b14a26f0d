#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actrwl/aging.hpp"
#include "actrwl/hash.hpp"
#include "actrwl/levy.hpp"
#include "actrwl/special.hpp"

namespace actrwl {

/// Configuration error carrying the offending line/field.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field, int line, const std::string& why)
        : std::runtime_error("config error at line " + std::to_string(line) + ", field '" +
                             field + "': " + why) {}
};

// Scenario file grammar (one directive per line):
//   key = value            # comment to end of line
// Lists are comma separated. Borel sets are unions of half-open intervals
//   B = (lo,hi] U (lo,hi]      with lo/hi real, -inf or inf.
// Families are written as their label: brownian(mu,A),
// symmetric_stable(beta,scale), poisson(lambda),
// compound_poisson(lambda,jump_mean,jump_sd).
struct Scenario {
    LevyFamily family = LevyFamily::brownian(0.0, 1.0);
    double alpha = 0.5;
    double c = 1.0;
    std::vector<double> t0_list{1.0};
    std::vector<double> t_list{1.0};
    std::vector<BorelSet> borel_sets;
    std::size_t n = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double cutoff_ratio = 1e-4;  // first-passage sampler jump cutoff (relative)
    double du_factor = 1e-3;     // uniform-grid path step, relative to u_max
    int quad_panels = 12;
    int quad_nodes = 32;
    // ffpe grid
    double ffpe_X = 0.0; // 0: choose from the law's quantiles
    std::size_t ffpe_nx = 0;
    double ffpe_T = 1.0;
    std::size_t ffpe_nt = 2048;
    double init_mean = 0.0;
    double init_sd = 0.05;
    double scale_a = 4.0;                          // selfsim time-scale factor
    std::vector<double> alphas_list{0.5, 0.7, 0.9, 0.99}; // stationarity sweep
    std::string out_dir = ".";

    // raw text the scenario was parsed from, canonicalized for hashing
    std::string canonical;

    std::uint64_t hash() const;
    void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_real(const std::string& tok, const std::string& field, int line) {
    const std::string t = trim(tok);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, line, "cannot parse real '" + t + "'");
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<double> parse_real_list(const std::string& v, const std::string& field,
                                           int line) {
    std::vector<double> out;
    for (const auto& tok : split(v, ','))
        if (!trim(tok).empty()) out.push_back(parse_real(tok, field, line));
    if (out.empty()) throw ConfigError(field, line, "empty list");
    return out;
}

inline BorelSet parse_borel(const std::string& text, const std::string& field, int line) {
    BorelSet b;
    std::string s = text;
    // split on 'U'
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 'U' || s[i] == 'u') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(s[i]);
        }
    }
    parts.push_back(cur);
    for (auto& part : parts) {
        std::string p = trim(part);
        if (p.empty()) continue;
        if (p.front() != '(' || (p.back() != ']' && p.back() != ')'))
            throw ConfigError(field, line, "interval must look like (lo,hi]: got '" + p + "'");
        const std::string body = p.substr(1, p.size() - 2);
        auto toks = split(body, ',');
        if (toks.size() != 2)
            throw ConfigError(field, line, "interval needs exactly two endpoints: '" + p + "'");
        b.intervals.push_back(
            {parse_real(toks[0], field, line), parse_real(toks[1], field, line)});
    }
    try {
        b.validate();
    } catch (const std::exception& e) {
        throw ConfigError(field, line, e.what());
    }
    return b;
}

inline LevyFamily parse_family(const std::string& text, const std::string& field, int line) {
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw ConfigError(field, line, "family must look like name(args): got '" + s + "'");
    const std::string name = trim(s.substr(0, open));
    const std::string body = s.substr(open + 1, s.size() - open - 2);
    auto toks = split(body, ',');
    std::vector<double> args;
    for (auto& t : toks)
        if (!trim(t).empty()) args.push_back(parse_real(t, field, line));
    try {
        if (name == "brownian" && args.size() == 2) return LevyFamily::brownian(args[0], args[1]);
        if (name == "symmetric_stable" && (args.size() == 1 || args.size() == 2))
            return LevyFamily::symmetric_stable(args[0], args.size() == 2 ? args[1] : 1.0);
        if (name == "poisson" && args.size() == 1) return LevyFamily::poisson(args[0]);
        if (name == "compound_poisson" && args.size() == 3)
            return LevyFamily::compound_poisson(args[0], args[1], args[2]);
    } catch (const std::exception& e) {
        throw ConfigError(field, line, e.what());
    }
    throw ConfigError(field, line, "unknown family or wrong arity: '" + s + "'");
}

} // namespace detail

inline void Scenario::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha", 0, "alpha must lie strictly in (0,1)");
    if (!(c > 0.0)) throw ConfigError("c", 0, "c must be positive");
    for (double t : t_list)
        if (!(t > 0.0)) throw ConfigError("t", 0, "times must be positive");
    for (double t0 : t0_list)
        if (!(t0 >= 0.0)) throw ConfigError("t0", 0, "t0 must be nonnegative");
    if (n < 1) throw ConfigError("n", 0, "n must be >= 1");
    if (!(cutoff_ratio > 0.0 && cutoff_ratio < 1.0))
        throw ConfigError("cutoff_ratio", 0, "cutoff_ratio in (0,1)");
    if (!(du_factor > 0.0 && du_factor <= 0.1))
        throw ConfigError("du_factor", 0, "du_factor in (0, 0.1]");
}

/// Parse `key = value` lines; unknown keys are errors (with line numbers).
inline Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    std::string line;
    int ln = 0;
    std::ostringstream canon;
    while (std::getline(in, line)) {
        ++ln;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, ln, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (val.empty()) throw ConfigError(key, ln, "empty value");
        canon << key << "=" << val << "\n";
        if (key == "family") sc.family = detail::parse_family(val, key, ln);
        else if (key == "alpha") sc.alpha = detail::parse_real(val, key, ln);
        else if (key == "c") sc.c = detail::parse_real(val, key, ln);
        else if (key == "t0") sc.t0_list = detail::parse_real_list(val, key, ln);
        else if (key == "t") sc.t_list = detail::parse_real_list(val, key, ln);
        else if (key == "B" || key == "borel") sc.borel_sets.push_back(detail::parse_borel(val, key, ln));
        else if (key == "n") sc.n = static_cast<std::size_t>(detail::parse_real(val, key, ln));
        else if (key == "seed") sc.seed = static_cast<std::uint64_t>(detail::parse_real(val, key, ln));
        else if (key == "threads") sc.threads = static_cast<unsigned>(detail::parse_real(val, key, ln));
        else if (key == "cutoff_ratio") sc.cutoff_ratio = detail::parse_real(val, key, ln);
        else if (key == "du_factor") sc.du_factor = detail::parse_real(val, key, ln);
        else if (key == "quad_panels") sc.quad_panels = static_cast<int>(detail::parse_real(val, key, ln));
        else if (key == "quad_nodes") sc.quad_nodes = static_cast<int>(detail::parse_real(val, key, ln));
        else if (key == "ffpe_X") sc.ffpe_X = detail::parse_real(val, key, ln);
        else if (key == "ffpe_nx") sc.ffpe_nx = static_cast<std::size_t>(detail::parse_real(val, key, ln));
        else if (key == "ffpe_T") sc.ffpe_T = detail::parse_real(val, key, ln);
        else if (key == "ffpe_nt") sc.ffpe_nt = static_cast<std::size_t>(detail::parse_real(val, key, ln));
        else if (key == "a") sc.scale_a = detail::parse_real(val, key, ln);
        else if (key == "alphas") sc.alphas_list = detail::parse_real_list(val, key, ln);
        else if (key == "init_mean") sc.init_mean = detail::parse_real(val, key, ln);
        else if (key == "init_sd") sc.init_sd = detail::parse_real(val, key, ln);
        else if (key == "out") sc.out_dir = val;
        else throw ConfigError(key, ln, "unknown key");
    }
    sc.canonical = canon.str();
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    return parse_scenario(in);
}

/// Canonical serialization (stable field order) used for the audit hash;
/// CLI overrides are applied before hashing so the stamp reflects what ran.
inline std::string canonical_scenario(const Scenario& sc) {
    std::ostringstream os;
    os << "family=" << sc.family.label() << "\nalpha=" << sc.alpha << "\nc=" << sc.c << "\nt0=";
    for (std::size_t i = 0; i < sc.t0_list.size(); ++i)
        os << (i ? "," : "") << sc.t0_list[i];
    os << "\nt=";
    for (std::size_t i = 0; i < sc.t_list.size(); ++i) os << (i ? "," : "") << sc.t_list[i];
    os << "\n";
    for (const auto& b : sc.borel_sets) os << "B=" << b.to_string() << "\n";
    os << "n=" << sc.n << "\nseed=" << sc.seed << "\ncutoff_ratio=" << sc.cutoff_ratio
       << "\ndu_factor=" << sc.du_factor << "\nquad=" << sc.quad_panels << "x" << sc.quad_nodes
       << "\nffpe=" << sc.ffpe_X << "," << sc.ffpe_nx << "," << sc.ffpe_T << "," << sc.ffpe_nt
       << "\ninit=" << sc.init_mean << "," << sc.init_sd << "\n";
    return os.str();
}

inline std::uint64_t Scenario::hash() const { return fnv1a64(canonical_scenario(*this)); }

} // namespace actrwl

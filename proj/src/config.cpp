#include "oqho/config.hpp"
#include "oqho/errors.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace oqho {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

using KeyMap = std::map<std::string, Entry>;

double to_double(const std::string& key, const Entry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' has non-numeric value '" + e.value + "'");
    }
    if (trim(e.value.substr(pos)) != "")
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' has trailing junk in '" + e.value + "'");
    return v;
}

int to_int(const std::string& key, const Entry& e) {
    const double v = to_double(key, e);
    if (v != std::floor(v))
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' expects an integer, got '" + e.value + "'");
    return static_cast<int>(v);
}

std::vector<double> to_doubles(const std::string& key, const Entry& e) {
    std::istringstream in(e.value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                              "' has non-numeric token '" + tok + "'");
        }
    }
    return out;
}

} // namespace

std::vector<double> parse_theta_spec(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        // start:stop:count:linear|log
        std::istringstream in(spec);
        std::string a, b, c, d;
        std::getline(in, a, ':');
        std::getline(in, b, ':');
        std::getline(in, c, ':');
        std::getline(in, d);
        double start = 0, stop = 0;
        int count = 0;
        try {
            start = std::stod(a);
            stop = std::stod(b);
            count = std::stoi(c);
        } catch (const std::exception&) {
            throw ConfigError("theta range '" + spec + "' is not start:stop:count:linear|log");
        }
        if (count < 1) throw ConfigError("theta range count must be >= 1");
        if (!(start > 0.0) || !(stop >= start))
            throw ConfigError("theta range requires 0 < start <= stop");
        const std::string mode = trim(d);
        if (mode != "linear" && mode != "log")
            throw ConfigError("theta range mode must be 'linear' or 'log', got '" + mode + "'");
        for (int i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            out.push_back(mode == "linear" ? start + f * (stop - start)
                                           : start * std::pow(stop / start, f));
        }
    } else {
        std::string tok;
        std::istringstream in(spec);
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("theta list entry '" + tok + "' is not numeric");
            }
        }
    }
    for (double t : out)
        if (!(t > 0.0) || !std::isfinite(t))
            throw ConfigError("theta values must be positive and finite");
    if (out.empty()) throw ConfigError("theta specification is empty");
    return out;
}

RunConfig parse_config_text(const std::string& text) {
    std::map<std::string, KeyMap> sections;
    std::istringstream in(text);
    std::string line;
    std::string section = "";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                              line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        sections[section][key] = Entry{trim(line.substr(eq + 1)), lineno};
    }

    static const std::map<std::string, std::vector<std::string>> known = {
        {"model", {"mu", "nu", "R", "M"}},
        {"run", {"T", "N"}},
        {"theta", {"values", "range"}},
        {"qef", {"series_tol"}},
        {"quadrature", {"panels_per_halfperiod", "nodes_per_panel", "min_panels", "max_panels"}},
        {"tolerances",
         {"pr_residual", "lyapunov_residual", "gram_identity", "identity_blocks",
          "operator_eigenrelation", "nystrom_eigenvalue_rel", "nystrom_eigenfunction_l2",
          "taylor_relative", "admissibility_floor", "nystrom_grid"}},
        {"output", {"dir"}},
    };
    for (const auto& [sec, keys] : sections) {
        const auto it = known.find(sec);
        if (it == known.end()) throw ConfigError("unknown section '[" + sec + "]'");
        for (const auto& [key, entry] : keys) {
            bool ok = false;
            for (const auto& k : it->second) ok = ok || k == key;
            if (!ok)
                throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key +
                                  "' in section '[" + sec + "]'");
        }
    }

    RunConfig cfg;
    auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
        const auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    if (const auto* e = get("model", "mu")) cfg.mu = to_double("mu", *e);
    if (const auto* e = get("model", "nu")) cfg.nu = to_double("nu", *e);
    if (const auto* e = get("model", "R")) {
        const auto v = to_doubles("R", *e);
        if (v.size() != 4)
            throw ConfigError("line " + std::to_string(e->line) +
                              ": key 'R' expects 4 reals (row-major 2x2), got " +
                              std::to_string(v.size()));
        Eigen::Matrix2d R;
        R << v[0], v[1], v[2], v[3];
        cfg.R = R;
    }
    if (const auto* e = get("model", "M")) {
        const auto v = to_doubles("M", *e);
        if (v.size() < 1)
            throw ConfigError("line " + std::to_string(e->line) + ": key 'M' is empty");
        const int m = static_cast<int>(v[0]);
        if (v[0] != std::floor(v[0]) || m < 2 || v.size() != static_cast<std::size_t>(1 + 2 * m))
            throw ConfigError("line " + std::to_string(e->line) +
                              ": key 'M' expects the channel count m followed by 2m reals");
        Eigen::MatrixXd M(m, 2);
        for (int i = 0; i < m; ++i) {
            M(i, 0) = v[1 + 2 * i];
            M(i, 1) = v[2 + 2 * i];
        }
        cfg.M = M;
    }
    const bool has_rates = cfg.mu.has_value() || cfg.nu.has_value();
    const bool has_matrices = cfg.R.has_value() || cfg.M.has_value();
    if (has_rates && has_matrices)
        throw ConfigError("model section mixes the (mu, nu) shortcut with explicit R/M");
    if (has_rates && (!cfg.mu || !cfg.nu))
        throw ConfigError("model shortcut needs both 'mu' and 'nu'");
    if (has_matrices && (!cfg.R || !cfg.M))
        throw ConfigError("explicit model needs both 'R' and 'M'");
    if (!has_rates && !has_matrices)
        throw ConfigError("model section must provide (mu, nu) or (R, M)");

    if (const auto* e = get("run", "T")) cfg.T = to_double("T", *e);
    if (const auto* e = get("run", "N")) cfg.N = to_int("N", *e);
    if (cfg.T <= 0.0) throw ConfigError("key 'T' must be positive");
    if (cfg.N < 1) throw ConfigError("key 'N' must be >= 1");

    const auto* tv = get("theta", "values");
    const auto* tr = get("theta", "range");
    if (tv && tr) throw ConfigError("theta section has both 'values' and 'range'");
    if (tv) {
        for (double t : to_doubles("values", *tv)) cfg.thetas.push_back(t);
        for (double t : cfg.thetas)
            if (!(t > 0.0) || !std::isfinite(t))
                throw ConfigError("line " + std::to_string(tv->line) +
                                  ": theta values must be positive and finite");
        if (cfg.thetas.empty())
            throw ConfigError("line " + std::to_string(tv->line) + ": key 'values' is empty");
    } else if (tr) {
        std::string spec = tr->value;
        for (auto& ch : spec)
            if (ch == ' ' || ch == '\t') ch = ':';
        // collapse repeated separators
        std::string canon;
        for (char ch : spec) {
            if (ch == ':' && !canon.empty() && canon.back() == ':') continue;
            canon.push_back(ch);
        }
        cfg.thetas = parse_theta_spec(canon);
    }

    if (const auto* e = get("qef", "series_tol")) cfg.series_tol = to_double("series_tol", *e);
    if (cfg.series_tol <= 0.0) throw ConfigError("key 'series_tol' must be positive");

    if (const auto* e = get("quadrature", "panels_per_halfperiod"))
        cfg.quad.panels_per_halfperiod = to_double("panels_per_halfperiod", *e);
    if (const auto* e = get("quadrature", "nodes_per_panel"))
        cfg.quad.nodes_per_panel = to_int("nodes_per_panel", *e);
    if (const auto* e = get("quadrature", "min_panels")) cfg.quad.min_panels = to_int("min_panels", *e);
    if (const auto* e = get("quadrature", "max_panels")) cfg.quad.max_panels = to_int("max_panels", *e);
    if (cfg.quad.nodes_per_panel < 1 || cfg.quad.min_panels < 1 || cfg.quad.max_panels < 1 ||
        cfg.quad.panels_per_halfperiod <= 0.0)
        throw ConfigError("quadrature parameters must be positive");

    auto tol_d = [&](const char* key, double& slot) {
        if (const auto* e = get("tolerances", key)) slot = to_double(key, *e);
    };
    tol_d("pr_residual", cfg.tol.pr_residual);
    tol_d("lyapunov_residual", cfg.tol.lyapunov_residual);
    tol_d("gram_identity", cfg.tol.gram_identity);
    tol_d("identity_blocks", cfg.tol.identity_blocks);
    tol_d("operator_eigenrelation", cfg.tol.operator_eigenrelation);
    tol_d("nystrom_eigenvalue_rel", cfg.tol.nystrom_eigenvalue_rel);
    tol_d("nystrom_eigenfunction_l2", cfg.tol.nystrom_eigenfunction_l2);
    tol_d("taylor_relative", cfg.tol.taylor_relative);
    tol_d("admissibility_floor", cfg.tol.admissibility_floor);
    if (const auto* e = get("tolerances", "nystrom_grid"))
        cfg.tol.nystrom_grid = to_int("nystrom_grid", *e);

    if (const auto* e = get("output", "dir")) cfg.out_dir = e->value;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

CanonicalModel RunConfig::canonical() const {
    if (mu && nu) return canonical_from_rates(*mu, *nu);
    return canonicalize(build_model(*R, *M));
}

} // namespace oqho

#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lp/errors.hpp"

namespace lp {

struct solver_config {
    double tol_ode = 1e-11;
    double tol_y = 1e-15;      // bisection bracket target; see notes in README
    int n_max = 80;
    double z_min = 1e-6;       // classify runs integrate down to here
    double z_max = 100.0;
    double eps_sonic = 1e-12;
    double eps_event = 1e-10;
    double delta_classify = 1e-10;
    double tol_match = 1e-6;
    double tol_guard = 1e-8;
    double tol_center = 1e-4;  // |omega - 1/3| at the shooting leg's endpoint
    double eta_monotone = 0.05;
    double radius_safety = 0.8;
    double radius_cap = 0.5;
    std::string out_dir = ".";

    void validate() const {
        if (!(tol_ode > 0 && tol_y > 0 && tol_match > 0 && eps_sonic > 0 && eps_event > 0))
            throw config_error("all tolerances must be positive");
        if (!(z_min > 0 && z_min < 1.0))
            throw config_error("z_min must lie in (0,1)");
        if (!(z_max > 1.0))
            throw config_error("z_max must exceed 1");
        if (n_max < 2) throw config_error("n_max must be >= 2");
        if (tol_y < 1e-16) throw config_error("tol_y below double precision");
    }
};

// Parse a flat key=value config file ('#' comments, blank lines ignored).
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (!val.empty() && val.front() == '"' && val.back() == '"' && val.size() >= 2)
            val = val.substr(1, val.size() - 2);
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

inline void apply_config_entry(solver_config& cfg, const std::string& key, const std::string& val) {
    auto as_double = [&](const std::string& v) {
        try {
            size_t pos = 0;
            double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw config_error("bad numeric value for " + key + ": '" + val + "'");
        }
    };
    if (key == "tol_ode") cfg.tol_ode = as_double(val);
    else if (key == "tol_y") cfg.tol_y = as_double(val);
    else if (key == "n_max") cfg.n_max = static_cast<int>(as_double(val));
    else if (key == "z_min") cfg.z_min = as_double(val);
    else if (key == "z_max") cfg.z_max = as_double(val);
    else if (key == "eps_sonic") cfg.eps_sonic = as_double(val);
    else if (key == "eps_event") cfg.eps_event = as_double(val);
    else if (key == "delta_classify") cfg.delta_classify = as_double(val);
    else if (key == "tol_match") cfg.tol_match = as_double(val);
    else if (key == "tol_guard") cfg.tol_guard = as_double(val);
    else if (key == "tol_center") cfg.tol_center = as_double(val);
    else if (key == "eta_monotone") cfg.eta_monotone = as_double(val);
    else if (key == "out_dir") cfg.out_dir = val;
    else throw config_error("unknown config key: " + key);
}

inline solver_config load_config(const std::string& path) {
    solver_config cfg;
    for (const auto& [k, v] : parse_config_file(path)) apply_config_entry(cfg, k, v);
    cfg.validate();
    return cfg;
}

} // namespace lp

#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "lp/model.hpp"
#include "lp/origin_series.hpp"
#include "lp/shooting.hpp"
#include "lp/sonic_series.hpp"
#include "lp/verify.hpp"

namespace lp {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline nlohmann::json series_to_json(const sonic_series& s) {
    return {{"y_star", s.p.y_star},
            {"branch", s.branch == branch_kind::lp ? "lp" : "hunter"},
            {"n_max", s.n_max()},
            {"radius", s.radius},
            {"rho", s.rho},
            {"omega", s.omega}};
}

inline nlohmann::json series_to_json(const origin_series& s) {
    return {{"y_star", s.p.y_star},
            {"branch", "origin"},
            {"rho0", s.rho0},
            {"n_max", s.n_max()},
            {"radius", s.radius},
            {"rho", s.rho},
            {"omega", s.omega}};
}

inline void write_profile_csv(const solution_profile& pr, const sonic_parameter& p,
                              std::ostream& os) {
    os << "z,rho,omega,indicator\n";
    for (const auto& pt : pr.pts)
        os << fmt17(pt.z) << ',' << fmt17(pt.rho) << ',' << fmt17(pt.omega) << ','
           << fmt17(sonic_indicator({pt.z, pt.rho, pt.omega}, p)) << '\n';
}

inline nlohmann::json report_to_json(const invariant_report& rep) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& e : rep.entries)
        checks.push_back({{"name", e.name},
                          {"region", e.region},
                          {"statement", e.anchor},
                          {"margin", e.margin},
                          {"status", status_name(e.status)}});
    return {{"checks", checks}, {"verdict", rep.ok() ? "pass" : "fail"}};
}

inline void write_report_table(const invariant_report& rep, std::ostream& os) {
    for (const auto& e : rep.entries) {
        char line[256];
        std::snprintf(line, sizeof line, "%-26s %-16s %-10s %+.3e  %s\n", e.name.c_str(),
                      e.region.c_str(), status_name(e.status), e.margin, e.anchor.c_str());
        os << line;
    }
    os << (rep.ok() ? "verdict: pass\n" : "verdict: FAIL\n");
}

inline nlohmann::json solution_to_json(const lp_solution& sol, const solver_config& cfg,
                                       const std::string& report_path) {
    return {{"y_bar", sol.y_bar},
            {"rho_center", sol.rho_center},
            {"farfield_C", sol.farfield_c},
            {"tolerances",
             {{"tol_ode", cfg.tol_ode},
              {"tol_y", cfg.tol_y},
              {"tol_match", cfg.tol_match},
              {"eps_sonic", cfg.eps_sonic}}},
            {"event_log", sol.event_log},
            {"invariant_report_path", report_path}};
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw solver_error("cannot open output file: " + path);
    out << body;
}

inline void write_physical_csv(const solution_profile& pr, double k, double t,
                               std::ostream& os) {
    os << "r,varrho,u,m\n";
    for (const auto& s : to_physical(pr, k, t).samples)
        os << fmt17(s.r) << ',' << fmt17(s.varrho) << ',' << fmt17(s.u) << ',' << fmt17(s.m)
           << '\n';
}

} // namespace lp

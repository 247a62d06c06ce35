// Command-line front end: solve / classify / sweep / series / verify / export.
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lp/io.hpp"
#include "lp/shooting.hpp"
#include "lp/verify.hpp"

namespace {

struct cli_options {
    std::string config_path;
    lp::solver_config cfg;
    // flags that override the config file; CLI11 tells us which were set
};

int run_solve(const lp::solver_config& cfg) {
    lp::lp_solution sol = lp::solve_lp(cfg);
    lp::invariant_report rep = lp::verify_solution(sol, cfg);

    std::string base = cfg.out_dir.empty() ? "." : cfg.out_dir;
    std::string report_path = base + "/invariants.json";
    // the stored path is relative to the solution file so runs compare byte-identically
    lp::write_text_file(base + "/lp_solution.json",
                        lp::solution_to_json(sol, cfg, "invariants.json").dump(2) + "\n");
    std::ostringstream csv;
    lp::write_profile_csv(sol.profile, lp::sonic_parameter(sol.y_bar), csv);
    lp::write_text_file(base + "/profile.csv", csv.str());
    lp::write_text_file(report_path, lp::report_to_json(rep).dump(2) + "\n");

    std::printf("y_bar       = %.15g\n", sol.y_bar);
    std::printf("rho_center  = %.15g\n", sol.rho_center);
    std::printf("farfield_C  = %.15g\n", sol.farfield_c);
    lp::write_report_table(rep, std::cout);
    return rep.ok() ? 0 : 4;
}

int run_classify(double y_star, const lp::solver_config& cfg) {
    lp::classification c = lp::classify(lp::sonic_parameter(y_star), cfg);
    nlohmann::json j = {{"y_star", y_star},
                        {"label", std::string(1, c.label)},
                        {"inf_omega", c.inf_omega},
                        {"terminal", lp::terminal_name(c.term)}};
    if (c.z_one_third) j["z_one_third"] = *c.z_one_third;
    if (c.sonic_time) j["sonic_time"] = *c.sonic_time;
    std::printf("y_star=%.17g label=%c inf_omega=%.17g terminal=%s\n", y_star, c.label,
                c.inf_omega, lp::terminal_name(c.term));
    std::string base = cfg.out_dir.empty() ? "." : cfg.out_dir;
    lp::write_text_file(base + "/classify.json", j.dump(2) + "\n");
    return 0;
}

int run_sweep(double y_min, double y_max, double step, int jobs, const lp::solver_config& cfg) {
    if (step <= 0.0) throw lp::config_error("sweep: step must be positive");
    if (jobs < 1) throw lp::config_error("sweep: jobs must be >= 1");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        double y = y_min + k * step;
        if (y > y_max + 1e-12 * std::max(1.0, std::abs(y_max))) break;
        grid.push_back(y);
    }
    std::vector<std::string> rows(grid.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            std::ostringstream row;
            row << lp::fmt17(grid[i]) << ',';
            try {
                lp::classification c = lp::classify(lp::sonic_parameter(grid[i]), cfg);
                row << c.label << ',' << lp::fmt17(c.inf_omega) << ','
                    << lp::terminal_name(c.term);
            } catch (const lp::solver_error& e) {
                row << "error,nan," << e.what();
            }
            rows[i] = row.str();
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "y_star,label,inf_omega,terminal\n";
    for (const auto& r : rows) csv << r << '\n';
    std::string base = cfg.out_dir.empty() ? "." : cfg.out_dir;
    lp::write_text_file(base + "/sweep.csv", csv.str());
    std::printf("sweep: %zu rows -> %s/sweep.csv\n", rows.size(), base.c_str());
    return 0;
}

int run_series(double y_star, double rho0, bool have_rho0, const std::string& branch,
               const lp::solver_config& cfg) {
    nlohmann::json j;
    if (have_rho0) {
        lp::origin_series s =
            lp::extend_origin_series(lp::sonic_parameter(y_star), rho0, cfg.n_max,
                                     cfg.radius_safety, cfg.radius_cap);
        j = lp::series_to_json(s);
    } else {
        lp::branch_kind b;
        if (branch == "lp")
            b = lp::branch_kind::lp;
        else if (branch == "hunter")
            b = lp::branch_kind::hunter;
        else
            throw lp::config_error("series: branch must be lp or hunter");
        lp::sonic_series s = lp::extend_series(lp::sonic_parameter(y_star), b, cfg.n_max,
                                               cfg.radius_safety, cfg.radius_cap);
        j = lp::series_to_json(s);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_verify(const lp::solver_config& cfg) {
    lp::lp_solution sol = lp::solve_lp(cfg);
    lp::invariant_report rep = lp::verify_solution(sol, cfg);
    lp::write_report_table(rep, std::cout);
    return rep.ok() ? 0 : 4;
}

int run_export(const std::string& profile_path, double y_star, double k, double t,
               const lp::solver_config& cfg) {
    std::ifstream in(profile_path);
    if (!in) throw lp::config_error("export: cannot open " + profile_path);
    lp::solution_profile pr;
    pr.y_star = y_star;
    std::string line;
    if (!std::getline(in, line) || line.rfind("z,rho,omega", 0) != 0)
        throw lp::config_error("export: " + profile_path + " is not a profile CSV");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        lp::profile_point pt;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &pt.z, &pt.rho, &pt.omega) != 3)
            throw lp::config_error("export: bad CSV row: " + line);
        pr.pts.push_back(pt);
    }
    std::ostringstream csv;
    lp::write_physical_csv(pr, k, t, csv);
    std::string base = cfg.out_dir.empty() ? "." : cfg.out_dir;
    lp::write_text_file(base + "/physical.csv", csv.str());
    std::printf("export: %zu rows -> %s/physical.csv\n", pr.pts.size(), base.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-similar isothermal collapse solver"};
    app.require_subcommand(1);

    std::string config_path;
    double tol_ode = -1, tol_y = -1, z_max = -1;
    int n_max = -1;
    std::string out_dir;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--tol-ode", tol_ode, "ODE tolerance");
    app.add_option("--tol-y", tol_y, "bisection bracket width");
    app.add_option("--n-max", n_max, "series truncation order");
    app.add_option("--z-max", z_max, "outer integration endpoint");
    app.add_option("--out-dir", out_dir, "output directory");

    auto* c_solve = app.add_subcommand("solve", "construct the collapse profile");
    auto* c_classify = app.add_subcommand("classify", "classify one sonic parameter");
    auto* c_sweep = app.add_subcommand("sweep", "classify a parameter range in parallel");
    auto* c_series = app.add_subcommand("series", "dump series coefficients as JSON");
    auto* c_verify = app.add_subcommand("verify", "solve and run the invariant checks");
    auto* c_export = app.add_subcommand("export", "convert a profile to fluid variables");

    double y_star = 0.0, rho0 = 0.0;
    c_classify->add_option("--y-star", y_star, "sonic parameter")->required();

    double y_min = 2.0, y_max = 3.0, step = 0.05;
    int jobs = 1;
    c_sweep->add_option("--y-min", y_min, "range start");
    c_sweep->add_option("--y-max", y_max, "range end");
    c_sweep->add_option("--step", step, "grid step");
    c_sweep->add_option("--jobs", jobs, "worker threads");

    std::string branch = "lp";
    auto* opt_ys = c_series->add_option("--y-star", y_star, "sonic parameter");
    auto* opt_r0 = c_series->add_option("--rho0", rho0, "central density (origin series)");
    c_series->add_option("--branch", branch, "lp | hunter");

    std::string profile_path;
    double phys_k = 1.0, phys_t = -1.0, export_ystar = 0.0;
    c_export->add_option("--profile", profile_path, "profile.csv from solve")->required();
    c_export->add_option("--y-star", export_ystar, "sonic parameter of the profile")->required();
    c_export->add_option("--k", phys_k, "sound speed squared");
    c_export->add_option("--t", phys_t, "time (negative)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        lp::solver_config cfg;
        if (!config_path.empty()) cfg = lp::load_config(config_path);
        // flags win over the config file
        if (tol_ode > 0) cfg.tol_ode = tol_ode;
        if (tol_y > 0) cfg.tol_y = tol_y;
        if (n_max > 0) cfg.n_max = n_max;
        if (z_max > 0) cfg.z_max = z_max;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();

        if (c_solve->parsed()) return run_solve(cfg);
        if (c_classify->parsed()) return run_classify(y_star, cfg);
        if (c_sweep->parsed()) return run_sweep(y_min, y_max, step, jobs, cfg);
        if (c_series->parsed()) {
            if (!*opt_ys) throw lp::config_error("series: --y-star is required");
            return run_series(y_star, rho0, static_cast<bool>(*opt_r0), branch, cfg);
        }
        if (c_verify->parsed()) return run_verify(cfg);
        if (c_export->parsed())
            return run_export(profile_path, export_ystar, phys_k, phys_t, cfg);
    } catch (const lp::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const lp::solver_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}

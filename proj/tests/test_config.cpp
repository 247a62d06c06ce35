#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "lp/config.hpp"

using namespace lp;

namespace {

std::string write_temp(const std::string& body) {
    std::string path = "test_config_tmp.cfg";
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("defaults validate") {
    solver_config cfg;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("validation rejects bad values") {
    solver_config cfg;
    cfg.z_min = 1.5;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = solver_config{};
    cfg.z_max = 0.5;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = solver_config{};
    cfg.tol_ode = -1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = solver_config{};
    cfg.n_max = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("config file parsing") {
    std::string path = write_temp(
        "# comment line\n"
        "tol_ode = 1e-9\n"
        "n_max=40   # trailing comment\n"
        "out_dir = \"some dir\"\n"
        "\n");
    solver_config cfg = load_config(path);
    CHECK(cfg.tol_ode == 1e-9);
    CHECK(cfg.n_max == 40);
    CHECK(cfg.out_dir == "some dir");
    std::remove(path.c_str());
}

TEST_CASE("parse errors carry line context") {
    std::string path = write_temp("tol_ode\n");
    CHECK_THROWS_AS(load_config(path), config_error);
    std::remove(path.c_str());

    path = write_temp("no_such_key = 1\n");
    CHECK_THROWS_AS(load_config(path), config_error);
    std::remove(path.c_str());

    path = write_temp("tol_ode = abc\n");
    CHECK_THROWS_AS(load_config(path), config_error);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_config("definitely_missing.cfg"), config_error);
}

TEST_CASE("entries apply individually") {
    solver_config cfg;
    apply_config_entry(cfg, "z_max", "250");
    CHECK(cfg.z_max == 250.0);
    apply_config_entry(cfg, "tol_match", "1e-5");
    CHECK(cfg.tol_match == 1e-5);
    CHECK_THROWS_AS(apply_config_entry(cfg, "bogus", "1"), config_error);
}

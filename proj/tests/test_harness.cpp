#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnrelax/harness.hpp"

using namespace bnrelax;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const char* tag) {
    const std::string dir = std::string("harness_out_") + tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("presets carry the published test data") {
    SUBCASE("A1") {
        const OdeProblem a1 = preset_a1();
        CHECK(a1.v0.u1 == -5.0);
        CHECK(a1.v0.u2 == 5.0);
        CHECK(a1.v0.p1 == 0.1);
        CHECK(a1.v0.p2 == 20.0);
        CHECK(a1.v0.alpha1 == 0.9);
        CHECK(a1.params.m1 == 1.0);
        CHECK(a1.params.m2 == 4.0);
        CHECK(a1.params.eos1.gamma == 6.0);
        CHECK(a1.params.eos2.gamma == 1.4);
        CHECK(a1.params.eos1.pi_inf == 0.0);
        CHECK(a1.params.eos2.pi_inf == 0.0);
        CHECK(a1.params.lambda_fric == 1e9);
        CHECK(a1.params.nu_press == 10.0);
        CHECK(a1.params.interface_closure == InterfaceClosure::Simple);
        CHECK(a1.t_end == 1.0e-3);
    }
    SUBCASE("A2") {
        const OdeProblem a2 = preset_a2();
        CHECK(a2.v0.p1 == 2.0e8);
        CHECK(a2.v0.p2 == 1.0);
        CHECK(a2.v0.alpha1 == 0.4);
        CHECK(a2.params.m1 == 780.0);
        CHECK(a2.params.m2 == 0.22);
        CHECK(a2.params.eos1.pi_inf == 100.0);
    }
    SUBCASE("RP1") {
        const RiemannProblem rp = preset_rp1();
        CHECK(rp.left.rho1 == 500.0);
        CHECK(rp.left.rho2 == 2.0);
        CHECK(rp.left.p1 == 1e8);
        CHECK(rp.right.p1 == 1e5);
        CHECK(rp.left.alpha1 == 1.0 - 1e-8);
        CHECK(rp.right.alpha1 == 1e-8);
        CHECK(rp.x_jump == 0.75);
        CHECK(rp.t_end == 473e-6);
        CHECK(rp.model.eos1.gamma == 2.35);
        CHECK(rp.model.eos2.gamma == 1.025);
        CHECK(rp.model.eos1.pi_inf == 4e8);
        CHECK(rp.model.eos2.pi_inf == 0.0);
        CHECK(rp.model.nu_press == 1e20);
    }
    SUBCASE("RP2") {
        const RiemannProblem rp = preset_rp2();
        CHECK(rp.left.rho1 == 1150.0);
        CHECK(rp.left.rho2 == 0.63);
        CHECK(rp.left.u1 == -2.0);
        CHECK(rp.right.u1 == 2.0);
        CHECK(rp.left.p1 == 1e5);
        CHECK(rp.left.alpha1 == 0.99);
        CHECK(rp.x_jump == 0.5);
        CHECK(rp.t_end == 3.2e-3);
        CHECK(rp.model.eos1.gamma == 2.35);
        CHECK(rp.model.eos2.gamma == 1.43);
        CHECK(rp.model.eos1.pi_inf == 1e9);
    }
    SUBCASE("RP3") {
        const RiemannProblem rp = preset_rp3();
        CHECK(rp.left.rho1 == 1.0);
        CHECK(rp.left.rho2 == 0.2);
        CHECK(rp.right.rho1 == 0.125);
        CHECK(rp.right.rho2 == 2.0);
        CHECK(rp.left.p1 == 1.0);
        CHECK(rp.right.p1 == 0.1);
        CHECK(rp.left.alpha1 == 0.55);
        CHECK(rp.right.alpha1 == 0.45);
        CHECK(rp.x_jump == 0.6);
        CHECK(rp.t_end == 0.15);
        CHECK(rp.model.eos1.gamma == 2.0);
        CHECK(rp.model.eos1.pi_inf == 2.0);
        CHECK(rp.model.eos2.gamma == 1.4);
    }
}

TEST_CASE("config file parsing") {
    const std::string dir = temp_dir("cfg");
    SUBCASE("empty file leaves the presets untouched") {
        const std::string path = dir + "/empty.cfg";
        std::ofstream(path) << "# nothing here\n\n";
        RunOptions options;
        load_config(path, options);
        CHECK(options.problem == "A1");
        CHECK(options.delta_max == 0.5);
    }
    SUBCASE("flags override file values") {
        const std::string path = dir + "/base.cfg";
        std::ofstream(path) << "delta_max = 100\nproblem = A2\n";
        RunOptions options;
        load_config(path, options);
        CHECK(options.delta_max == 100.0);
        apply_override(options, "delta_max", "0.5");
        CHECK(options.delta_max == 0.5);
        CHECK(options.problem == "A2");
    }
    SUBCASE("unknown key lists the valid keys") {
        const std::string path = dir + "/bad_key.cfg";
        std::ofstream(path) << "delta_mx = 0.5\n";
        RunOptions options;
        CHECK_THROWS_WITH_AS(load_config(path, options),
                             doctest::Contains("valid keys"), ConfigError);
    }
    SUBCASE("type mismatch reports the line number") {
        const std::string path = dir + "/bad_type.cfg";
        std::ofstream(path) << "# comment\n\ndelta_max = fast\n";
        RunOptions options;
        CHECK_THROWS_WITH_AS(load_config(path, options), doctest::Contains(":3"),
                             ConfigError);
    }
    SUBCASE("comments and blank lines are ignored") {
        const std::string path = dir + "/comments.cfg";
        std::ofstream(path) << "cells = 256  # trailing comment\n\n# full line\n";
        RunOptions options;
        load_config(path, options);
        CHECK(options.cells == 256);
    }
}

TEST_CASE("resolved config is echoed and reloadable") {
    const std::string dir = temp_dir("echo");
    RunOptions options;
    options.out_dir = dir;
    options.run_id = "echoed";
    options.gamma1 = 2.35;
    const std::string path = echo_resolved_config(options);
    const std::string text = slurp(path);
    CHECK(text.find("gamma1 = 2.3500000000000001") != std::string::npos);
    RunOptions reloaded;
    load_config(path, reloaded);
    CHECK(reloaded.gamma1 == 2.35);
    CHECK(reloaded.delta_max == options.delta_max);
}

TEST_CASE("run_ode writes the trajectory with the documented schema") {
    const std::string dir = temp_dir("ode");
    RunOptions options;
    options.out_dir = dir;
    options.problem = "A1";
    const OdeRunResult result = run_ode(options);
    CHECK(result.report.accepted >= 1);
    const std::string text = slurp(result.trajectory_csv);
    CHECK(text.rfind("t,u1,u2,p1,p2,alpha1,dt,iterations\n", 0) == 0);
    // one row per trajectory point
    const long rows = static_cast<long>(std::count(text.begin(), text.end(), '\n')) - 1;
    CHECK(rows == static_cast<long>(result.integration.trajectory.size()));
}

TEST_CASE("identical resolved configs produce byte-identical outputs") {
    const std::string dir_a = temp_dir("repro_a");
    const std::string dir_b = temp_dir("repro_b");
    RunOptions options;
    options.problem = "A1";
    options.out_dir = dir_a;
    const OdeRunResult first = run_ode(options);
    options.out_dir = dir_b;
    const OdeRunResult second = run_ode(options);
    CHECK(slurp(first.trajectory_csv) == slurp(second.trajectory_csv));
}

TEST_CASE("run_convergence fits second-order slopes on A1") {
    const std::string dir = temp_dir("conv");
    RunOptions options;
    options.out_dir = dir;
    options.problem = "A1";
    options.n_runs = 10;
    const ConvergenceResult result = run_convergence(options);
    REQUIRE_FALSE(result.degenerate);
    CHECK(result.slope_p1 >= 1.5);
    CHECK(result.slope_alpha1 >= 1.5);
    CHECK(std::filesystem::exists(result.table_csv));
}

TEST_CASE("run_rp writes one profile set per nu value") {
    const std::string dir = temp_dir("rp");
    RunOptions options;
    options.out_dir = dir;
    options.problem = "RP3";
    options.cells = 100;
    options.t_end = 0.01;
    options.nu = "1e-8,1e20";
    const RpRunResult result = run_rp(options);
    REQUIRE(result.nus.size() == 2);
    REQUIRE(result.runs.size() == 2);
    CHECK(result.csv_files.size() == 2);
    for (const std::string& file : result.csv_files) {
        const std::string text = slurp(file);
        CHECK(text.rfind("x,alpha1,rho1,rho2,u1,u2,p1,p2,p_mix\n", 0) == 0);
    }
}

TEST_CASE("option validation errors") {
    RunOptions options;
    options.cells = 10;
    options.problem = "RP3";
    CHECK_THROWS_AS(run_rp(options), ConfigError);
    options.cells = 100;
    options.problem = "A1";
    CHECK_THROWS_AS(run_rp(options), ConfigError);  // not an RP problem
    RunOptions conv;
    conv.n_runs = 3;
    CHECK_THROWS_AS(run_convergence(conv), ConfigError);
    RunOptions mask;
    mask.coeff_mask = "11";
    CHECK_THROWS_AS(run_ode(mask), ConfigError);
}

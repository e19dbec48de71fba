#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nlhom/nlhom.hpp"

using namespace nlhom;

namespace {

std::string write_config(const std::string& name, const std::string& body) {
    const std::string path =
        (std::filesystem::temp_directory_path() / ("nlh_test_" + name + ".cfg")).string();
    std::ofstream os(path);
    os << body;
    return path;
}

} // namespace

TEST_CASE("config parsing covers every section") {
    const std::string path = write_config("full", R"(# full example
[run]
mode = converge
dim = 1
seeds = 3 5 8

[kernel]
family = tent
radius = 1.5
amplitude = 2.0
quadrature = 128

[medium]
generator = checkerboard
alpha1 = 1.0
alpha2 = 3.0
cell = 0.5
two_phase = true

[lambda]
generator = checkerboard
alpha1 = 1.0
alpha2 = 2.0
scale_of_mu = 2.0

[grid]
ladder = 2:256

[eps]
ladder = 0.25 0.125

[solve]
m = 1.5
tol = 1e-8
max_iter = 5000

[rhs]
kind = gaussian-poly
center = 1.0
width = 0.4

[corrector]
schedule = 1e-1 1e-2 1e-3
tol = 1e-9
max_iter = 10000

[output]
dir = run_out
)");
    ExperimentConfig cfg = parse_config(path);
    REQUIRE(cfg.mode == RunMode::Converge);
    REQUIRE(cfg.dim == 1);
    REQUIRE(cfg.seeds == std::vector<std::uint64_t>{3, 5, 8});
    REQUIRE(cfg.kernel.family == KernelFamily::Tent);
    REQUIRE(cfg.kernel.support_radius == 1.5);
    REQUIRE(cfg.kernel.amplitude == 2.0);
    REQUIRE(cfg.kernel_quadrature == 128);
    REQUIRE(cfg.medium.generator == MediumGenerator::Checkerboard);
    REQUIRE(cfg.medium.alpha2 == 3.0);
    REQUIRE(cfg.medium.cell == 0.5);
    REQUIRE(cfg.lambda.has_value());
    REQUIRE(cfg.lambda->scale_of_mu == 2.0);
    REQUIRE(cfg.grids.size() == 1);
    REQUIRE(cfg.grids[0].length == 2.0);
    REQUIRE(cfg.grids[0].points == 256);
    REQUIRE(cfg.eps_ladder == std::vector<double>{0.25, 0.125});
    REQUIRE(cfg.m == 1.5);
    REQUIRE(cfg.solve_tol == 1e-8);
    REQUIRE(cfg.solve_max_iter == 5000);
    REQUIRE(cfg.rhs.kind == RhsKind::GaussianTimesPolynomial);
    REQUIRE(cfg.rhs.center_set);
    REQUIRE(cfg.rhs.center[0] == 1.0);
    REQUIRE(cfg.rhs.width == 0.4);
    REQUIRE(cfg.corrector.schedule == std::vector<double>{1e-1, 1e-2, 1e-3});
    REQUIRE(cfg.out_dir == "run_out");
    std::remove(path.c_str());
}

TEST_CASE("config rejections") {
    auto expect_reject = [](const std::string& name, const std::string& body) {
        const std::string path = write_config(name, body);
        REQUIRE_THROWS_AS(parse_config(path), ConfigError);
        std::remove(path.c_str());
    };
    REQUIRE_THROWS_AS(parse_config("/nonexistent/nlh.cfg"), ConfigError);
    expect_reject("badkey", "[run]\nmoude = converge\n");
    expect_reject("badsection", "[warp]\nx = 1\n");
    expect_reject("badnum", "[solve]\nm = fast\n");
    expect_reject("noequals", "[run]\nmode converge\n");
    expect_reject("badheader", "[run\nmode = converge\n");
    expect_reject("badgrid", "[grid]\nladder = 2x256\n");
    expect_reject("badrhs", "[rhs]\nkind = spike\n");
    // structurally fine, semantically invalid: increasing eps ladder
    expect_reject("epsup", "[eps]\nladder = 0.1 0.2\n");
    // eps * R exceeds a quarter torus
    expect_reject("epsbig", "[grid]\nladder = 1:256\n[eps]\nladder = 0.5\n");
    // checkerboard cell does not divide the micro torus
    expect_reject("celldiv",
                  "[grid]\nladder = 1:256\n[eps]\nladder = 0.15\n[medium]\ncell = 1.0\n");
    // rhs support too wide for the margin rule
    expect_reject("widerhs", "[grid]\nladder = 1:256\n[eps]\nladder = 0.2 0.1\n[rhs]\nwidth = 0.3\n");
    // rhs support below resolution
    expect_reject("thinrhs", "[grid]\nladder = 1:64\n[eps]\nladder = 0.2 0.1\n[rhs]\nwidth = 0.05\n");
    expect_reject("badm", "[solve]\nm = -1\n");
}

TEST_CASE("result emission format") {
    ConvergenceRecord r;
    r.seed = 7;
    r.eps = 0.125;
    r.L = 8.0;
    r.n = 512;
    r.delta = 1e-3;
    r.err_l2 = 0.0123456789012345678;
    r.u_norm = 0.5;
    r.iters = 42;
    r.wall_ms = 12.5;
    const std::string csv =
        (std::filesystem::temp_directory_path() / "nlh_test_rows.csv").string();
    const std::string json_path =
        (std::filesystem::temp_directory_path() / "nlh_test_rows.json").string();
    emit_results({r}, ResultFormat::Csv, csv);
    {
        std::ifstream is(csv);
        std::string header, row;
        std::getline(is, header);
        std::getline(is, row);
        REQUIRE(header == "seed,eps,L,n,delta,err_l2,u_norm,iters,wall_ms");
        std::vector<std::string> cols;
        std::stringstream ss(row);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        REQUIRE(cols.size() == 9);
        REQUIRE(cols[0] == "7");
        REQUIRE(std::stod(cols[1]) == r.eps);
        REQUIRE(std::stod(cols[2]) == r.L);
        REQUIRE(cols[3] == "512");
        REQUIRE(std::stod(cols[4]) == r.delta);
        // 17 significant digits round-trip doubles exactly
        REQUIRE(std::stod(cols[5]) == r.err_l2);
        REQUIRE(std::stod(cols[6]) == r.u_norm);
        REQUIRE(cols[7] == "42");
        REQUIRE(std::stod(cols[8]) == r.wall_ms);
    }
    // deterministic bytes: writing twice gives identical files
    const std::string csv2 = csv + ".again";
    emit_results({r}, ResultFormat::Csv, csv2);
    {
        std::ifstream a(csv, std::ios::binary), b(csv2, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        REQUIRE(sa.str() == sb.str());
    }
    emit_results({r}, ResultFormat::Json, json_path);
    {
        std::ifstream is(json_path);
        nlohmann::json j = nlohmann::json::parse(is);
        REQUIRE(j.size() == 1);
        REQUIRE(j[0]["seed"].get<std::uint64_t>() == 7);
        REQUIRE(j[0]["eps"].get<double>() == 0.125);
        REQUIRE(j[0]["err_l2"].get<double>() == r.err_l2);
        REQUIRE(j[0]["iters"].get<int>() == 42);
    }
    REQUIRE_THROWS_AS(emit_results({}, ResultFormat::Csv, csv), std::runtime_error);
    for (const std::string& p : {csv, csv2, json_path}) std::remove(p.c_str());
}

TEST_CASE("worker count respects NLH_THREADS") {
    unsetenv("NLH_THREADS");
    REQUIRE(worker_count(1) == 1);
    REQUIRE(worker_count(4) <= 4);
    setenv("NLH_THREADS", "1", 1);
    REQUIRE(worker_count(8) == 1);
    setenv("NLH_THREADS", "2", 1);
    REQUIRE(worker_count(8) <= 2);
    setenv("NLH_THREADS", "banana", 1);
    REQUIRE_THROWS_AS(worker_count(8), ConfigError);
    unsetenv("NLH_THREADS");
}

TEST_CASE("constant medium: resolvent ladder converges to the effective limit") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Constant;
    cfg.medium.alpha1 = cfg.medium.alpha2 = 1.5;
    cfg.seeds = {1};
    cfg.grids = {{1.0, 512}};
    cfg.eps_ladder = {0.2, 0.1, 0.05};
    cfg.rhs.width = 0.15;
    cfg.solve_tol = 1e-10;
    StudyResult res = run_convergence_study(cfg);
    REQUIRE(res.failures.empty());
    REQUIRE(res.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(res.records[i].eps == cfg.eps_ladder[i]);
        REQUIRE(res.records[i].u_norm <= 1.0 / cfg.m + 1e-9);
        if (i > 0) REQUIRE(res.records[i].err_l2 < res.records[i - 1].err_l2);
    }
    REQUIRE(res.records[2].err_l2 <= res.records[0].err_l2 / 3.0);

    // a larger m shrinks the solution norm accordingly
    ExperimentConfig big = cfg;
    big.m = 2.0;
    big.eps_ladder = {0.1};
    StudyResult res2 = run_convergence_study(big);
    REQUIRE(res2.records.size() == 1);
    REQUIRE(res2.records[0].u_norm <= 0.5 + 1e-9);
}

TEST_CASE("two-phase medium: errors are non-increasing down the ladder") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Checkerboard;
    cfg.medium.alpha1 = 1.0;
    cfg.medium.alpha2 = 3.0;
    cfg.medium.cell = 0.25;
    cfg.seeds = {1, 5, 11};
    cfg.grids = {{8.0, 4096}};
    cfg.eps_ladder = {0.125, 0.0625, 0.03125};
    cfg.rhs.width = 1.0;
    cfg.solve_tol = 1e-10;
    StudyResult res = run_convergence_study(cfg);
    REQUIRE(res.failures.empty());
    REQUIRE(res.records.size() == 9);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        REQUIRE(r.L == 8.0);
        REQUIRE(r.n == 4096);
        REQUIRE(r.u_norm <= 1.0 + 1e-9);
        // sorted by (seed asc, eps desc)
        REQUIRE(r.seed == cfg.seeds[i / 3]);
        REQUIRE(r.eps == cfg.eps_ladder[i % 3]);
        if (i % 3 != 0) REQUIRE(r.err_l2 <= res.records[i - 1].err_l2);
    }
}

TEST_CASE("studies are deterministic") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Checkerboard;
    cfg.medium.alpha1 = 1.0;
    cfg.medium.alpha2 = 3.0;
    cfg.medium.cell = 0.5;
    cfg.seeds = {2, 4};
    cfg.grids = {{2.0, 256}};
    cfg.eps_ladder = {0.25, 0.125};
    StudyResult a = run_convergence_study(cfg);
    StudyResult b = run_convergence_study(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        // identical in every reported field except the wall-clock timing
        REQUIRE(a.records[i].seed == b.records[i].seed);
        REQUIRE(a.records[i].eps == b.records[i].eps);
        REQUIRE(a.records[i].delta == b.records[i].delta);
        REQUIRE(a.records[i].err_l2 == b.records[i].err_l2);
        REQUIRE(a.records[i].u_norm == b.records[i].u_norm);
        REQUIRE(a.records[i].iters == b.records[i].iters);
    }
}

TEST_CASE("non-symmetric studies") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Checkerboard;
    cfg.medium.alpha1 = 1.0;
    cfg.medium.alpha2 = 3.0;
    cfg.medium.cell = 0.5;
    cfg.seeds = {2};
    cfg.grids = {{2.0, 256}};
    cfg.eps_ladder = {0.25, 0.125};

    // ns mode without a lambda section is a config error
    REQUIRE_THROWS_AS(run_ns_convergence_study(cfg), ConfigError);

    // lambda = mu reduces bit-for-bit to the symmetric study
    StudyResult sym = run_convergence_study(cfg);
    cfg.lambda = cfg.medium;
    cfg.lambda->scale_of_mu = 1.0;
    StudyResult same = run_ns_convergence_study(cfg);
    REQUIRE(same.records.size() == sym.records.size());
    for (std::size_t i = 0; i < sym.records.size(); ++i) {
        REQUIRE(same.records[i].err_l2 == sym.records[i].err_l2);
        REQUIRE(same.records[i].u_norm == sym.records[i].u_norm);
        REQUIRE(same.records[i].iters == sym.records[i].iters);
    }

    // lambda = 2 mu: genuinely non-symmetric path, still convergent
    cfg.lambda->scale_of_mu = 2.0;
    StudyResult ns = run_ns_convergence_study(cfg);
    REQUIRE(ns.failures.empty());
    REQUIRE(ns.records.size() == 2);
    REQUIRE(ns.records[1].err_l2 <= ns.records[0].err_l2);
}

TEST_CASE("per-seed failures are reported, not thrown") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Constant;
    cfg.medium.alpha1 = cfg.medium.alpha2 = 1.5;
    cfg.seeds = {1};
    cfg.grids = {{1.0, 512}};
    cfg.eps_ladder = {0.2};
    cfg.rhs.width = 0.15;
    cfg.solve_max_iter = 1;   // force non-convergence
    StudyResult res = run_convergence_study(cfg);
    REQUIRE(res.records.empty());
    REQUIRE(res.failures.size() == 1);
    REQUIRE(res.solver_failure);
}

TEST_CASE("oracle cross-checks pass on small grids") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.kernel.family = KernelFamily::BallIndicator;
    cfg.kernel.dim = 1;
    cfg.kernel.support_radius = 1.0;
    cfg.medium.generator = MediumGenerator::Checkerboard;
    cfg.medium.alpha1 = 1.0;
    cfg.medium.alpha2 = 3.0;
    cfg.medium.cell = 1.0;
    cfg.seeds = {3};
    cfg.grids = {{8.0, 64}};
    cfg.eps_ladder = {0.5};
    OracleReport rep = run_oracle_check(cfg);
    REQUIRE(rep.all_pass());
    std::vector<std::string> names;
    for (const auto& c : rep.checks) names.push_back(c.name);
    for (const std::string& expected :
         {"operator-apply", "resolvent-solve", "drift-assembly", "corrector-solve",
          "d1-assembly", "d2-assembly", "corrupted-kernel-evenness"})
        REQUIRE(std::find(names.begin(), names.end(), expected) != names.end());

    cfg.grids = {{8.0, 128}};
    REQUIRE_THROWS_AS(run_oracle_check(cfg), ConfigError);
}

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "nlhom/nlhom.hpp"

using namespace nlhom;

namespace {

Kernel ball_kernel(int dim, double R = 1.0, int q = 64) {
    KernelSpec s;
    s.family = KernelFamily::BallIndicator;
    s.dim = dim;
    s.support_radius = R;
    return make_kernel(s, q);
}

CorrectorField zero_corrector(const GridSpec& g) {
    CorrectorField t;
    t.grid = g;
    t.theta.assign(static_cast<std::size_t>(g.dim), std::vector<double>(g.size(), 0.0));
    return t;
}

} // namespace

TEST_CASE("homogeneous medium: Theta = (c^2/2) M2 exactly") {
    // quadrature lattice aligned with the grid: step = 2R/q = h
    GridSpec g(1, 16.0, 256);
    Kernel k = ball_kernel(1, 1.0, 32);
    const double c = 1.5;
    MediumField mu = sample_constant(g, c);
    CorrectorField theta = solve_corrector(mu, k, 1e-3);
    EffectiveMatrix em = effective_matrix(mu, k, theta);
    const double expected = 0.5 * c * c * k.M2(0, 0);
    REQUIRE(std::abs(em.theta(0, 0) - expected) <= 1e-10 * expected);
    REQUIRE(std::abs(em.D2(0, 0)) <= 1e-10 * expected);
    REQUIRE(em.eigenvalues.front() > 0.0);
    REQUIRE(em.asymmetry == 0.0);
    REQUIRE(em.torus_side == 16.0);
    REQUIRE(em.points == 256);
    // for c = 1 and the unit ball, sigma2/2 is close to 1/3
    MediumField one = sample_constant(g, 1.0);
    EffectiveMatrix em1 = effective_matrix(one, k, solve_corrector(one, k, 1e-3));
    // the grid-sampled indicator overshoots sigma2/2 = 1/3 by O(h)
    REQUIRE(em1.theta(0, 0) == Catch::Approx(1.0 / 3.0).margin(0.04));
}

TEST_CASE("D2 only sees increments of theta") {
    GridSpec g(1, 8.0, 64);
    MediumField mu = sample_checkerboard(g, 1.0, 3.0, 1.0, 1);
    Kernel k = ball_kernel(1);
    CorrectorField theta = solve_corrector(mu, k, 1e-2);
    SmallMatrix d2 = compute_D2(mu, k, theta);
    CorrectorField shifted = theta;
    for (double& v : shifted.theta[0]) v += 12.5;
    SmallMatrix d2s = compute_D2(mu, k, shifted);
    REQUIRE(std::abs(d2(0, 0) - d2s(0, 0)) <= 1e-12 * std::max(1.0, std::abs(d2(0, 0))));
}

TEST_CASE("D1 and D2 match the dense oracles") {
    {
        GridSpec g(1, 4.0, 32);
        MediumField mu = sample_checkerboard(g, 1.0, 3.0, 0.5, 2);
        Kernel k = ball_kernel(1);
        CorrectorConfig cfg;
        cfg.tol = 1e-12;
        CorrectorField theta = solve_corrector(mu, k, 1e-2, cfg);
        SmallMatrix d1 = compute_D1(mu, k);
        SmallMatrix d2 = compute_D2(mu, k, theta);
        SmallMatrix d1o = oracle::dense_D1(mu, k);
        SmallMatrix d2o = oracle::dense_D2(mu, k, theta.theta);
        REQUIRE(std::abs(d1(0, 0) - d1o(0, 0)) <= 1e-12 * std::max(1.0, std::abs(d1o(0, 0))));
        REQUIRE(std::abs(d2(0, 0) - d2o(0, 0)) <= 1e-12 * std::max(1.0, std::abs(d2o(0, 0))));
    }
    {
        GridSpec g(2, 4.0, 16);
        MediumField mu = sample_checkerboard(g, 1.0, 2.0, 1.0, 3);
        Kernel k = ball_kernel(2);
        CorrectorConfig cfg;
        cfg.tol = 1e-12;
        CorrectorField theta = solve_corrector(mu, k, 1e-2, cfg);
        SmallMatrix d1 = compute_D1(mu, k);
        SmallMatrix d2 = compute_D2(mu, k, theta);
        SmallMatrix d1o = oracle::dense_D1(mu, k);
        SmallMatrix d2o = oracle::dense_D2(mu, k, theta.theta);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                REQUIRE(std::abs(d1(i, j) - d1o(i, j)) <= 1e-12 * std::max(1.0, d1o.frobenius()));
                REQUIRE(std::abs(d2(i, j) - d2o(i, j)) <= 1e-12 * std::max(1.0, d2o.frobenius()));
            }
    }
}

TEST_CASE("positivity guard fires on a corrupted corrector") {
    GridSpec g(1, 8.0, 64);
    MediumField mu = sample_checkerboard(g, 1.0, 3.0, 1.0, 4);
    Kernel k = ball_kernel(1);
    CorrectorField theta = solve_corrector(mu, k, 1e-2);
    for (double& v : theta.theta[0]) v *= 100.0;   // wildly wrong corrector
    bool thrown = false;
    try {
        effective_matrix(mu, k, theta);
    } catch (const NonPositiveDefinite& e) {
        thrown = true;
        REQUIRE(e.diagnostics.eigenvalues.front() <= 0.0);
    }
    REQUIRE(thrown);
}

TEST_CASE("energy identity on the homogeneous medium") {
    GridSpec g(1, 16.0, 256);
    Kernel k = ball_kernel(1, 1.0, 32);
    MediumField mu = sample_constant(g, 1.0);
    CorrectorField theta = zero_corrector(g);
    theta.delta = 0.0;
    EffectiveMatrix em = effective_matrix(mu, k, theta);
    auto res = energy_inequality_check(mu, k, theta, em, {{1.0, 0.0, 0.0}});
    REQUIRE(res.size() == 1);
    REQUIRE(res[0].pass);
    // with theta = 0 and mu = 1 the two sides coincide
    REQUIRE(std::abs(res[0].lhs - res[0].rhs) <= 1e-10 * res[0].lhs);
}

TEST_CASE("energy inequality on a two-phase medium") {
    GridSpec g(1, 16.0, 128);
    Kernel k = ball_kernel(1);
    MediumField mu = sample_checkerboard(g, 1.0, 3.0, 1.0, 5);
    CorrectorConfig cfg;
    CorrectorField theta = corrector_continuation(mu, k, cfg);
    EffectiveMatrix em = effective_matrix(mu, k, theta);
    std::vector<std::array<double, 3>> dirs = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {2.5, 0.0, 0.0}};
    auto res = energy_inequality_check(mu, k, theta, em, dirs);
    for (const auto& r : res) REQUIRE(r.pass);
    // both sides are even in eta
    REQUIRE(res[0].lhs == Catch::Approx(res[1].lhs));
    REQUIRE(res[0].rhs == Catch::Approx(res[1].rhs));
    // and quadratic
    REQUIRE(res[2].lhs == Catch::Approx(2.5 * 2.5 * res[0].lhs));
}

TEST_CASE("non-symmetric rescaling") {
    GridSpec g(1, 8.0, 64);
    Kernel k = ball_kernel(1);
    MediumField mu = sample_checkerboard(g, 1.0, 3.0, 1.0, 6);
    CorrectorField theta = solve_corrector(mu, k, 1e-3);
    EffectiveMatrix em = effective_matrix(mu, k, theta);

    EffectiveMatrix same = effective_matrix_ns(em, mu, mu);
    REQUIRE(same.has_ns);
    REQUIRE(same.ratio_mean == 1.0);
    REQUIRE(same.theta_ns.m == em.theta.m);

    MediumField lam = mu;
    for (double& v : lam.values) v *= 2.0;
    lam.alpha1 *= 2.0;
    lam.alpha2 *= 2.0;
    EffectiveMatrix doubled = effective_matrix_ns(em, mu, lam);
    REQUIRE(doubled.ratio_mean == 0.5);
    REQUIRE(doubled.theta_ns(0, 0) == 2.0 * em.theta(0, 0));

    MediumField bad = sample_constant(GridSpec(1, 8.0, 128), 1.0);
    REQUIRE_THROWS_AS(effective_matrix_ns(em, mu, bad), std::invalid_argument);
}

TEST_CASE("effective solve is exact on Fourier modes") {
    GridSpec g(1, 8.0, 128);
    SmallMatrix theta(1);
    theta(0, 0) = 0.4;
    const double m = 1.3;
    REQUIRE_THROWS_AS(solve_effective(theta, 0.0, Field(g, 1.0)), std::invalid_argument);

    // zero data
    EffectiveSolution z = solve_effective(theta, m, Field(g, 0.0));
    for (double v : z.u0.v) REQUIRE(v == 0.0);

    const double kk = 2.0 * 3.14159265358979323846 * 3.0 / g.length;
    Field f(g);
    for (int i = 0; i < g.points; ++i)
        f[static_cast<std::size_t>(i)] = std::cos(kk * g.coordinate(i));
    EffectiveSolution sol = solve_effective(theta, m, f);
    REQUIRE(sol.residual <= 1e-12);
    const double factor = -1.0 / (theta(0, 0) * kk * kk + m);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE(sol.u0[i] == Catch::Approx(factor * f[i]).margin(1e-12));

    // 2-d anisotropic
    GridSpec g2(2, 8.0, 32);
    SmallMatrix t2(2);
    t2(0, 0) = 0.5;
    t2(1, 1) = 0.25;
    t2(0, 1) = t2(1, 0) = 0.1;
    const double k1 = 2.0 * 3.14159265358979323846 / g2.length;
    const double k2 = 2.0 * k1;
    Field f2(g2);
    for (int i = 0; i < g2.points; ++i)
        for (int j = 0; j < g2.points; ++j)
            f2[g2.index({i, j, 0})] =
                std::cos(k1 * g2.coordinate(i)) * std::cos(k2 * g2.coordinate(j));
    EffectiveSolution sol2 = solve_effective(t2, m, f2);
    REQUIRE(sol2.residual <= 1e-12);
    // cos*cos splits into four modes (+-k1, +-k2); the off-diagonal coupling
    // differs per mode, so check through the quadratic form mode by mode
    const double qa = t2.quad({k1, k2, 0.0});
    const double qb = t2.quad({k1, -k2, 0.0});
    for (int i = 0; i < g2.points; ++i)
        for (int j = 0; j < g2.points; ++j) {
            const double x = g2.coordinate(i), y = g2.coordinate(j);
            const double ua = -0.5 * std::cos(k1 * x + k2 * y) / (qa + m);
            const double ub = -0.5 * std::cos(k1 * x - k2 * y) / (qb + m);
            REQUIRE(sol2.u0[g2.index({i, j, 0})] == Catch::Approx(ua + ub).margin(1e-12));
        }

    SmallMatrix npd(1);
    npd(0, 0) = -1.0;
    REQUIRE_THROWS_AS(solve_effective(npd, m, f), std::invalid_argument);
    REQUIRE_THROWS_AS(solve_effective(t2, m, f), std::invalid_argument);   // dim mismatch
}

TEST_CASE("periodic medium: Theta agrees with the singular-system oracle") {
    GridSpec g(1, 8.0, 64);
    MediumField mu = sample_periodic(g, {1.0, 3.0}, 1.0);
    Kernel k = ball_kernel(1);
    CorrectorConfig cfg;
    cfg.schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    cfg.tol = 1e-12;
    CorrectorField theta = corrector_continuation(mu, k, cfg);
    EffectiveMatrix em = effective_matrix(mu, k, theta);
    auto theta0 = oracle::dense_cell_problem_delta0(mu, k);
    SmallMatrix ref = oracle::dense_D1(mu, k) - oracle::dense_D2(mu, k, theta0);
    REQUIRE(std::abs(em.theta(0, 0) - ref(0, 0)) <= 1e-4 * std::abs(ref(0, 0)));
}

TEST_CASE("artifact persistence round trips") {
    GridSpec g(2, 4.0, 16);
    MediumField mu = sample_checkerboard(g, 1.0, 2.0, 1.0, 7);
    Kernel k = ball_kernel(2);
    CorrectorField theta = solve_corrector(mu, k, 1e-2);

    const std::string cpath = "theta_test.nlhf";
    save_corrector(cpath, theta);
    CorrectorField back = load_corrector(cpath);
    REQUIRE(back.grid == g);
    REQUIRE(back.theta.size() == 2);
    REQUIRE(back.theta[0] == theta.theta[0]);
    REQUIRE(back.theta[1] == theta.theta[1]);
    {
        std::ifstream side(cpath + ".json");
        REQUIRE(side.good());
        nlohmann::json j = nlohmann::json::parse(side);
        REQUIRE(j["delta"].get<double>() == theta.delta);
        REQUIRE(j["increment_norm"].get<double>() == theta.increment_norm);
    }

    EffectiveMatrix em = effective_matrix(mu, k, theta);
    const std::string epath = "effective_test.json";
    save_effective(epath, em, {7});
    {
        std::ifstream is(epath);
        nlohmann::json j = nlohmann::json::parse(is);
        REQUIRE(j["theta"][0][0].get<double>() == em.theta(0, 0));
        REQUIRE(j["theta"][1][0].get<double>() == em.theta(1, 0));
        REQUIRE(j["eigs"].size() == 2);
        REQUIRE(j["seeds"][0].get<std::uint64_t>() == 7);
        REQUIRE(j["L"].get<double>() == 4.0);
        REQUIRE(j["n"].get<int>() == 16);
    }

    GridSpec g1(1, 8.0, 64);
    MediumField mu1 = sample_checkerboard(g1, 1.0, 2.0, 1.0, 8);
    OperatorHandle op = build_operator(mu1, ball_kernel(1), 0.5);
    Field f = make_test_rhs(g1, RhsKind::Bump, {4.0, 0.0, 0.0}, 1.5);
    SolveConfig sc;
    SolutionField sol = solve_resolvent(op, f, sc);
    const std::string spath = "solution_test.nlhf";
    save_solution(spath, sol, sc.tol);
    MediumField raw = load_field(spath);
    REQUIRE(raw.values == sol.u.v);
    {
        std::ifstream side(spath + ".json");
        nlohmann::json j = nlohmann::json::parse(side);
        REQUIRE(j["eps"].get<double>() == 0.5);
        REQUIRE(j["m"].get<double>() == sc.m);
        REQUIRE(j["iterations"].get<int>() == sol.iterations);
    }

    for (const std::string& p :
         {cpath, cpath + ".json", epath, spath, spath + ".json"})
        std::remove(p.c_str());
}

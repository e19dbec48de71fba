// nlhom -- command-line front end for the nonlocal homogenization toolkit.
//
// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 solver
// non-convergence.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlhom/nlhom.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvariantFailure = 1;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

struct Options {
    std::string config;
    std::string out_dir;
    std::vector<std::uint64_t> seeds;
    double eps = 0.0;
};

nlhom::ExperimentConfig load_config(const Options& opt) {
    if (opt.config.empty()) throw nlhom::ConfigError("--config is required for this subcommand");
    nlhom::ExperimentConfig cfg = nlhom::parse_config(opt.config);
    if (!opt.seeds.empty()) cfg.seeds = opt.seeds;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.eps > 0.0) cfg.eps_ladder = {opt.eps};
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

int cmd_gen_medium(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    const nlhom::GridLevel level = cfg.grids.front();
    const nlhom::GridSpec grid(cfg.dim, level.length, level.points);
    for (std::uint64_t seed : cfg.seeds) {
        nlhom::MediumField f = nlhom::make_medium(cfg.medium, grid, seed);
        const std::string path = cfg.out_dir + "/medium_seed" + std::to_string(seed) + ".nlhf";
        nlhom::save_field(path, f);
        const nlhom::FieldStatistics st = nlhom::field_statistics(f);
        std::cout << path << "  mean " << st.mean << "  range [" << st.min << ", " << st.max
                  << "]\n";
    }
    return kOk;
}

int cmd_kernel_validate(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    nlhom::Kernel k = nlhom::detail::build_kernel_unchecked(cfg.kernel, cfg.kernel_quadrature);
    nlhom::KernelReport rep = nlhom::validate_kernel(k);
    std::cout << "kernel " << nlhom::to_string(cfg.kernel.family) << " (d=" << cfg.dim
              << ", R=" << cfg.kernel.support_radius << ")\n"
              << rep.summary() << "a1 " << k.a1 << "  sigma2 " << k.sigma2 << "  trace gap "
              << rep.trace_gap << "\n";
    return rep.all_pass() ? kOk : kInvariantFailure;
}

int cmd_corrector(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    const nlhom::GridLevel level = cfg.grids.front();
    const nlhom::GridSpec grid(cfg.dim, level.length, level.points);
    const nlhom::Kernel kernel = nlhom::make_kernel(cfg.kernel, cfg.kernel_quadrature);
    for (std::uint64_t seed : cfg.seeds) {
        nlhom::MediumField mu = nlhom::make_medium(cfg.medium, grid, seed);
        nlhom::CorrectorField theta = nlhom::corrector_continuation(mu, kernel, cfg.corrector);
        const std::string path = cfg.out_dir + "/corrector_seed" + std::to_string(seed) + ".nlhf";
        nlhom::save_corrector(path, theta);
        std::cout << path << "  delta " << theta.delta << "  increment "
                  << theta.increment_norm << "  bound " << theta.bound_constant << "  cauchy";
        for (double c : theta.cauchy) std::cout << ' ' << c;
        std::cout << "\n";
    }
    return kOk;
}

int cmd_effective(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    const nlhom::GridLevel level = cfg.grids.front();
    const nlhom::GridSpec grid(cfg.dim, level.length, level.points);
    const nlhom::Kernel kernel = nlhom::make_kernel(cfg.kernel, cfg.kernel_quadrature);
    for (std::uint64_t seed : cfg.seeds) {
        nlhom::MediumField mu = nlhom::make_medium(cfg.medium, grid, seed);
        nlhom::CorrectorField theta = nlhom::corrector_continuation(mu, kernel, cfg.corrector);
        nlhom::EffectiveMatrix em = nlhom::effective_matrix(mu, kernel, theta);
        if (cfg.lambda) {
            nlhom::MediumField lam = nlhom::make_lambda(*cfg.lambda, mu, seed);
            em = nlhom::effective_matrix_ns(em, mu, lam);
        }
        const std::string path = cfg.out_dir + "/effective_seed" + std::to_string(seed) + ".json";
        nlhom::save_effective(path, em, {seed});
        std::cout << path << "  eigs";
        for (double e : em.eigenvalues) std::cout << ' ' << e;
        if (em.has_ns) std::cout << "  ratio " << em.ratio_mean;
        std::cout << "\n";
    }
    return kOk;
}

int cmd_solve(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    const nlhom::GridLevel level = cfg.grids.front();
    const nlhom::GridSpec macro(cfg.dim, level.length, level.points);
    const nlhom::Kernel kernel = nlhom::make_kernel(cfg.kernel, cfg.kernel_quadrature);
    const std::uint64_t seed = cfg.seeds.front();
    const double eps = cfg.eps_ladder.front();

    const nlhom::GridSpec micro(cfg.dim, level.length / eps, level.points);
    nlhom::MediumField mu = nlhom::make_medium(cfg.medium, micro, seed);
    mu.grid = macro;

    std::array<double, 3> center = cfg.rhs.center;
    if (!cfg.rhs.center_set)
        for (int a = 0; a < cfg.dim; ++a) center[static_cast<std::size_t>(a)] = 0.5 * level.length;
    const double width = cfg.rhs.width > 0.0 ? cfg.rhs.width : level.length / 8.0;
    const nlhom::Field f = nlhom::make_test_rhs(macro, cfg.rhs.kind, center, width);

    nlhom::SolveConfig sc;
    sc.m = cfg.m;
    sc.tol = cfg.solve_tol;
    sc.max_iter = cfg.solve_max_iter;
    nlhom::SolutionField sol = [&] {
        if (!cfg.lambda) return nlhom::solve_resolvent(nlhom::build_operator(mu, kernel, eps), f, sc);
        nlhom::MediumField lam = nlhom::make_lambda(*cfg.lambda, mu, seed);
        if (lam.values == mu.values)
            return nlhom::solve_resolvent(nlhom::build_operator(mu, kernel, eps), f, sc);
        sc.method = nlhom::SolveMethod::BiCGStab;
        return nlhom::solve_resolvent(nlhom::build_operator(mu, lam, kernel, eps), f, sc);
    }();
    const std::string path = cfg.out_dir + "/solution_seed" + std::to_string(seed) + ".nlhf";
    nlhom::save_solution(path, sol, cfg.solve_tol);
    std::cout << path << "  eps " << eps << "  iters " << sol.iterations << "  residual "
              << sol.residual << "  |u| " << nlhom::l2_norm(sol.u) << "\n";
    return kOk;
}

int emit_study(const nlhom::ExperimentConfig& cfg, const nlhom::StudyResult& res) {
    for (const std::string& f : res.failures) std::cerr << "warning: " << f << "\n";
    if (res.records.empty()) {
        std::cerr << "error: no records produced\n";
        return res.solver_failure ? kSolverFailure : kInvariantFailure;
    }
    nlhom::emit_results(res.records, nlhom::ResultFormat::Csv, cfg.out_dir + "/results.csv");
    nlhom::emit_results(res.records, nlhom::ResultFormat::Json, cfg.out_dir + "/results.json");
    std::cout << cfg.out_dir << "/results.csv  (" << res.records.size() << " rows)\n";
    if (res.solver_failure) return kSolverFailure;
    return res.failures.empty() ? kOk : kInvariantFailure;
}

int cmd_converge(const Options& opt, bool ns) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    nlhom::StudyResult res =
        ns ? nlhom::run_ns_convergence_study(cfg) : nlhom::run_convergence_study(cfg);
    return emit_study(cfg, res);
}

int cmd_oracle_check(const Options& opt) {
    nlhom::ExperimentConfig cfg = load_config(opt);
    nlhom::OracleReport rep = nlhom::run_oracle_check(cfg);
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  error " << c.error
                  << "  tol " << c.tolerance << "\n";
    return rep.all_pass() ? kOk : kInvariantFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal homogenization toolkit"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config, "declarative config file");
    app.add_option("--seed", opt.seeds, "override the seed list");
    app.add_option("--out-dir", opt.out_dir, "override the output directory");
    app.add_option("--eps", opt.eps, "override the eps ladder with a single value");

    auto* gen = app.add_subcommand("gen-medium", "generate and save medium realizations");
    auto* kv = app.add_subcommand("kernel-validate", "check kernel assumptions and moments");
    auto* cor = app.add_subcommand("corrector", "run the delta-continuation corrector solve");
    auto* eff = app.add_subcommand("effective", "assemble the effective matrix");
    auto* slv = app.add_subcommand("solve", "solve one resolvent problem");
    auto* cvg = app.add_subcommand("converge", "eps-convergence study (symmetric)");
    auto* cvn = app.add_subcommand("converge-ns", "eps-convergence study (non-symmetric)");
    auto* orc = app.add_subcommand("oracle-check", "dense brute-force cross-validation");
    for (auto* sub : {gen, kv, cor, eff, slv, cvg, cvn, orc}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (gen->parsed()) return cmd_gen_medium(opt);
        if (kv->parsed()) return cmd_kernel_validate(opt);
        if (cor->parsed()) return cmd_corrector(opt);
        if (eff->parsed()) return cmd_effective(opt);
        if (slv->parsed()) return cmd_solve(opt);
        if (cvg->parsed()) return cmd_converge(opt, false);
        if (cvn->parsed()) return cmd_converge(opt, true);
        if (orc->parsed()) return cmd_oracle_check(opt);
    } catch (const nlhom::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const nlhom::SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const nlhom::NonPositiveDefinite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvariantFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string msg = e.what();
        return msg.find("converge") != std::string::npos ? kSolverFailure : kInvariantFailure;
    }
    return kConfigError;
}

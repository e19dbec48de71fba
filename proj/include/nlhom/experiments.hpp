// experiments.hpp -- configuration, the eps-convergence studies, oracle
// cross-checks, and CSV/JSON result emission.
//
// Scale convention: the medium lives at the microscale with unit cell size;
// for a macro torus of side L and a scale eps the medium is generated on a
// micro torus of side L/eps and reinterpreted on the macro grid (same point
// count), so eps is a pure reinterpretation plus kernel rescaling. One
// corrector / effective matrix per seed, computed at the finest eps, serves
// the whole ladder.

#ifndef NLHOM_EXPERIMENTS_HPP
#define NLHOM_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nlhom/corrector.hpp"
#include "nlhom/dense_oracle.hpp"
#include "nlhom/effective.hpp"
#include "nlhom/field_io.hpp"
#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"
#include "nlhom/operator.hpp"
#include "nlhom/resolvent.hpp"

namespace nlhom {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MediumSpec {
    MediumGenerator generator = MediumGenerator::Checkerboard;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double cell = 1.0;                 // checkerboard cell, microscale units
    bool two_phase = true;
    double correlation_length = 4.0;   // smoothed-threshold
    std::vector<double> profile;       // periodic
    double period = 1.0;
    // lambda-only controls
    double scale_of_mu = 0.0;          // > 0: lambda = scale * mu pointwise
    std::uint64_t seed_offset = 0;     // independent draw: seed + offset

    bool operator==(const MediumSpec&) const = default;
};

struct GridLevel {
    double length = 1.0;
    int points = 8;
};

struct RhsSpec {
    RhsKind kind = RhsKind::Bump;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    bool center_set = false;
    double width = 0.0;                // 0: pick L/8 at config validation
};

enum class RunMode { Converge, CorrectorStudy, EffectiveOnly, OracleCheck, NsConverge };

struct ExperimentConfig {
    RunMode mode = RunMode::Converge;
    int dim = 1;
    KernelSpec kernel;
    int kernel_quadrature = 64;
    MediumSpec medium;
    std::optional<MediumSpec> lambda;
    std::vector<std::uint64_t> seeds{1};
    std::vector<GridLevel> grids{{1.0, 256}};
    std::vector<double> eps_ladder{0.25, 0.125};
    double m = 1.0;
    double solve_tol = 1e-9;
    int solve_max_iter = 20000;
    RhsSpec rhs;
    CorrectorConfig corrector;
    std::string out_dir = ".";

    void validate() const {
        if (seeds.empty()) throw ConfigError("config: at least one seed is required");
        if (grids.empty()) throw ConfigError("config: at least one grid level is required");
        if (eps_ladder.empty()) throw ConfigError("config: eps ladder is empty");
        for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
            if (!(eps_ladder[i] > 0.0)) throw ConfigError("config: eps must be positive");
            if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
                throw ConfigError("config: eps ladder must be strictly decreasing");
        }
        if (!(m > 0.0)) throw ConfigError("config: m must be positive");
        if (!(solve_tol > 0.0 && solve_tol < 1.0)) throw ConfigError("config: bad solver tolerance");
        if (solve_max_iter < 1) throw ConfigError("config: max_iter must be positive");
        try {
            kernel.validate();
            corrector.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (kernel.dim != dim) throw ConfigError("config: kernel dimension does not match dim");
        // every (eps, grid) pair must satisfy the operator preconditions up front
        for (const GridLevel& g : grids) {
            GridSpec gs;
            try {
                gs = GridSpec(dim, g.length, g.points);
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
            for (double eps : eps_ladder) {
                if (eps * kernel.support_radius > 0.25 * g.length + 1e-12 * g.length)
                    throw ConfigError("config: eps * kernel radius exceeds a quarter of torus side " +
                                      std::to_string(g.length));
                if (medium.generator == MediumGenerator::Checkerboard) {
                    const double micro_len = g.length / eps;
                    const double q = micro_len / medium.cell;
                    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
                        throw ConfigError("config: micro torus side L/eps must be a multiple of the cell size");
                }
            }
            const double width = rhs.width > 0.0 ? rhs.width : g.length / 8.0;
            if (width < 8.0 * gs.spacing() || width > 0.25 * g.length)
                throw ConfigError("config: rhs width violates the margin rules for grid L=" +
                                  std::to_string(g.length));
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: cannot parse number '" + s + "' for key " + key);
    }
}

inline long to_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: cannot parse integer '" + s + "' for key " + key);
    }
}

inline bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: cannot parse boolean '" + s + "' for key " + key);
}

inline KernelFamily parse_family(const std::string& s) {
    if (s == "ball-indicator") return KernelFamily::BallIndicator;
    if (s == "truncated-gaussian") return KernelFamily::TruncatedGaussian;
    if (s == "tent") return KernelFamily::Tent;
    if (s == "custom-tabulated") return KernelFamily::CustomTabulated;
    throw ConfigError("config: unknown kernel family '" + s + "'");
}

inline MediumGenerator parse_generator(const std::string& s) {
    if (s == "checkerboard") return MediumGenerator::Checkerboard;
    if (s == "smoothed-threshold") return MediumGenerator::SmoothedThreshold;
    if (s == "periodic") return MediumGenerator::Periodic;
    if (s == "constant") return MediumGenerator::Constant;
    throw ConfigError("config: unknown medium generator '" + s + "'");
}

inline RunMode parse_mode(const std::string& s) {
    if (s == "converge") return RunMode::Converge;
    if (s == "corrector-study") return RunMode::CorrectorStudy;
    if (s == "effective-only") return RunMode::EffectiveOnly;
    if (s == "oracle-check") return RunMode::OracleCheck;
    if (s == "ns-converge") return RunMode::NsConverge;
    throw ConfigError("config: unknown mode '" + s + "'");
}

inline void apply_medium_key(MediumSpec& m, const std::string& key, const std::string& val,
                             const std::string& cfg_dir) {
    if (key == "generator") m.generator = parse_generator(val);
    else if (key == "alpha1") m.alpha1 = to_double(val, key);
    else if (key == "alpha2") m.alpha2 = to_double(val, key);
    else if (key == "cell") m.cell = to_double(val, key);
    else if (key == "two_phase") m.two_phase = to_bool(val, key);
    else if (key == "correlation") m.correlation_length = to_double(val, key);
    else if (key == "period") m.period = to_double(val, key);
    else if (key == "profile") {
        m.profile.clear();
        for (const std::string& t : split_ws(val)) m.profile.push_back(to_double(t, key));
    } else if (key == "profile_file") {
        const std::string path = val.front() == '/' ? val : cfg_dir + "/" + val;
        std::ifstream is(path);
        if (!is) throw ConfigError("config: cannot open profile file " + path);
        m.profile.clear();
        double v;
        while (is >> v) m.profile.push_back(v);
    } else if (key == "scale_of_mu") m.scale_of_mu = to_double(val, key);
    else if (key == "seed_offset") m.seed_offset = static_cast<std::uint64_t>(to_long(val, key));
    else throw ConfigError("config: unknown medium key '" + key + "'");
}

} // namespace detail

/// Parses the declarative key/value config: [section] headers, key = value
/// lines, '#' comments. Unknown keys are errors.
inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::string cfg_dir = ".";
    if (const auto slash = path.find_last_of('/'); slash != std::string::npos)
        cfg_dir = path.substr(0, slash);

    ExperimentConfig cfg;
    cfg.corrector = CorrectorConfig{};
    bool saw_lambda = false;
    MediumSpec lambda;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: bad section header at line " + std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section == "lambda") saw_lambda = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));

        if (section == "run") {
            if (key == "mode") cfg.mode = detail::parse_mode(val);
            else if (key == "dim") cfg.dim = static_cast<int>(detail::to_long(val, key));
            else if (key == "seeds") {
                cfg.seeds.clear();
                for (const std::string& t : detail::split_ws(val))
                    cfg.seeds.push_back(static_cast<std::uint64_t>(detail::to_long(t, key)));
            } else throw ConfigError("config: unknown run key '" + key + "'");
        } else if (section == "kernel") {
            if (key == "family") cfg.kernel.family = detail::parse_family(val);
            else if (key == "radius") cfg.kernel.support_radius = detail::to_double(val, key);
            else if (key == "amplitude") cfg.kernel.amplitude = detail::to_double(val, key);
            else if (key == "shape") {
                cfg.kernel.shape.clear();
                for (const std::string& t : detail::split_ws(val))
                    cfg.kernel.shape.push_back(detail::to_double(t, key));
            } else if (key == "quadrature")
                cfg.kernel_quadrature = static_cast<int>(detail::to_long(val, key));
            else if (key == "table_file") {
                const std::string tp = val.front() == '/' ? val : cfg_dir + "/" + val;
                std::ifstream ts(tp);
                if (!ts) throw ConfigError("config: cannot open kernel table " + tp);
                cfg.kernel.table.clear();
                double v;
                while (ts >> v) cfg.kernel.table.push_back(v);
            } else throw ConfigError("config: unknown kernel key '" + key + "'");
        } else if (section == "medium") {
            detail::apply_medium_key(cfg.medium, key, val, cfg_dir);
        } else if (section == "lambda") {
            detail::apply_medium_key(lambda, key, val, cfg_dir);
        } else if (section == "grid") {
            if (key == "ladder") {
                cfg.grids.clear();
                for (const std::string& t : detail::split_ws(val)) {
                    const auto colon = t.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("config: grid ladder entries are L:n, got '" + t + "'");
                    cfg.grids.push_back({detail::to_double(t.substr(0, colon), key),
                                         static_cast<int>(detail::to_long(t.substr(colon + 1), key))});
                }
            } else throw ConfigError("config: unknown grid key '" + key + "'");
        } else if (section == "eps") {
            if (key == "ladder") {
                cfg.eps_ladder.clear();
                for (const std::string& t : detail::split_ws(val))
                    cfg.eps_ladder.push_back(detail::to_double(t, key));
            } else throw ConfigError("config: unknown eps key '" + key + "'");
        } else if (section == "solve") {
            if (key == "m") cfg.m = detail::to_double(val, key);
            else if (key == "tol") cfg.solve_tol = detail::to_double(val, key);
            else if (key == "max_iter") cfg.solve_max_iter = static_cast<int>(detail::to_long(val, key));
            else throw ConfigError("config: unknown solve key '" + key + "'");
        } else if (section == "rhs") {
            if (key == "kind") {
                if (val == "bump") cfg.rhs.kind = RhsKind::Bump;
                else if (val == "gaussian-poly") cfg.rhs.kind = RhsKind::GaussianTimesPolynomial;
                else throw ConfigError("config: unknown rhs kind '" + val + "'");
            } else if (key == "center") {
                const auto toks = detail::split_ws(val);
                if (toks.empty() || toks.size() > 3)
                    throw ConfigError("config: rhs center needs 1..3 numbers");
                for (std::size_t i = 0; i < toks.size(); ++i)
                    cfg.rhs.center[i] = detail::to_double(toks[i], key);
                cfg.rhs.center_set = true;
            } else if (key == "width") cfg.rhs.width = detail::to_double(val, key);
            else throw ConfigError("config: unknown rhs key '" + key + "'");
        } else if (section == "corrector") {
            if (key == "schedule") {
                cfg.corrector.schedule.clear();
                for (const std::string& t : detail::split_ws(val))
                    cfg.corrector.schedule.push_back(detail::to_double(t, key));
            } else if (key == "tol") cfg.corrector.tol = detail::to_double(val, key);
            else if (key == "max_iter")
                cfg.corrector.max_iter = static_cast<int>(detail::to_long(val, key));
            else throw ConfigError("config: unknown corrector key '" + key + "'");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else throw ConfigError("config: unknown output key '" + key + "'");
        } else {
            throw ConfigError("config: unknown section '" + section + "'");
        }
    }
    cfg.kernel.dim = cfg.dim;
    if (saw_lambda) cfg.lambda = lambda;
    cfg.validate();
    return cfg;
}

/// Realizes a medium on the given grid from a spec and seed.
inline MediumField make_medium(const MediumSpec& spec, const GridSpec& grid, std::uint64_t seed) {
    switch (spec.generator) {
        case MediumGenerator::Checkerboard:
            return sample_checkerboard(grid, spec.alpha1, spec.alpha2, spec.cell, seed,
                                       spec.two_phase);
        case MediumGenerator::SmoothedThreshold:
            return sample_smoothed_threshold(grid, spec.alpha1, spec.alpha2,
                                             spec.correlation_length, seed);
        case MediumGenerator::Periodic:
            return sample_periodic(grid, spec.profile, spec.period);
        case MediumGenerator::Constant:
            return sample_constant(grid, spec.alpha1);
    }
    throw std::logic_error("make_medium: unreachable");
}

/// Realizes lambda relative to an existing mu (pointwise scaling or an
/// independent draw with a shifted seed).
inline MediumField make_lambda(const MediumSpec& spec, const MediumField& mu,
                               std::uint64_t seed) {
    if (spec.scale_of_mu > 0.0) {
        MediumField f = mu;
        f.alpha1 = mu.alpha1 * spec.scale_of_mu;
        f.alpha2 = mu.alpha2 * spec.scale_of_mu;
        for (double& v : f.values) v *= spec.scale_of_mu;
        return f;
    }
    return make_medium(spec, mu.grid, seed + spec.seed_offset);
}

struct ConvergenceRecord {
    std::uint64_t seed = 0;
    double eps = 0.0;
    double L = 0.0;     // macro torus side
    int n = 0;
    double delta = 0.0; // final corrector regularization
    double err_l2 = 0.0;
    double u_norm = 0.0;
    int iters = 0;
    double wall_ms = 0.0;
};

struct StudyResult {
    std::vector<ConvergenceRecord> records;
    std::vector<std::string> failures;   // one message per aborted seed
    bool solver_failure = false;
};

inline int worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("NLH_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
        } catch (const std::exception&) {
            throw ConfigError("NLH_THREADS is not a positive integer");
        }
    }
    return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

namespace detail {

struct SeedOutcome {
    std::vector<ConvergenceRecord> records;
    std::string failure;
    bool solver_failure = false;
};

inline SeedOutcome run_seed(const ExperimentConfig& cfg, const Kernel& kernel,
                            std::uint64_t seed, bool non_symmetric) {
    SeedOutcome out;
    const GridLevel level = cfg.grids.front();
    const GridSpec macro(cfg.dim, level.length, level.points);
    const double eps_min = cfg.eps_ladder.back();
    try {
        // microscale realization at the finest eps: cell size 1 micro unit
        const GridSpec micro(cfg.dim, level.length / eps_min, level.points);
        MediumField mu_mic = make_medium(cfg.medium, micro, seed);
        CorrectorField theta = corrector_continuation(mu_mic, kernel, cfg.corrector);
        EffectiveMatrix em = effective_matrix(mu_mic, kernel, theta);
        SmallMatrix theta_eff = em.theta;
        if (non_symmetric) {
            MediumField lam_mic = make_lambda(*cfg.lambda, mu_mic, seed);
            em = effective_matrix_ns(em, mu_mic, lam_mic);
            theta_eff = em.theta_ns;
        }

        std::array<double, 3> center = cfg.rhs.center;
        if (!cfg.rhs.center_set)
            for (int a = 0; a < cfg.dim; ++a)
                center[static_cast<std::size_t>(a)] = 0.5 * level.length;
        const double width = cfg.rhs.width > 0.0 ? cfg.rhs.width : level.length / 8.0;
        const Field f = make_test_rhs(macro, cfg.rhs.kind, center, width);
        const EffectiveSolution u0 = solve_effective(theta_eff, cfg.m, f);

        for (double eps : cfg.eps_ladder) {
            const GridSpec micro_eps(cfg.dim, level.length / eps, level.points);
            MediumField mu_eps = make_medium(cfg.medium, micro_eps, seed);
            mu_eps.grid = macro;   // reinterpret at the macroscale
            SolveConfig sc;
            sc.m = cfg.m;
            sc.tol = cfg.solve_tol;
            sc.max_iter = cfg.solve_max_iter;
            const auto t0 = std::chrono::steady_clock::now();
            SolutionField sol = [&] {
                if (!non_symmetric) return solve_resolvent(build_operator(mu_eps, kernel, eps), f, sc);
                MediumField lam_eps = make_lambda(*cfg.lambda, mu_eps, seed);
                if (lam_eps.values == mu_eps.values)
                    return solve_resolvent(build_operator(mu_eps, kernel, eps), f, sc);
                sc.method = SolveMethod::BiCGStab;
                return solve_resolvent(build_operator(mu_eps, lam_eps, kernel, eps), f, sc);
            }();
            const auto t1 = std::chrono::steady_clock::now();
            Field diff = sol.u;
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= u0.u0[i];
            ConvergenceRecord rec;
            rec.seed = seed;
            rec.eps = eps;
            rec.L = level.length;
            rec.n = level.points;
            rec.delta = theta.delta;
            rec.err_l2 = l2_norm(diff);
            rec.u_norm = l2_norm(sol.u);
            rec.iters = sol.iterations;
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            out.records.push_back(rec);
        }
    } catch (const SolverFailure& e) {
        out.failure = "seed " + std::to_string(seed) + ": " + e.what();
        out.solver_failure = true;
    } catch (const std::exception& e) {
        out.failure = "seed " + std::to_string(seed) + ": " + e.what();
    }
    return out;
}

inline StudyResult run_study(const ExperimentConfig& cfg, bool non_symmetric) {
    cfg.validate();
    if (non_symmetric && !cfg.lambda)
        throw ConfigError("config: ns mode requires a [lambda] section");
    Kernel kernel = make_kernel(cfg.kernel, cfg.kernel_quadrature);

    std::vector<SeedOutcome> outcomes(cfg.seeds.size());
    const int workers = worker_count(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.seeds.size()) return;
            outcomes[i] = run_seed(cfg, kernel, cfg.seeds[i], non_symmetric);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    StudyResult res;
    for (auto& o : outcomes) {
        for (auto& r : o.records) res.records.push_back(r);
        if (!o.failure.empty()) res.failures.push_back(o.failure);
        res.solver_failure = res.solver_failure || o.solver_failure;
    }
    std::sort(res.records.begin(), res.records.end(),
              [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
                  if (a.seed != b.seed) return a.seed < b.seed;
                  return a.eps > b.eps;   // ladder order: decreasing eps
              });
    return res;
}

} // namespace detail

inline StudyResult run_convergence_study(const ExperimentConfig& cfg) {
    return detail::run_study(cfg, false);
}

inline StudyResult run_ns_convergence_study(const ExperimentConfig& cfg) {
    return detail::run_study(cfg, true);
}

enum class ResultFormat { Csv, Json };

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace detail

/// Writes records in the fixed column order; JSON mirrors the CSV rows.
inline void emit_results(const std::vector<ConvergenceRecord>& records, ResultFormat format,
                         const std::string& path) {
    if (records.empty()) throw std::runtime_error("emit_results: no records to write (" + path + ")");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("emit_results: cannot open " + path);
    if (format == ResultFormat::Csv) {
        os << "seed,eps,L,n,delta,err_l2,u_norm,iters,wall_ms\n";
        for (const auto& r : records) {
            os << r.seed << ',' << detail::fmt_double(r.eps) << ',' << detail::fmt_double(r.L)
               << ',' << r.n << ',' << detail::fmt_double(r.delta) << ','
               << detail::fmt_double(r.err_l2) << ',' << detail::fmt_double(r.u_norm) << ','
               << r.iters << ',' << detail::fmt_double(r.wall_ms) << '\n';
        }
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : records) {
            rows.push_back({{"seed", r.seed},
                            {"eps", r.eps},
                            {"L", r.L},
                            {"n", r.n},
                            {"delta", r.delta},
                            {"err_l2", r.err_l2},
                            {"u_norm", r.u_norm},
                            {"iters", r.iters},
                            {"wall_ms", r.wall_ms}});
        }
        os << rows.dump(2) << '\n';
    }
    if (!os) throw std::runtime_error("emit_results: write failed for " + path);
}

struct OracleCheck {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
};

namespace detail {

inline double rel_err(double num, double den) {
    return den > 0.0 ? num / den : num;
}

inline double vec_linf(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        e = std::max(e, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return rel_err(e, s);
}

} // namespace detail

/// Cross-validates the fast paths against the dense brute-force references on
/// a small grid. Precondition: every configured grid has n <= 64 per axis.
inline OracleReport run_oracle_check(const ExperimentConfig& cfg) {
    cfg.validate();
    for (const GridLevel& g : cfg.grids)
        if (g.points > 64)
            throw ConfigError("oracle-check: grids must have n <= 64 per axis, got " +
                              std::to_string(g.points));
    OracleReport rep;
    const Kernel kernel = make_kernel(cfg.kernel, cfg.kernel_quadrature);
    const GridLevel level = cfg.grids.front();
    const GridSpec grid(cfg.dim, level.length, level.points);
    const std::uint64_t seed = cfg.seeds.front();
    MediumField mu = make_medium(cfg.medium, grid, seed);
    const double eps = cfg.eps_ladder.front();

    auto push = [&rep](const std::string& name, double err, double tol) {
        rep.checks.push_back({name, err, tol, err <= tol});
    };

    {   // operator apply vs dense matrix multiply
        OperatorHandle op = build_operator(mu, kernel, eps);
        oracle::DenseMatrix Lm = oracle::dense_operator_matrix(mu, std::nullopt, kernel, eps);
        std::vector<double> u(grid.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = rng::uniform01(rng::combine(seed, i + 0xAAull)) - 0.5;
        Field uf(grid, u);
        Field fast = op.apply(uf);
        std::vector<double> dense = Lm.multiply(u);
        push("operator-apply", detail::vec_linf(fast.v, dense), 1e-12);

        // resolvent solve vs dense LU of (m - L)
        std::array<double, 3> center{0.0, 0.0, 0.0};
        for (int a = 0; a < cfg.dim; ++a) center[static_cast<std::size_t>(a)] = 0.5 * level.length;
        const Field f = make_test_rhs(grid, cfg.rhs.kind, center,
                                      cfg.rhs.width > 0.0 ? cfg.rhs.width : level.length / 8.0);
        SolveConfig sc;
        sc.m = cfg.m;
        sc.tol = 1e-12;
        sc.max_iter = cfg.solve_max_iter;
        SolutionField sol = solve_resolvent(op, f, sc);
        oracle::DenseMatrix M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j)
                M(i, j) = (i == j ? cfg.m : 0.0) - Lm(i, j);
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        std::vector<double> dense_u = oracle::lu_solve(M, rhs);
        push("resolvent-solve", detail::vec_linf(sol.u.v, dense_u), 1e-8);
    }

    {   // drift and corrector vs dense
        DriftField drift = assemble_drift(mu, kernel);
        auto dense_r = oracle::dense_drift(mu, kernel);
        double derr = 0.0;
        for (int a = 0; a < cfg.dim; ++a)
            derr = std::max(derr, detail::vec_linf(drift.r[static_cast<std::size_t>(a)],
                                                   dense_r[static_cast<std::size_t>(a)]));
        push("drift-assembly", derr, 1e-12);

        const double delta = cfg.corrector.schedule.back();
        CorrectorConfig cc = cfg.corrector;
        cc.tol = 1e-12;
        CorrectorField theta = solve_corrector(mu, kernel, delta, cc);
        auto dense_theta = oracle::dense_corrector(mu, kernel, delta);
        double terr = 0.0;
        for (int a = 0; a < cfg.dim; ++a)
            terr = std::max(terr, detail::vec_linf(theta.theta[static_cast<std::size_t>(a)],
                                                   dense_theta[static_cast<std::size_t>(a)]));
        push("corrector-solve", terr, 1e-8);

        // D1/D2 assembly vs dense double loops on the same corrector
        SmallMatrix D1 = compute_D1(mu, kernel);
        SmallMatrix dD1 = oracle::dense_D1(mu, kernel);
        push("d1-assembly", detail::rel_err((D1 - dD1).frobenius(), dD1.frobenius()), 1e-12);
        SmallMatrix D2 = compute_D2(mu, kernel, theta);
        SmallMatrix dD2 = oracle::dense_D2(mu, kernel, theta.theta);
        push("d2-assembly",
             detail::rel_err((D2 - dD2).frobenius(), std::max(dD2.frobenius(), dD1.frobenius())),
             1e-12);
    }

    {   // a deliberately corrupted kernel (odd perturbation) must fail evenness
        KernelSpec bad;
        bad.family = KernelFamily::CustomTabulated;
        bad.dim = 1;
        bad.support_radius = 1.0;
        bad.table = {0.1, 0.5, 1.0, 0.7, 0.3};   // asymmetric on purpose
        Kernel corrupt = nlhom::detail::build_kernel_unchecked(bad, 16);
        KernelReport kr = validate_kernel(corrupt);
        rep.checks.push_back({"corrupted-kernel-evenness", kr.max_asymmetry, 0.0, !kr.even});
    }

    return rep;
}

} // namespace nlhom

#endif

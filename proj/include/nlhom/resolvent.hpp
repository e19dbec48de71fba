// resolvent.hpp -- solves (L^eps - m) u = f and builds smooth compactly supported test data.

#ifndef NLHOM_RESOLVENT_HPP
#define NLHOM_RESOLVENT_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nlhom/grid.hpp"
#include "nlhom/operator.hpp"
#include "nlhom/solver.hpp"

namespace nlhom {

enum class SolveMethod { ConjugateGradient, BiCGStab };

struct SolveConfig {
    double m = 1.0;
    double tol = 1e-9;
    int max_iter = 20000;
    SolveMethod method = SolveMethod::ConjugateGradient;

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("SolveConfig: m must be positive");
        if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("SolveConfig: tol must be in (0,1)");
        if (max_iter < 1) throw std::invalid_argument("SolveConfig: max_iter must be positive");
    }
};

struct SolutionField {
    Field u;
    double residual = 0.0;    // relative l2 residual of (L^eps - m) u = f
    int iterations = 0;
    double eps = 0.0;
    double m = 0.0;
};

struct SolverFailure : std::runtime_error {
    SolutionField best;
    explicit SolverFailure(SolutionField b)
        : std::runtime_error("resolvent solve did not converge within max_iter (residual " +
                             std::to_string(b.residual) + ")"),
          best(std::move(b)) {}
};

/// Solves (L^eps - m) u = f. The symmetric case runs CG on the SPD system
/// (m - L^eps) u = -f; the non-symmetric case runs BiCGStab.
inline SolutionField solve_resolvent(const OperatorHandle& op, const Field& f,
                                     const SolveConfig& cfg) {
    cfg.validate();
    if (f.grid != op.grid()) throw std::invalid_argument("solve_resolvent: grid mismatch");
    if (cfg.method == SolveMethod::ConjugateGradient && !op.symmetric())
        throw std::invalid_argument("solve_resolvent: CG requires the symmetric form");

    ApplyFn A = [&op, &cfg](const std::vector<double>& x, std::vector<double>& y) {
        Field xf(op.grid(), x);
        Field lx = op.apply(xf);
        y.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = cfg.m * x[i] - lx[i];
    };
    std::vector<double> rhs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];

    IterativeResult r = (cfg.method == SolveMethod::ConjugateGradient)
                            ? conjugate_gradient(A, rhs, cfg.tol, cfg.max_iter)
                            : bicgstab(A, rhs, cfg.tol, cfg.max_iter);
    SolutionField sol;
    sol.u = Field(op.grid(), std::move(r.x));
    sol.residual = r.relative_residual;
    sol.iterations = r.iterations;
    sol.eps = op.eps();
    sol.m = cfg.m;
    if (!r.converged) throw SolverFailure(std::move(sol));
    return sol;
}

enum class RhsKind { Bump, GaussianTimesPolynomial };

/// Smooth compactly supported test function, normalized to ||f||_2 = 1.
/// Support radius is exactly `width`; it must leave a quarter-torus margin.
inline Field make_test_rhs(const GridSpec& grid, RhsKind kind,
                           const std::array<double, 3>& center, double width) {
    if (width < 8.0 * grid.spacing())
        throw std::invalid_argument("make_test_rhs: width must be >= 8h");
    if (width > 0.25 * grid.length)
        throw std::invalid_argument("make_test_rhs: support too large for the margin rule");
    Field f(grid);
    const double h = grid.spacing();
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const auto c = grid.coords(idx);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            double dx = c[static_cast<std::size_t>(a)] * h - center[static_cast<std::size_t>(a)];
            // torus distance
            dx -= grid.length * std::round(dx / grid.length);
            r2 += dx * dx;
        }
        const double rho2 = r2 / (width * width);
        if (rho2 >= 1.0) continue;
        if (kind == RhsKind::Bump)
            f[idx] = std::exp(-1.0 / (1.0 - rho2));
        else
            f[idx] = std::pow(1.0 - rho2, 3) * std::exp(-4.0 * rho2);
    }
    const double nrm = l2_norm(f);
    if (nrm == 0.0) throw std::invalid_argument("make_test_rhs: empty support on this grid");
    for (std::size_t i = 0; i < f.size(); ++i) f[i] /= nrm;
    return f;
}

} // namespace nlhom

#endif

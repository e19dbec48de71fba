// corrector.hpp -- drift field r, delta-regularized corrector equation, diagnostics.
//
// Everything here lives at the microscale (no eps): the corrector cell problem
//   delta theta_i - A_h theta_i = r_i,
//   (A_h phi)(xi) = sum_z a(z) mu(xi+z) (phi(xi+z) - phi(xi)) h^d,
//   r_c(xi)       = sum_z z_c a(z) mu(xi+z) h^d,
// solved per component by CG in the mu-weighted inner product, where
// (delta - A_h) is symmetric positive definite.

#ifndef NLHOM_CORRECTOR_HPP
#define NLHOM_CORRECTOR_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlhom/fft.hpp"
#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"
#include "nlhom/solver.hpp"

namespace nlhom {

struct CorrectorConfig {
    double tol = 1e-10;
    int max_iter = 50000;
    std::vector<double> schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

    void validate() const {
        if (schedule.empty()) throw std::invalid_argument("CorrectorConfig: empty delta schedule");
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            if (!(schedule[i] > 0.0))
                throw std::invalid_argument("CorrectorConfig: delta must be positive");
            if (i > 0 && !(schedule[i] < schedule[i - 1]))
                throw std::invalid_argument("CorrectorConfig: schedule must be strictly decreasing");
        }
        if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("CorrectorConfig: bad tol");
    }
};

struct DriftField {
    GridSpec grid;
    std::vector<std::vector<double>> r;        // d components
    std::array<double, 3> weighted_mean{0.0, 0.0, 0.0};   // sum r mu h^d per component
};

struct CorrectorField {
    GridSpec grid;
    std::vector<std::vector<double>> theta;    // d components, zero mu-weighted mean
    double delta = 0.0;
    std::array<double, 3> residual{0.0, 0.0, 0.0};   // relative CG residual per component
    double increment_norm = 0.0;               // || theta(.+z) - theta ||_{L2_M}
    double weighted_norm = 0.0;                // sqrt(delta) * || theta ||_{L2_mu}
    double bound_constant = 0.0;               // alpha2^2 sigma / (2 alpha1^2), grid-sampled sigma
    std::vector<double> cauchy;                // continuation increments, L2_M
    std::vector<int> iterations;               // CG iterations per solve (all components)
};

/// Shared microscale machinery: kernel samples, convolution plan, A_h.
class CellProblem {
public:
    CellProblem(const MediumField& mu, const Kernel& kernel)
        : grid_(mu.grid), mu_(mu.values), alpha1_(mu.alpha1), alpha2_(mu.alpha2) {
        if (kernel.dim() != grid_.dim)
            throw std::invalid_argument("corrector: kernel/grid dimension mismatch");
        kernel_samples_ = sample_kernel_on_grid(kernel, grid_, 1.0);
        plan_ = ConvolutionPlan(grid_, kernel_samples_);
        const double hd = grid_.cell_volume();
        conv_mu_ = plan_.correlate(mu_);
        for (double& v : conv_mu_) v *= hd;
        // grid-sampled kernel moments, the exact discrete analogues
        sampled_a1_ = 0.0;
        sampled_sigma2_ = 0.0;
        for (std::size_t idx = 0; idx < kernel_samples_.size(); ++idx) {
            if (kernel_samples_[idx] == 0.0) continue;
            const auto c = grid_.coords(idx);
            double z2 = 0.0;
            for (int a = 0; a < grid_.dim; ++a) {
                const double z = grid_.displacement(c[static_cast<std::size_t>(a)]);
                z2 += z * z;
            }
            sampled_a1_ += kernel_samples_[idx] * hd;
            sampled_sigma2_ += z2 * kernel_samples_[idx] * hd;
        }
    }

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& mu() const { return mu_; }
    const std::vector<double>& kernel_samples() const { return kernel_samples_; }
    double alpha1() const { return alpha1_; }
    double alpha2() const { return alpha2_; }
    double sampled_a1() const { return sampled_a1_; }
    double sampled_sigma2() const { return sampled_sigma2_; }
    double bound_constant() const {
        return alpha2_ * alpha2_ * std::sqrt(sampled_sigma2_) / (2.0 * alpha1_ * alpha1_);
    }

    /// A_h phi = (a x (mu phi)) h^d - phi (a x mu) h^d, x = correlation.
    std::vector<double> apply_A(const std::vector<double>& phi) const {
        const double hd = grid_.cell_volume();
        std::vector<double> mu_phi(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) mu_phi[i] = mu_[i] * phi[i];
        std::vector<double> out = plan_.correlate(mu_phi);
        for (std::size_t i = 0; i < phi.size(); ++i) out[i] = out[i] * hd - phi[i] * conv_mu_[i];
        return out;
    }

    /// Correlation with the grid-sampled kernel, including the h^d weight.
    std::vector<double> correlate(const std::vector<double>& f) const {
        std::vector<double> out = plan_.correlate(f);
        const double hd = grid_.cell_volume();
        for (double& v : out) v *= hd;
        return out;
    }

    /// Convolution with the grid-sampled kernel, including the h^d weight.
    std::vector<double> convolve(const std::vector<double>& f) const {
        std::vector<double> out = plan_.convolve(f);
        const double hd = grid_.cell_volume();
        for (double& v : out) v *= hd;
        return out;
    }

    /// Drift component r_c(xi) = sum_z z_c a(z) mu(xi+z) h^d (correlation with z_c a).
    std::vector<double> drift_component(int axis) const {
        std::vector<double> za(kernel_samples_.size(), 0.0);
        for (std::size_t idx = 0; idx < za.size(); ++idx) {
            if (kernel_samples_[idx] == 0.0) continue;
            const auto c = grid_.coords(idx);
            za[idx] = grid_.displacement(c[static_cast<std::size_t>(axis)]) * kernel_samples_[idx];
        }
        ConvolutionPlan p(grid_, za);
        std::vector<double> out = p.correlate(mu_);
        const double hd = grid_.cell_volume();
        for (double& v : out) v *= hd;
        return out;
    }

    /// L2_M norm of the increment family of a grid field g:
    /// sqrt( sum_z a(z) h^d <(g(.+z) - g)^2> ), computed via the FFT autocorrelation.
    double increment_l2m(const std::vector<double>& g) const {
        cvector data(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) data[i] = g[i];
        fft_nd(data, grid_, false);
        for (auto& z : data) z = std::norm(z);
        fft_nd(data, grid_, true);
        // data[z] now holds sum_i g_i g_{i+z}
        const double N = static_cast<double>(g.size());
        const double c0 = data[0].real() / N;
        double acc = 0.0;
        const double hd = grid_.cell_volume();
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            const double a = kernel_samples_[idx];
            if (a == 0.0) continue;
            acc += a * hd * 2.0 * (c0 - data[idx].real() / N);
        }
        return std::sqrt(std::max(acc, 0.0));
    }

    double l2mu_norm(const std::vector<double>& g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * g[i] * mu_[i];
        return std::sqrt(s / static_cast<double>(g.size()));
    }

    void center(std::vector<double>& g) const {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            num += g[i] * mu_[i];
            den += mu_[i];
        }
        const double c = num / den;
        for (double& v : g) v -= c;
    }

private:
    GridSpec grid_;
    std::vector<double> mu_;
    double alpha1_, alpha2_;
    std::vector<double> kernel_samples_;
    ConvolutionPlan plan_;
    std::vector<double> conv_mu_;
    double sampled_a1_ = 0.0, sampled_sigma2_ = 0.0;
};

inline DriftField assemble_drift(const MediumField& mu, const Kernel& kernel) {
    if (kernel.support_radius() > 0.25 * mu.grid.length * (1.0 + 1e-12))
        throw std::invalid_argument("assemble_drift: kernel support exceeds a quarter torus");
    CellProblem cell(mu, kernel);
    DriftField d;
    d.grid = mu.grid;
    const double hd = mu.grid.cell_volume();
    for (int a = 0; a < mu.grid.dim; ++a) {
        d.r.push_back(cell.drift_component(a));
        double wm = 0.0;
        for (std::size_t i = 0; i < d.r.back().size(); ++i) wm += d.r.back()[i] * mu.values[i];
        d.weighted_mean[static_cast<std::size_t>(a)] = wm * hd;
    }
    return d;
}

namespace detail {

inline CorrectorField solve_corrector_impl(const CellProblem& cell, const DriftField& drift,
                                           double delta, double tol, int max_iter,
                                           const CorrectorField* warm) {
    CorrectorField out;
    out.grid = cell.grid();
    out.delta = delta;
    out.bound_constant = cell.bound_constant();
    ApplyFn A = [&cell, delta](const std::vector<double>& x, std::vector<double>& y) {
        y = cell.apply_A(x);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = delta * x[i] - y[i];
    };
    for (int a = 0; a < cell.grid().dim; ++a) {
        const std::vector<double>* x0 =
            warm ? &warm->theta[static_cast<std::size_t>(a)] : nullptr;
        IterativeResult r = conjugate_gradient(A, drift.r[static_cast<std::size_t>(a)], tol,
                                               max_iter, &cell.mu(), x0);
        if (!r.converged)
            throw std::runtime_error("solve_corrector: CG did not converge (delta " +
                                     std::to_string(delta) + ")");
        cell.center(r.x);
        out.theta.push_back(std::move(r.x));
        out.residual[static_cast<std::size_t>(a)] = r.relative_residual;
        out.iterations.push_back(r.iterations);
    }
    double inc2 = 0.0, l2mu2 = 0.0;
    for (int a = 0; a < cell.grid().dim; ++a) {
        const double inc = cell.increment_l2m(out.theta[static_cast<std::size_t>(a)]);
        const double nm = cell.l2mu_norm(out.theta[static_cast<std::size_t>(a)]);
        inc2 += inc * inc;
        l2mu2 += nm * nm;
    }
    out.increment_norm = std::sqrt(inc2);
    out.weighted_norm = std::sqrt(delta * l2mu2);
    return out;
}

} // namespace detail

inline CorrectorField solve_corrector(const MediumField& mu, const Kernel& kernel,
                                      double delta, const CorrectorConfig& cfg = {}) {
    if (!(delta > 0.0)) throw std::invalid_argument("solve_corrector: delta must be positive");
    CellProblem cell(mu, kernel);
    DriftField drift = assemble_drift(mu, kernel);
    return detail::solve_corrector_impl(cell, drift, delta, cfg.tol, cfg.max_iter, nullptr);
}

/// Warm-started continuation down the delta schedule. The returned field carries
/// the Cauchy diagnostic sequence ||theta^{d_{k+1}} - theta^{d_k}||_{L2_M}
/// (increment norms of the differences, so the diagnostic is gauge-invariant).
inline CorrectorField corrector_continuation(const MediumField& mu, const Kernel& kernel,
                                             const CorrectorConfig& cfg) {
    cfg.validate();
    CellProblem cell(mu, kernel);
    DriftField drift = assemble_drift(mu, kernel);
    CorrectorField cur;
    std::vector<double> cauchy;
    std::vector<int> iters;
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
        CorrectorField next = detail::solve_corrector_impl(cell, drift, cfg.schedule[k], cfg.tol,
                                                           cfg.max_iter, k == 0 ? nullptr : &cur);
        if (k > 0) {
            double acc = 0.0;
            for (int a = 0; a < mu.grid.dim; ++a) {
                std::vector<double> diff(next.theta[static_cast<std::size_t>(a)]);
                for (std::size_t i = 0; i < diff.size(); ++i)
                    diff[i] -= cur.theta[static_cast<std::size_t>(a)][i];
                const double d = cell.increment_l2m(diff);
                acc += d * d;
            }
            cauchy.push_back(std::sqrt(acc));
        }
        for (int it : next.iterations) iters.push_back(it);
        cur = std::move(next);
    }
    cur.cauchy = std::move(cauchy);
    cur.iterations = std::move(iters);
    return cur;
}

/// Residual of the delta = 0 corrector equation, ||A_h theta_i + r_i||_2 per component.
inline std::array<double, 3> corrector_residual(const MediumField& mu, const Kernel& kernel,
                                                const CorrectorField& theta) {
    if (theta.grid != mu.grid) throw std::invalid_argument("corrector_residual: grid mismatch");
    CellProblem cell(mu, kernel);
    DriftField drift = assemble_drift(mu, kernel);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const double hd = mu.grid.cell_volume();
    for (int a = 0; a < mu.grid.dim; ++a) {
        std::vector<double> res = cell.apply_A(theta.theta[static_cast<std::size_t>(a)]);
        double s = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            const double v = res[i] + drift.r[static_cast<std::size_t>(a)][i];
            s += v * v;
        }
        out[static_cast<std::size_t>(a)] = std::sqrt(s * hd);
    }
    return out;
}

struct SublinearityRow {
    double eps = 0.0;
    double norm = 0.0;   // || eps theta(./eps) ||_{L2(Q)}
};

/// Samples eps*theta(x/eps) over the cube Q = [0, q)^d on the macro grid induced
/// by each eps and reports the L2(Q) norms. The torus-periodic theta is bounded,
/// so these norms scale as O(eps).
inline std::vector<SublinearityRow> sublinearity_diagnostic(const CorrectorField& theta,
                                                            const std::vector<double>& eps_list,
                                                            double cube_side) {
    std::vector<SublinearityRow> rows;
    const GridSpec& g = theta.grid;
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw std::invalid_argument("sublinearity_diagnostic: eps must be positive");
        const double macro_len = eps * g.length;
        if (cube_side > macro_len * (1.0 + 1e-12))
            throw std::invalid_argument("sublinearity_diagnostic: cube exceeds the macro torus");
        const double h_mac = eps * g.spacing();
        const double wd = std::pow(h_mac, g.dim);
        double acc = 0.0;
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            const auto c = g.coords(idx);
            bool inside = true;
            for (int a = 0; a < g.dim; ++a)
                if (c[static_cast<std::size_t>(a)] * h_mac >= cube_side) { inside = false; break; }
            if (!inside) continue;
            double t2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                const double t = theta.theta[static_cast<std::size_t>(a)][idx];
                t2 += t * t;
            }
            acc += t2 * wd;
        }
        rows.push_back({eps, eps * std::sqrt(acc)});
    }
    return rows;
}

} // namespace nlhom

#endif

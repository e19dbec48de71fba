// effective.hpp -- effective matrix Theta = D1 - D2, positivity and energy checks,
// non-symmetric rescaling, and the constant-coefficient effective solve.

#ifndef NLHOM_EFFECTIVE_HPP
#define NLHOM_EFFECTIVE_HPP

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlhom/corrector.hpp"
#include "nlhom/fft.hpp"
#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"

namespace nlhom {

struct EffectiveMatrix {
    SmallMatrix D1;
    SmallMatrix D2;
    SmallMatrix theta;        // D1 - D2
    SmallMatrix theta_sym;    // symmetrized
    std::vector<double> eigenvalues;   // of theta_sym, ascending
    double asymmetry = 0.0;            // ||Theta - Theta^T|| / ||Theta||
    // provenance
    std::uint64_t seed = 0;
    double torus_side = 0.0;
    int points = 0;
    double delta = 0.0;
    // non-symmetric rescaling
    bool has_ns = false;
    double ratio_mean = 1.0;           // <mu / lambda>
    SmallMatrix theta_ns;
};

struct NonPositiveDefinite : std::runtime_error {
    EffectiveMatrix diagnostics;
    explicit NonPositiveDefinite(EffectiveMatrix d)
        : std::runtime_error("effective matrix is not positive definite (min eigenvalue " +
                             std::to_string(d.eigenvalues.front()) + ")"),
          diagnostics(std::move(d)) {}
};

/// D1 = < (1/2) sum_z z (x) z a(z) mu(xi) mu(xi - z) h^d >_xi, entrywise by convolution.
inline SmallMatrix compute_D1(const MediumField& mu, const Kernel& kernel) {
    CellProblem cell(mu, kernel);
    const GridSpec& g = mu.grid;
    SmallMatrix D1(g.dim);
    for (int i = 0; i < g.dim; ++i) {
        for (int j = i; j < g.dim; ++j) {
            std::vector<double> zza(g.size(), 0.0);
            const auto& ks = cell.kernel_samples();
            for (std::size_t idx = 0; idx < zza.size(); ++idx) {
                if (ks[idx] == 0.0) continue;
                const auto c = g.coords(idx);
                zza[idx] = g.displacement(c[static_cast<std::size_t>(i)]) *
                           g.displacement(c[static_cast<std::size_t>(j)]) * ks[idx];
            }
            ConvolutionPlan p(g, zza);
            std::vector<double> conv = p.convolve(mu.values);
            double acc = 0.0;
            for (std::size_t k = 0; k < conv.size(); ++k) acc += mu.values[k] * conv[k];
            const double val = 0.5 * g.cell_volume() * acc / static_cast<double>(g.size());
            D1(i, j) = val;
            D1(j, i) = val;
        }
    }
    return D1;
}

/// D2 = < (1/2) sum_z a(z) z (x) (theta(xi - z) - theta(xi)) mu(xi) mu(xi - z) h^d >_xi.
/// Uses only increments of theta, so it is invariant under constant shifts.
inline SmallMatrix compute_D2(const MediumField& mu, const Kernel& kernel,
                              const CorrectorField& theta) {
    if (theta.grid != mu.grid) throw std::invalid_argument("compute_D2: grid mismatch");
    CellProblem cell(mu, kernel);
    const GridSpec& g = mu.grid;
    SmallMatrix D2(g.dim);
    const auto& ks = cell.kernel_samples();
    for (int i = 0; i < g.dim; ++i) {
        std::vector<double> za(g.size(), 0.0);
        for (std::size_t idx = 0; idx < za.size(); ++idx) {
            if (ks[idx] == 0.0) continue;
            const auto c = g.coords(idx);
            za[idx] = g.displacement(c[static_cast<std::size_t>(i)]) * ks[idx];
        }
        ConvolutionPlan p(g, za);
        for (int j = 0; j < g.dim; ++j) {
            const auto& th = theta.theta[static_cast<std::size_t>(j)];
            std::vector<double> mu_th(g.size());
            for (std::size_t k = 0; k < mu_th.size(); ++k) mu_th[k] = mu.values[k] * th[k];
            std::vector<double> conv_mt = p.convolve(mu_th);
            std::vector<double> conv_m = p.convolve(mu.values);
            double acc = 0.0;
            for (std::size_t k = 0; k < conv_mt.size(); ++k)
                acc += mu.values[k] * (conv_mt[k] - th[k] * conv_m[k]);
            D2(i, j) = 0.5 * g.cell_volume() * acc / static_cast<double>(g.size());
        }
    }
    return D2;
}

inline EffectiveMatrix effective_matrix(const MediumField& mu, const Kernel& kernel,
                                        const CorrectorField& theta) {
    EffectiveMatrix em;
    em.D1 = compute_D1(mu, kernel);
    em.D2 = compute_D2(mu, kernel, theta);
    em.theta = em.D1 - em.D2;
    em.theta_sym = em.theta.symmetrized();
    em.eigenvalues = symmetric_eigenvalues(em.theta_sym);
    const SmallMatrix skew = em.theta - em.theta.transposed();
    const double tn = em.theta.frobenius();
    em.asymmetry = tn > 0.0 ? skew.frobenius() / tn : 0.0;
    em.seed = mu.seed;
    em.torus_side = mu.grid.length;
    em.points = mu.grid.points;
    em.delta = theta.delta;
    if (!(em.eigenvalues.front() > 0.0)) throw NonPositiveDefinite(em);
    return em;
}

/// Theta^ns = <mu/lambda>^{-1} Theta  (Corollary-style rescaling for the
/// non-symmetric operator with prefactor lambda).
inline EffectiveMatrix effective_matrix_ns(EffectiveMatrix em, const MediumField& mu,
                                           const MediumField& lambda) {
    if (lambda.grid != mu.grid) throw std::invalid_argument("effective_matrix_ns: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.values.size(); ++i) acc += mu.values[i] / lambda.values[i];
    em.ratio_mean = acc / static_cast<double>(mu.values.size());
    em.theta_ns = em.theta.scaled(1.0 / em.ratio_mean);
    em.has_ns = true;
    return em;
}

struct EnergyDirectionResult {
    std::array<double, 3> eta{0.0, 0.0, 0.0};
    double lhs = 0.0;     // Theta eta . eta
    double rhs = 0.0;     // discrete energy average
    bool pass = false;
};

/// For each direction eta checks
///   Theta eta . eta  >=  < (1/2) sum_z a(z) mu(xi) mu(xi+z)
///                          (eta.z + eta.(theta(xi+z) - theta(xi)))^2 h^d >  - slack,
/// slack = 1% of the magnitudes plus a delta-proportional term. The right side
/// is summed directly over the kernel support, independent of the FFT path.
inline std::vector<EnergyDirectionResult> energy_inequality_check(
    const MediumField& mu, const Kernel& kernel, const CorrectorField& theta,
    const EffectiveMatrix& em, const std::vector<std::array<double, 3>>& directions) {
    CellProblem cell(mu, kernel);
    const GridSpec& g = mu.grid;
    const auto& ks = cell.kernel_samples();
    const double hd = g.cell_volume();
    const double N = static_cast<double>(g.size());

    double theta_l2mu2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double nm = cell.l2mu_norm(theta.theta[static_cast<std::size_t>(a)]);
        theta_l2mu2 += nm * nm;
    }

    std::vector<EnergyDirectionResult> out;
    for (const auto& eta : directions) {
        EnergyDirectionResult r;
        r.eta = eta;
        r.lhs = em.theta.quad(eta);
        double acc = 0.0;
        for (std::size_t joff = 0; joff < ks.size(); ++joff) {
            const double a = ks[joff];
            if (a == 0.0) continue;
            const auto oc = g.coords(joff);
            double eta_z = 0.0;
            for (int ax = 0; ax < g.dim; ++ax)
                eta_z += eta[static_cast<std::size_t>(ax)] * g.displacement(oc[static_cast<std::size_t>(ax)]);
            double s = 0.0;
            for (std::size_t i = 0; i < ks.size(); ++i) {
                auto c = g.coords(i);
                std::array<int, 3> cp = c;
                for (int ax = 0; ax < g.dim; ++ax) cp[static_cast<std::size_t>(ax)] = c[static_cast<std::size_t>(ax)] + oc[static_cast<std::size_t>(ax)];
                const std::size_t ip = g.index(cp);
                double eta_dth = 0.0;
                for (int ax = 0; ax < g.dim; ++ax)
                    eta_dth += eta[static_cast<std::size_t>(ax)] *
                               (theta.theta[static_cast<std::size_t>(ax)][ip] - theta.theta[static_cast<std::size_t>(ax)][i]);
                const double term = eta_z + eta_dth;
                s += mu.values[i] * mu.values[ip] * term * term;
            }
            acc += a * s;
        }
        r.rhs = 0.5 * hd * acc / N;
        const double slack = 0.01 * 0.5 * (std::abs(r.lhs) + std::abs(r.rhs)) +
                             theta.delta * theta_l2mu2;
        r.pass = r.lhs >= r.rhs - slack;
        out.push_back(r);
    }
    return out;
}

struct EffectiveSolution {
    Field u0;
    SmallMatrix theta_used;
    double m = 0.0;
    double residual = 0.0;   // relative spectral residual
};

/// Spectral solve of Theta : grad grad u0 - m u0 = f on the torus, using the
/// symmetric part of Theta; exact on the grid's Fourier modes.
inline EffectiveSolution solve_effective(const SmallMatrix& theta, double m, const Field& f) {
    if (!(m > 0.0)) throw std::invalid_argument("solve_effective: m must be positive");
    const SmallMatrix ts = theta.symmetrized();
    const std::vector<double> eig = symmetric_eigenvalues(ts);
    if (!(eig.front() > 0.0))
        throw std::invalid_argument("solve_effective: matrix is not positive definite");
    const GridSpec& g = f.grid;
    if (ts.dim != g.dim) throw std::invalid_argument("solve_effective: dimension mismatch");

    cvector data(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) data[i] = f[i];
    fft_nd(data, g, false);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
        const auto c = g.coords(idx);
        std::array<double, 3> k{0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim; ++a) {
            int fi = c[static_cast<std::size_t>(a)];
            if (fi > g.points / 2) fi -= g.points;
            k[static_cast<std::size_t>(a)] = two_pi * fi / g.length;
        }
        data[idx] = -data[idx] / (ts.quad(k) + m);
    }
    fft_nd(data, g, true);
    EffectiveSolution sol;
    sol.u0 = Field(g);
    for (std::size_t i = 0; i < f.size(); ++i) sol.u0[i] = data[i].real();
    sol.theta_used = ts;
    sol.m = m;

    // spectral residual of Theta:grad grad u0 - m u0 - f
    cvector chk(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) chk[i] = sol.u0[i];
    fft_nd(chk, g, false);
    cvector fr(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fr[i] = f[i];
    fft_nd(fr, g, false);
    double num = 0.0, den = 0.0;
    for (std::size_t idx = 0; idx < chk.size(); ++idx) {
        const auto c = g.coords(idx);
        std::array<double, 3> k{0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim; ++a) {
            int fi = c[static_cast<std::size_t>(a)];
            if (fi > g.points / 2) fi -= g.points;
            k[static_cast<std::size_t>(a)] = two_pi * fi / g.length;
        }
        const std::complex<double> res = (-(ts.quad(k)) - m) * chk[idx] - fr[idx];
        num += std::norm(res);
        den += std::norm(fr[idx]);
    }
    sol.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return sol;
}

} // namespace nlhom

#endif

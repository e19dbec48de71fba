// operator.hpp -- the rescaled nonlocal convolution operator L^eps on the torus.

#ifndef NLHOM_OPERATOR_HPP
#define NLHOM_OPERATOR_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlhom/fft.hpp"
#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"

namespace nlhom {

/// L^eps u(x) = eps^{-d-2} p(x) [ (a_eps * (mu u))(x) - u(x) (a_eps * mu)(x) ],
/// with p = mu (symmetric form) or p = lambda (non-symmetric form) and
/// a_eps(z) = a(z/eps) sampled at grid displacements. The medium passed in is
/// the rescaled field mu(x/eps) realized on the solver grid (generated with
/// cell size eps * microscale cell).
class OperatorHandle {
public:
    OperatorHandle(const MediumField& mu, std::optional<MediumField> lambda,
                   const Kernel& kernel, double eps)
        : grid_(mu.grid), kernel_(kernel), eps_(eps), mu_(mu.values),
          alpha1_(mu.alpha1), alpha2_(mu.alpha2) {
        if (!(eps > 0.0)) throw std::invalid_argument("build_operator: eps must be positive");
        if (eps * kernel.support_radius() > 0.25 * grid_.length * (1.0 + 1e-12))
            throw std::invalid_argument("build_operator: eps*R_a exceeds a quarter of the torus side");
        if (kernel.dim() != grid_.dim)
            throw std::invalid_argument("build_operator: kernel/grid dimension mismatch");
        if (lambda) {
            if (lambda->grid != grid_)
                throw std::invalid_argument("build_operator: lambda grid mismatch");
            lambda_ = lambda->values;
        }
        kernel_samples_ = sample_kernel_on_grid(kernel, grid_, eps);
        plan_ = ConvolutionPlan(grid_, kernel_samples_);
        const double hd = grid_.cell_volume();
        conv_mu_ = plan_.convolve(mu_);
        for (double& v : conv_mu_) v *= hd;
    }

    const GridSpec& grid() const { return grid_; }
    const Kernel& kernel() const { return kernel_; }
    double eps() const { return eps_; }
    bool symmetric() const { return lambda_.empty(); }
    const std::vector<double>& mu() const { return mu_; }
    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<double>& kernel_samples() const { return kernel_samples_; }
    /// cached a_eps * mu_eps (with the h^d quadrature weight)
    const std::vector<double>& convolved_medium() const { return conv_mu_; }
    double alpha1() const { return alpha1_; }
    double alpha2() const { return alpha2_; }

    Field apply(const Field& u) const {
        if (u.grid != grid_) throw std::invalid_argument("apply: grid mismatch");
        const double hd = grid_.cell_volume();
        const double scale = std::pow(eps_, -grid_.dim - 2);
        std::vector<double> mu_u(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) mu_u[i] = mu_[i] * u[i];
        std::vector<double> conv = plan_.convolve(mu_u);
        Field out(grid_);
        const std::vector<double>& pref = lambda_.empty() ? mu_ : lambda_;
        for (std::size_t i = 0; i < u.size(); ++i)
            out[i] = scale * pref[i] * (conv[i] * hd - u[i] * conv_mu_[i]);
        return out;
    }

    /// (1/(2 eps^2)) sum_z sum_x a(z) mu(x) mu(x-eps z) (u(x-eps z)-u(x))^2,
    /// summed directly over the kernel support; symmetric form only.
    /// Equals -<L^eps u, u> up to floating point.
    double dirichlet_form(const Field& u) const {
        if (!symmetric())
            throw std::invalid_argument("dirichlet_form: defined for the symmetric form only");
        if (u.grid != grid_) throw std::invalid_argument("dirichlet_form: grid mismatch");
        const std::size_t N = grid_.size();
        // quadrature weights: dz in microscale units (h/eps)^d, dx in h^d
        const double wz = std::pow(grid_.spacing() / eps_, grid_.dim);
        const double wx = grid_.cell_volume();
        double total = 0.0;
        for (std::size_t joff = 0; joff < N; ++joff) {
            const double a = kernel_samples_[joff];
            if (a == 0.0) continue;
            const auto oc = grid_.coords(joff);
            double s = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                auto c = grid_.coords(i);
                std::array<int, 3> cm = c;
                for (int ax = 0; ax < grid_.dim; ++ax) cm[static_cast<std::size_t>(ax)] = c[static_cast<std::size_t>(ax)] - oc[static_cast<std::size_t>(ax)];
                const std::size_t im = grid_.index(cm);
                const double du = u[im] - u[i];
                s += mu_[i] * mu_[im] * du * du;
            }
            total += a * s;
        }
        return 0.5 / (eps_ * eps_) * total * wz * wx;
    }

private:
    GridSpec grid_;
    Kernel kernel_;
    double eps_;
    std::vector<double> mu_;
    std::vector<double> lambda_;
    double alpha1_, alpha2_;
    std::vector<double> kernel_samples_;
    ConvolutionPlan plan_;
    std::vector<double> conv_mu_;
};

inline OperatorHandle build_operator(const MediumField& mu, const Kernel& k, double eps) {
    return OperatorHandle(mu, std::nullopt, k, eps);
}

inline OperatorHandle build_operator(const MediumField& mu, const MediumField& lambda,
                                     const Kernel& k, double eps) {
    return OperatorHandle(mu, lambda, k, eps);
}

} // namespace nlhom

#endif

// kernel.hpp -- dispersal kernels a(z): built-in families, moments, assumption checks.

#ifndef NLHOM_KERNEL_HPP
#define NLHOM_KERNEL_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlhom/grid.hpp"

namespace nlhom {

enum class KernelFamily { BallIndicator, TruncatedGaussian, Tent, CustomTabulated };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::BallIndicator: return "ball-indicator";
        case KernelFamily::TruncatedGaussian: return "truncated-gaussian";
        case KernelFamily::Tent: return "tent";
        case KernelFamily::CustomTabulated: return "custom-tabulated";
    }
    return "?";
}

/// Description of a dispersal kernel. All built-ins are compactly supported
/// inside the ball |z| <= support_radius.
struct KernelSpec {
    KernelFamily family = KernelFamily::BallIndicator;
    int dim = 1;
    double support_radius = 1.0;
    std::vector<double> shape;   // truncated-gaussian: decay rate (default 1)
    double amplitude = 1.0;
    // custom-tabulated (dim 1 only): values on the uniform lattice over
    // [-support_radius, support_radius], endpoints included, one value per node.
    std::vector<double> table;

    void validate() const {
        if (dim < 1 || dim > 3) throw std::invalid_argument("KernelSpec: dimension must be 1..3");
        if (!(support_radius > 0.0) || !std::isfinite(support_radius))
            throw std::invalid_argument("KernelSpec: support radius must be positive and finite");
        if (amplitude < 0.0) throw std::invalid_argument("KernelSpec: amplitude must be nonnegative");
        if (family == KernelFamily::TruncatedGaussian && !shape.empty() && !(shape[0] > 0.0))
            throw std::invalid_argument("KernelSpec: gaussian decay rate must be positive");
        if (family == KernelFamily::CustomTabulated) {
            if (dim != 1) throw std::invalid_argument("KernelSpec: tabulated kernels are 1-d");
            if (table.size() < 2) throw std::invalid_argument("KernelSpec: table needs >= 2 values");
        }
    }

    double evaluate(const std::array<double, 3>& z) const {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(a)];
        const double r = std::sqrt(r2);
        switch (family) {
            case KernelFamily::BallIndicator:
                return r <= support_radius ? amplitude : 0.0;
            case KernelFamily::TruncatedGaussian: {
                if (r > support_radius) return 0.0;
                const double s = shape.empty() ? 1.0 : shape[0];
                return amplitude * std::exp(-s * r2);
            }
            case KernelFamily::Tent:
                return r <= support_radius ? amplitude * (1.0 - r / support_radius) : 0.0;
            case KernelFamily::CustomTabulated: {
                const double x = z[0];
                if (x < -support_radius || x > support_radius) return 0.0;
                const double step = 2.0 * support_radius / static_cast<double>(table.size() - 1);
                const double t = (x + support_radius) / step;
                const std::size_t lo = static_cast<std::size_t>(std::min<double>(std::floor(t), static_cast<double>(table.size() - 2)));
                const double w = t - static_cast<double>(lo);
                return (1.0 - w) * table[lo] + w * table[lo + 1];
            }
        }
        return 0.0;
    }
};

struct KernelReport {
    bool nonnegative = false;
    double min_value = 0.0;
    bool even = false;
    double max_asymmetry = 0.0;
    bool moments_finite = false;
    bool cube_found = false;       // assumption of a positive lower bound on a cube
    double cube_halfwidth = 0.0;
    double cube_constant = 0.0;
    double a1 = 0.0;
    double sigma2 = 0.0;
    double trace_gap = 0.0;        // |trace(M2) - sigma2|

    bool all_pass() const { return nonnegative && even && moments_finite && cube_found; }

    std::string summary() const {
        std::ostringstream os;
        os << "nonnegativity: " << (nonnegative ? "pass" : "FAIL") << " (min " << min_value << ")\n"
           << "evenness:      " << (even ? "pass" : "FAIL") << " (max |a(z)-a(-z)| " << max_asymmetry << ")\n"
           << "moments:       " << (moments_finite ? "pass" : "FAIL") << " (a1 " << a1 << ", sigma2 " << sigma2 << ")\n"
           << "lower bound:   " << (cube_found ? "pass" : "FAIL");
        if (cube_found) os << " (c0 " << cube_constant << " on cube half-width " << cube_halfwidth << ")";
        os << "\n";
        return os.str();
    }
};

/// A kernel with its quadrature moments. The moment lattice is the uniform
/// grid-aligned lattice z = k*step over the support; with step equal to a
/// field grid spacing the moments coincide exactly with grid-sampled sums.
struct Kernel {
    KernelSpec spec;
    int quadrature_points = 64;  // lattice nodes per axis over [-R, R]
    double a1 = 0.0;
    double sigma2 = 0.0;
    SmallMatrix M2;
    double cube_halfwidth = 0.0;
    double cube_constant = 0.0;

    int dim() const { return spec.dim; }
    double support_radius() const { return spec.support_radius; }
    double evaluate(const std::array<double, 3>& z) const { return spec.evaluate(z); }
};

namespace detail {

template <typename F>
void for_each_lattice_node(int dim, double radius, double step, F&& f) {
    const int kmax = static_cast<int>(std::floor(radius / step + 1e-12));
    std::array<int, 3> k{0, 0, 0};
    std::array<double, 3> z{0.0, 0.0, 0.0};
    const int lo = -kmax, hi = kmax;
    for (k[0] = lo; k[0] <= hi; ++k[0]) {
        z[0] = k[0] * step;
        if (dim == 1) { f(z); continue; }
        for (k[1] = lo; k[1] <= hi; ++k[1]) {
            z[1] = k[1] * step;
            if (dim == 2) { f(z); continue; }
            for (k[2] = lo; k[2] <= hi; ++k[2]) {
                z[2] = k[2] * step;
                f(z);
            }
        }
    }
}

inline Kernel build_kernel_unchecked(const KernelSpec& spec, int quadrature_points) {
    spec.validate();
    if (quadrature_points < 16)
        throw std::invalid_argument("make_kernel: quadrature resolution must be >= 16 points per axis");
    Kernel k;
    k.spec = spec;
    k.quadrature_points = quadrature_points;
    k.M2 = SmallMatrix(spec.dim);
    const double step = 2.0 * spec.support_radius / quadrature_points;
    const double w = std::pow(step, spec.dim);
    double a1 = 0.0, sigma2 = 0.0;
    SmallMatrix m2(spec.dim);
    for_each_lattice_node(spec.dim, spec.support_radius, step, [&](const std::array<double, 3>& z) {
        const double a = spec.evaluate(z);
        if (a == 0.0) return;
        a1 += a * w;
        double r2 = 0.0;
        for (int i = 0; i < spec.dim; ++i) r2 += z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        sigma2 += r2 * a * w;
        for (int i = 0; i < spec.dim; ++i)
            for (int j = 0; j < spec.dim; ++j)
                m2(i, j) += z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)] * a * w;
    });
    k.a1 = a1;
    k.sigma2 = sigma2;
    k.M2 = m2;

    // lower-bound cube: candidate constant is half the value at the origin,
    // grown greedily while the sampled minimum stays above it
    const double c0 = 0.5 * spec.evaluate({0.0, 0.0, 0.0});
    if (c0 > 0.0) {
        double best = 0.0;
        for (int kw = 1; kw * step <= spec.support_radius; ++kw) {
            const double half = kw * step;
            double mn = std::numeric_limits<double>::infinity();
            for_each_lattice_node(spec.dim, half, step, [&](const std::array<double, 3>& z) {
                mn = std::min(mn, spec.evaluate(z));
            });
            if (mn >= c0) best = half;
            else break;
        }
        if (best > 0.0) {
            k.cube_halfwidth = best;
            k.cube_constant = c0;
        }
    }
    return k;
}

} // namespace detail

/// Pure report checking assumptions: nonnegativity, evenness, finite moments,
/// positive lower bound on a cube.
inline KernelReport validate_kernel(const Kernel& k, double tolerance = 1e-12) {
    KernelReport rep;
    const double step = 2.0 * k.spec.support_radius / k.quadrature_points;
    double mn = std::numeric_limits<double>::infinity();
    double asym = 0.0;
    double amax = 0.0;
    bool finite = std::isfinite(k.a1) && std::isfinite(k.sigma2);
    detail::for_each_lattice_node(k.spec.dim, k.spec.support_radius, step, [&](const std::array<double, 3>& z) {
        const double a = k.spec.evaluate(z);
        std::array<double, 3> zn{-z[0], -z[1], -z[2]};
        const double b = k.spec.evaluate(zn);
        mn = std::min(mn, a);
        amax = std::max(amax, std::abs(a));
        asym = std::max(asym, std::abs(a - b));
        if (!std::isfinite(a)) finite = false;
    });
    rep.min_value = mn;
    rep.nonnegative = mn >= 0.0;
    rep.max_asymmetry = asym;
    rep.even = asym <= tolerance * std::max(1.0, amax);
    rep.moments_finite = finite;
    rep.a1 = k.a1;
    rep.sigma2 = k.sigma2;
    rep.trace_gap = std::abs(k.M2.trace() - k.sigma2);
    rep.cube_found = k.cube_halfwidth > 0.0 && k.cube_constant > 0.0;
    rep.cube_halfwidth = k.cube_halfwidth;
    rep.cube_constant = k.cube_constant;
    return rep;
}

/// Builds a kernel and rejects specs violating the standing assumptions.
inline Kernel make_kernel(const KernelSpec& spec, int quadrature_points) {
    Kernel k = detail::build_kernel_unchecked(spec, quadrature_points);
    KernelReport rep = validate_kernel(k);
    if (!rep.nonnegative) throw std::invalid_argument("make_kernel: kernel takes negative values");
    if (!rep.even) throw std::invalid_argument("make_kernel: kernel is not even");
    if (!rep.moments_finite) throw std::invalid_argument("make_kernel: moments are not finite");
    if (!rep.cube_found)
        throw std::invalid_argument("make_kernel: no cube with a positive lower bound found");
    return k;
}

/// Kernel samples on the displacements of a periodic grid, optionally with the
/// diffusive rescaling a(z/eps). Layout matches the grid (offset index -> wrapped
/// displacement), ready for circulant convolution.
inline std::vector<double> sample_kernel_on_grid(const Kernel& k, const GridSpec& g, double eps = 1.0) {
    if (k.dim() != g.dim) throw std::invalid_argument("sample_kernel_on_grid: dimension mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("sample_kernel_on_grid: eps must be positive");
    if (eps * k.support_radius() > 0.25 * g.length + 1e-12 * g.length)
        throw std::invalid_argument("sample_kernel_on_grid: rescaled support exceeds a quarter torus");
    std::vector<double> out(g.size(), 0.0);
    std::array<int, 3> c{0, 0, 0};
    std::array<double, 3> z{0.0, 0.0, 0.0};
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        c = g.coords(idx);
        for (int a = 0; a < g.dim; ++a) z[static_cast<std::size_t>(a)] = g.displacement(c[static_cast<std::size_t>(a)]) / eps;
        out[idx] = k.evaluate(z);
    }
    return out;
}

} // namespace nlhom

#endif

// dense_oracle.hpp -- slow direct-summation reference implementations.
//
// Everything here deliberately avoids the FFT fast path: operators are built
// as explicit dense matrices and linear systems are solved by LU with partial
// pivoting. Intended for small grids in validation code, not production runs.

#ifndef NLHOM_DENSE_ORACLE_HPP
#define NLHOM_DENSE_ORACLE_HPP

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"

namespace nlhom {
namespace oracle {

struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;   // row-major

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t rows) : n(rows), a(rows * rows, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * x[j];
            y[i] = s;
        }
        return y;
    }
};

/// LU with partial pivoting; solves in place, throws on (numerical) singularity.
inline std::vector<double> lu_solve(DenseMatrix m, std::vector<double> b) {
    const std::size_t n = m.n;
    if (b.size() != n) throw std::invalid_argument("lu_solve: size mismatch");
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(m(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (best < 1e-300) throw std::runtime_error("lu_solve: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            m(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
            b[i] -= f * b[k];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= m(ii, j) * b[j];
        b[ii] = s / m(ii, ii);
    }
    return b;
}

namespace detail {

/// Kernel value at the wrapped displacement between grid indices i and j,
/// evaluated pointwise from the spec (no FFT, no cached sample table).
inline double kernel_at_offset(const Kernel& k, const GridSpec& g, std::size_t i,
                               std::size_t j, double eps) {
    const auto ci = g.coords(i);
    const auto cj = g.coords(j);
    std::array<double, 3> z{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a)
        z[static_cast<std::size_t>(a)] =
            g.displacement(ci[static_cast<std::size_t>(a)] - cj[static_cast<std::size_t>(a)]) / eps;
    return k.evaluate(z);
}

} // namespace detail

/// Dense matrix of L^eps: row i applies the operator to the unit vector basis.
inline DenseMatrix dense_operator_matrix(const MediumField& mu,
                                         const std::optional<MediumField>& lambda,
                                         const Kernel& k, double eps) {
    const GridSpec& g = mu.grid;
    if (lambda && lambda->grid != g)
        throw std::invalid_argument("dense_operator_matrix: lambda grid mismatch");
    const std::size_t N = g.size();
    DenseMatrix L(N);
    const double hd = g.cell_volume();
    const double scale = std::pow(eps, -g.dim - 2);
    for (std::size_t i = 0; i < N; ++i) {
        const double pref = lambda ? lambda->values[i] : mu.values[i];
        double diag = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            const double a = detail::kernel_at_offset(k, g, i, j, eps);
            if (a == 0.0) continue;
            const double w = scale * pref * a * mu.values[j] * hd;
            L(i, j) += w;
            diag -= w;
        }
        L(i, i) += diag;
    }
    return L;
}

/// Drift components by direct summation: r_c(xi) = sum_z z_c a(z) mu(xi+z) h^d.
inline std::vector<std::vector<double>> dense_drift(const MediumField& mu, const Kernel& k) {
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    const double hd = g.cell_volume();
    std::vector<std::vector<double>> r(static_cast<std::size_t>(g.dim),
                                       std::vector<double>(N, 0.0));
    for (std::size_t i = 0; i < N; ++i) {
        const auto ci = g.coords(i);
        for (std::size_t joff = 0; joff < N; ++joff) {
            const auto oc = g.coords(joff);
            std::array<double, 3> z{0.0, 0.0, 0.0};
            for (int a = 0; a < g.dim; ++a)
                z[static_cast<std::size_t>(a)] = g.displacement(oc[static_cast<std::size_t>(a)]);
            const double a = k.evaluate(z);
            if (a == 0.0) continue;
            std::array<int, 3> cp = ci;
            for (int ax = 0; ax < g.dim; ++ax)
                cp[static_cast<std::size_t>(ax)] += oc[static_cast<std::size_t>(ax)];
            const double m = mu.values[g.index(cp)];
            for (int ax = 0; ax < g.dim; ++ax)
                r[static_cast<std::size_t>(ax)][i] += z[static_cast<std::size_t>(ax)] * a * m * hd;
        }
    }
    return r;
}

/// Dense matrix of the microscale generator A_h (no eps scaling, no prefactor):
/// A_h phi(xi) = sum_z a(z) mu(xi+z) (phi(xi+z) - phi(xi)) h^d.
inline DenseMatrix dense_cell_matrix(const MediumField& mu, const Kernel& k) {
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    DenseMatrix A(N);
    const double hd = g.cell_volume();
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            // offset z with xi + z = xj, so a is evaluated at x_j - x_i
            const double a = detail::kernel_at_offset(k, g, j, i, 1.0);
            if (a == 0.0 || i == j) continue;
            const double w = a * mu.values[j] * hd;
            A(i, j) += w;
            A(i, i) -= w;
        }
    }
    return A;
}

/// Direct solve of the regularized corrector system (delta - A_h) theta = r,
/// one component per axis, each centered to zero mu-weighted mean.
inline std::vector<std::vector<double>> dense_corrector(const MediumField& mu, const Kernel& k,
                                                        double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("dense_corrector: delta must be positive");
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    DenseMatrix A = dense_cell_matrix(mu, k);
    DenseMatrix M(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) M(i, j) = (i == j ? delta : 0.0) - A(i, j);
    auto r = dense_drift(mu, k);
    std::vector<std::vector<double>> theta;
    for (auto& rc : r) {
        std::vector<double> t = lu_solve(M, rc);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            num += t[i] * mu.values[i];
            den += mu.values[i];
        }
        const double c = num / den;
        for (double& v : t) v -= c;
        theta.push_back(std::move(t));
    }
    return theta;
}

/// Direct solve of the unregularized periodic cell problem -A_h theta = r.
/// The system is singular with a one-dimensional kernel of constants; the last
/// row is replaced by the zero mu-weighted mean constraint (the drift is
/// mu-orthogonal to constants, so the modified system is consistent).
inline std::vector<std::vector<double>> dense_cell_problem_delta0(const MediumField& mu,
                                                                  const Kernel& k) {
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    DenseMatrix A = dense_cell_matrix(mu, k);
    auto r = dense_drift(mu, k);
    std::vector<std::vector<double>> theta;
    for (auto& rc : r) {
        DenseMatrix M(N);
        std::vector<double> b(N);
        for (std::size_t i = 0; i + 1 < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) M(i, j) = -A(i, j);
            b[i] = rc[i];
        }
        for (std::size_t j = 0; j < N; ++j) M(N - 1, j) = mu.values[j];
        b[N - 1] = 0.0;
        theta.push_back(lu_solve(M, b));
    }
    return theta;
}

/// Direct double-loop evaluation of D1 and D2 from a given corrector.
inline SmallMatrix dense_D1(const MediumField& mu, const Kernel& k) {
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    const double hd = g.cell_volume();
    SmallMatrix D1(g.dim);
    for (std::size_t i = 0; i < N; ++i) {
        const auto ci = g.coords(i);
        for (std::size_t joff = 0; joff < N; ++joff) {
            const auto oc = g.coords(joff);
            std::array<double, 3> z{0.0, 0.0, 0.0};
            for (int a = 0; a < g.dim; ++a)
                z[static_cast<std::size_t>(a)] = g.displacement(oc[static_cast<std::size_t>(a)]);
            const double a = k.evaluate(z);
            if (a == 0.0) continue;
            std::array<int, 3> cm = ci;
            for (int ax = 0; ax < g.dim; ++ax)
                cm[static_cast<std::size_t>(ax)] -= oc[static_cast<std::size_t>(ax)];
            const double w = a * mu.values[i] * mu.values[g.index(cm)];
            for (int p = 0; p < g.dim; ++p)
                for (int q = 0; q < g.dim; ++q)
                    D1(p, q) += 0.5 * z[static_cast<std::size_t>(p)] * z[static_cast<std::size_t>(q)] * w;
        }
    }
    return D1.scaled(hd / static_cast<double>(N));
}

inline SmallMatrix dense_D2(const MediumField& mu, const Kernel& k,
                            const std::vector<std::vector<double>>& theta) {
    const GridSpec& g = mu.grid;
    const std::size_t N = g.size();
    const double hd = g.cell_volume();
    SmallMatrix D2(g.dim);
    for (std::size_t i = 0; i < N; ++i) {
        const auto ci = g.coords(i);
        for (std::size_t joff = 0; joff < N; ++joff) {
            const auto oc = g.coords(joff);
            std::array<double, 3> z{0.0, 0.0, 0.0};
            for (int a = 0; a < g.dim; ++a)
                z[static_cast<std::size_t>(a)] = g.displacement(oc[static_cast<std::size_t>(a)]);
            const double a = k.evaluate(z);
            if (a == 0.0) continue;
            std::array<int, 3> cm = ci;
            for (int ax = 0; ax < g.dim; ++ax)
                cm[static_cast<std::size_t>(ax)] -= oc[static_cast<std::size_t>(ax)];
            const std::size_t im = g.index(cm);
            const double w = a * mu.values[i] * mu.values[im];
            for (int p = 0; p < g.dim; ++p)
                for (int q = 0; q < g.dim; ++q)
                    D2(p, q) += 0.5 * z[static_cast<std::size_t>(p)] *
                                (theta[static_cast<std::size_t>(q)][im] - theta[static_cast<std::size_t>(q)][i]) * w;
        }
    }
    return D2.scaled(hd / static_cast<double>(N));
}

} // namespace oracle
} // namespace nlhom

#endif

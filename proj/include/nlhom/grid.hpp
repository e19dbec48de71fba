// grid.hpp -- periodic uniform grids on the d-torus and grid functions.

#ifndef NLHOM_GRID_HPP
#define NLHOM_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nlhom {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Uniform periodic grid on the torus [0, L)^d with n points per axis.
/// Grid points are x_i = i*h, h = L/n, indices wrap around.
struct GridSpec {
    int dim = 1;
    double length = 1.0;
    int points = 8;

    GridSpec() = default;
    GridSpec(int d, double L, int n) : dim(d), length(L), points(n) {
        if (d < 1 || d > 3)
            throw std::invalid_argument("GridSpec: dimension must be 1, 2 or 3");
        if (!(L > 0.0))
            throw std::invalid_argument("GridSpec: torus side must be positive");
        if (n < 8 || !is_power_of_two(n))
            throw std::invalid_argument("GridSpec: points per axis must be a power of two >= 8");
    }

    double spacing() const { return length / points; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
        return s;
    }

    double cell_volume() const { return std::pow(spacing(), dim); }

    int wrap(long i) const {
        long n = points;
        long r = i % n;
        return static_cast<int>(r < 0 ? r + n : r);
    }

    std::size_t index(const std::array<int, 3>& c) const {
        std::size_t idx = 0;
        for (int a = 0; a < dim; ++a)
            idx = idx * static_cast<std::size_t>(points) + static_cast<std::size_t>(wrap(c[a]));
        return idx;
    }

    std::array<int, 3> coords(std::size_t idx) const {
        std::array<int, 3> c{0, 0, 0};
        for (int a = dim - 1; a >= 0; --a) {
            c[a] = static_cast<int>(idx % static_cast<std::size_t>(points));
            idx /= static_cast<std::size_t>(points);
        }
        return c;
    }

    /// Coordinate of grid point along one axis.
    double coordinate(int i) const { return i * spacing(); }

    /// Signed displacement of an index offset, wrapped to (-L/2, L/2].
    double displacement(int i) const {
        int k = wrap(i);
        if (k > points / 2) k -= points;
        return k * spacing();
    }

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && length == o.length && points == o.points;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Scalar grid function.
struct Field {
    GridSpec grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const GridSpec& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    Field(const GridSpec& g, std::vector<double> values) : grid(g), v(std::move(values)) {
        if (v.size() != g.size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

/// L2 inner product with quadrature weight h^d.
inline double inner(const Field& u, const Field& w) {
    if (u.grid != w.grid) throw std::invalid_argument("inner: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
    return s * u.grid.cell_volume();
}

inline double l2_norm(const Field& u) { return std::sqrt(inner(u, u)); }

/// mu-weighted inner product  sum u w mu h^d.
inline double inner_weighted(const Field& u, const Field& w, const std::vector<double>& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i] * mu[i];
    return s * u.grid.cell_volume();
}

/// Spatial average (1/N) sum g_i, the discrete stand-in for an ensemble mean.
inline double spatial_mean(const std::vector<double>& g) {
    double s = 0.0;
    for (double x : g) s += x;
    return s / static_cast<double>(g.size());
}

/// Small dense symmetric-capable matrix for d <= 3.
struct SmallMatrix {
    int dim = 1;
    std::array<double, 9> m{};

    SmallMatrix() = default;
    explicit SmallMatrix(int d) : dim(d) { m.fill(0.0); }

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(i * dim + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(i * dim + j)]; }

    SmallMatrix transposed() const {
        SmallMatrix t(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) t(i, j) = (*this)(j, i);
        return t;
    }

    SmallMatrix symmetrized() const {
        SmallMatrix s(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return s;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }

    SmallMatrix operator-(const SmallMatrix& o) const {
        SmallMatrix r(dim);
        for (int i = 0; i < dim * dim; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] - o.m[static_cast<std::size_t>(i)];
        return r;
    }

    SmallMatrix scaled(double c) const {
        SmallMatrix r(dim);
        for (int i = 0; i < dim * dim; ++i) r.m[static_cast<std::size_t>(i)] = c * m[static_cast<std::size_t>(i)];
        return r;
    }

    /// quadratic form  eta . M eta
    double quad(const std::array<double, 3>& eta) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += eta[static_cast<std::size_t>(i)] * (*this)(i, j) * eta[static_cast<std::size_t>(j)];
        return s;
    }
};

/// Eigenvalues of a symmetric d x d matrix (d <= 3), ascending, by cyclic Jacobi.
inline std::vector<double> symmetric_eigenvalues(const SmallMatrix& a) {
    const int d = a.dim;
    SmallMatrix w = a;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += w(p, q) * w(p, q);
        if (off < 1e-300) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                if (w(p, q) == 0.0) continue;
                double tau = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                SmallMatrix r = w;
                for (int k = 0; k < d; ++k) {
                    r(p, k) = c * w(p, k) - s * w(q, k);
                    r(q, k) = s * w(p, k) + c * w(q, k);
                }
                SmallMatrix r2 = r;
                for (int k = 0; k < d; ++k) {
                    r2(k, p) = c * r(k, p) - s * r(k, q);
                    r2(k, q) = s * r(k, p) + c * r(k, q);
                }
                w = r2;
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) eig[static_cast<std::size_t>(i)] = w(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace nlhom

#endif

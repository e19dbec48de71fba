// solver.hpp -- operator-free CG (plain and weighted inner product) and BiCGStab.

#ifndef NLHOM_SOLVER_HPP
#define NLHOM_SOLVER_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nlhom {

struct IterativeResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
};

using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot_w(const std::vector<double>& a, const std::vector<double>& b,
                    const std::vector<double>* w) {
    if (!w) return dot(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * (*w)[i];
    return s;
}

} // namespace detail

/// Conjugate gradients for A x = b with A symmetric positive definite in the
/// (optionally weighted) inner product <u,v> = sum u v w.
inline IterativeResult conjugate_gradient(const ApplyFn& A, const std::vector<double>& b,
                                          double tol, int max_iter,
                                          const std::vector<double>* weight = nullptr,
                                          const std::vector<double>* x0 = nullptr) {
    const std::size_t n = b.size();
    IterativeResult res;
    res.x.assign(n, 0.0);
    if (x0) res.x = *x0;

    std::vector<double> r(n), p(n), q(n);
    if (x0) {
        A(res.x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    } else {
        r = b;
    }
    const double bnorm = std::sqrt(detail::dot_w(b, b, weight));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        return res;
    }
    double rr = detail::dot_w(r, r, weight);
    res.residual_history.push_back(std::sqrt(rr) / bnorm);
    if (std::sqrt(rr) <= tol * bnorm) {
        res.converged = true;
        res.relative_residual = std::sqrt(rr) / bnorm;
        return res;
    }
    p = r;
    for (int it = 1; it <= max_iter; ++it) {
        A(p, q);
        const double pq = detail::dot_w(p, q, weight);
        if (!(pq > 0.0)) throw std::runtime_error("conjugate_gradient: operator not positive definite");
        const double alpha = rr / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rr_new = detail::dot_w(r, r, weight);
        res.iterations = it;
        res.residual_history.push_back(std::sqrt(rr_new) / bnorm);
        if (std::sqrt(rr_new) <= tol * bnorm) {
            res.converged = true;
            res.relative_residual = std::sqrt(rr_new) / bnorm;
            return res;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    res.relative_residual = res.residual_history.back();
    return res;
}

/// BiCGStab for general (non-symmetric) A x = b.
inline IterativeResult bicgstab(const ApplyFn& A, const std::vector<double>& b,
                                double tol, int max_iter,
                                const std::vector<double>* x0 = nullptr) {
    const std::size_t n = b.size();
    IterativeResult res;
    res.x.assign(n, 0.0);
    if (x0) res.x = *x0;

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n);
    if (x0) {
        A(res.x, v);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
        std::fill(v.begin(), v.end(), 0.0);
    } else {
        r = b;
    }
    const double bnorm = std::sqrt(detail::dot(b, b));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        return res;
    }
    r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = std::sqrt(detail::dot(r, r));
    res.residual_history.push_back(rnorm / bnorm);
    if (rnorm <= tol * bnorm) {
        res.converged = true;
        return res;
    }
    for (int it = 1; it <= max_iter; ++it) {
        const double rho_new = detail::dot(r0, r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        A(p, v);
        alpha = rho / detail::dot(r0, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        A(s, t);
        const double tt = detail::dot(t, t);
        omega = tt > 0.0 ? detail::dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = std::sqrt(detail::dot(r, r));
        res.iterations = it;
        res.residual_history.push_back(rnorm / bnorm);
        if (rnorm <= tol * bnorm) {
            res.converged = true;
            res.relative_residual = rnorm / bnorm;
            return res;
        }
        if (omega == 0.0) break;
    }
    res.relative_residual = rnorm / bnorm;
    return res;
}

} // namespace nlhom

#endif

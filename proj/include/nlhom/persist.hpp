// persist.hpp -- on-disk artifacts: solution fields, correctors, effective matrices.

#ifndef NLHOM_PERSIST_HPP
#define NLHOM_PERSIST_HPP

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlhom/corrector.hpp"
#include "nlhom/effective.hpp"
#include "nlhom/field_io.hpp"
#include "nlhom/resolvent.hpp"

namespace nlhom {

namespace detail {

inline nlohmann::json matrix_json(const SmallMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.dim; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.dim; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed for " + path);
}

} // namespace detail

/// Solution u plus sidecar {eps, m, tol, iterations, residual} at path + ".json".
inline void save_solution(const std::string& path, const SolutionField& sol, double tol) {
    save_grid_function(path, sol.u);
    detail::write_json(path + ".json", {{"eps", sol.eps},
                                        {"m", sol.m},
                                        {"tol", tol},
                                        {"iterations", sol.iterations},
                                        {"residual", sol.residual}});
}

/// d concatenated binary fields plus sidecar
/// {delta, residuals, increment_norm, bound_constant} at path + ".json".
inline void save_corrector(const std::string& path, const CorrectorField& theta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_corrector: cannot open " + path);
    for (const auto& component : theta.theta) {
        double lo = component[0], hi = component[0];
        for (double v : component) { lo = std::min(lo, v); hi = std::max(hi, v); }
        os.write("NLHF", 4);
        detail::write_raw(os, kFieldFormatVersion);
        detail::write_raw(os, static_cast<std::uint32_t>(theta.grid.dim));
        detail::write_raw(os, static_cast<std::uint32_t>(theta.grid.points));
        detail::write_raw(os, theta.grid.length);
        detail::write_raw(os, lo);
        detail::write_raw(os, hi);
        detail::write_raw(os, std::uint64_t{0});
        os.write(reinterpret_cast<const char*>(component.data()),
                 static_cast<std::streamsize>(component.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("save_corrector: write failed for " + path);
    os.close();
    nlohmann::json residuals = nlohmann::json::array();
    for (int a = 0; a < theta.grid.dim; ++a)
        residuals.push_back(theta.residual[static_cast<std::size_t>(a)]);
    detail::write_json(path + ".json", {{"delta", theta.delta},
                                        {"residuals", residuals},
                                        {"increment_norm", theta.increment_norm},
                                        {"bound_constant", theta.bound_constant}});
}

/// Effective matrix artifact {D1, D2, theta, theta_sym, eigs, seeds, L, n, delta, ratio_mean}.
inline void save_effective(const std::string& path, const EffectiveMatrix& em,
                           const std::vector<std::uint64_t>& seeds) {
    detail::write_json(path, {{"D1", detail::matrix_json(em.D1)},
                              {"D2", detail::matrix_json(em.D2)},
                              {"theta", detail::matrix_json(em.theta)},
                              {"theta_sym", detail::matrix_json(em.theta_sym)},
                              {"eigs", em.eigenvalues},
                              {"seeds", seeds},
                              {"L", em.torus_side},
                              {"n", em.points},
                              {"delta", em.delta},
                              {"ratio_mean", em.ratio_mean}});
}

/// Reads back a corrector written by save_corrector (values only; diagnostics
/// come from the sidecar).
inline CorrectorField load_corrector(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_corrector: cannot open " + path);
    is.close();
    CorrectorField out;
    // read sequential NLHF records by tracking the offset
    std::ifstream in(path, std::ios::binary);
    while (true) {
        char magic[4];
        in.read(magic, 4);
        if (!in) break;
        if (std::memcmp(magic, "NLHF", 4) != 0)
            throw std::runtime_error("load_corrector: bad record in " + path);
        std::uint32_t version = 0, d = 0, n = 0;
        in.read(reinterpret_cast<char*>(&version), sizeof version);
        in.read(reinterpret_cast<char*>(&d), sizeof d);
        in.read(reinterpret_cast<char*>(&n), sizeof n);
        double L = 0.0, a1 = 0.0, a2 = 0.0;
        std::uint64_t seed = 0;
        in.read(reinterpret_cast<char*>(&L), sizeof L);
        in.read(reinterpret_cast<char*>(&a1), sizeof a1);
        in.read(reinterpret_cast<char*>(&a2), sizeof a2);
        in.read(reinterpret_cast<char*>(&seed), sizeof seed);
        GridSpec g(static_cast<int>(d), L, static_cast<int>(n));
        std::vector<double> vals(g.size());
        in.read(reinterpret_cast<char*>(vals.data()),
                static_cast<std::streamsize>(vals.size() * sizeof(double)));
        if (!in) throw std::runtime_error("load_corrector: truncated record in " + path);
        out.grid = g;
        out.theta.push_back(std::move(vals));
    }
    if (out.theta.empty()) throw std::runtime_error("load_corrector: empty file " + path);
    if (static_cast<int>(out.theta.size()) != out.grid.dim)
        throw std::runtime_error("load_corrector: component count mismatch in " + path);
    return out;
}

} // namespace nlhom

#endif

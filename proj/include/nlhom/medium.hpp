// medium.hpp -- seeded realizations of stationary bounded coefficient fields on the torus.

#ifndef NLHOM_MEDIUM_HPP
#define NLHOM_MEDIUM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlhom/fft.hpp"
#include "nlhom/grid.hpp"

namespace nlhom {

enum class MediumGenerator { Checkerboard, SmoothedThreshold, Periodic, Constant };

inline std::string to_string(MediumGenerator g) {
    switch (g) {
        case MediumGenerator::Checkerboard: return "checkerboard";
        case MediumGenerator::SmoothedThreshold: return "smoothed-threshold";
        case MediumGenerator::Periodic: return "periodic";
        case MediumGenerator::Constant: return "constant";
    }
    return "?";
}

namespace rng {

/// splitmix64 finalizer; the per-cell values are keyed on (seed, cell index)
/// so that realizations are window-consistent across torus sizes.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix(h ^ mix(v)); }

inline double uniform01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double normal(std::uint64_t h) {
    // Box-Muller from two mixed halves of the hash stream
    const double u1 = uniform01(mix(h ^ 0x1234567890ABCDEFull));
    const double u2 = uniform01(mix(h ^ 0xFEDCBA0987654321ull));
    const double r = std::sqrt(-2.0 * std::log(u1 + 1e-300));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace rng

/// One realization of a coefficient field with uniform ellipticity bounds.
struct MediumField {
    GridSpec grid;
    std::vector<double> values;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    MediumGenerator generator = MediumGenerator::Constant;
    std::uint64_t seed = 0;
    std::array<double, 3> shift{0.0, 0.0, 0.0};   // cell-lattice offset, in cell units

    Field as_field() const { return Field(grid, values); }
};

struct FieldStatistics {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double variance = 0.0;
};

inline FieldStatistics field_statistics(const MediumField& f) {
    FieldStatistics s;
    s.min = f.values[0];
    s.max = f.values[0];
    double sum = 0.0;
    for (double v : f.values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(f.values.size());
    double acc = 0.0;
    for (double v : f.values) acc += (v - s.mean) * (v - s.mean);
    s.variance = acc / static_cast<double>(f.values.size());
    return s;
}

namespace detail {

inline void check_bounds(double a1, double a2) {
    if (!(a1 > 0.0) || !(a2 >= a1) || !std::isfinite(a2))
        throw std::invalid_argument("medium: bounds must satisfy 0 < alpha1 <= alpha2 < inf");
}

inline bool divides(double part, double whole) {
    const double q = whole / part;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

} // namespace detail

/// Random checkerboard: i.i.d. values per lattice cell, cell lattice shifted by a
/// seeded uniform offset so the field is statistically stationary under continuum
/// shifts. two_phase draws from {alpha1, alpha2}, otherwise uniform on [alpha1, alpha2].
inline MediumField sample_checkerboard(const GridSpec& grid, double alpha1, double alpha2,
                                       double cell_size, std::uint64_t seed, bool two_phase = true) {
    detail::check_bounds(alpha1, alpha2);
    if (!detail::divides(grid.spacing(), cell_size))
        throw std::invalid_argument("sample_checkerboard: cell size must be a multiple of the grid spacing");
    if (!detail::divides(cell_size, grid.length))
        throw std::invalid_argument("sample_checkerboard: torus side must be a multiple of the cell size");

    MediumField f;
    f.grid = grid;
    f.alpha1 = alpha1;
    f.alpha2 = alpha2;
    f.generator = MediumGenerator::Checkerboard;
    f.seed = seed;
    const long ncells = std::lround(grid.length / cell_size);
    for (int a = 0; a < grid.dim; ++a)
        f.shift[static_cast<std::size_t>(a)] =
            rng::uniform01(rng::combine(seed, 0xC0FFEEull + static_cast<std::uint64_t>(a)));

    f.values.resize(grid.size());
    const double h = grid.spacing();
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        const auto c = grid.coords(idx);
        std::uint64_t h64 = rng::mix(seed ^ 0xA5A5A5A5A5A5A5A5ull);
        for (int a = 0; a < grid.dim; ++a) {
            const double x = c[static_cast<std::size_t>(a)] * h;
            long cell = static_cast<long>(std::floor(x / cell_size - f.shift[static_cast<std::size_t>(a)]));
            cell = ((cell % ncells) + ncells) % ncells;
            h64 = rng::combine(h64, static_cast<std::uint64_t>(cell) + 0x1000000ull);
        }
        if (two_phase)
            f.values[idx] = (h64 >> 63) ? alpha2 : alpha1;
        else
            f.values[idx] = alpha1 + (alpha2 - alpha1) * rng::uniform01(h64);
    }
    return f;
}

/// White noise convolved with a compactly supported bump of the given correlation
/// length, then mapped through a bounded monotone function onto [alpha1, alpha2].
inline MediumField sample_smoothed_threshold(const GridSpec& grid, double alpha1, double alpha2,
                                             double correlation_length, std::uint64_t seed) {
    detail::check_bounds(alpha1, alpha2);
    if (correlation_length < 2.0 * grid.spacing())
        throw std::invalid_argument("sample_smoothed_threshold: correlation length must be >= 2h");
    if (correlation_length > 0.5 * grid.length)
        throw std::invalid_argument("sample_smoothed_threshold: correlation length exceeds half the torus");

    MediumField f;
    f.grid = grid;
    f.alpha1 = alpha1;
    f.alpha2 = alpha2;
    f.generator = MediumGenerator::SmoothedThreshold;
    f.seed = seed;
    f.values.resize(grid.size());
    if (alpha1 == alpha2) {
        std::fill(f.values.begin(), f.values.end(), alpha1);
        return f;
    }

    std::vector<double> noise(grid.size());
    for (std::size_t i = 0; i < noise.size(); ++i)
        noise[i] = rng::normal(rng::combine(seed, i + 0xB00ull));

    // compactly supported C^inf bump on |z| <= correlation length
    std::vector<double> bump(grid.size(), 0.0);
    for (std::size_t idx = 0; idx < bump.size(); ++idx) {
        const auto c = grid.coords(idx);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            const double z = grid.displacement(c[static_cast<std::size_t>(a)]) / correlation_length;
            r2 += z * z;
        }
        if (r2 < 1.0) bump[idx] = std::exp(-1.0 / (1.0 - r2));
    }
    ConvolutionPlan plan(grid, bump);
    std::vector<double> g = plan.convolve(noise);

    double mean = spatial_mean(g);
    double var = 0.0;
    for (double v : g) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.size());
    const double sd = std::sqrt(std::max(var, 1e-300));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = 1.0 / (1.0 + std::exp(-(g[i] - mean) / sd));
        f.values[i] = alpha1 + (alpha2 - alpha1) * t;
    }
    return f;
}

/// Deterministic periodic field: a tabulated one-period profile tiled along the
/// first axis. No randomness consumed.
inline MediumField sample_periodic(const GridSpec& grid, const std::vector<double>& profile,
                                   double period) {
    if (profile.empty()) throw std::invalid_argument("sample_periodic: empty profile");
    if (!detail::divides(period, grid.length))
        throw std::invalid_argument("sample_periodic: period must divide the torus side");
    double lo = profile[0], hi = profile[0];
    for (double v : profile) { lo = std::min(lo, v); hi = std::max(hi, v); }
    detail::check_bounds(lo, hi);

    MediumField f;
    f.grid = grid;
    f.alpha1 = lo;
    f.alpha2 = hi;
    f.generator = MediumGenerator::Periodic;
    f.values.resize(grid.size());
    const double h = grid.spacing();
    const std::size_t K = profile.size();
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        const auto c = grid.coords(idx);
        double x = std::fmod(c[0] * h, period);
        if (x < 0.0) x += period;
        std::size_t k = static_cast<std::size_t>(std::floor(x / period * static_cast<double>(K) + 1e-12));
        if (k >= K) k = K - 1;
        f.values[idx] = profile[k];
    }
    return f;
}

inline MediumField sample_constant(const GridSpec& grid, double value) {
    detail::check_bounds(value, value);
    MediumField f;
    f.grid = grid;
    f.alpha1 = value;
    f.alpha2 = value;
    f.generator = MediumGenerator::Constant;
    f.values.assign(grid.size(), value);
    return f;
}

} // namespace nlhom

#endif

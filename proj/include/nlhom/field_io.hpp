// field_io.hpp -- binary field persistence (NLHF format) and JSON sidecars.

#ifndef NLHOM_FIELD_IO_HPP
#define NLHOM_FIELD_IO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlhom/grid.hpp"
#include "nlhom/medium.hpp"

namespace nlhom {

// NLHF: little-endian header {magic "NLHF", version u32, d u32, n u32,
// L f64, alpha1 f64, alpha2 f64, seed u64} followed by n^d f64 row-major.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

namespace detail {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

} // namespace detail

inline void save_field(const std::string& path, const MediumField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_field: cannot open " + path);
    os.write("NLHF", 4);
    detail::write_raw(os, kFieldFormatVersion);
    detail::write_raw(os, static_cast<std::uint32_t>(f.grid.dim));
    detail::write_raw(os, static_cast<std::uint32_t>(f.grid.points));
    detail::write_raw(os, f.grid.length);
    detail::write_raw(os, f.alpha1);
    detail::write_raw(os, f.alpha2);
    detail::write_raw(os, f.seed);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("save_field: write failed for " + path);
}

inline MediumField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NLHF", 4) != 0)
        throw std::runtime_error("load_field: bad magic in " + path);
    std::uint32_t version = 0, d = 0, n = 0;
    detail::read_raw(is, version);
    if (version != kFieldFormatVersion)
        throw std::runtime_error("load_field: unsupported version in " + path);
    detail::read_raw(is, d);
    detail::read_raw(is, n);
    MediumField f;
    double L = 0.0;
    detail::read_raw(is, L);
    detail::read_raw(is, f.alpha1);
    detail::read_raw(is, f.alpha2);
    detail::read_raw(is, f.seed);
    if (!is) throw std::runtime_error("load_field: truncated header in " + path);
    try {
        f.grid = GridSpec(static_cast<int>(d), L, static_cast<int>(n));
    } catch (const std::exception& e) {
        throw std::runtime_error("load_field: corrupt header in " + path + ": " + e.what());
    }
    f.values.resize(f.grid.size());
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_field: truncated file " + path);
    return f;
}

/// Save a bare grid function by wrapping it in the same container format;
/// bounds are set to the data range and the seed to zero.
inline void save_grid_function(const std::string& path, const Field& u,
                               std::uint64_t seed = 0) {
    MediumField f;
    f.grid = u.grid;
    f.values = u.v;
    double lo = u.v.empty() ? 0.0 : u.v[0], hi = lo;
    for (double v : u.v) { lo = std::min(lo, v); hi = std::max(hi, v); }
    f.alpha1 = lo;
    f.alpha2 = hi;
    f.seed = seed;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_grid_function: cannot open " + path);
    os.write("NLHF", 4);
    detail::write_raw(os, kFieldFormatVersion);
    detail::write_raw(os, static_cast<std::uint32_t>(f.grid.dim));
    detail::write_raw(os, static_cast<std::uint32_t>(f.grid.points));
    detail::write_raw(os, f.grid.length);
    detail::write_raw(os, f.alpha1);
    detail::write_raw(os, f.alpha2);
    detail::write_raw(os, f.seed);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("save_grid_function: write failed for " + path);
}

} // namespace nlhom

#endif

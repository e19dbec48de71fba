// fft.hpp -- radix-2 FFT and periodic convolution on power-of-two torus grids.

#ifndef NLHOM_FFT_HPP
#define NLHOM_FFT_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "nlhom/grid.hpp"

namespace nlhom {

using cvector = std::vector<std::complex<double>>;

namespace detail {

/// In-place iterative radix-2 FFT over a strided line of length n.
inline void fft_line(std::complex<double>* data, int n, bool inverse,
                     const cvector& twiddles) {
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                std::complex<double> w = twiddles[static_cast<std::size_t>(k * step)];
                if (inverse) w = std::conj(w);
                std::complex<double> u = data[i + k];
                std::complex<double> t = w * data[i + k + len / 2];
                data[i + k] = u + t;
                data[i + k + len / 2] = u - t;
            }
        }
    }
}

inline const cvector& twiddle_table(int n) {
    thread_local int cached_n = 0;
    thread_local cvector table;
    if (cached_n != n) {
        table.resize(static_cast<std::size_t>(n / 2));
        const double w = -2.0 * 3.14159265358979323846 / n;
        for (int k = 0; k < n / 2; ++k)
            table[static_cast<std::size_t>(k)] = std::polar(1.0, w * k);
        cached_n = n;
    }
    return table;
}

} // namespace detail

/// d-dimensional FFT on a grid-shaped complex array (axis-by-axis).
/// The inverse includes the 1/N normalization.
inline void fft_nd(cvector& data, const GridSpec& g, bool inverse) {
    if (data.size() != g.size()) throw std::invalid_argument("fft_nd: size mismatch");
    const int n = g.points;
    const auto& tw = detail::twiddle_table(n);
    std::vector<std::complex<double>> line(static_cast<std::size_t>(n));

    for (int axis = 0; axis < g.dim; ++axis) {
        // stride of this axis in the row-major layout
        std::size_t stride = 1;
        for (int a = axis + 1; a < g.dim; ++a) stride *= static_cast<std::size_t>(n);
        const std::size_t block = stride * static_cast<std::size_t>(n);
        for (std::size_t base = 0; base < data.size(); base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (int i = 0; i < n; ++i)
                    line[static_cast<std::size_t>(i)] = data[base + off + static_cast<std::size_t>(i) * stride];
                detail::fft_line(line.data(), n, inverse, tw);
                for (int i = 0; i < n; ++i)
                    data[base + off + static_cast<std::size_t>(i) * stride] = line[static_cast<std::size_t>(i)];
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(data.size());
        for (auto& z : data) z *= scale;
    }
}

inline cvector spectrum(const GridSpec& g, const std::vector<double>& f) {
    cvector data(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) data[i] = f[i];
    fft_nd(data, g, false);
    return data;
}

/// Reusable circulant stencil: kernel samples on grid displacements, spectrum cached.
/// convolve:   g(i) = sum_j k(j) f(i-j)
/// correlate:  g(i) = sum_j k(j) f(i+j)
/// No quadrature weight; callers multiply by h^d where needed.
class ConvolutionPlan {
public:
    ConvolutionPlan() = default;
    ConvolutionPlan(const GridSpec& g, const std::vector<double>& kernel_samples)
        : grid_(g), kernel_hat_(spectrum(g, kernel_samples)) {}

    const GridSpec& grid() const { return grid_; }

    std::vector<double> convolve(const std::vector<double>& f) const {
        return transform(f, false);
    }
    std::vector<double> correlate(const std::vector<double>& f) const {
        return transform(f, true);
    }

private:
    std::vector<double> transform(const std::vector<double>& f, bool conjugate) const {
        if (f.size() != grid_.size()) throw std::invalid_argument("ConvolutionPlan: size mismatch");
        cvector data(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) data[i] = f[i];
        fft_nd(data, grid_, false);
        for (std::size_t i = 0; i < f.size(); ++i)
            data[i] *= conjugate ? std::conj(kernel_hat_[i]) : kernel_hat_[i];
        fft_nd(data, grid_, true);
        std::vector<double> out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = data[i].real();
        return out;
    }

    GridSpec grid_;
    cvector kernel_hat_;
};

} // namespace nlhom

#endif

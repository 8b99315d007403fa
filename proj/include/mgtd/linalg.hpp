#pragma once

#include <array>
#include <cmath>
#include <span>

namespace mgtd {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// y = W x with W row-major (rows x cols).
inline void matvec(std::span<const double> w, int rows, int cols,
                   std::span<const double> x, std::span<double> y) {
    for (int r = 0; r < rows; ++r)
        y[r] = dot(w.subspan(static_cast<std::size_t>(r) * cols, cols), x);
}

/// dx += W^T dy, accumulated row-wise so memory access stays contiguous.
inline void matvec_t_accum(std::span<const double> w, int rows, int cols,
                           std::span<const double> dy, std::span<double> dx) {
    for (int r = 0; r < rows; ++r)
        axpy(dy[r], w.subspan(static_cast<std::size_t>(r) * cols, cols), dx);
}

/// dW += dy ⊗ x
inline void outer_accum(std::span<const double> dy, std::span<const double> x,
                        std::span<double> dw, int rows, int cols) {
    for (int r = 0; r < rows; ++r)
        axpy(dy[r], x, dw.subspan(static_cast<std::size_t>(r) * cols, cols));
}

inline std::array<double, 2> softmax2(double z0, double z1) {
    const double m = z0 > z1 ? z0 : z1;
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

}  // namespace mgtd

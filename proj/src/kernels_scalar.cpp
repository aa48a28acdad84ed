#include "bsch/kernels.hpp"

namespace bsch::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wdot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_scalar(const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void stencil5_scalar(const double* lo, const double* mid, const double* hi, double cx,
                     double cy, double* out, std::size_t n) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = cx * (mid[i - 1] - 2.0 * mid[i] + mid[i + 1]) +
                 cy * (lo[i] - 2.0 * mid[i] + hi[i]);
    }
}

void stencil3_scalar(const double* v, double c, double* out, std::size_t n) {
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = c * (v[i - 1] - 2.0 * v[i] + v[i + 1]);
}

constexpr KernelTable kScalar{dot_scalar,      wdot_scalar,     axpy_scalar,
                              xpby_scalar,     stencil5_scalar, stencil3_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace bsch::kernels

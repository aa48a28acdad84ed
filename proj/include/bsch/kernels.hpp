#pragma once

// Data-parallel inner loops used by the grid operators and the Krylov
// solver. Each kernel has a portable scalar reference and, on x86-64, an
// AVX2+FMA variant; the variant is picked once at startup from CPUID and can
// be overridden with BSCH_SIMD=scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace bsch::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i w[i] * a[i] * b[i]
    double (*wdot)(const double* w, const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = x + beta * y
    void (*xpby)(const double* x, double beta, double* y, std::size_t n);
    // out[i] = cx*(mid[i-1] - 2 mid[i] + mid[i+1]) + cy*(lo[i] - 2 mid[i] + hi[i])
    // for 1 <= i < n-1. Entries 0 and n-1 are left untouched.
    void (*stencil5)(const double* lo, const double* mid, const double* hi, double cx,
                     double cy, double* out, std::size_t n);
    // out[i] = c*(v[i-1] - 2 v[i] + v[i+1]) for 1 <= i < n-1.
    void (*stencil3)(const double* v, double c, double* out, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();

// Table chosen for this process.
const KernelTable& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

// True when the CPU can run the AVX2 table.
bool cpu_has_avx2();

// Convenience wrappers over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double wdot(std::span<const double> w, std::span<const double> a,
                   std::span<const double> b) {
    return active().wdot(w.data(), a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void xpby(std::span<const double> x, double beta, std::span<double> y) {
    active().xpby(x.data(), beta, y.data(), y.size());
}

}  // namespace bsch::kernels

// Compiled with -mavx2 -mfma. Nothing here may run before cpu_has_avx2()
// has been checked.
#include "bsch/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace bsch::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wdot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_avx2(const double* x, double beta, double* y, std::size_t n) {
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void stencil5_avx2(const double* lo, const double* mid, const double* hi, double cx,
                   double cy, double* out, std::size_t n) {
    if (n < 3) return;
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 1;
    for (; i + 4 < n; i += 4) {
        __m256d c = _mm256_loadu_pd(mid + i);
        __m256d c2 = _mm256_mul_pd(two, c);
        __m256d dx = _mm256_sub_pd(
            _mm256_add_pd(_mm256_loadu_pd(mid + i - 1), _mm256_loadu_pd(mid + i + 1)), c2);
        __m256d dy =
            _mm256_sub_pd(_mm256_add_pd(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(hi + i)), c2);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vcx, dx, _mm256_mul_pd(vcy, dy)));
    }
    for (; i + 1 < n; ++i) {
        out[i] = cx * (mid[i - 1] - 2.0 * mid[i] + mid[i + 1]) +
                 cy * (lo[i] - 2.0 * mid[i] + hi[i]);
    }
}

void stencil3_avx2(const double* v, double c, double* out, std::size_t n) {
    if (n < 3) return;
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 1;
    for (; i + 4 < n; i += 4) {
        __m256d m = _mm256_loadu_pd(v + i);
        __m256d d = _mm256_sub_pd(
            _mm256_add_pd(_mm256_loadu_pd(v + i - 1), _mm256_loadu_pd(v + i + 1)),
            _mm256_mul_pd(two, m));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, d));
    }
    for (; i + 1 < n; ++i) out[i] = c * (v[i - 1] - 2.0 * v[i] + v[i + 1]);
}

constexpr KernelTable kAvx2{dot_avx2,      wdot_avx2,     axpy_avx2,
                            xpby_avx2,     stencil5_avx2, stencil3_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace bsch::kernels

#else

namespace bsch::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace bsch::kernels

#endif

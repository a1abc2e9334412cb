#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "torsmink/kernels.hpp"

namespace torsmink::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
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

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_avx2(const double* x, double beta, double* y, std::size_t n) {
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

// Rows of the FEM stiffness matrix are short (~7 entries); vectorize within
// the row with a gather and fall back to scalar for the tail.
void spmv_avx2(std::size_t rows, const int* row_ptr, const int* col, const double* val,
               const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        int k = row_ptr[i];
        const int end = row_ptr[i + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + k));
            __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + k), xv, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

} // namespace

const Backend& avx2_backend() {
    static const Backend b{"avx2", dot_avx2, axpy_avx2, xpay_avx2, spmv_avx2};
    return b;
}

} // namespace torsmink::kern

#endif // x86-64

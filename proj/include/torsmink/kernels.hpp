#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Vector and sparse kernels behind the CG solve. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant selected at
// runtime. The two are equivalence-tested; results may differ in the last
// bits because the SIMD reductions reassociate sums.
//
// Set TORSMINK_SIMD=scalar (or avx2) to force a backend.

namespace torsmink::kern {

struct Backend {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n); // y += alpha*x
    void (*xpay)(const double* x, double beta, double* y, std::size_t n);  // y = x + beta*y
    void (*spmv)(std::size_t rows, const int* row_ptr, const int* col, const double* val,
                 const double* x, double* y);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend(); // only callable when compiled in and CPU supports it
#endif

// Active backend, chosen once per process.
const Backend& active();
std::string active_name();

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void xpay(const std::vector<double>& x, double beta, std::vector<double>& y) {
    active().xpay(x.data(), beta, y.data(), y.size());
}

} // namespace torsmink::kern

#include "torsmink/kernels.hpp"

namespace torsmink::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_scalar(const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void spmv_scalar(std::size_t rows, const int* row_ptr, const int* col, const double* val,
                 const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

} // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar", dot_scalar, axpy_scalar, xpay_scalar, spmv_scalar};
    return b;
}

} // namespace torsmink::kern

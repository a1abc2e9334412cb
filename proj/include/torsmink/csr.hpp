#pragma once

#include <cstddef>
#include <vector>

#include "torsmink/errors.hpp"
#include "torsmink/kernels.hpp"

namespace torsmink {

// Compressed sparse row matrix, square, symmetric by construction here.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<int> row_ptr; // n+1
    std::vector<int> col;
    std::vector<double> val;

    void mult(const std::vector<double>& x, std::vector<double>& y) const {
        kern::active().spmv(n, row_ptr.data(), col.data(), val.data(), x.data(), y.data());
    }
    std::vector<double> diagonal() const;
};

// Accumulates (i,j,v) triplets, then compresses with duplicates summed.
class CsrBuilder {
public:
    explicit CsrBuilder(std::size_t n) : n_(n), rows_(n) {}
    void add(int i, int j, double v) { rows_[static_cast<std::size_t>(i)].push_back({j, v}); }
    CsrMatrix build() const;

private:
    std::size_t n_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
};

struct CgResult {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients for SPD systems.
// Deterministic: fixed iteration order, no reordering.
CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                  double rel_tol = 1e-10, std::size_t max_iters = 0);

} // namespace torsmink

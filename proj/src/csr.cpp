#include "torsmink/csr.hpp"

#include <algorithm>
#include <cmath>

namespace torsmink {

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == static_cast<int>(i)) d[i] = val[k];
    return d;
}

CsrMatrix CsrBuilder::build() const {
    CsrMatrix m;
    m.n = n_;
    m.row_ptr.assign(n_ + 1, 0);
    std::vector<std::pair<int, double>> row;
    // first pass: merged row sizes
    std::vector<std::vector<std::pair<int, double>>> merged(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        row = rows_[i];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& out = merged[i];
        for (const auto& [j, v] : row) {
            if (!out.empty() && out.back().first == j)
                out.back().second += v;
            else
                out.push_back({j, v});
        }
        m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(out.size());
    }
    m.col.reserve(static_cast<std::size_t>(m.row_ptr[n_]));
    m.val.reserve(static_cast<std::size_t>(m.row_ptr[n_]));
    for (std::size_t i = 0; i < n_; ++i)
        for (const auto& [j, v] : merged[i]) {
            m.col.push_back(j);
            m.val.push_back(v);
        }
    return m;
}

CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                  double rel_tol, std::size_t max_iters) {
    const std::size_t n = A.n;
    if (max_iters == 0) max_iters = 20 * n + 100;
    x.assign(n, 0.0);
    std::vector<double> r = b;
    std::vector<double> invd = A.diagonal();
    for (auto& d : invd) d = (d > 0.0) ? 1.0 / d : 1.0;
    std::vector<double> z(n), p(n), Ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = invd[i] * r[i];
    p = z;
    double rz = kern::dot(r, z);
    const double bnorm = std::sqrt(kern::dot(b, b));
    if (bnorm == 0.0) return {0, 0.0};

    CgResult result;
    for (std::size_t it = 0; it < max_iters; ++it) {
        A.mult(p, Ap);
        const double pAp = kern::dot(p, Ap);
        if (!(pAp > 0.0))
            throw SolverDiverged("cg: curvature breakdown (matrix not SPD on this mesh)");
        const double alpha = rz / pAp;
        kern::axpy(alpha, p, x);
        kern::axpy(-alpha, Ap, r);
        const double rnorm = std::sqrt(kern::dot(r, r));
        result.iterations = it + 1;
        result.relative_residual = rnorm / bnorm;
        if (result.relative_residual <= rel_tol) return result;
        for (std::size_t i = 0; i < n; ++i) z[i] = invd[i] * r[i];
        const double rz_new = kern::dot(r, z);
        kern::xpay(z, rz_new / rz, p);
        rz = rz_new;
    }
    throw SolverDiverged("cg: no convergence after " + std::to_string(max_iters) +
                         " iterations (residual " + std::to_string(result.relative_residual) + ")");
}

} // namespace torsmink

#pragma once

// Dense linear algebra over Matrix: products, Gram matrices, Cholesky and the
// closed-form ridge solve. Products go through CBLAS; the factorization is local.

#include <cblas.h>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "elmboost/error.hpp"
#include "elmboost/matrix.hpp"

namespace elmboost {

namespace detail {

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " +
                             b.shape());
    }
}

inline int blas_int(std::size_t n) { return static_cast<int>(n); }

inline int leading_dim(std::size_t cols) { return blas_int(cols == 0 ? 1 : cols); }

}  // namespace detail

/// a * b.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: cannot multiply " + a.shape() + " by " + b.shape());
    }
    Matrix c(a.rows(), b.cols());
    if (c.empty() || a.cols() == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, detail::blas_int(a.rows()),
                detail::blas_int(b.cols()), detail::blas_int(a.cols()), 1.0, a.data(),
                detail::leading_dim(a.cols()), b.data(), detail::leading_dim(b.cols()), 0.0,
                c.data(), detail::leading_dim(c.cols()));
    return c;
}

/// aᵀ * b without materializing the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("matmul_tn: cannot multiply transpose of " + a.shape() + " by " +
                             b.shape());
    }
    Matrix c(a.cols(), b.cols());
    if (c.empty() || a.rows() == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, detail::blas_int(a.cols()),
                detail::blas_int(b.cols()), detail::blas_int(a.rows()), 1.0, a.data(),
                detail::leading_dim(a.cols()), b.data(), detail::leading_dim(b.cols()), 0.0,
                c.data(), detail::leading_dim(c.cols()));
    return c;
}

/// a * bᵀ without materializing the transpose.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionError("matmul_nt: cannot multiply " + a.shape() + " by transpose of " +
                             b.shape());
    }
    Matrix c(a.rows(), b.rows());
    if (c.empty() || a.cols() == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, detail::blas_int(a.rows()),
                detail::blas_int(b.rows()), detail::blas_int(a.cols()), 1.0, a.data(),
                detail::leading_dim(a.cols()), b.data(), detail::leading_dim(b.cols()), 0.0,
                c.data(), detail::leading_dim(c.cols()));
    return c;
}

/// hᵀh. The result is exactly symmetric: the lower triangle is copied from the upper.
inline Matrix gram(const Matrix& h) {
    if (h.empty()) throw DimensionError("gram: empty matrix " + h.shape());
    const std::size_t n = h.cols();
    Matrix g(n, n);
    cblas_dsyrk(CblasRowMajor, CblasUpper, CblasTrans, detail::blas_int(n),
                detail::blas_int(h.rows()), 1.0, h.data(), detail::leading_dim(n), 0.0,
                g.data(), detail::leading_dim(n));
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
    }
    return g;
}

/// Lower-triangular L with L Lᵀ = a. Throws NotPositiveDefinite with the failing pivot.
inline Matrix cholesky_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix " + a.shape() + " not square");
    const std::size_t n = a.rows();

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    // Pivots this small relative to the diagonal scale mean the matrix is singular up to rounding.
    const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto lj = l.row(j);
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > floor) || !std::isfinite(d)) throw NotPositiveDefinite(j);
        const double pivot = std::sqrt(d);
        lj[j] = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            const auto li = l.row(i);
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            li[j] = s / pivot;
        }
    }
    return l;
}

/// Solves a z = b for symmetric positive definite a via Cholesky and two triangular solves.
inline Matrix cholesky_solve(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw DimensionError("cholesky_solve: incompatible shapes " + a.shape() + " and " +
                             b.shape());
    }
    const Matrix l = cholesky_factor(a);
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();

    // Forward: L u = b.
    Matrix z = b;
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = l.row(i);
        const auto zi = z.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const auto zk = z.row(k);
            for (std::size_t c = 0; c < m; ++c) zi[c] -= li[k] * zk[c];
        }
        for (std::size_t c = 0; c < m; ++c) zi[c] /= li[i];
    }
    // Backward: Lᵀ z = u.
    for (std::size_t ii = n; ii-- > 0;) {
        const auto zi = z.row(ii);
        for (std::size_t k = ii + 1; k < n; ++k) {
            const double lki = l(k, ii);
            const auto zk = z.row(k);
            for (std::size_t c = 0; c < m; ++c) zi[c] -= lki * zk[c];
        }
        for (std::size_t c = 0; c < m; ++c) zi[c] /= l(ii, ii);
    }
    return z;
}

/// Ridge regression weights W = (hᵀh + λI)⁻¹ hᵀy, the minimizer of ‖hW − y‖² + λ‖W‖².
inline Matrix ridge_solve(const Matrix& h, const Matrix& y, double lambda) {
    if (h.rows() != y.rows()) {
        throw DimensionError("ridge_solve: design " + h.shape() + " and targets " + y.shape() +
                             " have different row counts");
    }
    if (!(lambda >= 0.0)) throw ArgumentError("ridge_solve: lambda must be non-negative");
    Matrix system = gram(h);
    for (std::size_t i = 0; i < system.rows(); ++i) system(i, i) += lambda;
    return cholesky_solve(system, matmul_tn(h, y));
}

inline double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.values()) sum += v * v;
    return std::sqrt(sum);
}

/// acc + alpha * delta.
inline Matrix add_scaled(const Matrix& acc, const Matrix& delta, double alpha) {
    detail::require_same_shape(acc, delta, "add_scaled");
    Matrix out = acc;
    const auto d = delta.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += alpha * d[i];
    return out;
}

}  // namespace elmboost

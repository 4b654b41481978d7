#include "corrmc/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <vector>

namespace corrmc::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::parallel};

void require_gemm_shapes(std::size_t am, std::size_t ak,
                         std::size_t bk, std::size_t bn,
                         const Dense& c, const char* where) {
    if (ak != bk || c.rows() != am || c.cols() != bn) {
        throw DimensionError(std::string(where) + ": operand shapes disagree");
    }
}

// One output row of c = a * b: every c(i, j) accumulates its k-terms in
// ascending k order, so the result is independent of how rows are scheduled.
inline void gemm_nn_row(const Dense& a, const Dense& b, Dense& c, std::size_t i) {
    const std::size_t n = b.cols();
    const std::size_t kdim = a.cols();
    double* crow = &c(i, 0);
    for (std::size_t j = 0; j < n; ++j) {
        crow[j] = 0.0;
    }
    for (std::size_t k = 0; k < kdim; ++k) {
        const double aik = a(i, k);
        const double* brow = &b(k, 0);
        for (std::size_t j = 0; j < n; ++j) {
            crow[j] += aik * brow[j];
        }
    }
}

inline void gemm_tn_row(const Dense& a, const Dense& b, Dense& c, std::size_t i) {
    // c(i, j) = sum_k a(k, i) * b(k, j), accumulated in ascending k order.
    const std::size_t n = b.cols();
    const std::size_t kdim = a.rows();
    double* crow = &c(i, 0);
    for (std::size_t j = 0; j < n; ++j) {
        crow[j] = 0.0;
    }
    for (std::size_t k = 0; k < kdim; ++k) {
        const double aki = a(k, i);
        const double* brow = &b(k, 0);
        for (std::size_t j = 0; j < n; ++j) {
            crow[j] += aki * brow[j];
        }
    }
}

inline void gemm_nt_row(const Dense& a, const Dense& b, Dense& c, std::size_t i) {
    // c(i, j) = sum_k a(i, k) * b(j, k), accumulated in ascending k order.
    const std::size_t n = b.rows();
    const std::size_t kdim = a.cols();
    const double* arow = &a(i, 0);
    double* crow = &c(i, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const double* brow = &b(j, 0);
        double acc = 0.0;
        for (std::size_t k = 0; k < kdim; ++k) {
            acc += arow[k] * brow[k];
        }
        crow[j] = acc;
    }
}

inline double frobenius_row(const Dense& x, std::size_t i) {
    const std::size_t n = x.cols();
    const double* row = &x(i, 0);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += row[j] * row[j];
    }
    return acc;
}

inline double dot_row(const Dense& x, const Dense& y, std::size_t i) {
    const std::size_t n = x.cols();
    const double* xr = &x(i, 0);
    const double* yr = &y(i, 0);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += xr[j] * yr[j];
    }
    return acc;
}

inline double max_abs_row(const Dense& x, std::size_t i) {
    const std::size_t n = x.cols();
    const double* row = &x(i, 0);
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = std::fabs(row[j]);
        if (v > best) {
            best = v;
        }
    }
    return best;
}

// Row partials are always combined serially in ascending row order; this is
// shared by both backends so their results match bitwise.
double combine_sum(const std::vector<double>& partials) {
    double acc = 0.0;
    for (double v : partials) {
        acc += v;
    }
    return acc;
}

double combine_max(const std::vector<double>& partials) {
    double best = 0.0;
    for (double v : partials) {
        if (v > best) {
            best = v;
        }
    }
    return best;
}

using RowIndex = long long; // OpenMP loop variable type

} // namespace

Backend default_backend() noexcept { return g_backend.load(); }
void set_default_backend(Backend b) noexcept { g_backend.store(b); }

namespace serial {

void gemm_nn(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.rows(), a.cols(), b.rows(), b.cols(), c, "gemm_nn");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        gemm_nn_row(a, b, c, i);
    }
}

void gemm_tn(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.cols(), a.rows(), b.rows(), b.cols(), c, "gemm_tn");
    for (std::size_t i = 0; i < a.cols(); ++i) {
        gemm_tn_row(a, b, c, i);
    }
}

void gemm_nt(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.rows(), a.cols(), b.cols(), b.rows(), c, "gemm_nt");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        gemm_nt_row(a, b, c, i);
    }
}

void add_scaled(double alpha, const Dense& x, Dense& y) {
    require_same_shape(x, y, "add_scaled");
    const std::size_t n = x.size();
    const double* xp = x.data();
    double* yp = y.data();
    for (std::size_t t = 0; t < n; ++t) {
        yp[t] += alpha * xp[t];
    }
}

void scale(double alpha, Dense& x) {
    double* xp = x.data();
    const std::size_t n = x.size();
    for (std::size_t t = 0; t < n; ++t) {
        xp[t] *= alpha;
    }
}

void hadamard(const Dense& x, const Dense& y, Dense& out) {
    require_same_shape(x, y, "hadamard");
    require_same_shape(x, out, "hadamard");
    const std::size_t n = x.size();
    const double* xp = x.data();
    const double* yp = y.data();
    double* op = out.data();
    for (std::size_t t = 0; t < n; ++t) {
        op[t] = xp[t] * yp[t];
    }
}

double frobenius_norm(const Dense& x) {
    std::vector<double> partials(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        partials[i] = frobenius_row(x, i);
    }
    return std::sqrt(combine_sum(partials));
}

double dot(const Dense& x, const Dense& y) {
    require_same_shape(x, y, "dot");
    std::vector<double> partials(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        partials[i] = dot_row(x, y, i);
    }
    return combine_sum(partials);
}

double max_abs(const Dense& x) {
    std::vector<double> partials(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        partials[i] = max_abs_row(x, i);
    }
    return combine_max(partials);
}

} // namespace serial

namespace parallel {

void gemm_nn(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.rows(), a.cols(), b.rows(), b.cols(), c, "gemm_nn");
    const RowIndex m = static_cast<RowIndex>(a.rows());
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        gemm_nn_row(a, b, c, static_cast<std::size_t>(i));
    }
}

void gemm_tn(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.cols(), a.rows(), b.rows(), b.cols(), c, "gemm_tn");
    const RowIndex m = static_cast<RowIndex>(a.cols());
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        gemm_tn_row(a, b, c, static_cast<std::size_t>(i));
    }
}

void gemm_nt(const Dense& a, const Dense& b, Dense& c) {
    require_gemm_shapes(a.rows(), a.cols(), b.cols(), b.rows(), c, "gemm_nt");
    const RowIndex m = static_cast<RowIndex>(a.rows());
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        gemm_nt_row(a, b, c, static_cast<std::size_t>(i));
    }
}

void add_scaled(double alpha, const Dense& x, Dense& y) {
    require_same_shape(x, y, "add_scaled");
    const RowIndex n = static_cast<RowIndex>(x.size());
    const double* xp = x.data();
    double* yp = y.data();
#pragma omp parallel for schedule(static)
    for (RowIndex t = 0; t < n; ++t) {
        yp[t] += alpha * xp[t];
    }
}

void scale(double alpha, Dense& x) {
    const RowIndex n = static_cast<RowIndex>(x.size());
    double* xp = x.data();
#pragma omp parallel for schedule(static)
    for (RowIndex t = 0; t < n; ++t) {
        xp[t] *= alpha;
    }
}

void hadamard(const Dense& x, const Dense& y, Dense& out) {
    require_same_shape(x, y, "hadamard");
    require_same_shape(x, out, "hadamard");
    const RowIndex n = static_cast<RowIndex>(x.size());
    const double* xp = x.data();
    const double* yp = y.data();
    double* op = out.data();
#pragma omp parallel for schedule(static)
    for (RowIndex t = 0; t < n; ++t) {
        op[t] = xp[t] * yp[t];
    }
}

double frobenius_norm(const Dense& x) {
    const RowIndex m = static_cast<RowIndex>(x.rows());
    std::vector<double> partials(x.rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        partials[static_cast<std::size_t>(i)] = frobenius_row(x, static_cast<std::size_t>(i));
    }
    return std::sqrt(combine_sum(partials));
}

double dot(const Dense& x, const Dense& y) {
    require_same_shape(x, y, "dot");
    const RowIndex m = static_cast<RowIndex>(x.rows());
    std::vector<double> partials(x.rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        partials[static_cast<std::size_t>(i)] = dot_row(x, y, static_cast<std::size_t>(i));
    }
    return combine_sum(partials);
}

double max_abs(const Dense& x) {
    const RowIndex m = static_cast<RowIndex>(x.rows());
    std::vector<double> partials(x.rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (RowIndex i = 0; i < m; ++i) {
        partials[static_cast<std::size_t>(i)] = max_abs_row(x, static_cast<std::size_t>(i));
    }
    return combine_max(partials);
}

} // namespace parallel

#define CORRMC_DISPATCH(fn, ...)                      \
    if (default_backend() == Backend::serial) {      \
        return serial::fn(__VA_ARGS__);              \
    }                                                \
    return parallel::fn(__VA_ARGS__)

void gemm_nn(const Dense& a, const Dense& b, Dense& c) { CORRMC_DISPATCH(gemm_nn, a, b, c); }
void gemm_tn(const Dense& a, const Dense& b, Dense& c) { CORRMC_DISPATCH(gemm_tn, a, b, c); }
void gemm_nt(const Dense& a, const Dense& b, Dense& c) { CORRMC_DISPATCH(gemm_nt, a, b, c); }
void add_scaled(double alpha, const Dense& x, Dense& y) { CORRMC_DISPATCH(add_scaled, alpha, x, y); }
void scale(double alpha, Dense& x) { CORRMC_DISPATCH(scale, alpha, x); }
void hadamard(const Dense& x, const Dense& y, Dense& out) { CORRMC_DISPATCH(hadamard, x, y, out); }
double frobenius_norm(const Dense& x) { CORRMC_DISPATCH(frobenius_norm, x); }
double dot(const Dense& x, const Dense& y) { CORRMC_DISPATCH(dot, x, y); }
double max_abs(const Dense& x) { CORRMC_DISPATCH(max_abs, x); }

#undef CORRMC_DISPATCH

Dense matmul_nn(const Dense& a, const Dense& b) {
    Dense c(a.rows(), b.cols());
    gemm_nn(a, b, c);
    return c;
}

Dense matmul_tn(const Dense& a, const Dense& b) {
    Dense c(a.cols(), b.cols());
    gemm_tn(a, b, c);
    return c;
}

Dense matmul_nt(const Dense& a, const Dense& b) {
    Dense c(a.rows(), b.rows());
    gemm_nt(a, b, c);
    return c;
}

Dense sum(const Dense& a, const Dense& b) {
    Dense out = a;
    add_scaled(1.0, b, out);
    return out;
}

Dense difference(const Dense& a, const Dense& b) {
    Dense out = a;
    add_scaled(-1.0, b, out);
    return out;
}

Dense scaled(double alpha, const Dense& x) {
    Dense out = x;
    scale(alpha, out);
    return out;
}

} // namespace corrmc::kernels

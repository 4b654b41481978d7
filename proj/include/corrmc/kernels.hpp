#pragma once

#include "corrmc/dense.hpp"

namespace corrmc::kernels {

/// Which implementation the dispatching wrappers call.
enum class Backend {
    serial,
    parallel,
};

Backend default_backend() noexcept;
void set_default_backend(Backend b) noexcept;

/// Serial reference implementations.
///
/// These are the ground truth for the parallel variants: simple loops,
/// and reductions structured as per-row partial sums combined in ascending
/// row order.  The parallel namespace mirrors this structure exactly (one
/// thread owns each output element or row partial, partials are combined
/// serially in the same order), so for identical inputs both backends —
/// and any OpenMP thread count — produce bitwise-identical results.
namespace serial {

void gemm_nn(const Dense& a, const Dense& b, Dense& c); ///< c = a * b
void gemm_tn(const Dense& a, const Dense& b, Dense& c); ///< c = a^T * b
void gemm_nt(const Dense& a, const Dense& b, Dense& c); ///< c = a * b^T
void add_scaled(double alpha, const Dense& x, Dense& y); ///< y += alpha * x
void scale(double alpha, Dense& x);                      ///< x *= alpha
void hadamard(const Dense& x, const Dense& y, Dense& out); ///< out = x .* y
double frobenius_norm(const Dense& x);
double dot(const Dense& x, const Dense& y); ///< trace inner product
double max_abs(const Dense& x);

} // namespace serial

/// OpenMP implementations; see the serial namespace for the determinism
/// contract they preserve.
namespace parallel {

void gemm_nn(const Dense& a, const Dense& b, Dense& c);
void gemm_tn(const Dense& a, const Dense& b, Dense& c);
void gemm_nt(const Dense& a, const Dense& b, Dense& c);
void add_scaled(double alpha, const Dense& x, Dense& y);
void scale(double alpha, Dense& x);
void hadamard(const Dense& x, const Dense& y, Dense& out);
double frobenius_norm(const Dense& x);
double dot(const Dense& x, const Dense& y);
double max_abs(const Dense& x);

} // namespace parallel

// Dispatching wrappers: call the selected default backend.
void gemm_nn(const Dense& a, const Dense& b, Dense& c);
void gemm_tn(const Dense& a, const Dense& b, Dense& c);
void gemm_nt(const Dense& a, const Dense& b, Dense& c);
void add_scaled(double alpha, const Dense& x, Dense& y);
void scale(double alpha, Dense& x);
void hadamard(const Dense& x, const Dense& y, Dense& out);
double frobenius_norm(const Dense& x);
double dot(const Dense& x, const Dense& y);
double max_abs(const Dense& x);

// Allocating conveniences built on the wrappers above.
Dense matmul_nn(const Dense& a, const Dense& b);
Dense matmul_tn(const Dense& a, const Dense& b);
Dense matmul_nt(const Dense& a, const Dense& b);
Dense sum(const Dense& a, const Dense& b);
Dense difference(const Dense& a, const Dense& b);
Dense scaled(double alpha, const Dense& x);

} // namespace corrmc::kernels

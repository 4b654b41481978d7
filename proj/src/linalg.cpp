#include "corrmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

#include "corrmc/kernels.hpp"

namespace corrmc {

namespace {

using EigenMatrix = Eigen::MatrixXd;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EigenMatrix to_eigen(const Dense& x) {
    if (x.empty()) {
        return EigenMatrix(static_cast<Eigen::Index>(x.rows()),
                           static_cast<Eigen::Index>(x.cols()));
    }
    return RowMajorMap(x.data(), static_cast<Eigen::Index>(x.rows()),
                       static_cast<Eigen::Index>(x.cols()));
}

Dense from_eigen(const EigenMatrix& m) {
    Dense out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
        }
    }
    return out;
}

// Dense Jacobi rotations are more accurate and fast enough at small sizes;
// divide-and-conquer wins for larger problems.
constexpr Eigen::Index kJacobiCutoff = 32;

void economy_svd(const Dense& x, EigenMatrix& u, Eigen::VectorXd& s, EigenMatrix& v) {
    const EigenMatrix m = to_eigen(x);
    if (std::min(m.rows(), m.cols()) <= kJacobiCutoff) {
        Eigen::JacobiSVD<EigenMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = dec.matrixU();
        s = dec.singularValues();
        v = dec.matrixV();
    } else {
        Eigen::BDCSVD<EigenMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = dec.matrixU();
        s = dec.singularValues();
        v = dec.matrixV();
    }
}

// Deterministic orientation: make the largest-magnitude entry of each left
// singular vector non-negative (first such entry on magnitude ties), flipping
// the paired right singular vector along with it.
void orient_pairs(EigenMatrix& u, EigenMatrix& v) {
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double mag = std::fabs(u(i, k));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (u(arg, k) < 0.0) {
            u.col(k) = -u.col(k);
            if (k < v.cols()) {
                v.col(k) = -v.col(k);
            }
        }
    }
}

Eigen::VectorXd singular_values_only(const Dense& x) {
    const EigenMatrix m = to_eigen(x);
    if (std::min(m.rows(), m.cols()) <= kJacobiCutoff) {
        return Eigen::JacobiSVD<EigenMatrix>(m).singularValues();
    }
    return Eigen::BDCSVD<EigenMatrix>(m).singularValues();
}

void require_basis(const Dense& q, const char* where) {
    if (q.cols() == 0 || q.rows() < q.cols()) {
        throw DimensionError(std::string(where) + ": basis must be tall with at least one column");
    }
    if (!has_orthonormal_columns(q)) {
        throw InvariantViolationError(std::string(where) + ": columns are not orthonormal");
    }
}

double clamp01(double c) { return std::min(1.0, std::max(0.0, c)); }

Dense scale_columns(const Dense& m, const std::vector<double>& d) {
    Dense out = m;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out(i, j) *= d[j];
        }
    }
    return out;
}

} // namespace

SvdResult svd(const Dense& x) {
    if (x.empty()) {
        throw DimensionError("svd: empty matrix");
    }
    EigenMatrix u, v;
    Eigen::VectorXd s;
    economy_svd(x, u, s, v);
    orient_pairs(u, v);
    SvdResult out;
    out.u = from_eigen(u);
    out.v = from_eigen(v);
    out.s.assign(s.data(), s.data() + s.size());
    return out;
}

ThinSvd thin_svd(const Dense& x, std::size_t r) {
    const std::size_t kmax = std::min(x.rows(), x.cols());
    if (r == 0 || r > kmax) {
        throw DimensionError("thin_svd: rank out of range");
    }
    SvdResult full = svd(x);
    ThinSvd out;
    out.u = Dense(x.rows(), r);
    out.v = Dense(x.cols(), r);
    out.s.assign(full.s.begin(), full.s.begin() + static_cast<std::ptrdiff_t>(r));
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < r; ++k) {
            out.u(i, k) = full.u(i, k);
        }
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t k = 0; k < r; ++k) {
            out.v(j, k) = full.v(j, k);
        }
    }
    return out;
}

double nuclear_norm(const Dense& x) {
    if (x.empty()) {
        return 0.0;
    }
    return singular_values_only(x).sum();
}

double operator_norm(const Dense& x) {
    if (x.empty()) {
        return 0.0;
    }
    const Eigen::VectorXd s = singular_values_only(x);
    return s.size() > 0 ? s(0) : 0.0;
}

bool has_orthonormal_columns(const Dense& q, double tol) {
    const Dense gram = kernels::matmul_tn(q, q);
    for (std::size_t i = 0; i < gram.rows(); ++i) {
        for (std::size_t j = 0; j < gram.cols(); ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::fabs(gram(i, j) - want) > tol) {
                return false;
            }
        }
    }
    return true;
}

Dense project_tangent(const TangentSpace& t, const Dense& x) {
    if (t.u.rows() != x.rows() || t.v.rows() != x.cols()) {
        throw DimensionError("project_tangent: operand shapes disagree");
    }
    // u u^T x + (x - u u^T x) v v^T
    const Dense utx = kernels::matmul_tn(t.u, x);       // r x n
    const Dense col_part = kernels::matmul_nn(t.u, utx); // m x n
    const Dense rest = kernels::difference(x, col_part);
    const Dense rv = kernels::matmul_nn(rest, t.v);      // m x r
    const Dense row_part = kernels::matmul_nt(rv, t.v);  // m x n
    return kernels::sum(col_part, row_part);
}

Dense project_tangent_perp(const TangentSpace& t, const Dense& x) {
    return kernels::difference(x, project_tangent(t, x));
}

double LeverageProfile::max_mu() const {
    double best = 0.0;
    for (double v : mu) {
        best = std::max(best, v);
    }
    return best;
}

double LeverageProfile::max_nu() const {
    double best = 0.0;
    for (double v : nu) {
        best = std::max(best, v);
    }
    return best;
}

LeverageProfile leverage_scores(const ThinSvd& f) { return leverage_scores(f.u, f.v); }

LeverageProfile leverage_scores(const Dense& u, const Dense& v) {
    require_basis(u, "leverage_scores");
    require_basis(v, "leverage_scores");
    if (u.cols() != v.cols()) {
        throw DimensionError("leverage_scores: bases have different widths");
    }
    LeverageProfile p;
    p.r = u.cols();
    const double m = static_cast<double>(u.rows());
    const double n = static_cast<double>(v.rows());
    const double r = static_cast<double>(p.r);
    p.mu.resize(u.rows());
    for (std::size_t i = 0; i < u.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < u.cols(); ++k) {
            acc += u(i, k) * u(i, k);
        }
        p.mu[i] = (m / r) * acc;
    }
    p.nu.resize(v.rows());
    for (std::size_t j = 0; j < v.rows(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < v.cols(); ++k) {
            acc += v(j, k) * v(j, k);
        }
        p.nu[j] = (n / r) * acc;
    }
    return p;
}

double coherence(const LeverageProfile& p) {
    return std::max(p.max_mu(), p.max_nu());
}

double mu_inf_norm(const Dense& x, const LeverageProfile& p) {
    if (x.rows() != p.mu.size() || x.cols() != p.nu.size()) {
        throw DimensionError("mu_inf_norm: matrix does not match profile");
    }
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(x.cols());
    const double r = static_cast<double>(p.r);
    double best = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double v = std::fabs(x(i, j));
            if (p.mu[i] <= 0.0 || p.nu[j] <= 0.0) {
                if (v != 0.0) {
                    throw UndefinedWeightError(
                        "mu_inf_norm: nonzero entry on a zero-leverage row or column");
                }
                continue;
            }
            const double w = std::sqrt(m / (p.mu[i] * r)) * std::sqrt(n / (p.nu[j] * r));
            best = std::max(best, v * w);
        }
    }
    return best;
}

double mu_inf2_norm(const Dense& x, const LeverageProfile& p) {
    if (x.rows() != p.mu.size() || x.cols() != p.nu.size()) {
        throw DimensionError("mu_inf2_norm: matrix does not match profile");
    }
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(x.cols());
    const double r = static_cast<double>(p.r);
    double best = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            acc += x(i, j) * x(i, j);
        }
        const double norm = std::sqrt(acc);
        if (p.mu[i] <= 0.0) {
            if (norm != 0.0) {
                throw UndefinedWeightError("mu_inf2_norm: nonzero row with zero leverage");
            }
            continue;
        }
        best = std::max(best, norm * std::sqrt(m / (p.mu[i] * r)));
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            acc += x(i, j) * x(i, j);
        }
        const double norm = std::sqrt(acc);
        if (p.nu[j] <= 0.0) {
            if (norm != 0.0) {
                throw UndefinedWeightError("mu_inf2_norm: nonzero column with zero leverage");
            }
            continue;
        }
        best = std::max(best, norm * std::sqrt(n / (p.nu[j] * r)));
    }
    return best;
}

namespace {

// SVD of the r x r alignment matrix q1^T q2 gives the aligned bases and the
// cosines of the principal angles between span(q1) and span(q2).
struct Alignment {
    Dense left;              // L: left singular vectors of q1^T q2
    Dense right;             // R: right singular vectors
    std::vector<double> cos; // clamped to [0, 1], descending
    std::vector<double> sin; // sqrt(1 - cos^2), ascending
    std::vector<double> angle;
};

Alignment align(const Dense& q1, const Dense& q2, const char* where) {
    require_basis(q1, where);
    require_basis(q2, where);
    if (q1.cols() != q2.cols()) {
        throw DimensionError(std::string(where) + ": subspace dimensions differ");
    }
    if (q1.rows() != q2.rows()) {
        throw DimensionError(std::string(where) + ": ambient dimensions differ");
    }
    const Dense cross = kernels::matmul_tn(q1, q2);
    SvdResult dec = svd(cross);
    Alignment out;
    out.left = dec.u;
    out.right = dec.v;
    out.cos.resize(dec.s.size());
    out.sin.resize(dec.s.size());
    out.angle.resize(dec.s.size());
    for (std::size_t k = 0; k < dec.s.size(); ++k) {
        const double c = clamp01(dec.s[k]);
        out.cos[k] = c;
        out.sin[k] = std::sqrt(std::max(0.0, 1.0 - c * c));
        out.angle[k] = std::acos(c);
    }
    return out;
}

// a_xy = L_1 diag(d1) L^T R diag(d2) R_2^T with the aligned middle factor.
Dense angle_block(const Dense& l1, const std::vector<double>& d1, const Dense& middle,
                  const std::vector<double>& d2, const Dense& r2) {
    const Dense a = scale_columns(l1, d1);            // L_1 diag(d1)
    const Dense b = scale_columns(r2, d2);            // R_2 diag(d2)
    const Dense am = kernels::matmul_nn(a, middle);   // L_1 diag(d1) middle
    return kernels::matmul_nt(am, b);                 // ... diag(d2) R_2^T
}

} // namespace

PrincipalAngleDecomposition principal_angles(const Dense& u, const Dense& u_tilde) {
    Alignment col = align(u, u_tilde, "principal_angles");
    PrincipalAngleDecomposition out;
    out.r = u.cols();
    out.two_sided = false;
    out.gamma = col.angle;
    out.eta = col.angle;
    // With the row side aligned to the column side the middle factor is the
    // identity and every block is L diag(f(gamma)) diag(g(gamma)) L^T.
    const Dense middle = Dense::identity(out.r);
    out.a_cc = angle_block(col.left, col.cos, middle, col.cos, col.left);
    out.a_cs = angle_block(col.left, col.cos, middle, col.sin, col.left);
    out.a_sc = angle_block(col.left, col.sin, middle, col.cos, col.left);
    out.a_ss = angle_block(col.left, col.sin, middle, col.sin, col.left);
    return out;
}

PrincipalAngleDecomposition principal_angles(const Dense& u, const Dense& u_tilde,
                                             const Dense& v, const Dense& v_tilde) {
    Alignment col = align(u, u_tilde, "principal_angles");
    Alignment row = align(v, v_tilde, "principal_angles");
    if (col.cos.size() != row.cos.size()) {
        throw DimensionError("principal_angles: column and row subspace dimensions differ");
    }
    PrincipalAngleDecomposition out;
    out.r = u.cols();
    out.two_sided = true;
    out.gamma = col.angle;
    out.eta = row.angle;
    const Dense middle = kernels::matmul_tn(col.right, row.right); // R_L^T R_R
    out.a_cc = angle_block(col.left, col.cos, middle, row.cos, row.left);
    out.a_cs = angle_block(col.left, col.cos, middle, row.sin, row.left);
    out.a_sc = angle_block(col.left, col.sin, middle, row.cos, row.left);
    out.a_ss = angle_block(col.left, col.sin, middle, row.sin, row.left);
    return out;
}

Dense complete_basis(const Dense& u) {
    require_basis(u, "complete_basis");
    const EigenMatrix m = to_eigen(u);
    Eigen::HouseholderQR<EigenMatrix> qr(m);
    EigenMatrix q = qr.householderQ();
    // Re-orient so the leading r columns reproduce span(u) with a positive
    // projection onto the original basis (keeps the output deterministic).
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(u.cols()); ++k) {
        if (q.col(k).dot(m.col(k)) < 0.0) {
            q.col(k) = -q.col(k);
        }
    }
    return from_eigen(q);
}

} // namespace corrmc

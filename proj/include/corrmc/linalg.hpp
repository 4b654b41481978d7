#pragma once

#include <cstddef>
#include <vector>

#include "corrmc/dense.hpp"

namespace corrmc {

/// Economy singular value decomposition X = U diag(S) V^T with
/// min(rows, cols) singular triplets, singular values sorted descending.
///
/// Sign convention for determinism: in every left singular vector the entry
/// of largest magnitude (lowest index on ties) is made non-negative, and the
/// matching right singular vector is flipped together with it.
struct SvdResult {
    Dense u;               ///< rows x k, orthonormal columns
    std::vector<double> s; ///< k singular values, descending
    Dense v;               ///< cols x k, orthonormal columns
};

SvdResult svd(const Dense& x);

/// Leading r singular triplets of a matrix (same conventions as SvdResult).
struct ThinSvd {
    Dense u;               ///< rows x r
    std::vector<double> s; ///< r leading singular values
    Dense v;               ///< cols x r
    std::size_t rank() const noexcept { return s.size(); }
};

ThinSvd thin_svd(const Dense& x, std::size_t r);

/// Nuclear norm (sum of singular values).
double nuclear_norm(const Dense& x);

/// Spectral norm (largest singular value).
double operator_norm(const Dense& x);

/// True when the columns of q are orthonormal to within tol.
bool has_orthonormal_columns(const Dense& q, double tol = 1e-10);

/// Tangent space of the rank-r manifold at a point with column space
/// span(u) and row space span(v); u and v must have orthonormal columns.
struct TangentSpace {
    Dense u; ///< m x r orthonormal basis of the column space
    Dense v; ///< n x r orthonormal basis of the row space

    static TangentSpace from_svd(const ThinSvd& f) { return TangentSpace{f.u, f.v}; }
};

/// P_T(x) = u u^T x + x v v^T - u u^T x v v^T.
Dense project_tangent(const TangentSpace& t, const Dense& x);

/// P_T_perp(x) = x - P_T(x), computed as (I - u u^T) x (I - v v^T).
Dense project_tangent_perp(const TangentSpace& t, const Dense& x);

/// Row and column leverage scores of a subspace pair, normalized so a fully
/// incoherent ("flat") subspace has all scores equal to 1:
///   mu[i] = (m / r) * ||u^T e_i||^2,   nu[j] = (n / r) * ||v^T e_j||^2.
struct LeverageProfile {
    std::vector<double> mu; ///< per-row scores, length m
    std::vector<double> nu; ///< per-column scores, length n
    std::size_t r = 0;      ///< subspace dimension

    double max_mu() const;
    double max_nu() const;
};

LeverageProfile leverage_scores(const ThinSvd& f);
LeverageProfile leverage_scores(const Dense& u, const Dense& v);

/// Coherence: the largest leverage score across rows and columns.
double coherence(const LeverageProfile& p);

/// Leverage-weighted max-entry norm:
///   max_{i,j} sqrt(m / (mu[i] r)) * |x[i,j]| * sqrt(n / (nu[j] r)),
/// i.e. the smallest c such that
///   |x[i,j]| <= c * sqrt(mu[i] r / m) * sqrt(nu[j] r / n)   everywhere.
/// Rows (columns) with zero leverage must carry no mass; otherwise the
/// weight would be infinite and UndefinedWeightError is thrown.
double mu_inf_norm(const Dense& x, const LeverageProfile& p);

/// Leverage-weighted max row/column Euclidean norm: the smallest c with
///   ||x^T e_i|| <= c * sqrt(mu[i] r / m)  for every row i, and
///   ||x e_j||   <= c * sqrt(nu[j] r / n)  for every column j.
/// Zero-leverage rows/columns must carry no mass, else UndefinedWeightError.
double mu_inf2_norm(const Dense& x, const LeverageProfile& p);

/// Principal angles between subspaces, together with the aligned bases and
/// the cross-operator blocks used by the closed-form quality expressions.
///
/// One-sided form (column spaces only): gamma[k] are the angles between
/// span(u) and span(u_tilde), and the row-side data duplicates the column
/// side so that two-sided consumers degrade gracefully.
///
/// Two-sided form: gamma[k] are column-space angles, eta[k] row-space angles.
///
/// Blocks: with aligned bases (l_left, l_right) for the reference pair and
/// the prior pair split into tangent-aligned and orthogonal parts, the
/// cross operator a = l_left^T phi r_right decomposes into
///   a_cc (r x r), a_cs, a_sc, a_ss
/// for phi = u_tilde v_tilde^T expressed in the aligned frames; see the
/// quality-report functions for how these enter alpha_1, alpha_2, alpha_3.
struct PrincipalAngleDecomposition {
    std::vector<double> gamma; ///< column-space angles, ascending, in [0, pi/2]
    std::vector<double> eta;   ///< row-space angles (== gamma when one-sided)
    Dense a_cc;                ///< r x r tangent/tangent block
    Dense a_cs;                ///< r x r tangent/orthogonal block (row side)
    Dense a_sc;                ///< r x r orthogonal/tangent block (column side)
    Dense a_ss;                ///< r x r orthogonal/orthogonal block
    bool two_sided = false;
    std::size_t r = 0;
};

PrincipalAngleDecomposition principal_angles(const Dense& u, const Dense& u_tilde);
PrincipalAngleDecomposition principal_angles(const Dense& u, const Dense& u_tilde,
                                             const Dense& v, const Dense& v_tilde);

/// An n x n orthogonal matrix whose first r columns span the same space as
/// the columns of u (u must be n x r with orthonormal columns).
Dense complete_basis(const Dense& u);

} // namespace corrmc

#pragma once

#include "tdsyn/matrix.hpp"

#include <vector>

namespace tdsyn {

struct JordanOptions {
  double cluster_tol = 1e-6;       // relative eigenvalue clustering distance
  double conditioning_cap = 1e8;   // reject transforms worse conditioned than this
  double inverse_tol = 1e-6;       // cap on ||T T^-1 - I||_inf
};

struct EigenvalueGroup {
  double re = 0.0;     // representative real part (cluster mean)
  double im = 0.0;     // representative |imaginary| part, 0 for all-real groups
  Index start = 0;     // first basis index of the group
  Index size = 0;      // r_j
};

/// Similarity A = T * block_form * T^-1 with block_form block-diagonal, one
/// block per clustered eigenvalue group. Groups are ordered by descending
/// real part. Exact Jordan chains are not computed; each group block is a
/// quasi-triangular matrix carrying the group's eigenvalues.
struct RealJordanForm {
  Mat transform;                       // T
  Mat transform_inv;                   // T^-1
  Mat block_form;                      // T^-1 A T
  std::vector<EigenvalueGroup> groups;
  double conditioning = 1.0;           // 2-norm condition estimate of T

  Index dim() const { return transform.rows(); }
  std::size_t group_count() const { return groups.size(); }

  /// J_j: the r_j-by-n selector [0 I 0] of group j.
  Mat group_selector(std::size_t j) const;

  /// Diagonal block j of block_form.
  Mat group_block(std::size_t j) const;

  /// Trivial structure: T = I and a single group of size n. The fallback when
  /// the decomposition is rejected for conditioning.
  static RealJordanForm identity(const Mat& a);
};

/// Clustered real block-diagonalization via Schur form, eigenvalue
/// clustering, orthogonal block reordering and Sylvester elimination of the
/// cross-group coupling. Throws Errc::FailsDecomposition when the transform
/// conditioning exceeds the configured cap.
RealJordanForm real_jordan_form(const Mat& a, const JordanOptions& opts = {});

}  // namespace tdsyn

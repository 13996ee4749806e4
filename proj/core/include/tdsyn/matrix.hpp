#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace tdsyn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Errc {
  DimensionMismatch,
  ShapeMismatch,
  FailsDecomposition,
  SolverFailure,
  NotStableAtZero,
  NotStabilizable,
  InfeasibleAtDelay,
  NoProgress,
  UnstableAtZero,
  NoConvergence,
  ConfigInvalid,
};

/// Library error with a machine-readable condition code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

const char* errc_name(Errc code);

/// He(A) = A + A^T
inline Mat he(const Mat& a) { return a + a.transpose(); }

/// Rows [first, first + count) of the identity of size `total`:
/// a count-by-total matrix [0 I 0].
Mat selector(Index first, Index count, Index total);

/// Concatenates a grid of blocks into one matrix. Empty (0x0) entries are
/// zero blocks whose dimensions are inferred from their row and column.
/// Throws Errc::DimensionMismatch on inconsistent or underdetermined layouts.
Mat block_assemble(const std::vector<std::vector<Mat>>& grid);

/// diag(blocks...), empty blocks not allowed.
Mat block_diag(const std::vector<Mat>& blocks);

bool all_finite(const Mat& m);

/// Largest real part over the spectrum of a (the matrix spectral abscissa).
double matrix_abscissa(const Mat& a);

/// max |eigenvalue| of a symmetric matrix (symmetrized if slightly off).
double sym_eig_max(const Mat& a);
double sym_eig_min(const Mat& a);

}  // namespace tdsyn

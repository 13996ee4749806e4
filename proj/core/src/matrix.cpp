#include "tdsyn/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace tdsyn {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DIMENSION_MISMATCH";
    case Errc::ShapeMismatch: return "SHAPE_MISMATCH";
    case Errc::FailsDecomposition: return "FAILS_DECOMPOSITION";
    case Errc::SolverFailure: return "SOLVER_FAILURE";
    case Errc::NotStableAtZero: return "NOT_STABLE_AT_ZERO";
    case Errc::NotStabilizable: return "NOT_STABILIZABLE";
    case Errc::InfeasibleAtDelay: return "INFEASIBLE_AT_H";
    case Errc::NoProgress: return "NO_PROGRESS";
    case Errc::UnstableAtZero: return "UNSTABLE_AT_ZERO";
    case Errc::NoConvergence: return "NO_CONVERGENCE";
    case Errc::ConfigInvalid: return "CONFIG_INVALID";
  }
  return "UNKNOWN";
}

Mat selector(Index first, Index count, Index total) {
  if (first < 0 || count < 0 || first + count > total)
    throw Error(Errc::DimensionMismatch, "selector: range [" + std::to_string(first) + ", " +
                                             std::to_string(first + count) + ") outside 0.." +
                                             std::to_string(total));
  Mat s = Mat::Zero(count, total);
  s.block(0, first, count, count).setIdentity();
  return s;
}

Mat block_assemble(const std::vector<std::vector<Mat>>& grid) {
  const std::size_t nrows = grid.size();
  if (nrows == 0) return Mat(0, 0);
  const std::size_t ncols = grid.front().size();
  for (const auto& row : grid)
    if (row.size() != ncols)
      throw Error(Errc::DimensionMismatch, "block_assemble: ragged grid");

  // Infer row heights and column widths; empty (0x0) entries are wildcards.
  std::vector<Index> heights(nrows, -1), widths(ncols, -1);
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      const Mat& b = grid[i][j];
      if (b.size() == 0) continue;
      if (heights[i] == -1)
        heights[i] = b.rows();
      else if (heights[i] != b.rows())
        throw Error(Errc::DimensionMismatch, "block_assemble: row " + std::to_string(i) +
                                                 " has blocks of differing heights");
      if (widths[j] == -1)
        widths[j] = b.cols();
      else if (widths[j] != b.cols())
        throw Error(Errc::DimensionMismatch, "block_assemble: column " + std::to_string(j) +
                                                 " has blocks of differing widths");
    }
  }
  for (std::size_t i = 0; i < nrows; ++i)
    if (heights[i] == -1)
      throw Error(Errc::DimensionMismatch,
                  "block_assemble: row " + std::to_string(i) + " is all zero blocks; height unknown");
  for (std::size_t j = 0; j < ncols; ++j)
    if (widths[j] == -1)
      throw Error(Errc::DimensionMismatch,
                  "block_assemble: column " + std::to_string(j) + " is all zero blocks; width unknown");

  Index total_rows = 0, total_cols = 0;
  for (Index hgt : heights) total_rows += hgt;
  for (Index wid : widths) total_cols += wid;

  Mat out = Mat::Zero(total_rows, total_cols);
  Index r0 = 0;
  for (std::size_t i = 0; i < nrows; ++i) {
    Index c0 = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      const Mat& b = grid[i][j];
      if (b.size() != 0) out.block(r0, c0, heights[i], widths[j]) = b;
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

Mat block_diag(const std::vector<Mat>& blocks) {
  Index rows = 0, cols = 0;
  for (const Mat& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Index r0 = 0, c0 = 0;
  for (const Mat& b : blocks) {
    out.block(r0, c0, b.rows(), b.cols()) = b;
    r0 += b.rows();
    c0 += b.cols();
  }
  return out;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

double matrix_abscissa(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

double sym_eig_max(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double sym_eig_min(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace tdsyn

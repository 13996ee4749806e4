#pragma once

#include "tdsyn/matrix.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tdsyn {

enum class VarStructure { Full, Symmetric, BlockDiagonal, Scalar };

/// A named matrix decision variable.
struct DecisionVar {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  VarStructure structure = VarStructure::Full;
  // (offset, size) diagonal blocks for BlockDiagonal; must tile [0, rows).
  std::vector<std::pair<Index, Index>> blocks;

  Index scalar_count() const;
};

using VarId = std::size_t;

/// One affine term: left * op(X) * right, optionally wrapped in He().
/// For Scalar variables the term is x * (left * right).
struct AffineTerm {
  Mat left;
  VarId var = 0;
  Mat right;
  bool transpose_var = false;
  bool symmetrize = false;
};

/// Symmetric-matrix-valued affine function of the decision variables.
class AffineMatrixExpr {
 public:
  AffineMatrixExpr() = default;
  explicit AffineMatrixExpr(Mat constant) : constant_(std::move(constant)) {}
  static AffineMatrixExpr zero(Index dim) { return AffineMatrixExpr(Mat::Zero(dim, dim)); }

  Index dim() const { return constant_.rows(); }
  const Mat& constant() const { return constant_; }
  Mat& constant() { return constant_; }
  const std::vector<AffineTerm>& terms() const { return terms_; }

  void add_term(Mat left, VarId var, Mat right, bool transpose_var = false, bool symmetrize = false);
  void add_constant(const Mat& c);

  /// Congruence p^T (*this) p.
  AffineMatrixExpr congruence(const Mat& p) const;

 private:
  Mat constant_;
  std::vector<AffineTerm> terms_;
};

using Assignment = std::map<std::string, Mat>;

/// Constraint sense against the margined cone.
enum class Sense {
  NegDefinite,  // expr <= -delta I
  PosDefinite,  // expr >= +delta I
};

struct Constraint {
  AffineMatrixExpr expr;
  Sense sense = Sense::NegDefinite;
  double delta = 0.0;
  std::string label;
};

/// A semidefinite feasibility problem over named matrix variables. Strict
/// definiteness is encoded through per-constraint margins delta, computed as
/// delta_scale * (1 + ||constant||_F) unless overridden.
class SdpProblem {
 public:
  VarId add_variable(DecisionVar var);
  VarId scalar_variable(const std::string& name);
  VarId symmetric_variable(const std::string& name, Index n);
  VarId full_variable(const std::string& name, Index rows, Index cols);
  VarId block_diagonal_variable(const std::string& name, Index n,
                                std::vector<std::pair<Index, Index>> blocks);

  void add_constraint(AffineMatrixExpr expr, Sense sense, std::string label = {},
                      std::optional<double> delta = {});

  const std::vector<DecisionVar>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const DecisionVar& variable(VarId id) const { return vars_.at(id); }
  std::optional<VarId> find_variable(const std::string& name) const;

  double delta_scale = 1e-7;

  /// Number of scalar unknowns across all variables.
  Index scalar_count() const;

  /// Evaluates an expression under an assignment (all referenced variables
  /// present with matching shapes, else Errc::ShapeMismatch).
  Mat evaluate(const AffineMatrixExpr& expr, const Assignment& assignment) const;

  /// Max eigenvalue excess over all constraints at the assignment; zero means
  /// every margined constraint holds exactly.
  double constraint_violation(const Assignment& assignment) const;

 private:
  std::vector<DecisionVar> vars_;
  std::vector<Constraint> constraints_;
};

}  // namespace tdsyn

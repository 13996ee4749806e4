#include "tdsyn/lmi.hpp"

#include <cmath>

namespace tdsyn {

Index DecisionVar::scalar_count() const {
  switch (structure) {
    case VarStructure::Scalar: return 1;
    case VarStructure::Full: return rows * cols;
    case VarStructure::Symmetric: return rows * (rows + 1) / 2;
    case VarStructure::BlockDiagonal: {
      Index n = 0;
      for (const auto& [off, size] : blocks) n += size * size;
      return n;
    }
  }
  return 0;
}

void AffineMatrixExpr::add_term(Mat left, VarId var, Mat right, bool transpose_var, bool symmetrize) {
  if (left.rows() != dim() || right.cols() != dim())
    throw Error(Errc::ShapeMismatch, "add_term: term does not match expression dimension");
  terms_.push_back({std::move(left), var, std::move(right), transpose_var, symmetrize});
}

void AffineMatrixExpr::add_constant(const Mat& c) {
  if (c.rows() != dim() || c.cols() != dim())
    throw Error(Errc::ShapeMismatch, "add_constant: dimension mismatch");
  constant_ += c;
}

AffineMatrixExpr AffineMatrixExpr::congruence(const Mat& p) const {
  if (p.rows() != dim()) throw Error(Errc::ShapeMismatch, "congruence: p rows must match expr dim");
  AffineMatrixExpr out(p.transpose() * constant_ * p);
  for (const auto& t : terms_) {
    AffineTerm nt = t;
    nt.left = p.transpose() * t.left;
    nt.right = t.right * p;
    out.terms_.push_back(std::move(nt));
  }
  return out;
}

VarId SdpProblem::add_variable(DecisionVar var) {
  if (var.rows <= 0 || var.cols <= 0)
    throw Error(Errc::ShapeMismatch, "variable '" + var.name + "' has non-positive shape");
  if (var.structure == VarStructure::Symmetric && var.rows != var.cols)
    throw Error(Errc::ShapeMismatch, "symmetric variable '" + var.name + "' must be square");
  if (var.structure == VarStructure::Scalar && (var.rows != 1 || var.cols != 1))
    throw Error(Errc::ShapeMismatch, "scalar variable '" + var.name + "' must be 1x1");
  if (var.structure == VarStructure::BlockDiagonal) {
    if (var.rows != var.cols)
      throw Error(Errc::ShapeMismatch, "block-diagonal variable '" + var.name + "' must be square");
    Index covered = 0;
    for (const auto& [off, size] : var.blocks) {
      if (off != covered || size <= 0)
        throw Error(Errc::ShapeMismatch, "variable '" + var.name + "': blocks must tile the shape in order");
      covered += size;
    }
    if (covered != var.rows)
      throw Error(Errc::ShapeMismatch, "variable '" + var.name + "': blocks do not cover the shape");
  }
  for (const auto& v : vars_)
    if (v.name == var.name)
      throw Error(Errc::ShapeMismatch, "duplicate variable name '" + var.name + "'");
  vars_.push_back(std::move(var));
  return vars_.size() - 1;
}

VarId SdpProblem::scalar_variable(const std::string& name) {
  return add_variable({name, 1, 1, VarStructure::Scalar, {}});
}

VarId SdpProblem::symmetric_variable(const std::string& name, Index n) {
  return add_variable({name, n, n, VarStructure::Symmetric, {}});
}

VarId SdpProblem::full_variable(const std::string& name, Index rows, Index cols) {
  return add_variable({name, rows, cols, VarStructure::Full, {}});
}

VarId SdpProblem::block_diagonal_variable(const std::string& name, Index n,
                                          std::vector<std::pair<Index, Index>> blocks) {
  return add_variable({name, n, n, VarStructure::BlockDiagonal, std::move(blocks)});
}

void SdpProblem::add_constraint(AffineMatrixExpr expr, Sense sense, std::string label,
                                std::optional<double> delta) {
  for (const auto& t : expr.terms()) {
    if (t.var >= vars_.size())
      throw Error(Errc::ShapeMismatch, "constraint references undeclared variable");
    const DecisionVar& v = vars_[t.var];
    const Index vr = t.transpose_var ? v.cols : v.rows;
    const Index vc = t.transpose_var ? v.rows : v.cols;
    if (v.structure == VarStructure::Scalar) {
      if (t.left.cols() != t.right.rows())
        throw Error(Errc::ShapeMismatch, "scalar term: left/right dimensions incompatible");
    } else if (t.left.cols() != vr || t.right.rows() != vc) {
      throw Error(Errc::ShapeMismatch, "term coefficients do not match variable '" + v.name + "'");
    }
  }
  const double d = delta ? *delta : delta_scale * (1.0 + expr.constant().norm());
  if (d <= 0.0) throw Error(Errc::ShapeMismatch, "constraint margin must be positive");
  constraints_.push_back({std::move(expr), sense, d, std::move(label)});
}

std::optional<VarId> SdpProblem::find_variable(const std::string& name) const {
  for (VarId i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  return std::nullopt;
}

Index SdpProblem::scalar_count() const {
  Index n = 0;
  for (const auto& v : vars_) n += v.scalar_count();
  return n;
}

Mat SdpProblem::evaluate(const AffineMatrixExpr& expr, const Assignment& assignment) const {
  Mat acc = expr.constant();
  for (const auto& t : expr.terms()) {
    const DecisionVar& v = vars_.at(t.var);
    auto it = assignment.find(v.name);
    if (it == assignment.end())
      throw Error(Errc::ShapeMismatch, "assignment missing variable '" + v.name + "'");
    const Mat& val = it->second;
    if (val.rows() != v.rows || val.cols() != v.cols)
      throw Error(Errc::ShapeMismatch, "assignment for '" + v.name + "' has wrong shape");
    Mat contrib;
    if (v.structure == VarStructure::Scalar) {
      contrib = val(0, 0) * (t.left * t.right);
    } else if (t.transpose_var) {
      contrib = t.left * val.transpose() * t.right;
    } else {
      contrib = t.left * val * t.right;
    }
    if (t.symmetrize) contrib = contrib + contrib.transpose().eval();
    acc += contrib;
  }
  return acc;
}

double SdpProblem::constraint_violation(const Assignment& assignment) const {
  double worst = 0.0;
  for (const auto& c : constraints_) {
    const Mat val = evaluate(c.expr, assignment);
    const double excess = c.sense == Sense::NegDefinite ? sym_eig_max(val) + c.delta
                                                        : c.delta - sym_eig_min(val);
    worst = std::max(worst, excess);
  }
  return worst;
}

}  // namespace tdsyn

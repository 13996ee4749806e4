#include "tdsyn/slack.hpp"

namespace tdsyn {

namespace {

Mat synthesis_m_row(const RealJordanForm& jordan, const Mat& a, const Mat& b, const Mat& k_prev,
                    const Mat& c, Index slot_count, const std::optional<Mat>& a1) {
  const Index n = a.rows();
  if (slot_count < 3) throw Error(Errc::DimensionMismatch, "synthesis row needs >= 3 slots");
  Mat delayed = b * k_prev * c;
  if (a1) delayed += *a1;
  Mat m = Mat::Zero(n, n * slot_count);
  m.leftCols(n).setIdentity();
  m.middleCols(n, n) = -jordan.transform_inv * a * jordan.transform;
  m.middleCols(2 * n, n) = -jordan.transform_inv * delayed * jordan.transform;
  return m;
}

}  // namespace

std::vector<double> epsilon_unstructured(const std::vector<Mat>& blocks, const Mat& base) {
  if (base.rows() != base.cols())
    throw Error(Errc::DimensionMismatch, "epsilon_unstructured: base must be square");
  const double denom = base.cwiseProduct(base).sum();  // tr(base base^T)
  if (!(denom > 0.0))
    throw Error(Errc::DimensionMismatch, "epsilon_unstructured: base must be non-singular");
  std::vector<double> eps;
  eps.reserve(blocks.size());
  for (const Mat& blk : blocks) {
    if (blk.rows() != base.rows() || blk.cols() != base.cols())
      throw Error(Errc::DimensionMismatch, "epsilon_unstructured: block shape mismatch");
    eps.push_back(base.cwiseProduct(blk).sum() / denom);  // tr(base A^T)/tr(base base^T)
  }
  return eps;
}

EpsilonTable epsilon_structured(const RealJordanForm& jordan, const std::vector<Mat>& blocks_tilde) {
  const Index n = jordan.dim();
  const std::size_t k = jordan.group_count();
  EpsilonTable t;
  t.values = Mat::Zero(static_cast<Index>(blocks_tilde.size()), static_cast<Index>(k));
  for (std::size_t i = 0; i < blocks_tilde.size(); ++i) {
    const Mat& blk = blocks_tilde[i];
    if (blk.rows() != n || blk.cols() != n)
      throw Error(Errc::DimensionMismatch, "epsilon_structured: block shape mismatch");
    for (std::size_t j = 0; j < k; ++j) {
      const auto& g = jordan.groups[j];
      const double tr = blk.block(g.start, g.start, g.size, g.size).trace();
      t.values(static_cast<Index>(i), static_cast<Index>(j)) = tr / static_cast<double>(g.size);
    }
  }
  return t;
}

Mat build_f_eps(const std::vector<double>& eps, const Mat& base) {
  const Index n = base.rows();
  Mat f = Mat::Zero(n, n * static_cast<Index>(eps.size()));
  for (std::size_t i = 0; i < eps.size(); ++i) f.middleCols(static_cast<Index>(i) * n, n) = eps[i] * base;
  return f;
}

Mat build_f_w(const EpsilonTable& table, const RealJordanForm& jordan) {
  const Index n = jordan.dim();
  if (table.group_count() != static_cast<Index>(jordan.group_count()))
    throw Error(Errc::DimensionMismatch, "build_f_w: table/group count mismatch");
  Mat f = Mat::Zero(n, n * table.slot_count());
  for (Index i = 0; i < table.slot_count(); ++i) {
    Mat e = Mat::Zero(n, n);
    for (std::size_t j = 0; j < jordan.group_count(); ++j) {
      const auto& g = jordan.groups[j];
      e.block(g.start, g.start, g.size, g.size) =
          table.values(i, static_cast<Index>(j)) * Mat::Identity(g.size, g.size);
    }
    f.middleCols(i * n, n) = e;
  }
  return f;
}

EpsilonTable synthesis_epsilons(const RealJordanForm& jordan, const Mat& a, const Mat& b,
                                const Mat& k_prev, const Mat& c, Index slot_count,
                                const std::optional<Mat>& a1) {
  const Mat m = synthesis_m_row(jordan, a, b, k_prev, c, slot_count, a1);
  const Index n = a.rows();
  // Blocks of M~ as printed: [I, -A~, -(delayed)~, 0...]; the optimal eps of
  // a zero block is zero, so the closed form applies uniformly.
  std::vector<Mat> blocks;
  blocks.reserve(static_cast<std::size_t>(slot_count));
  for (Index s = 0; s < slot_count; ++s) blocks.push_back(m.middleCols(s * n, n));
  return epsilon_structured(jordan, blocks);
}

double slack_distance(const RealJordanForm& jordan, const Mat& a, const Mat& b, const Mat& k_prev,
                      const Mat& c, Index slot_count, const Mat& f_row,
                      const std::optional<Mat>& a1) {
  const Mat m = synthesis_m_row(jordan, a, b, k_prev, c, slot_count, a1);
  if (f_row.rows() != m.rows() || f_row.cols() != m.cols())
    throw Error(Errc::DimensionMismatch, "slack_distance: F row shape mismatch");
  return (m - f_row).norm();
}

}  // namespace tdsyn

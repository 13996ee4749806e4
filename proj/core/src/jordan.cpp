#include "tdsyn/jordan.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tdsyn {

namespace {

// A diagonal unit of the real Schur form: a 1x1 block or a 2x2 block holding
// a complex-conjugate pair.
struct SchurUnit {
  Index start = 0;
  Index size = 1;
  double re = 0.0;
  double im = 0.0;  // canonical representative, im >= 0
  int cluster = -1;
};

std::vector<SchurUnit> detect_units(const Mat& t) {
  const Index n = t.rows();
  std::vector<SchurUnit> units;
  Index i = 0;
  while (i < n) {
    SchurUnit u;
    u.start = i;
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      u.size = 2;
      const double a = t(i, i), b = t(i, i + 1);
      const double c = t(i + 1, i), d = t(i + 1, i + 1);
      const double mean = 0.5 * (a + d);
      const double disc = mean * mean - (a * d - b * c);
      u.re = mean;
      u.im = disc < 0.0 ? std::sqrt(-disc) : 0.0;
      i += 2;
    } else {
      u.re = t(i, i);
      u.im = 0.0;
      i += 1;
    }
    units.push_back(u);
  }
  return units;
}

// Union-find clustering of units within the relative tolerance.
void cluster_units(std::vector<SchurUnit>& units, double tol) {
  const std::size_t m = units.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  double scale = 1.0;
  for (const auto& u : units) scale = std::max(scale, std::hypot(u.re, u.im));
  const double dist_tol = tol * scale;

  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (std::hypot(units[a].re - units[b].re, units[a].im - units[b].im) <= dist_tol)
        parent[find(a)] = find(b);

  // Order clusters by descending real part of their mean, then ascending |im|.
  std::vector<std::size_t> roots;
  for (std::size_t a = 0; a < m; ++a)
    if (find(a) == a) roots.push_back(a);

  struct ClusterKey {
    double re, im;
    std::size_t root;
  };
  std::vector<ClusterKey> keys;
  for (std::size_t r : roots) {
    double re = 0, im = 0;
    int cnt = 0;
    for (std::size_t a = 0; a < m; ++a)
      if (find(a) == r) {
        re += units[a].re;
        im += units[a].im;
        ++cnt;
      }
    keys.push_back({re / cnt, im / cnt, r});
  }
  std::sort(keys.begin(), keys.end(), [](const ClusterKey& x, const ClusterKey& y) {
    if (x.re != y.re) return x.re > y.re;
    return x.im < y.im;
  });

  for (std::size_t c = 0; c < keys.size(); ++c)
    for (std::size_t a = 0; a < m; ++a)
      if (find(a) == keys[c].root) units[a].cluster = static_cast<int>(c);
}

// Solve A X - X B = C for X (small dense Sylvester via Kronecker form).
Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& c) {
  const Index p = a.rows(), q = b.rows();
  Mat k = Mat::Zero(p * q, p * q);
  // vec(AX) = (I_q kron A) vec(X); vec(XB) = (B^T kron I_p) vec(X)
  for (Index j = 0; j < q; ++j) k.block(j * p, j * p, p, p) += a;
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < q; ++i) k.block(j * p, i * p, p, p) -= b(i, j) * Mat::Identity(p, p);
  Eigen::PartialPivLU<Mat> lu(k);
  Vec rhs(p * q);
  for (Index j = 0; j < q; ++j) rhs.segment(j * p, p) = c.col(j);
  Vec x = lu.solve(rhs);
  if (!x.allFinite())
    throw Error(Errc::FailsDecomposition, "sylvester solve produced non-finite values");
  Mat out(p, q);
  for (Index j = 0; j < q; ++j) out.col(j) = x.segment(j * p, p);
  return out;
}

// Swap two adjacent Schur units (sizes p, q at row r) by an orthogonal
// similarity; updates T and accumulates into U.
void swap_adjacent(Mat& t, Mat& u, Index r, Index p, Index q) {
  const Index na = p + q;
  const Mat t11 = t.block(r, r, p, p);
  const Mat t22 = t.block(r + p, r + p, q, q);
  const Mat t12 = t.block(r, r + p, p, q);

  const Mat x = solve_sylvester(t11, t22, t12);

  Mat g(na, q);
  g.topRows(p) = -x;
  g.bottomRows(q).setIdentity();
  Eigen::HouseholderQR<Mat> qr(g);
  const Mat qfull = qr.householderQ();

  t.block(r, r, na, t.cols() - r).applyOnTheLeft(qfull.transpose());
  t.block(0, r, r + na, na).applyOnTheRight(qfull);
  u.middleCols(r, na).applyOnTheRight(qfull);

  // The (q x p) corner must vanish up to roundoff after a valid swap.
  const double resid = t.block(r + q, r, p, q).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  if (resid > 1e-8 * scale)
    throw Error(Errc::FailsDecomposition, "schur block swap numerically unstable");
  t.block(r + q, r, p, q).setZero();
}

}  // namespace

Mat RealJordanForm::group_selector(std::size_t j) const {
  const auto& g = groups.at(j);
  return selector(g.start, g.size, dim());
}

Mat RealJordanForm::group_block(std::size_t j) const {
  const auto& g = groups.at(j);
  return block_form.block(g.start, g.start, g.size, g.size);
}

RealJordanForm RealJordanForm::identity(const Mat& a) {
  if (a.rows() != a.cols()) throw Error(Errc::DimensionMismatch, "identity structure: square matrix required");
  RealJordanForm f;
  f.transform = Mat::Identity(a.rows(), a.rows());
  f.transform_inv = f.transform;
  f.block_form = a;
  Eigen::EigenSolver<Mat> es(a, false);
  EigenvalueGroup g;
  g.start = 0;
  g.size = a.rows();
  g.re = es.eigenvalues().real().mean();
  g.im = 0.0;
  f.groups = {g};
  f.conditioning = 1.0;
  return f;
}

RealJordanForm real_jordan_form(const Mat& a, const JordanOptions& opts) {
  if (a.rows() != a.cols())
    throw Error(Errc::DimensionMismatch, "real_jordan_form: square matrix required");
  if (!all_finite(a)) throw Error(Errc::DimensionMismatch, "real_jordan_form: non-finite entries");
  if (opts.cluster_tol <= 0.0)
    throw Error(Errc::DimensionMismatch, "real_jordan_form: cluster_tol must be positive");
  const Index n = a.rows();

  Eigen::RealSchur<Mat> schur(a);
  if (schur.info() != Eigen::Success)
    throw Error(Errc::FailsDecomposition, "real Schur decomposition failed");
  Mat t = schur.matrixT();
  Mat u = schur.matrixU();

  auto units = detect_units(t);
  cluster_units(units, opts.cluster_tol);

  // Stable selection sort on cluster index; only adjacent swaps across
  // different clusters are ever performed, so the Sylvester systems stay
  // well separated.
  for (std::size_t target = 0; target < units.size(); ++target) {
    std::size_t best = target;
    for (std::size_t cand = target; cand < units.size(); ++cand)
      if (units[cand].cluster < units[best].cluster) best = cand;
    for (std::size_t k = best; k > target; --k) {
      Index r = units[k - 1].start;
      swap_adjacent(t, u, r, units[k - 1].size, units[k].size);
      std::swap(units[k - 1], units[k]);
      units[k - 1].start = r;
      units[k].start = r + units[k - 1].size;
    }
  }

  // Group boundaries per cluster.
  std::vector<EigenvalueGroup> groups;
  for (std::size_t i = 0; i < units.size();) {
    EigenvalueGroup g;
    g.start = units[i].start;
    const int cl = units[i].cluster;
    double re = 0, im = 0;
    Index sz = 0;
    std::size_t j = i;
    for (; j < units.size() && units[j].cluster == cl; ++j) {
      re += units[j].re * units[j].size;
      im = std::max(im, units[j].im);
      sz += units[j].size;
    }
    g.size = sz;
    g.re = re / static_cast<double>(sz);
    g.im = im;
    groups.push_back(g);
    i = j;
  }

  // Eliminate the coupling between distinct groups with unit upper
  // block-triangular similarities.
  Mat s = Mat::Identity(n, n);
  const std::size_t k = groups.size();
  for (std::size_t j = 1; j < k; ++j) {
    for (std::size_t i = j; i-- > 0;) {
      const auto& gi = groups[i];
      const auto& gj = groups[j];
      const Mat di = t.block(gi.start, gi.start, gi.size, gi.size);
      const Mat dj = t.block(gj.start, gj.start, gj.size, gj.size);
      const Mat cij = t.block(gi.start, gj.start, gi.size, gj.size);
      if (cij.cwiseAbs().maxCoeff() == 0.0) continue;
      const Mat x = solve_sylvester(di, dj, -cij);
      // T <- E^-1 T E and S <- S E with E = I + X at block (i, j).
      Mat e = Mat::Identity(n, n);
      e.block(gi.start, gj.start, gi.size, gj.size) = x;
      Mat einv = Mat::Identity(n, n);
      einv.block(gi.start, gj.start, gi.size, gj.size) = -x;
      t = einv * t * e;
      s = s * e;
    }
  }

  RealJordanForm f;
  f.transform = u * s;
  f.groups = std::move(groups);

  Eigen::JacobiSVD<Mat> svd(f.transform);
  const double smin = svd.singularValues().minCoeff();
  f.conditioning = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                              : std::numeric_limits<double>::infinity();
  if (!(f.conditioning < opts.conditioning_cap))
    throw Error(Errc::FailsDecomposition,
                "transform conditioning " + std::to_string(f.conditioning) + " exceeds cap");

  Eigen::PartialPivLU<Mat> lu(f.transform);
  f.transform_inv = lu.solve(Mat::Identity(n, n));
  const double inv_resid = (f.transform * f.transform_inv - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (inv_resid > opts.inverse_tol)
    throw Error(Errc::FailsDecomposition, "||T T^-1 - I|| = " + std::to_string(inv_resid));

  f.block_form = f.transform_inv * a * f.transform;
  return f;
}

}  // namespace tdsyn

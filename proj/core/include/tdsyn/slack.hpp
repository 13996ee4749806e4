#pragma once

#include "tdsyn/jordan.hpp"

#include <optional>
#include <vector>

namespace tdsyn {

enum class SlackMode { Unstructured, Structured };

/// epsilon table: row per slot i of M = [A_1 ... A_cal_n], column per
/// eigenvalue group j (a single column in unstructured mode).
struct EpsilonTable {
  Mat values;  // cal_n x k

  Index slot_count() const { return values.rows(); }
  Index group_count() const { return values.cols(); }
};

/// Frozen slack multiplier row and its generating data.
struct SlackStructure {
  SlackMode mode = SlackMode::Structured;
  Mat base;            // commuting base (identity unless overridden)
  EpsilonTable table;
  Mat f_row;           // n x n*cal_n
};

/// eps_i = tr(base * A_i^T) / tr(base * base^T); the global minimizer of
/// ||M - F_eps||_F^2 over scalar multiples of the base per slot.
std::vector<double> epsilon_unstructured(const std::vector<Mat>& blocks, const Mat& base);

/// eps_i(j) = tr(J_j A~_i J_j^T) / r_j for blocks expressed in the
/// transformed coordinates of `jordan`.
EpsilonTable epsilon_structured(const RealJordanForm& jordan, const std::vector<Mat>& blocks_tilde);

/// F_eps = [eps_1 base, ..., eps_cal_n base].
Mat build_f_eps(const std::vector<double>& eps, const Mat& base);

/// F_W = [E_1 ... E_cal_n] with E_i = sum_j eps_i(j) J_j^T J_j.
Mat build_f_w(const EpsilonTable& table, const RealJordanForm& jordan);

/// Epsilon table for the synthesis row
///   M~ = [I  -A~  -T^-1 (A1 + B K C) T  0 ... 0]
/// over `slot_count` slots: eps_1(j) = 1, eps_2(j) = -tr(J_j A~ J_j^T)/r_j,
/// eps_3(j) = -tr(J_j T^-1 (A1 + B K C) T J_j^T)/r_j, zero for the rest.
/// A1 is the optional delayed-state matrix of the plant variant.
EpsilonTable synthesis_epsilons(const RealJordanForm& jordan, const Mat& a, const Mat& b,
                                const Mat& k_prev, const Mat& c, Index slot_count,
                                const std::optional<Mat>& a1 = std::nullopt);

/// ||M~ - F_W||_F for the synthesis row above; the per-round diagnostic.
double slack_distance(const RealJordanForm& jordan, const Mat& a, const Mat& b, const Mat& k_prev,
                      const Mat& c, Index slot_count, const Mat& f_row,
                      const std::optional<Mat>& a1 = std::nullopt);

}  // namespace tdsyn

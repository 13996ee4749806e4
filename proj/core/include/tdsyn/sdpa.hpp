#pragma once

#include "tdsyn/lmi.hpp"

#include <string>
#include <vector>

namespace tdsyn {

/// Serializes the margined feasibility problem in the SDPA sparse format
/// (.dat-s): comment lines, mDIM, nBLOCK, block size list (negative size for
/// diagonal blocks), objective row, then 5-tuple entry lines over the upper
/// triangle. Coefficients are printed with 17 significant digits so they
/// round-trip bit-for-bit.
std::string export_sdpa(const SdpProblem& problem);

void write_sdpa(const std::string& path, const SdpProblem& problem);

struct SdpaEntry {
  int mat = 0;  // 0 = F0
  int block = 1;
  int i = 1, j = 1;  // 1-based, i <= j
  double value = 0.0;
};

struct SdpaData {
  int mdim = 0;
  std::vector<int> block_sizes;  // negative = diagonal block
  std::vector<double> objective;
  std::vector<SdpaEntry> entries;
};

/// Parses SDPA sparse text. Accepts the common separators (space, comma,
/// parentheses, braces) in the size and entry lines.
SdpaData parse_sdpa(const std::string& text);

}  // namespace tdsyn

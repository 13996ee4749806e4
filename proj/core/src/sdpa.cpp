#include "tdsyn/sdpa.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tdsyn {

namespace {

// Scalarization mirror of the solver's variable ordering (declaration order,
// row-major within each variable, upper triangle for symmetric ones).
struct BasisEntry {
  Index i, j;
  bool pair;
};

std::vector<BasisEntry> var_basis(const DecisionVar& v) {
  std::vector<BasisEntry> out;
  switch (v.structure) {
    case VarStructure::Scalar:
      out.push_back({0, 0, false});
      break;
    case VarStructure::Full:
      for (Index i = 0; i < v.rows; ++i)
        for (Index j = 0; j < v.cols; ++j) out.push_back({i, j, false});
      break;
    case VarStructure::Symmetric:
      for (Index i = 0; i < v.rows; ++i)
        for (Index j = i; j < v.cols; ++j) out.push_back({i, j, i != j});
      break;
    case VarStructure::BlockDiagonal:
      for (const auto& [off, size] : v.blocks)
        for (Index i = 0; i < size; ++i)
          for (Index j = 0; j < size; ++j) out.push_back({off + i, off + j, false});
      break;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_upper(std::ostringstream& os, int mat, int block, const Mat& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v != 0.0)
        os << mat << ' ' << block << ' ' << (i + 1) << ' ' << (j + 1) << ' ' << fmt(v) << '\n';
    }
}

}  // namespace

std::string export_sdpa(const SdpProblem& problem) {
  std::ostringstream os;
  const auto& vars = problem.variables();
  const auto& cons = problem.constraints();

  os << "\"margined SDP feasibility export (min 0 s.t. sum_i x_i F_i - F0 >= 0)\n";
  Index total = 0;
  for (const auto& v : vars) {
    os << "\"var " << v.name << " shape " << v.rows << "x" << v.cols << " scalars [" << total + 1
       << ".." << total + v.scalar_count() << "]\n";
    total += v.scalar_count();
  }
  os << total << " = mDIM\n";
  os << cons.size() << " = nBLOCK\n";
  for (std::size_t k = 0; k < cons.size(); ++k) os << cons[k].expr.dim() << (k + 1 < cons.size() ? " " : "");
  if (cons.empty()) os << "0";
  os << '\n';
  if (total == 0) {
    os << "0\n";
  } else {
    for (Index i = 0; i < total; ++i) os << "0" << (i + 1 < total ? " " : "");
    os << '\n';
  }

  // Coefficients come from unit-assignment evaluations of each expression, so
  // the file reproduces the canonical problem data exactly.
  Assignment unit;
  for (const auto& v : vars) unit[v.name] = Mat::Zero(v.rows, v.cols);

  for (std::size_t k = 0; k < cons.size(); ++k) {
    const auto& c = cons[k];
    const int blk = static_cast<int>(k) + 1;
    const double sign = c.sense == Sense::NegDefinite ? -1.0 : 1.0;
    const Index d = c.expr.dim();

    // X_blk = sum_i x_i (sign*A_i) - (delta I - sign*C) >= 0
    const Mat f0 = c.delta * Mat::Identity(d, d) - sign * c.expr.constant();
    emit_upper(os, 0, blk, f0);

    int scalar_idx = 1;
    for (const auto& v : vars) {
      for (const BasisEntry& b : var_basis(v)) {
        Mat& val = unit[v.name];
        val(b.i, b.j) = 1.0;
        if (b.pair) val(b.j, b.i) = 1.0;
        const Mat coeff = sign * (problem.evaluate(c.expr, unit) - c.expr.constant());
        val.setZero();
        if (coeff.norm() > 0.0) emit_upper(os, scalar_idx, blk, coeff);
        ++scalar_idx;
      }
    }
  }
  return os.str();
}

void write_sdpa(const std::string& path, const SdpProblem& problem) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::ConfigInvalid, "cannot open '" + path + "' for writing");
  f << export_sdpa(problem);
}

SdpaData parse_sdpa(const std::string& text) {
  SdpaData data;
  std::istringstream in(text);
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '"' || line[0] == '*') continue;
      return line;
    }
    throw Error(Errc::ConfigInvalid, "sdpa: unexpected end of input");
  };
  auto clean = [](std::string s) {
    for (char& c : s)
      if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
    return s;
  };

  data.mdim = std::stoi(next_data_line());
  const int nblock = std::stoi(next_data_line());
  {
    std::istringstream bs(clean(next_data_line()));
    int v;
    while (bs >> v) data.block_sizes.push_back(v);
    if (nblock == 0)
      data.block_sizes.clear();  // placeholder line
    else if (static_cast<int>(data.block_sizes.size()) != nblock)
      throw Error(Errc::ConfigInvalid, "sdpa: block size count mismatch");
  }
  {
    std::istringstream cs(clean(next_data_line()));
    double v;
    while (cs >> v) data.objective.push_back(v);
    if (data.mdim == 0)
      data.objective.clear();  // placeholder line
    else if (static_cast<int>(data.objective.size()) != data.mdim)
      throw Error(Errc::ConfigInvalid, "sdpa: objective length mismatch");
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '"' || line[0] == '*') continue;
    std::istringstream es(clean(line));
    SdpaEntry e;
    if (!(es >> e.mat >> e.block >> e.i >> e.j >> e.value))
      throw Error(Errc::ConfigInvalid, "sdpa: malformed entry line: " + line);
    data.entries.push_back(e);
  }
  return data;
}

}  // namespace tdsyn

#include "tdsyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tdsyn {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  throw Error(Errc::ConfigInvalid, path + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Recursive numeric value: scalar, [..] vector, or [[..],..] matrix.
struct Value {
  enum class Kind { Scalar, Vector, Matrix, Word } kind = Kind::Scalar;
  double scalar = 0.0;
  std::vector<double> vec;
  Mat mat;
  std::string word;
};

Value parse_value(const std::string& text, const std::string& path, int line) {
  const std::string v = trim(text);
  if (v.empty()) fail(path, line, "empty value");
  if (v.front() != '[') {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end && *end == '\0') {
      Value out;
      out.kind = Value::Kind::Scalar;
      out.scalar = d;
      return out;
    }
    Value out;
    out.kind = Value::Kind::Word;
    out.word = v;
    return out;
  }

  // Bracketed: tokenize into numbers and brackets.
  std::vector<std::vector<double>> rows;
  std::vector<double> flat;
  std::vector<double> current;
  int depth = 0;
  bool nested = false;
  std::size_t i = 0;
  while (i < v.size()) {
    const char ch = v[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      ++i;
    } else if (ch == '[') {
      ++depth;
      if (depth > 2) fail(path, line, "arrays nest at most twice");
      if (depth == 2) {
        nested = true;
        current.clear();
      }
      ++i;
    } else if (ch == ']') {
      if (depth == 2) rows.push_back(current);
      --depth;
      if (depth < 0) fail(path, line, "unbalanced ']'");
      ++i;
    } else {
      char* end = nullptr;
      const double d = std::strtod(v.c_str() + i, &end);
      if (end == v.c_str() + i) fail(path, line, "expected a number near '" + v.substr(i, 8) + "'");
      if (depth == 2)
        current.push_back(d);
      else if (depth == 1)
        flat.push_back(d);
      else
        fail(path, line, "number outside brackets");
      i = static_cast<std::size_t>(end - v.c_str());
    }
  }
  if (depth != 0) fail(path, line, "unbalanced '['");

  Value out;
  if (nested) {
    if (rows.empty()) fail(path, line, "empty matrix");
    const std::size_t cols = rows.front().size();
    for (const auto& r : rows)
      if (r.size() != cols) fail(path, line, "ragged matrix rows");
    out.kind = Value::Kind::Matrix;
    out.mat = Mat(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c) out.mat(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  } else {
    out.kind = Value::Kind::Vector;
    out.vec = flat;
  }
  return out;
}

Mat as_matrix(const Value& v, const std::string& key, const std::string& path, int line) {
  if (v.kind == Value::Kind::Matrix) return v.mat;
  if (v.kind == Value::Kind::Vector) {
    // A flat array is a single-row matrix.
    Mat m(1, static_cast<Index>(v.vec.size()));
    for (std::size_t i = 0; i < v.vec.size(); ++i) m(0, static_cast<Index>(i)) = v.vec[i];
    return m;
  }
  if (v.kind == Value::Kind::Scalar) {
    Mat m(1, 1);
    m(0, 0) = v.scalar;
    return m;
  }
  fail(path, line, "field '" + key + "' expects a matrix");
}

double as_scalar(const Value& v, const std::string& key, const std::string& path, int line) {
  if (v.kind != Value::Kind::Scalar) fail(path, line, "field '" + key + "' expects a number");
  return v.scalar;
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& path) {
  ProblemConfig cfg;
  cfg.source_path = path;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_a = false, have_b = false, have_c = false;

  while (std::getline(in, line)) {
    ++lineno;
    const int key_line = lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;

    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(path, key_line, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));

    // Values may continue over lines until brackets balance.
    auto balance = [](const std::string& s) {
      long d = 0;
      for (char ch : s) d += ch == '[' ? 1 : ch == ']' ? -1 : 0;
      return d;
    };
    while (balance(value) > 0 && std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      value += " " + trim(line);
    }
    if (balance(value) != 0) fail(path, key_line, "unbalanced brackets in field '" + key + "'");

    const Value v = parse_value(value, path, key_line);

    if (key == "mode") {
      if (v.word == "analyze")
        cfg.mode = RunMode::Analyze;
      else if (v.word == "ssf")
        cfg.mode = RunMode::Ssf;
      else if (v.word == "sof")
        cfg.mode = RunMode::Sof;
      else if (v.word == "fixed-eps")
        cfg.mode = RunMode::FixedEps;
      else
        fail(path, key_line, "mode must be analyze | ssf | sof | fixed-eps");
    } else if (key == "slack") {
      if (v.word == "jordan")
        cfg.slack = SlackChoice::Jordan;
      else if (v.word == "full")
        cfg.slack = SlackChoice::Full;
      else
        fail(path, key_line, "slack must be jordan | full");
    } else if (key == "preset") {
      if (v.word != "eps1" && v.word != "eps2") fail(path, key_line, "preset must be eps1 | eps2");
      cfg.preset = v.word;
    } else if (key == "A") {
      cfg.a = as_matrix(v, key, path, key_line);
      have_a = true;
    } else if (key == "B") {
      cfg.b = as_matrix(v, key, path, key_line);
      have_b = true;
    } else if (key == "C") {
      if (v.kind == Value::Kind::Word && v.word == "identity") {
        have_c = false;  // resolved after A is known
      } else {
        cfg.c = as_matrix(v, key, path, key_line);
        have_c = true;
      }
    } else if (key == "Ad") {
      cfg.a_d = as_matrix(v, key, path, key_line);
    } else if (key == "A1") {
      cfg.a1 = as_matrix(v, key, path, key_line);
    } else if (key == "K0") {
      cfg.k0 = as_matrix(v, key, path, key_line);
    } else if (key == "N") {
      cfg.orders.clear();
      if (v.kind == Value::Kind::Scalar) {
        cfg.orders.push_back(static_cast<int>(v.scalar));
      } else if (v.kind == Value::Kind::Vector) {
        for (double d : v.vec) cfg.orders.push_back(static_cast<int>(d));
      } else {
        fail(path, key_line, "N expects an integer or a list");
      }
      for (int n : cfg.orders)
        if (n < 1) fail(path, key_line, "orders must be >= 1");
      if (cfg.orders.empty()) fail(path, key_line, "N list is empty");
    } else if (key == "h") {
      cfg.h = as_scalar(v, key, path, key_line);
      if (*cfg.h <= 0.0) fail(path, key_line, "h must be positive");
    } else if (key == "h_range") {
      // Ramp window shorthand: maps onto (h0, h_cap).
      if (v.kind != Value::Kind::Vector || v.vec.size() != 2 || v.vec[0] <= 0.0 ||
          v.vec[1] <= v.vec[0])
        fail(path, key_line, "h_range expects [lo, hi] with 0 < lo < hi");
      cfg.h0 = v.vec[0];
      cfg.h_cap = v.vec[1];
    } else if (key == "l_max") {
      cfg.l_max = static_cast<int>(as_scalar(v, key, path, key_line));
    } else if (key == "h0") {
      cfg.h0 = as_scalar(v, key, path, key_line);
    } else if (key == "dh0") {
      cfg.dh0 = as_scalar(v, key, path, key_line);
    } else if (key == "dh_min") {
      cfg.dh_min = as_scalar(v, key, path, key_line);
    } else if (key == "h_cap") {
      cfg.h_cap = as_scalar(v, key, path, key_line);
    } else if (key == "delta_scale") {
      cfg.delta_scale = as_scalar(v, key, path, key_line);
    } else if (key == "solver_tol") {
      cfg.solver_tol = as_scalar(v, key, path, key_line);
    } else if (key == "bisect_tol") {
      cfg.bisect_tol = as_scalar(v, key, path, key_line);
    } else if (key == "restarts") {
      cfg.restarts = static_cast<int>(as_scalar(v, key, path, key_line));
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned>(as_scalar(v, key, path, key_line));
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(as_scalar(v, key, path, key_line));
    } else {
      fail(path, key_line, "unknown field '" + key + "'");
    }
  }

  if (!have_a) fail(path, lineno, "field 'A' is required");
  if (cfg.a.rows() != cfg.a.cols()) fail(path, lineno, "A must be square");
  if (cfg.mode != RunMode::Analyze) {
    if (!have_b) fail(path, lineno, "field 'B' is required for synthesis modes");
    if (cfg.b.rows() != cfg.a.rows()) fail(path, lineno, "B row count must match A");
  }
  if (!have_c) cfg.c = Mat::Identity(cfg.a.rows(), cfg.a.rows());
  if (cfg.c.cols() != cfg.a.rows()) fail(path, lineno, "C column count must match A");
  if (cfg.mode == RunMode::Analyze && !cfg.a_d)
    fail(path, lineno, "analyze mode requires the delayed matrix 'Ad'");
  if (cfg.a_d && (cfg.a_d->rows() != cfg.a.rows() || cfg.a_d->cols() != cfg.a.cols()))
    fail(path, lineno, "Ad must match A");
  if (cfg.a1 && (cfg.a1->rows() != cfg.a.rows() || cfg.a1->cols() != cfg.a.cols()))
    fail(path, lineno, "A1 must match A");
  if (cfg.k0 && cfg.mode != RunMode::Analyze &&
      (cfg.k0->rows() != cfg.b.cols() || cfg.k0->cols() != cfg.c.rows()))
    fail(path, lineno, "K0 shape must be inputs x outputs");
  if (cfg.l_max < 1 || cfg.h0 <= 0 || cfg.dh0 <= 0 || cfg.dh_min <= 0 || cfg.h_cap <= 0 ||
      cfg.delta_scale <= 0 || cfg.solver_tol <= 0 || cfg.bisect_tol <= 0 || cfg.restarts < 1 ||
      cfg.jobs < 1)
    fail(path, lineno, "algorithm knobs must be positive");
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::ConfigInvalid, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

Mat load_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::ConfigInvalid, "cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double d;
    while (ls >> d) row.push_back(d);
    if (!row.empty()) rows.push_back(row);
  }
  if (rows.empty()) throw Error(Errc::ConfigInvalid, "matrix file '" + path + "' is empty");
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw Error(Errc::ConfigInvalid, "matrix file '" + path + "': ragged rows");
  Mat m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_mat(const Mat& m) {
  std::string s = "[";
  for (Index i = 0; i < m.rows(); ++i) {
    s += "[";
    for (Index j = 0; j < m.cols(); ++j) {
      s += fmt_num(m(i, j));
      if (j + 1 < m.cols()) s += ", ";
    }
    s += "]";
    if (i + 1 < m.rows()) s += ", ";
  }
  return s + "]";
}

}  // namespace

std::string dump_config(const ProblemConfig& cfg) {
  std::ostringstream os;
  const char* mode = cfg.mode == RunMode::Analyze    ? "analyze"
                     : cfg.mode == RunMode::Ssf      ? "ssf"
                     : cfg.mode == RunMode::Sof      ? "sof"
                                                     : "fixed-eps";
  os << "mode = " << mode << "\n";
  os << "A = " << fmt_mat(cfg.a) << "\n";
  if (cfg.b.size()) os << "B = " << fmt_mat(cfg.b) << "\n";
  os << "C = " << fmt_mat(cfg.c) << "\n";
  if (cfg.a_d) os << "Ad = " << fmt_mat(*cfg.a_d) << "\n";
  if (cfg.a1) os << "A1 = " << fmt_mat(*cfg.a1) << "\n";
  if (cfg.k0) os << "K0 = " << fmt_mat(*cfg.k0) << "\n";
  os << "N = [";
  for (std::size_t i = 0; i < cfg.orders.size(); ++i)
    os << cfg.orders[i] << (i + 1 < cfg.orders.size() ? ", " : "");
  os << "]\n";
  if (cfg.h) os << "h = " << fmt_num(*cfg.h) << "\n";
  if (cfg.mode == RunMode::FixedEps) os << "preset = " << cfg.preset << "\n";
  os << "slack = " << (cfg.slack == SlackChoice::Jordan ? "jordan" : "full") << "\n";
  os << "l_max = " << cfg.l_max << "\n";
  os << "h0 = " << fmt_num(cfg.h0) << "\n";
  os << "dh0 = " << fmt_num(cfg.dh0) << "\n";
  os << "dh_min = " << fmt_num(cfg.dh_min) << "\n";
  os << "h_cap = " << fmt_num(cfg.h_cap) << "\n";
  os << "delta_scale = " << fmt_num(cfg.delta_scale) << "\n";
  os << "solver_tol = " << fmt_num(cfg.solver_tol) << "\n";
  os << "bisect_tol = " << fmt_num(cfg.bisect_tol) << "\n";
  os << "restarts = " << cfg.restarts << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "jobs = " << cfg.jobs << "\n";
  return os.str();
}

}  // namespace tdsyn

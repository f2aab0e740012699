#include "grief/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grief {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, size_t row, size_t col) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    std::ostringstream msg;
    msg << "non-numeric cell at row " << row + 1 << ", column " << col + 1 << ": '" << cell << "'";
    throw std::invalid_argument(msg.str());
  }
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, bool header,
                                                std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (first && header) {
      if (names) *names = cells;
      first = false;
      continue;
    }
    first = false;
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw std::invalid_argument("no data rows in file: " + path);
  const size_t width = rows.front().size();
  for (size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != width) {
      std::ostringstream msg;
      msg << "ragged CSV: row " << i + 1 << " has " << rows[i].size() << " cells, expected "
          << width;
      throw std::invalid_argument(msg.str());
    }
  return rows;
}

}  // namespace

Eigen::MatrixXd Standardizer::apply_x(const Eigen::MatrixXd& x_raw) const {
  if (x_raw.cols() != x_mean.size())
    throw std::invalid_argument("standardizer: feature dimension mismatch");
  return (x_raw.rowwise() - x_mean.transpose()).array().rowwise() /
         x_scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply_y(const Eigen::VectorXd& y_raw) const {
  return (y_raw.array() - y_mean) / y_scale;
}

Eigen::VectorXd Standardizer::invert_y(const Eigen::VectorXd& y_std) const {
  return (y_std.array() * y_scale + y_mean).matrix();
}

Eigen::VectorXd Standardizer::invert_y_var(const Eigen::VectorXd& var_std) const {
  return (var_std.array() * y_scale * y_scale).matrix();
}

RawData ingest_csv_raw(const std::string& path, const std::string& target, bool header) {
  std::vector<std::string> names;
  const auto rows = read_rows(path, header, &names);
  const size_t width = rows.front().size();
  if (width < 2) throw std::invalid_argument("need at least one feature column and a target");

  // Resolve the target: by name when a header is present, otherwise (or as a
  // fallback) a zero-based column index.
  size_t target_col = width;
  if (header) {
    for (size_t j = 0; j < names.size(); ++j)
      if (names[j] == target) {
        target_col = j;
        break;
      }
  }
  if (target_col == width) {
    try {
      const long idx = std::stol(target);
      if (idx >= 0 && static_cast<size_t>(idx) < width) target_col = static_cast<size_t>(idx);
    } catch (...) {
    }
  }
  if (target_col == width)
    throw std::invalid_argument("target column '" + target + "' not found");

  std::vector<std::vector<double>> kept;
  int skipped = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return c.empty(); })) {
      ++skipped;
      continue;
    }
    std::vector<double> vals(width);
    for (size_t j = 0; j < width; ++j) vals[j] = parse_cell(cells[j], i, j);
    kept.push_back(std::move(vals));
  }
  if (kept.empty()) throw std::invalid_argument("all rows rejected for missing values");

  const Eigen::Index n = static_cast<Eigen::Index>(kept.size());
  const Eigen::Index d = static_cast<Eigen::Index>(width - 1);
  RawData raw;
  raw.x.resize(n, d);
  raw.y.resize(n);
  raw.skipped_rows = skipped;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (size_t j = 0; j < width; ++j) {
      if (j == target_col)
        raw.y[i] = kept[static_cast<size_t>(i)][j];
      else
        raw.x(i, col++) = kept[static_cast<size_t>(i)][j];
    }
  }
  return raw;
}

Dataset ingest_csv(const std::string& path, const std::string& target, bool header) {
  const RawData raw = ingest_csv_raw(path, target, header);
  const Eigen::MatrixXd& x = raw.x;
  const Eigen::VectorXd& y = raw.y;
  const Eigen::Index d = x.cols();

  Dataset ds;
  ds.skipped_rows = raw.skipped_rows;

  Standardizer& st = ds.standardizer;
  st.x_mean = x.colwise().mean();
  st.x_scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (x.col(j).array() - st.x_mean[j]).square().mean();
    const double sd = std::sqrt(var);
    if (sd <= 0.0) {
      st.x_scale[j] = 1.0;
      st.constant_cols.push_back(static_cast<int>(j));
    } else {
      st.x_scale[j] = sd;
    }
  }
  st.y_mean = y.mean();
  const double y_sd = std::sqrt((y.array() - st.y_mean).square().mean());
  if (y_sd <= 0.0) {
    st.y_scale = 1.0;
    st.y_constant = true;
  } else {
    st.y_scale = y_sd;
  }

  ds.x = st.apply_x(x);
  ds.y = st.apply_y(y);
  return ds;
}

Eigen::MatrixXd read_features_csv(const std::string& path, bool header) {
  const auto rows = read_rows(path, header, nullptr);
  const size_t width = rows.front().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_cell(rows[i][j], i, j);
  return x;
}

void write_predictions_csv(const std::string& path, const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& variance) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out.precision(17);
  out << "mean,variance\n";
  for (Eigen::Index i = 0; i < mean.size(); ++i) out << mean[i] << "," << variance[i] << "\n";
}

}  // namespace grief

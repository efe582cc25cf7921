#include "dgmm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dgmm {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_number(const std::string& cell, long row, std::size_t col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size() || !std::isfinite(value))
    throw std::runtime_error("dgmm: row " + std::to_string(row) + ", column " +
                             std::to_string(col + 1) + ": cannot parse '" + cell +
                             "' as a finite number");
  return value;
}

void format_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  if (options.label_column && options.label_index)
    throw std::invalid_argument("dgmm: select the label column by name or index, not both");
  if (options.label_column && !options.has_header)
    throw std::invalid_argument("dgmm: selecting a label column by name requires a header");
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dgmm: cannot open '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;  // tolerate blank lines (incl. trailing)
    rows.emplace_back(split_fields(line, options.delimiter));
    if (rows.back().size() != rows.front().size())
      throw std::runtime_error("dgmm: row " + std::to_string(line_no) + " has " +
                               std::to_string(rows.back().size()) + " fields, expected " +
                               std::to_string(rows.front().size()));
  }
  if (rows.empty()) throw std::runtime_error("dgmm: '" + path + "' contains no data");

  const std::size_t width = rows.front().size();
  Dataset ds;
  std::size_t first_data_row = 0;
  if (options.has_header) {
    ds.feature_names.assign(rows.front().begin(), rows.front().end());
    first_data_row = 1;
    if (rows.size() == 1) throw std::runtime_error("dgmm: '" + path + "' has a header but no rows");
  }

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                              *options.label_column);
    if (it == ds.feature_names.end())
      throw std::runtime_error("dgmm: no column named '" + *options.label_column + "'");
    label_col = static_cast<std::size_t>(it - ds.feature_names.begin());
  } else if (options.label_index) {
    if (*options.label_index < 0 || static_cast<std::size_t>(*options.label_index) >= width)
      throw std::runtime_error("dgmm: label column index " +
                               std::to_string(*options.label_index) + " out of range");
    label_col = static_cast<std::size_t>(*options.label_index);
  }

  const std::size_t n = rows.size() - first_data_row;
  const std::size_t p = width - (label_col ? 1 : 0);
  if (p == 0) throw std::runtime_error("dgmm: '" + path + "' has no feature columns");
  ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::unordered_map<std::string, int> level_codes;
  if (label_col) ds.labels.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[first_data_row + i];
    const long row_no = static_cast<long>(first_data_row + i + 1);
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        auto [it, inserted] =
            level_codes.try_emplace(row[c], static_cast<int>(level_codes.size()) + 1);
        if (inserted) ds.label_names.push_back(row[c]);
        ds.labels.push_back(it->second);
      } else {
        ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out_col++)) =
            parse_number(row[c], row_no, c);
      }
    }
  }
  if (label_col && options.has_header)
    ds.feature_names.erase(ds.feature_names.begin() +
                           static_cast<std::ptrdiff_t>(*label_col));
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  if (ds.has_labels() && static_cast<Eigen::Index>(ds.labels.size()) != ds.n())
    throw std::invalid_argument("dgmm: label vector length must match the row count");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dgmm: cannot open '" + path + "' for writing");
  std::string line;
  for (Eigen::Index c = 0; c < ds.p(); ++c) {
    if (c) line += ',';
    line += static_cast<std::size_t>(c) < ds.feature_names.size()
                ? ds.feature_names[static_cast<std::size_t>(c)]
                : "x" + std::to_string(c + 1);
  }
  if (ds.has_labels()) line += ",class";
  os << line << '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    line.clear();
    for (Eigen::Index c = 0; c < ds.p(); ++c) {
      if (c) line += ',';
      format_value(line, ds.x(i, c));
    }
    if (ds.has_labels()) {
      const int code = ds.labels[static_cast<std::size_t>(i)];
      line += ',';
      if (code >= 1 && static_cast<std::size_t>(code) <= ds.label_names.size())
        line += ds.label_names[static_cast<std::size_t>(code) - 1];
      else
        line += std::to_string(code);
    }
    os << line << '\n';
  }
  if (!os) throw std::runtime_error("dgmm: failed while writing '" + path + "'");
}

Dataset standardize(const Dataset& ds) {
  if (ds.n() < 1) throw std::invalid_argument("dgmm: cannot standardize an empty dataset");
  Dataset out = ds;
  const auto n = static_cast<double>(ds.n());
  out.standardization.applied = true;
  out.standardization.mean = ds.x.colwise().mean();
  out.standardization.scale = Vector::Ones(ds.p());
  out.standardization.constant_columns.clear();
  for (Eigen::Index c = 0; c < ds.p(); ++c) {
    Vector centered = ds.x.col(c).array() - out.standardization.mean[c];
    const double sd = ds.n() > 1 ? std::sqrt(centered.squaredNorm() / (n - 1.0)) : 0.0;
    if (sd > 0.0) {
      out.standardization.scale[c] = sd;
      out.x.col(c) = centered / sd;
    } else {
      out.standardization.constant_columns.push_back(static_cast<int>(c));
      out.x.col(c) = centered;
    }
  }
  return out;
}

Dataset generate_smiley(int n, double sd_eyes, double sd_mouth, double sd_noise,
                        RandomStream& rng) {
  if (n < 4) throw std::invalid_argument("dgmm: smiley needs at least 4 observations");
  Dataset ds;
  ds.x.resize(n, 3);
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.feature_names = {"x1", "x2", "x3"};
  for (int i = 0; i < n; ++i) {
    const int cls = static_cast<int>(rng.index(4));
    double x = 0.0, y = 0.0;
    switch (cls) {
      case 0:
        x = -0.8 + sd_eyes * rng.normal();
        y = 1.0 + sd_eyes * rng.normal();
        break;
      case 1:
        x = 0.8 + sd_eyes * rng.normal();
        y = 1.0 + sd_eyes * rng.normal();
        break;
      case 2: {
        double u = rng.uniform(), v = rng.uniform();
        if (u + v > 1.0) {  // reflect into the triangle
          u = 1.0 - u;
          v = 1.0 - v;
        }
        x = 0.0 + u * (-0.3 - 0.0) + v * (0.3 - 0.0);
        y = 0.4 + u * (-0.4 - 0.4) + v * (-0.4 - 0.4);
        break;
      }
      default:
        x = -1.0 + 2.0 * rng.uniform();
        y = 0.5 * x * x - 1.5 + sd_mouth * rng.normal();
        break;
    }
    ds.x(i, 0) = x;
    ds.x(i, 1) = y;
    ds.x(i, 2) = sd_noise * rng.normal();
    ds.labels[static_cast<std::size_t>(i)] = cls + 1;
  }
  return ds;
}

}  // namespace dgmm

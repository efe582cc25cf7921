#ifndef DGMM_DATA_HPP
#define DGMM_DATA_HPP

#include <optional>
#include <string>
#include <vector>

#include "dgmm/gaussian.hpp"
#include "dgmm/random.hpp"

namespace dgmm {

// Per-column affine transform applied by standardize(); scale is the sample
// standard deviation actually divided by (1 for constant columns).
struct Standardization {
  bool applied = false;
  Vector mean;
  Vector scale;
  std::vector<int> constant_columns;  // 0-based indices that were only centered
};

struct Dataset {
  Matrix x;  // n x p
  std::vector<int> labels;                 // 1..k, empty when absent
  std::vector<std::string> feature_names;  // empty when the file had no header
  std::vector<std::string> label_names;    // original label text per code, 1-based
  Standardization standardization;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

struct CsvOptions {
  bool has_header = true;
  char delimiter = ',';
  // At most one of these selects the label column: by header name, or by
  // 0-based position.
  std::optional<std::string> label_column;
  std::optional<int> label_index;
};

// Parses a rectangular delimited file. Feature cells must be numeric
// (decimal point, scientific notation allowed); the label column, if
// selected, is factor-encoded 1..k in order of first appearance. Errors
// carry 1-based row/column positions.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

// Writes features (17 significant digits, so reloading reproduces the exact
// doubles) plus a trailing `class` column when labels are present.
void save_csv(const Dataset& ds, const std::string& path);

// Centers every column and divides by the sample standard deviation
// (n-1 convention). Constant columns are centered only and flagged.
Dataset standardize(const Dataset& ds);

// Four equiprobable classes in 3D: two Gaussian eyes at (-0.8, 1.0) and
// (0.8, 1.0) with isotropic sd_eyes, a nose uniform on the triangle
// (0, 0.4), (-0.3, -0.4), (0.3, -0.4), and a parabolic mouth
// x ~ U(-1, 1), y = 0.5 x^2 - 1.5 + N(0, sd_mouth^2). The third coordinate
// is independent N(0, sd_noise^2) noise. Labels 1..4. Bit-reproducible for
// a fixed stream.
Dataset generate_smiley(int n, double sd_eyes, double sd_mouth, double sd_noise,
                        RandomStream& rng);

}  // namespace dgmm

#endif

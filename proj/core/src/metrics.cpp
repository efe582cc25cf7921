#include "dgmm/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace dgmm {
namespace {

std::vector<int> encode_first_appearance(const std::vector<int>& labels, int* k_out) {
  std::unordered_map<int, int> codes;
  std::vector<int> encoded(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = codes.try_emplace(labels[i], static_cast<int>(codes.size()));
    encoded[i] = it->second;
  }
  *k_out = static_cast<int>(codes.size());
  return encoded;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

// Classic O(m^3) assignment with potentials on an m x m cost matrix;
// returns the minimum total cost (1-indexed work arrays).
double hungarian_min_cost(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= m; ++j) total += cost(match[j] - 1, j - 1);
  return total;
}

}  // namespace

ContingencyTable contingency_table(const std::vector<int>& labels_a,
                                   const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument("dgmm: label vectors must have equal length");
  int ka = 0, kb = 0;
  const std::vector<int> a = encode_first_appearance(labels_a, &ka);
  const std::vector<int> b = encode_first_appearance(labels_b, &kb);
  ContingencyTable table;
  table.n = static_cast<long>(a.size());
  table.counts.setZero(ka, kb);
  for (std::size_t i = 0; i < a.size(); ++i) ++table.counts(a[i], b[i]);
  table.row_sums.assign(static_cast<std::size_t>(ka), 0);
  table.col_sums.assign(static_cast<std::size_t>(kb), 0);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      table.row_sums[static_cast<std::size_t>(i)] += table.counts(i, j);
      table.col_sums[static_cast<std::size_t>(j)] += table.counts(i, j);
    }
  return table;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument("dgmm: label vectors must have equal length");
  if (labels_a.size() < 2)
    throw std::invalid_argument("dgmm: adjusted Rand index needs at least 2 observations");
  const ContingencyTable table = contingency_table(labels_a, labels_b);
  double pairs_cells = 0.0;
  for (int i = 0; i < table.counts.rows(); ++i)
    for (int j = 0; j < table.counts.cols(); ++j)
      pairs_cells += choose2(static_cast<double>(table.counts(i, j)));
  double pairs_a = 0.0, pairs_b = 0.0;
  for (long s : table.row_sums) pairs_a += choose2(static_cast<double>(s));
  for (long s : table.col_sums) pairs_b += choose2(static_cast<double>(s));
  const double pairs_n = choose2(static_cast<double>(table.n));
  // Scale the Hubert-Arabie formula by pairs_n before dividing: every term is
  // then a product of integer pair counts, exactly representable for any
  // realistic n, so small hand examples come out bit-exact (e.g. -4/8 = -0.5).
  const double numerator = pairs_n * pairs_cells - pairs_a * pairs_b;
  const double denom = pairs_n * 0.5 * (pairs_a + pairs_b) - pairs_a * pairs_b;
  if (denom == 0.0) return 1.0;  // both partitions trivial (identical structure)
  return numerator / denom;
}

double misclassification_rate(const std::vector<int>& labels_true,
                              const std::vector<int>& labels_pred) {
  if (labels_true.size() != labels_pred.size())
    throw std::invalid_argument("dgmm: label vectors must have equal length");
  if (labels_true.empty())
    throw std::invalid_argument("dgmm: misclassification rate needs observations");
  const ContingencyTable table = contingency_table(labels_true, labels_pred);
  const int m = static_cast<int>(std::max(table.counts.rows(), table.counts.cols()));
  // pad to square: phantom rows/columns carry zero matches, so unmatched
  // predicted clusters count entirely as errors
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(m, m);
  padded.topLeftCorner(table.counts.rows(), table.counts.cols()) =
      table.counts.cast<double>();
  double best_matched = 0.0;
  if (m <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double matched = 0.0;
      for (int j = 0; j < m; ++j) matched += padded(perm[static_cast<std::size_t>(j)], j);
      best_matched = std::max(best_matched, matched);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best_matched = -hungarian_min_cost(-padded);
  }
  return 1.0 - best_matched / static_cast<double>(table.n);
}

}  // namespace dgmm

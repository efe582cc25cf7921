#ifndef DGMM_METRICS_HPP
#define DGMM_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace dgmm {

// Co-occurrence counts between two labelings of the same observations.
// Label values are arbitrary integers; rows/columns are indexed by order of
// first appearance.
struct ContingencyTable {
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;  // k_a x k_b
  std::vector<long> row_sums;
  std::vector<long> col_sums;
  long n = 0;
};

ContingencyTable contingency_table(const std::vector<int>& labels_a,
                                   const std::vector<int>& labels_b);

// Hubert-Arabie adjusted Rand index in [-1, 1]; 1 for identical partitions
// (including the degenerate single-cluster/single-cluster case).
double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b);

// Share of observations left unmatched under the best injective map from
// predicted clusters to true clusters (exact optimal assignment; brute force
// for up to 8 clusters, Hungarian algorithm above).
double misclassification_rate(const std::vector<int>& labels_true,
                              const std::vector<int>& labels_pred);

}  // namespace dgmm

#endif

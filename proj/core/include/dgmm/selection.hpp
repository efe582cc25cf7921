#ifndef DGMM_SELECTION_HPP
#define DGMM_SELECTION_HPP

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dgmm/sem.hpp"

namespace dgmm {

// Free parameters: per layer, k_l * [eta (r_{l-1}) + loadings
// (r_{l-1} r_l - r_l(r_l-1)/2 after the rotation constraint) + diagonal psi
// (r_{l-1})], plus k_l - 1 weights; r_0 = p.
long count_params(const DgmmSpec& spec);

// -2 loglik + n_params * log(n); lower is better.
double bic(double loglik, long n_params, Eigen::Index n);

struct SearchSpace {
  std::vector<int> h_values{1, 2, 3};
  int k1 = 1;  // fixed first-layer cluster count
  int hidden_k_min = 1;
  int hidden_k_max = 5;
  // When non-empty, exactly these latent-dimension chains are fitted (each
  // chain's length selects h); otherwise every strictly decreasing chain for
  // each h in h_values.
  std::vector<std::vector<int>> r_chains;
};

struct ModelScore {
  DgmmSpec spec;
  bool failed = false;
  std::string error;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  long n_params = 0;
  double bic = std::numeric_limits<double>::quiet_NaN();
  double ari = std::numeric_limits<double>::quiet_NaN();  // only with true labels
  double runtime_s = 0.0;
  std::shared_ptr<const FitResult> fit;  // null for failed rows
};

struct SearchResult {
  std::vector<ModelScore> table;  // BIC ascending, failed rows last
  std::size_t best_index = 0;
  const ModelScore& best() const { return table[best_index]; }
};

// All admissible specs for the space, in a deterministic order; throws when
// the grid is empty.
std::vector<DgmmSpec> enumerate_search_grid(int p, const SearchSpace& space);

// Fits every spec in the grid (n_starts chains each, seed derived from the
// spec so the table is reproducible spec-by-spec) and ranks by BIC.
// Individual failures become table rows; throws only if everything failed.
SearchResult model_search(const Matrix& data, const SearchSpace& space,
                          const FitConfig& config,
                          const std::vector<int>* true_labels = nullptr);

// CSV with columns h, k_chain, r_chain, loglik, n_params, bic, ari,
// runtime_s; chains dash-joined; empty cells for unavailable values.
std::string score_table_csv(const SearchResult& result);

}  // namespace dgmm

#endif

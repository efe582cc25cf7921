#ifndef DGMM_SEM_HPP
#define DGMM_SEM_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "dgmm/model.hpp"
#include "dgmm/random.hpp"

namespace dgmm {

// How the per-observation latent moments fed to the M-step are obtained:
// averages over the sampled replicates, or the closed-form conditional
// moments (rho, xi + rho rho^T) under the sampled sub-path. Sampled values
// still propagate to the next layer in both modes.
enum class EStepMode { monte_carlo, exact_moments };

struct FitProgress {
  int chain = 0;
  int iteration = 0;
  double loglik = 0.0;  // of the parameters entering this iteration
  std::vector<double> layer_seconds;
};

struct FitConfig {
  int m_replicates = 10;
  int max_iters = 200;
  int burn_in = 20;
  int n_starts = 10;
  std::uint64_t seed = 0;
  double tol = 1e-4;  // relative sliding-window stopping tolerance
  EStepMode e_step_mode = EStepMode::monte_carlo;
  int threads = 1;
  // Per-iteration hook; must be thread-safe when chains run concurrently.
  std::function<void(const FitProgress&)> progress;

  void validate() const;
};

struct FitResult {
  DgmmParams params;           // last iterate of the winning chain
  DgmmParams averaged_params;  // post-burn-in average: the reported estimator
  std::vector<double> loglik_trace;  // entry t = loglik entering iteration t
  std::vector<int> labels;           // from classify on averaged_params
  Matrix path_posteriors;            // n x |Omega| under averaged_params
  double loglik = 0.0;               // of averaged_params on the training data
  double bic = 0.0;
  bool converged = false;
  int best_chain = 0;
};

// k-means++ seeded initialization: layer-1 eta from cluster centers, shared
// loadings from the principal directions of pooled within-cluster residuals,
// psi from leftover residual variances, deeper layers recursively on the
// normalized scores, uniform weights everywhere.
DgmmParams init_params(const DgmmSpec& spec, const Matrix& data, RandomStream& rng);

// Marginal posterior f(s_l | y_i) over layer-l components, n x k_l.
Matrix layer_responsibilities(const DgmmSpec& spec, const Matrix& path_posteriors, int l);

// Posterior over the sub-paths (s_l, ..., s_h), n x tail_count(l).
Matrix tail_posteriors(const DgmmSpec& spec, const Matrix& path_posteriors, int l);

struct SStepResult {
  int layer = 0;
  // replicate -> n x r_l matrix of draws from the conditional posterior
  std::vector<Matrix> draws;
  // per observation: sampled sub-path (s_l, ..., s_h) as an index into the
  // tail ordering of tail_posteriors
  std::vector<std::ptrdiff_t> tail_index;
  Matrix rho;              // n x r_l conditional means under the sampled sub-path
  std::vector<Matrix> xi;  // conditional covariance per tail index (shared)
};

// Samples one sub-path per observation from tail_post, then m_replicates
// draws of z^(l) from the conditional posterior given z_prev and that
// sub-path. z_prev is the data itself at l = 1. Deterministic given the
// stream, independent of threading.
SStepResult s_step(const DgmmParams& params, int l, const Matrix& z_prev,
                   const Matrix& tail_post, RandomStream& rng, int m_replicates);

struct Moments {
  Matrix first;                // n x r_l
  std::vector<Matrix> second;  // n entries, r_l x r_l
};

Moments e_step_moments(const SStepResult& s, EStepMode mode);

// Mean over replicates; the value propagated as z^(l) to the next layer.
Matrix draw_average(const SStepResult& s);

// Closed-form weighted updates for one layer, in the order eta -> lambda ->
// psi (diagonalized, floored at 1e-6) -> weights. responsibilities is
// n x k_l with rows summing to 1.
Layer m_step_layer(const DgmmParams& params, int l, const Matrix& z_prev,
                   const Moments& moments, const Matrix& responsibilities);

// Canonicalizes the loading matrices of the deepest layer so that
// Lambda^T Psi^-1 Lambda is diagonal with decreasing entries and each
// column's first nonzero entry is nonnegative. The transformation is exact
// there (the deepest latent prior is rotation-invariant), so the collapsed
// density is unchanged. Interior layers are returned as-is: their latents
// follow non-standard nested mixtures, so no density-preserving rotation
// exists for them in this parameter family.
DgmmParams enforce_identifiability(const DgmmParams& params);

// Multistart stochastic EM. Each chain iterates {path posteriors -> for
// l = 1..h: S-step, E-step, M-step -> enforce_identifiability}, stopping
// early when the sliding-window mean log-likelihood stabilizes. The chain
// with the best averaged-parameter log-likelihood wins.
FitResult fit(const DgmmSpec& spec, const Matrix& data, const FitConfig& config);

}  // namespace dgmm

#endif

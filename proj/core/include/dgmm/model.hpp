#ifndef DGMM_MODEL_HPP
#define DGMM_MODEL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "dgmm/gaussian.hpp"

namespace dgmm {

// Architecture of a deep Gaussian mixture: observed dimension p, per-layer
// component counts k_1..k_h and latent dimensions r_1..r_h with
// p > r_1 > ... > r_h >= 1.
struct DgmmSpec {
  int p = 0;
  std::vector<int> k;
  std::vector<int> r;

  int depth() const { return static_cast<int>(k.size()); }
  // input dimension of layer l (1-based); layer 1 reads the data
  int in_dim(int l) const { return l <= 1 ? p : r[l - 2]; }
  int out_dim(int l) const { return r[l - 1]; }
  std::size_t path_count() const;
  // number of tail paths (s_l, ..., s_h); tail_count(h+1) == 1
  std::size_t tail_count(int l) const;

  void validate() const;  // throws std::invalid_argument
  std::string to_string() const;  // e.g. "h=2 k=4,1 r=2,1 p=3"
};

// One mixture component of one layer. psi holds the diagonal of the noise
// covariance; entries are kept >= 1e-6 by the fitter.
struct LayerComponent {
  Vector eta;     // in_dim
  Matrix lambda;  // in_dim x out_dim
  Vector psi;     // in_dim, positive
  double weight = 1.0;
};

using Layer = std::vector<LayerComponent>;

struct DgmmParams {
  DgmmSpec spec;
  std::vector<Layer> layers;  // layers[l-1][s_l-1]

  void validate() const;  // shapes, weight simplex, psi positivity
};

// One component index per layer, 0-based internally.
using Path = std::vector<int>;

// All |Omega| = prod k_l paths in lexicographic order with their weights
// pi_s = prod_l pi_{s_l}.
struct PathTable {
  std::vector<Path> paths;
  Vector weights;
  std::size_t size() const { return paths.size(); }
};

// Gaussian obtained by integrating out every latent layer along one path.
struct CollapsedComponent {
  Path path;
  double weight = 0.0;
  Vector mean;  // p
  Matrix cov;   // p x p
};

// One mixture component of the marginal distribution of z^(l), indexed by
// the sub-path (s_{l+1}, ..., s_h).
struct SubPathComponent {
  int layer = 0;  // l, so mean/cov have dimension r_l (r_0 = p)
  Path sub_path;
  double weight = 0.0;
  Vector mean;
  Matrix cov;
};

std::size_t path_index(const DgmmSpec& spec, const Path& path);
Path path_from_index(const DgmmSpec& spec, std::size_t index);

PathTable enumerate_paths(const DgmmParams& params);

CollapsedComponent collapse_path(const DgmmParams& params, const Path& path);

// Marginal mixture of z^(l) for 0 <= l <= h-1; l = 0 reproduces the full
// collapse over Omega (components ordered as the PathTable).
std::vector<SubPathComponent> marginal_components(const DgmmParams& params, int l);

double log_likelihood(const DgmmParams& params, const Matrix& data);

// Posterior over paths f(s|y), normalized; ordered as the PathTable.
Vector path_posterior(const DgmmParams& params, const Vector& y);

// Posterior of z given an observation v of the linear-Gaussian layer
// v = eta + lambda z + u, u ~ N(0, diag(psi)), with prior
// z ~ N(tail_mean, tail_cov).
Gaussian conditional_gaussian(const Matrix& lambda, const Vector& psi,
                              const Vector& eta, const Vector& tail_mean,
                              const Matrix& tail_cov, const Vector& z_prev);

// Conditional posterior of z^(l) given z^(l-1) along a fixed path,
// l in 1..h; the tail prior at l = h is N(0, I).
Gaussian conditional_posterior(const DgmmParams& params, int l,
                               const Vector& z_prev, const Path& path);

// MAP first-layer labels in 1..k_1; ties broken by lowest index.
std::vector<int> classify(const DgmmParams& params, const Matrix& data);

// Shared evaluation state for one parameter set: tail moments of every
// layer boundary and Cholesky factors of the collapsed components. Sub-path
// moments are computed once, bottom-up, and reused across observations.
class ModelEval {
 public:
  explicit ModelEval(const DgmmParams& params);

  const DgmmParams& params() const { return params_; }
  const PathTable& path_table() const { return table_; }
  // marginal components of z^(l), 0 <= l <= h (l = h is the unit prior)
  const std::vector<SubPathComponent>& tails(int l) const { return tails_[l]; }
  const std::vector<GaussianLik>& collapsed() const { return collapsed_; }

  // log(pi_s) + log N(y; mu_s, Sigma_s) for every path
  Vector log_joint(const Vector& y) const;
  double row_log_likelihood(const Vector& y) const;
  double total_log_likelihood(const Matrix& data) const;
  // n x |Omega| path posterior probabilities, rows summing to 1
  Matrix posterior_matrix(const Matrix& data) const;
  // posteriors plus the data log-likelihood in one pass
  Matrix posterior_matrix(const Matrix& data, double* total_loglik) const;

 private:
  DgmmParams params_;
  PathTable table_;
  std::vector<std::vector<SubPathComponent>> tails_;  // [0..h]
  std::vector<GaussianLik> collapsed_;
  Vector log_weights_;
};

// Versioned text serialization; numeric values round-trip bit-faithfully
// for finite doubles.
void save_params(const DgmmParams& params, std::ostream& os);
void save_params(const DgmmParams& params, const std::string& path);
DgmmParams load_params(std::istream& is);
DgmmParams load_params(const std::string& path);

}  // namespace dgmm

#endif

#ifndef DGMM_GAUSSIAN_HPP
#define DGMM_GAUSSIAN_HPP

#include <Eigen/Dense>

#include "dgmm/random.hpp"

namespace dgmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Multivariate normal with dense symmetric covariance.
struct Gaussian {
  Vector mean;
  Matrix cov;
  int dim() const { return static_cast<int>(mean.size()); }
};

// Cholesky factorization with the regularization policy used everywhere in
// this library: factor as given; on failure add eps*I with
// eps = 1e-8 * mean(diag), retry once at 1e-6 * mean(diag), then throw
// std::runtime_error. The input is symmetrized first.
Eigen::LLT<Matrix> cholesky_with_jitter(Matrix a);

// Precomputed evaluator for repeated log-density evaluations against one
// component. Validates symmetry (1e-10 relative) and factorizability.
class GaussianLik {
 public:
  explicit GaussianLik(const Gaussian& g);

  double log_density(const Vector& x) const;

  const Vector& mean() const { return mean_; }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

 private:
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_;  // -(d/2) log(2 pi) - (1/2) log|cov|
};

// log N(x; mean, cov) via triangular factorization.
double log_density(const Gaussian& g, const Vector& x);

// m i.i.d. draws, one per row; deterministic given the stream state.
Matrix sample(const Gaussian& g, RandomStream& rng, int m);

// log sum_i exp(v_i), stable under max-shift; -inf for all-(-inf) input.
double log_sum_exp(const Vector& v);

}  // namespace dgmm

#endif

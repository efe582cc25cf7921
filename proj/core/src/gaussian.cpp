#include "dgmm/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dgmm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

Eigen::LLT<Matrix> cholesky_with_jitter(Matrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
  a = ((a + a.transpose()) * 0.5).eval();
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return llt;

  const double base = a.diagonal().mean();
  for (double rel : {1e-8, 1e-6}) {
    Matrix b = a;
    b.diagonal().array() += rel * base;
    llt.compute(b);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw std::runtime_error("cholesky: matrix not positive definite after jitter");
}

GaussianLik::GaussianLik(const Gaussian& g) : mean_(g.mean) {
  if (g.cov.rows() != g.cov.cols() || g.cov.rows() != g.mean.size())
    throw std::invalid_argument("gaussian: inconsistent mean/cov dimensions");
  const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
  if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("gaussian: covariance not symmetric");
  llt_ = cholesky_with_jitter(g.cov);
  const double half_logdet = llt_.matrixLLT().diagonal().array().log().sum();
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) * kLog2Pi - half_logdet;
}

double GaussianLik::log_density(const Vector& x) const {
  if (x.size() != mean_.size())
    throw std::invalid_argument("log_density: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("log_density: non-finite input");
  const Vector w = llt_.matrixL().solve(x - mean_);
  return log_norm_ - 0.5 * w.squaredNorm();
}

double log_density(const Gaussian& g, const Vector& x) {
  return GaussianLik(g).log_density(x);
}

Matrix sample(const Gaussian& g, RandomStream& rng, int m) {
  if (m < 1) throw std::invalid_argument("sample: need m >= 1");
  if (g.cov.rows() != g.cov.cols() || g.cov.rows() != g.mean.size())
    throw std::invalid_argument("sample: inconsistent mean/cov dimensions");
  const auto llt = cholesky_with_jitter(g.cov);
  const Matrix l = llt.matrixL();
  const int d = g.dim();
  Matrix out(m, d);
  Vector eps(d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) eps[j] = rng.normal();
    out.row(i) = (g.mean + l * eps).transpose();
  }
  return out;
}

double log_sum_exp(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) {
    // all -inf (or a NaN/+inf, which we let propagate)
    return m;
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace dgmm

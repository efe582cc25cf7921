#include "dgmm/sem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dgmm/parallel.hpp"
#include "dgmm/selection.hpp"

namespace dgmm {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

struct KmeansResult {
  Matrix centers;  // k x d
  std::vector<int> assign;
};

// k-means++ seeding followed by Lloyd iterations; empty clusters are
// reseeded to the point farthest from its current center. Deterministic in
// the stream.
KmeansResult kmeans(const Matrix& x, int k, RandomStream& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  KmeansResult res;
  res.centers.resize(k, d);
  res.assign.assign(static_cast<std::size_t>(n), 0);
  Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
  res.centers.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (x.row(i) - res.centers.row(c - 1)).squaredNorm());
    const double total = dist2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    res.centers.row(c) = x.row(pick);
  }
  for (int pass = 0; pass < 30; ++pass) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (x.row(i) - res.centers.row(c)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (best != res.assign[static_cast<std::size_t>(i)]) {
        res.assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && pass > 0) break;
    Matrix sums = Matrix::Zero(k, d);
    std::vector<long> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = res.assign[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dd =
              (x.row(i) - res.centers.row(res.assign[static_cast<std::size_t>(i)])).squaredNorm();
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        res.centers.row(c) = x.row(far);
        res.assign[static_cast<std::size_t>(far)] = c;
      }
    }
  }
  return res;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void FitConfig::validate() const {
  require(m_replicates >= 1, "dgmm: m_replicates must be >= 1");
  require(max_iters >= 1, "dgmm: max_iters must be >= 1");
  require(burn_in >= 0 && burn_in < max_iters, "dgmm: burn_in must be < max_iters");
  require(n_starts >= 1, "dgmm: n_starts must be >= 1");
  require(std::isfinite(tol) && tol >= 0.0, "dgmm: tol must be nonnegative and finite");
  require(threads >= 1, "dgmm: threads must be >= 1");
}

DgmmParams init_params(const DgmmSpec& spec, const Matrix& data, RandomStream& rng) {
  spec.validate();
  require(data.cols() == spec.p, "dgmm: data column count must equal p");
  require(data.allFinite(), "dgmm: data must be finite");
  const Eigen::Index n = data.rows();
  require(n >= spec.k[0], "dgmm: need at least k_1 observations");
  const int k_max = *std::max_element(spec.k.begin(), spec.k.end());
  require(n >= k_max + 1, "dgmm: need at least max(k_l) + 1 observations");

  DgmmParams params;
  params.spec = spec;
  params.layers.resize(static_cast<std::size_t>(spec.depth()));
  Matrix working = data;
  const double denom = std::sqrt(static_cast<double>(std::max<Eigen::Index>(n - 1, 1)));
  for (int l = 1; l <= spec.depth(); ++l) {
    const int k = spec.k[l - 1];
    const int r = spec.out_dim(l);
    const Eigen::Index d = working.cols();
    const KmeansResult km = kmeans(working, k, rng);
    Matrix resid(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      resid.row(i) = working.row(i) - km.centers.row(km.assign[static_cast<std::size_t>(i)]);
    Eigen::BDCSVD<Matrix> svd(resid, Eigen::ComputeThinV);
    const Matrix v = svd.matrixV().leftCols(r);
    const Vector s = svd.singularValues().head(r);
    const Matrix lambda = v * (s / denom).asDiagonal();
    const Matrix recon = resid * v * v.transpose();
    Vector psi(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double col_var = resid.col(c).squaredNorm() / std::max<double>(static_cast<double>(n - 1), 1.0);
      const double leftover =
          (resid.col(c) - recon.col(c)).squaredNorm() / std::max<double>(static_cast<double>(n - 1), 1.0);
      psi[c] = std::max(leftover, std::max(1e-6, 1e-3 * col_var));
    }
    Vector inv_scale(r);
    for (int q = 0; q < r; ++q) inv_scale[q] = denom / std::max(s[q], 1e-12);
    Layer layer(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      layer[static_cast<std::size_t>(j)].eta = km.centers.row(j).transpose();
      layer[static_cast<std::size_t>(j)].lambda = lambda;
      layer[static_cast<std::size_t>(j)].psi = psi;
      layer[static_cast<std::size_t>(j)].weight = 1.0 / k;
    }
    params.layers[static_cast<std::size_t>(l - 1)] = std::move(layer);
    working = resid * v * inv_scale.asDiagonal();
  }
  params.validate();
  return params;
}

Matrix tail_posteriors(const DgmmSpec& spec, const Matrix& path_posteriors, int l) {
  spec.validate();
  require(l >= 1 && l <= spec.depth(), "dgmm: layer out of range");
  const auto omega = static_cast<Eigen::Index>(spec.path_count());
  require(path_posteriors.cols() == omega, "dgmm: posterior width must be the path count");
  const auto tail = static_cast<Eigen::Index>(spec.tail_count(l));
  Matrix out = Matrix::Zero(path_posteriors.rows(), tail);
  for (Eigen::Index head = 0; head < omega / tail; ++head)
    out += path_posteriors.middleCols(head * tail, tail);
  return out;
}

Matrix layer_responsibilities(const DgmmSpec& spec, const Matrix& path_posteriors, int l) {
  const Matrix tails = tail_posteriors(spec, path_posteriors, l);
  const auto below = static_cast<Eigen::Index>(spec.tail_count(l + 1));
  Matrix out(path_posteriors.rows(), spec.k[l - 1]);
  for (int j = 0; j < spec.k[l - 1]; ++j)
    out.col(j) = tails.middleCols(j * below, below).rowwise().sum();
  return out;
}

SStepResult s_step(const DgmmParams& params, int l, const Matrix& z_prev,
                   const Matrix& tail_post, RandomStream& rng, int m_replicates) {
  params.validate();
  const DgmmSpec& spec = params.spec;
  require(l >= 1 && l <= spec.depth(), "dgmm: layer out of range");
  require(m_replicates >= 1, "dgmm: need at least one replicate");
  const Eigen::Index n = z_prev.rows();
  require(z_prev.cols() == spec.in_dim(l), "dgmm: z_prev must have the layer input dimension");
  require(z_prev.allFinite(), "dgmm: z_prev must be finite");
  const auto tail_n = static_cast<Eigen::Index>(spec.tail_count(l));
  const auto below = static_cast<Eigen::Index>(spec.tail_count(l + 1));
  require(tail_post.rows() == n && tail_post.cols() == tail_n,
          "dgmm: tail posterior shape mismatch");
  if (!tail_post.allFinite() ||
      ((tail_post.rowwise().sum().array() - 1.0).abs() > 1e-6).any())
    throw std::runtime_error("dgmm: degenerate sub-path posterior in the S-step");
  const int r = spec.out_dim(l);

  std::vector<SubPathComponent> tails;
  if (l == spec.depth())
    tails.push_back({l, {}, 1.0, Vector::Zero(r), Matrix::Identity(r, r)});
  else
    tails = marginal_components(params, l);

  // conditional-posterior pieces shared by every observation with the same
  // sampled sub-path
  struct TailOp {
    Matrix lt_psi_inv;  // r x d_in
    Eigen::LLT<Matrix> prec_llt;
    Vector b0;       // Sigma~^-1 mu~ - Lambda^T Psi^-1 eta
    Matrix xi;       // r x r
    Matrix xi_chol;  // lower factor for sampling
  };
  std::vector<TailOp> ops(static_cast<std::size_t>(tail_n));
  const Matrix identity = Matrix::Identity(r, r);
  for (Eigen::Index t = 0; t < tail_n; ++t) {
    const LayerComponent& c =
        params.layers[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t / below)];
    const SubPathComponent& tail = tails[static_cast<std::size_t>(t % below)];
    TailOp& op = ops[static_cast<std::size_t>(t)];
    const auto tail_llt = cholesky_with_jitter(tail.cov);
    op.lt_psi_inv = c.lambda.transpose() * c.psi.cwiseInverse().asDiagonal();
    Matrix precision = tail_llt.solve(identity) + op.lt_psi_inv * c.lambda;
    op.prec_llt = cholesky_with_jitter(precision);
    Matrix xi = op.prec_llt.solve(identity);
    op.xi = 0.5 * (xi + xi.transpose());
    op.xi_chol = cholesky_with_jitter(op.xi).matrixL();
    op.b0 = tail_llt.solve(tail.mean) - op.lt_psi_inv * c.eta;
  }

  SStepResult res;
  res.layer = l;
  res.tail_index.resize(static_cast<std::size_t>(n));
  res.rho.resize(n, r);
  res.xi.reserve(ops.size());
  for (const TailOp& op : ops) res.xi.push_back(op.xi);
  res.draws.assign(static_cast<std::size_t>(m_replicates), Matrix(n, r));

  const std::uint64_t ticket = rng.ticket();
  Vector eps(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream sub(mix_seed(ticket, static_cast<std::uint64_t>(i)));
    const double u = sub.uniform();
    Eigen::Index t = tail_n - 1;
    double acc = 0.0;
    for (Eigen::Index c = 0; c < tail_n; ++c) {
      acc += tail_post(i, c);
      if (u < acc) {
        t = c;
        break;
      }
    }
    const TailOp& op = ops[static_cast<std::size_t>(t)];
    res.tail_index[static_cast<std::size_t>(i)] = t;
    const Vector rho = op.prec_llt.solve(op.lt_psi_inv * z_prev.row(i).transpose() + op.b0);
    res.rho.row(i) = rho.transpose();
    for (int m = 0; m < m_replicates; ++m) {
      for (int q = 0; q < r; ++q) eps[q] = sub.normal();
      res.draws[static_cast<std::size_t>(m)].row(i) = (rho + op.xi_chol * eps).transpose();
    }
  }
  for (const Matrix& d : res.draws)
    if (!d.allFinite()) throw std::runtime_error("dgmm: non-finite S-step draw");
  return res;
}

Matrix draw_average(const SStepResult& s) {
  require(!s.draws.empty(), "dgmm: S-step result holds no draws");
  Matrix avg = s.draws[0];
  for (std::size_t m = 1; m < s.draws.size(); ++m) avg += s.draws[m];
  return avg / static_cast<double>(s.draws.size());
}

Moments e_step_moments(const SStepResult& s, EStepMode mode) {
  require(!s.draws.empty(), "dgmm: S-step result holds no draws");
  const Eigen::Index n = s.rho.rows();
  const auto r = s.rho.cols();
  Moments mom;
  mom.second.resize(static_cast<std::size_t>(n));
  if (mode == EStepMode::exact_moments) {
    mom.first = s.rho;
    for (Eigen::Index i = 0; i < n; ++i)
      mom.second[static_cast<std::size_t>(i)] =
          s.xi[static_cast<std::size_t>(s.tail_index[static_cast<std::size_t>(i)])] +
          s.rho.row(i).transpose() * s.rho.row(i);
  } else {
    mom.first = draw_average(s);
    const double inv_m = 1.0 / static_cast<double>(s.draws.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix acc = Matrix::Zero(r, r);
      for (const Matrix& d : s.draws) acc.noalias() += d.row(i).transpose() * d.row(i);
      mom.second[static_cast<std::size_t>(i)] = acc * inv_m;
    }
  }
  return mom;
}

Layer m_step_layer(const DgmmParams& params, int l, const Matrix& z_prev,
                   const Moments& moments, const Matrix& responsibilities) {
  params.validate();
  const DgmmSpec& spec = params.spec;
  require(l >= 1 && l <= spec.depth(), "dgmm: layer out of range");
  const Eigen::Index n = z_prev.rows();
  const int d = spec.in_dim(l);
  const int r = spec.out_dim(l);
  const int k = spec.k[l - 1];
  require(z_prev.cols() == d, "dgmm: z_prev must have the layer input dimension");
  require(moments.first.rows() == n && moments.first.cols() == r &&
              static_cast<Eigen::Index>(moments.second.size()) == n,
          "dgmm: moment shapes inconsistent with the layer");
  require(responsibilities.rows() == n && responsibilities.cols() == k,
          "dgmm: responsibilities must be n x k_l");

  Layer out = params.layers[static_cast<std::size_t>(l - 1)];
  Vector new_weights(k);
  for (int j = 0; j < k; ++j) {
    const Vector w = responsibilities.col(j);
    const double weight_sum = w.sum();
    new_weights[j] = weight_sum / static_cast<double>(n);
    if (weight_sum <= 1e-12 * static_cast<double>(n)) continue;  // starved: keep stale

    const Matrix& lambda_old = params.layers[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)].lambda;
    const Vector eta =
        (z_prev.transpose() * w - lambda_old * (moments.first.transpose() * w)) / weight_sum;
    const Matrix centered = z_prev.rowwise() - eta.transpose();
    const Matrix weighted_m1 = moments.first.array().colwise() * w.array();
    const Matrix a = centered.transpose() * weighted_m1;  // d x r
    Matrix b = Matrix::Zero(r, r);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wi = w[i];
      if (wi != 0.0) b.noalias() += wi * moments.second[static_cast<std::size_t>(i)];
    }
    const auto b_llt = cholesky_with_jitter(b);
    const Matrix lambda = b_llt.solve(a.transpose()).transpose();
    const Vector cross = (lambda.array() * a.array()).rowwise().sum();
    const Vector sq = (centered.array().square().colwise() * w.array()).colwise().sum().transpose();
    const Vector psi = ((sq - cross) / weight_sum).cwiseMax(1e-6);

    LayerComponent& c = out[static_cast<std::size_t>(j)];
    c.eta = eta;
    c.lambda = lambda;
    c.psi = psi;
  }
  new_weights = new_weights.cwiseMax(1e-12);
  new_weights /= new_weights.sum();
  for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(j)].weight = new_weights[j];
  return out;
}

DgmmParams enforce_identifiability(const DgmmParams& params) {
  params.validate();
  DgmmParams out = params;
  // Only the deepest layer is transformed. There the latent prior is
  // N(0, I), which is invariant under any orthogonal map, so rotating the
  // loadings cannot change the collapsed mixture. At interior layers the
  // latent follows a non-standard nested mixture: rotating those loadings
  // would alter the density, and no compensating in-family transformation
  // exists (pushing the rotation into the next layer would de-diagonalize
  // its noise covariance, and per-component rotations cannot be shared by
  // the layer below). Interior loadings are therefore left as fitted, at
  // the cost of the diagonality convention holding only at the last layer.
  Layer& layer = out.layers.back();
  for (LayerComponent& c : layer) {
    const Matrix g =
        c.lambda.transpose() * c.psi.cwiseInverse().asDiagonal() * c.lambda;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.transpose()));
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("dgmm: eigendecomposition failed during identifiability step");
    const auto r = c.lambda.cols();
    Matrix v(r, r);
    for (Eigen::Index q = 0; q < r; ++q) v.col(q) = eig.eigenvectors().col(r - 1 - q);
    Matrix rotated = c.lambda * v;
    for (Eigen::Index q = 0; q < r; ++q) {
      for (Eigen::Index i = 0; i < rotated.rows(); ++i) {
        const double x = rotated(i, q);
        if (x != 0.0) {
          if (x < 0.0) rotated.col(q) = -rotated.col(q);
          break;
        }
      }
    }
    c.lambda = std::move(rotated);
  }
  return out;
}

namespace {

struct ChainOutcome {
  bool failed = true;
  std::string error;
  DgmmParams params;
  DgmmParams averaged;
  std::vector<double> trace;
  double avg_loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Running sum of component-aligned parameters; identities are stable within
// a chain, so plain averaging is meaningful.
struct ParamAccum {
  DgmmParams sum;
  long count = 0;

  void add(const DgmmParams& p) {
    if (count == 0) {
      sum = p;
      count = 1;
      return;
    }
    for (std::size_t l = 0; l < p.layers.size(); ++l)
      for (std::size_t j = 0; j < p.layers[l].size(); ++j) {
        sum.layers[l][j].eta += p.layers[l][j].eta;
        sum.layers[l][j].lambda += p.layers[l][j].lambda;
        sum.layers[l][j].psi += p.layers[l][j].psi;
        sum.layers[l][j].weight += p.layers[l][j].weight;
      }
    ++count;
  }

  DgmmParams mean() const {
    DgmmParams m = sum;
    const double inv = 1.0 / static_cast<double>(count);
    for (auto& layer : m.layers)
      for (auto& c : layer) {
        c.eta *= inv;
        c.lambda *= inv;
        c.psi *= inv;
        c.weight *= inv;
      }
    return m;
  }
};

bool window_converged(const std::vector<double>& trace, int burn_in, double tol) {
  constexpr int kWindow = 20;
  if (static_cast<int>(trace.size()) < burn_in + 2 * kWindow) return false;
  const auto end = trace.end();
  const double recent = std::accumulate(end - kWindow, end, 0.0) / kWindow;
  const double earlier = std::accumulate(end - 2 * kWindow, end - kWindow, 0.0) / kWindow;
  return std::abs(recent - earlier) <= tol * std::abs(earlier);
}

ChainOutcome run_chain(const DgmmSpec& spec, const Matrix& data,
                       const FitConfig& config, int chain) {
  ChainOutcome out;
  try {
    RandomStream rng(mix_seed(config.seed, static_cast<std::uint64_t>(chain)));
    DgmmParams params = init_params(spec, data, rng);
    ParamAccum accum;
    const int h = spec.depth();
    for (int iter = 0; iter < config.max_iters; ++iter) {
      ModelEval eval(params);
      double loglik = 0.0;
      const Matrix post = eval.posterior_matrix(data, &loglik);
      out.trace.push_back(loglik);
      std::vector<double> layer_seconds(static_cast<std::size_t>(h), 0.0);
      Matrix z_prev = data;
      for (int l = 1; l <= h; ++l) {
        const double t0 = now_seconds();
        const Matrix tail_post = tail_posteriors(spec, post, l);
        const SStepResult s = s_step(params, l, z_prev, tail_post, rng, config.m_replicates);
        const Moments mom = e_step_moments(s, config.e_step_mode);
        const Matrix resp = layer_responsibilities(spec, post, l);
        params.layers[static_cast<std::size_t>(l - 1)] =
            m_step_layer(params, l, z_prev, mom, resp);
        z_prev = config.e_step_mode == EStepMode::monte_carlo ? mom.first : draw_average(s);
        layer_seconds[static_cast<std::size_t>(l - 1)] = now_seconds() - t0;
      }
      params = enforce_identifiability(params);
      if (iter >= config.burn_in) accum.add(params);
      if (config.progress) config.progress({chain, iter, loglik, layer_seconds});
      if (window_converged(out.trace, config.burn_in, config.tol)) {
        out.converged = true;
        break;
      }
    }
    out.averaged =
        accum.count > 0 ? enforce_identifiability(accum.mean()) : params;
    out.avg_loglik = log_likelihood(out.averaged, data);
    out.params = std::move(params);
    out.failed = false;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

FitResult fit(const DgmmSpec& spec, const Matrix& data, const FitConfig& config) {
  spec.validate();
  config.validate();
  require(data.cols() == spec.p, "dgmm: data column count must equal p");
  require(data.allFinite(), "dgmm: data must be finite");
  require(data.rows() > spec.k[0],
          "dgmm: need more observations than first-layer components");

  std::vector<ChainOutcome> chains(static_cast<std::size_t>(config.n_starts));
  detail::parallel_for(chains.size(), config.threads, [&](std::size_t c) {
    chains[c] = run_chain(spec, data, config, static_cast<int>(c));
  });

  int best = -1;
  for (int c = 0; c < config.n_starts; ++c) {
    const ChainOutcome& o = chains[static_cast<std::size_t>(c)];
    if (o.failed || !std::isfinite(o.avg_loglik)) continue;
    if (best < 0 || o.avg_loglik > chains[static_cast<std::size_t>(best)].avg_loglik) best = c;
  }
  if (best < 0) {
    std::string msg = "dgmm: all " + std::to_string(config.n_starts) + " chains failed";
    int shown = 0;
    for (int c = 0; c < config.n_starts && shown < 3; ++c, ++shown)
      msg += "; chain " + std::to_string(c) + ": " + chains[static_cast<std::size_t>(c)].error;
    throw std::runtime_error(msg);
  }

  ChainOutcome& winner = chains[static_cast<std::size_t>(best)];
  FitResult res;
  res.params = std::move(winner.params);
  res.averaged_params = std::move(winner.averaged);
  res.loglik_trace = std::move(winner.trace);
  res.converged = winner.converged;
  res.best_chain = best;
  const ModelEval eval(res.averaged_params);
  res.path_posteriors = eval.posterior_matrix(data, &res.loglik);
  res.bic = bic(res.loglik, count_params(spec), data.rows());
  const auto block = static_cast<Eigen::Index>(spec.tail_count(2));
  res.labels.resize(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    int label = 0;
    double best_mass = -1.0;
    for (int j = 0; j < spec.k[0]; ++j) {
      const double mass = res.path_posteriors.row(i).segment(j * block, block).sum();
      if (mass > best_mass) {
        best_mass = mass;
        label = j;
      }
    }
    res.labels[static_cast<std::size_t>(i)] = label + 1;
  }
  return res;
}

}  // namespace dgmm

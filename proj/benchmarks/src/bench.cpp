// Microbenchmarks for the hot paths: density evaluation, path collapse,
// posterior computation, the sampling and maximization steps, a short fit,
// and the clustering metrics.

#include <benchmark/benchmark.h>

#include <vector>

#include "dgmm/data.hpp"
#include "dgmm/metrics.hpp"
#include "dgmm/model.hpp"
#include "dgmm/random.hpp"
#include "dgmm/sem.hpp"

namespace {

using dgmm::Matrix;
using dgmm::Vector;

dgmm::DgmmSpec make_spec(int p, std::vector<int> k, std::vector<int> r) {
  dgmm::DgmmSpec spec;
  spec.p = p;
  spec.k = std::move(k);
  spec.r = std::move(r);
  return spec;
}

dgmm::DgmmParams random_params(const dgmm::DgmmSpec& spec, dgmm::RandomStream& rng) {
  dgmm::DgmmParams params;
  params.spec = spec;
  params.layers.resize(spec.k.size());
  for (int l = 1; l <= spec.depth(); ++l) {
    const int d = spec.in_dim(l);
    const int r = spec.out_dim(l);
    dgmm::Layer layer(static_cast<std::size_t>(spec.k[static_cast<std::size_t>(l - 1)]));
    for (auto& c : layer) {
      c.eta = Vector::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
      c.lambda = Matrix::NullaryExpr(
          d, r, [&](Eigen::Index, Eigen::Index) { return 0.5 * rng.normal(); });
      c.psi = Vector::Constant(d, 0.8);
      c.weight = 1.0 / static_cast<double>(layer.size());
    }
    params.layers[static_cast<std::size_t>(l - 1)] = std::move(layer);
  }
  return params;
}

Matrix random_data(int n, int p, dgmm::RandomStream& rng) {
  return Matrix::NullaryExpr(n, p,
                             [&](Eigen::Index, Eigen::Index) { return 2.0 * rng.normal(); });
}

void BM_GaussianLogDensity(benchmark::State& state) {
  dgmm::RandomStream rng(1);
  const int p = 10;
  dgmm::Gaussian g;
  g.mean = Vector::Zero(p);
  Matrix a = Matrix::NullaryExpr(p, p, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
  g.cov = a * a.transpose() + Matrix::Identity(p, p);
  const dgmm::GaussianLik lik(g);
  const Vector x = Vector::NullaryExpr(p, [&](Eigen::Index) { return rng.normal(); });
  for (auto _ : state) benchmark::DoNotOptimize(lik.log_density(x));
}
BENCHMARK(BM_GaussianLogDensity);

void BM_CollapsePath(benchmark::State& state) {
  dgmm::RandomStream rng(2);
  const auto params = random_params(make_spec(10, {3, 2, 2}, {5, 3, 1}), rng);
  const dgmm::Path path{1, 0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(dgmm::collapse_path(params, path));
}
BENCHMARK(BM_CollapsePath);

void BM_PosteriorMatrix(benchmark::State& state) {
  dgmm::RandomStream rng(3);
  const auto params = random_params(make_spec(3, {4, 2}, {2, 1}), rng);
  const Matrix data = random_data(500, 3, rng);
  const dgmm::ModelEval eval(params);
  for (auto _ : state) benchmark::DoNotOptimize(eval.posterior_matrix(data));
}
BENCHMARK(BM_PosteriorMatrix);

void BM_SamplingStep(benchmark::State& state) {
  dgmm::RandomStream rng(4);
  const auto params = random_params(make_spec(3, {4, 2}, {2, 1}), rng);
  const Matrix data = random_data(500, 3, rng);
  const dgmm::ModelEval eval(params);
  const Matrix post = eval.posterior_matrix(data);
  const Matrix tails = dgmm::tail_posteriors(params.spec, post, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(dgmm::s_step(params, 1, data, tails, rng, 10));
}
BENCHMARK(BM_SamplingStep);

void BM_MaximizationStep(benchmark::State& state) {
  dgmm::RandomStream rng(5);
  const auto params = random_params(make_spec(3, {4, 2}, {2, 1}), rng);
  const Matrix data = random_data(500, 3, rng);
  const dgmm::ModelEval eval(params);
  const Matrix post = eval.posterior_matrix(data);
  const Matrix tails = dgmm::tail_posteriors(params.spec, post, 1);
  const Matrix resp = dgmm::layer_responsibilities(params.spec, post, 1);
  const auto s = dgmm::s_step(params, 1, data, tails, rng, 10);
  const auto moments = dgmm::e_step_moments(s, dgmm::EStepMode::monte_carlo);
  for (auto _ : state)
    benchmark::DoNotOptimize(dgmm::m_step_layer(params, 1, data, moments, resp));
}
BENCHMARK(BM_MaximizationStep);

void BM_ShortFit(benchmark::State& state) {
  dgmm::RandomStream rng(6);
  const dgmm::Dataset ds = dgmm::generate_smiley(200, 0.45, 0.35, 0.5, rng);
  dgmm::FitConfig config;
  config.n_starts = 1;
  config.max_iters = 5;
  config.burn_in = 1;
  config.seed = 7;
  const auto spec = make_spec(3, {4, 1}, {2, 1});
  for (auto _ : state) benchmark::DoNotOptimize(dgmm::fit(spec, ds.x, config));
}
BENCHMARK(BM_ShortFit);

void BM_AdjustedRandIndex(benchmark::State& state) {
  dgmm::RandomStream rng(8);
  const int n = 100000;
  std::vector<int> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.index(10));
    b[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.index(10));
  }
  for (auto _ : state) benchmark::DoNotOptimize(dgmm::adjusted_rand_index(a, b));
}
BENCHMARK(BM_AdjustedRandIndex);

}  // namespace

BENCHMARK_MAIN();

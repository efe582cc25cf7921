#include "dgmm/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "dgmm/metrics.hpp"
#include "dgmm/parallel.hpp"

namespace dgmm {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void descending_chains(int below, int length, std::vector<int>& prefix,
                       std::vector<std::vector<int>>& out) {
  if (length == 0) {
    out.push_back(prefix);
    return;
  }
  // keep room for the remaining strictly decreasing entries down to 1
  for (int r = length; r <= below - 1; ++r) {
    prefix.push_back(r);
    descending_chains(r, length - 1, prefix, out);
    prefix.pop_back();
  }
}

std::string join_dash(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(v[i]);
  }
  return s;
}

void append_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

long count_params(const DgmmSpec& spec) {
  spec.validate();
  long total = 0;
  long d = spec.p;
  for (int l = 0; l < spec.depth(); ++l) {
    const long k = spec.k[static_cast<std::size_t>(l)];
    const long r = spec.r[static_cast<std::size_t>(l)];
    total += k * (d + (d * r - r * (r - 1) / 2) + d) + (k - 1);
    d = r;
  }
  return total;
}

double bic(double loglik, long n_params, Eigen::Index n) {
  require(n >= 1, "dgmm: BIC needs at least one observation");
  require(n_params >= 0, "dgmm: parameter count must be nonnegative");
  return -2.0 * loglik + static_cast<double>(n_params) * std::log(static_cast<double>(n));
}

std::vector<DgmmSpec> enumerate_search_grid(int p, const SearchSpace& space) {
  require(p >= 2, "dgmm: need at least 2 observed dimensions to search");
  require(space.k1 >= 1, "dgmm: k1 must be >= 1");
  require(space.hidden_k_min >= 1 && space.hidden_k_min <= space.hidden_k_max,
          "dgmm: hidden component range must satisfy 1 <= min <= max");

  std::vector<std::vector<int>> chains;
  if (!space.r_chains.empty()) {
    chains = space.r_chains;
  } else {
    require(!space.h_values.empty(), "dgmm: no layer counts to search");
    std::set<int> hs(space.h_values.begin(), space.h_values.end());
    for (int h : hs) {
      require(h >= 1, "dgmm: layer counts must be >= 1");
      std::vector<int> prefix;
      descending_chains(p, h, prefix, chains);
    }
  }

  std::vector<DgmmSpec> grid;
  for (const auto& chain : chains) {
    DgmmSpec spec;
    spec.p = p;
    spec.r = chain;
    spec.k.assign(chain.size(), space.hidden_k_min);
    spec.k[0] = space.k1;
    spec.validate();
    for (;;) {
      grid.push_back(spec);
      // odometer over hidden-layer component counts, last layer fastest
      int l = spec.depth() - 1;
      for (; l >= 1; --l) {
        if (spec.k[static_cast<std::size_t>(l)] < space.hidden_k_max) {
          ++spec.k[static_cast<std::size_t>(l)];
          break;
        }
        spec.k[static_cast<std::size_t>(l)] = space.hidden_k_min;
      }
      if (l < 1) break;
    }
  }
  if (grid.empty())
    throw std::invalid_argument("dgmm: the search grid is empty after applying p > r_1 > ... >= 1");
  return grid;
}

SearchResult model_search(const Matrix& data, const SearchSpace& space,
                          const FitConfig& config,
                          const std::vector<int>* true_labels) {
  config.validate();
  require(data.rows() >= 2 && data.cols() >= 2, "dgmm: need an n x p data matrix with p >= 2");
  if (true_labels)
    require(static_cast<Eigen::Index>(true_labels->size()) == data.rows(),
            "dgmm: true labels must have one entry per observation");
  const std::vector<DgmmSpec> grid = enumerate_search_grid(static_cast<int>(data.cols()), space);

  std::vector<ModelScore> table(grid.size());
  detail::parallel_for(grid.size(), config.threads, [&](std::size_t idx) {
    const DgmmSpec& spec = grid[idx];
    ModelScore& score = table[idx];
    score.spec = spec;
    score.n_params = count_params(spec);
    FitConfig local = config;
    local.threads = 1;  // the grid is the parallel unit
    const std::string key = spec.to_string();
    local.seed = mix_seed(config.seed, fnv1a(key.data(), key.size()));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto result = std::make_shared<FitResult>(fit(spec, data, local));
      score.loglik = result->loglik;
      score.bic = result->bic;
      if (true_labels) score.ari = adjusted_rand_index(*true_labels, result->labels);
      score.fit = std::move(result);
    } catch (const std::exception& e) {
      score.failed = true;
      score.error = e.what();
    }
    score.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  std::stable_sort(table.begin(), table.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.failed != b.failed) return !a.failed;
    if (a.failed) return false;
    return a.bic < b.bic;
  });
  if (table.front().failed)
    throw std::runtime_error("dgmm: every candidate fit failed; first error: " +
                             table.front().error);
  SearchResult res;
  res.table = std::move(table);
  res.best_index = 0;
  return res;
}

std::string score_table_csv(const SearchResult& result) {
  std::string out = "h,k_chain,r_chain,loglik,n_params,bic,ari,runtime_s\n";
  for (const ModelScore& s : result.table) {
    out += std::to_string(s.spec.depth());
    out += ',';
    out += join_dash(s.spec.k);
    out += ',';
    out += join_dash(s.spec.r);
    out += ',';
    if (!s.failed) append_value(out, s.loglik);
    out += ',';
    out += std::to_string(s.n_params);
    out += ',';
    if (!s.failed) append_value(out, s.bic);
    out += ',';
    if (!s.failed && std::isfinite(s.ari)) append_value(out, s.ari);
    out += ',';
    append_value(out, s.runtime_s);
    out += '\n';
  }
  return out;
}

}  // namespace dgmm

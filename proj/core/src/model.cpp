#include "dgmm/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dgmm {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::size_t checked_product(const std::vector<int>& k, std::size_t from) {
  std::size_t n = 1;
  for (std::size_t i = from; i < k.size(); ++i) {
    const auto f = static_cast<std::size_t>(k[i]);
    require(f == 0 || n <= std::numeric_limits<std::size_t>::max() / f,
            "dgmm: path count overflows the index type");
    n *= f;
  }
  return n;
}

struct TailMoments {
  Vector mean;
  Matrix cov;
  double weight = 1.0;
};

// Integrates out layers h down to `first` (1-based) for fixed component
// choices, where choices[l - first] picks the component of layer l. With
// first = h + 1 this returns the z^(h) prior N(0, I).
TailMoments collapse_from(const DgmmParams& params, int first, const int* choices) {
  const int h = params.spec.depth();
  const int rh = params.spec.r[h - 1];
  TailMoments t;
  t.mean = Vector::Zero(rh);
  t.cov = Matrix::Identity(rh, rh);
  for (int l = h; l >= first; --l) {
    const LayerComponent& c = params.layers[l - 1][choices[l - first]];
    t.mean = (c.eta + c.lambda * t.mean).eval();
    Matrix next = c.lambda * t.cov * c.lambda.transpose();
    next.diagonal() += c.psi;
    t.cov = 0.5 * (next + next.transpose());
    t.weight *= c.weight;
  }
  return t;
}

// Marginal mixtures of z^(l) for every l in [0, h], built bottom-up so the
// sub-path moments are shared; result[l] is ordered lexicographically in
// (s_{l+1}, ..., s_h), matching path order at l = 0.
std::vector<std::vector<SubPathComponent>> all_tail_components(const DgmmParams& params) {
  const int h = params.spec.depth();
  const int rh = params.spec.r[h - 1];
  std::vector<std::vector<SubPathComponent>> tails(h + 1);
  tails[h].push_back({h, {}, 1.0, Vector::Zero(rh), Matrix::Identity(rh, rh)});
  for (int l = h - 1; l >= 0; --l) {
    const Layer& layer = params.layers[l];
    const auto& below = tails[l + 1];
    auto& out = tails[l];
    out.reserve(layer.size() * below.size());
    for (std::size_t j = 0; j < layer.size(); ++j) {
      const LayerComponent& c = layer[j];
      for (const SubPathComponent& t : below) {
        SubPathComponent s;
        s.layer = l;
        s.sub_path.reserve(t.sub_path.size() + 1);
        s.sub_path.push_back(static_cast<int>(j));
        s.sub_path.insert(s.sub_path.end(), t.sub_path.begin(), t.sub_path.end());
        s.weight = c.weight * t.weight;
        s.mean = c.eta + c.lambda * t.mean;
        Matrix cov = c.lambda * t.cov * c.lambda.transpose();
        cov.diagonal() += c.psi;
        s.cov = 0.5 * (cov + cov.transpose());
        out.push_back(std::move(s));
      }
    }
  }
  return tails;
}

// Normalizes log joint probabilities in place to a probability vector;
// optionally reports the log-sum-exp (the row log-likelihood).
void normalize_log_joint(Vector& lj, double* lse_out) {
  const double lse = log_sum_exp(lj);
  if (!std::isfinite(lse))
    throw std::runtime_error(
        "dgmm: degenerate parameters: observation has no finite path density");
  lj = (lj.array() - lse).exp().matrix();
  lj /= lj.sum();
  if (lse_out) *lse_out = lse;
}

}  // namespace

std::size_t DgmmSpec::path_count() const { return checked_product(k, 0); }

std::size_t DgmmSpec::tail_count(int l) const {
  require(l >= 1 && l <= depth() + 1, "dgmm: tail layer out of range");
  return checked_product(k, static_cast<std::size_t>(l - 1));
}

void DgmmSpec::validate() const {
  require(!k.empty(), "dgmm: spec needs at least one layer");
  require(k.size() == r.size(), "dgmm: k and r need one entry per layer");
  require(p >= 1, "dgmm: observed dimension must be positive");
  int prev = p;
  for (std::size_t l = 0; l < k.size(); ++l) {
    require(k[l] >= 1, "dgmm: component counts must be >= 1");
    require(r[l] >= 1 && r[l] < prev,
            "dgmm: latent dimensions must satisfy p > r_1 > ... > r_h >= 1");
    prev = r[l];
  }
  checked_product(k, 0);
}

std::string DgmmSpec::to_string() const {
  std::ostringstream os;
  os << "h=" << depth() << " k=";
  for (int l = 0; l < depth(); ++l) os << (l ? "," : "") << k[l];
  os << " r=";
  for (int l = 0; l < depth(); ++l) os << (l ? "," : "") << r[l];
  os << " p=" << p;
  return os.str();
}

void DgmmParams::validate() const {
  spec.validate();
  require(static_cast<int>(layers.size()) == spec.depth(),
          "dgmm: params must have one component list per layer");
  for (int l = 1; l <= spec.depth(); ++l) {
    const Layer& layer = layers[l - 1];
    require(static_cast<int>(layer.size()) == spec.k[l - 1],
            "dgmm: wrong component count at layer " + std::to_string(l));
    const int d_in = spec.in_dim(l);
    const int d_out = spec.out_dim(l);
    double weight_sum = 0.0;
    for (const LayerComponent& c : layer) {
      require(c.eta.size() == d_in && c.psi.size() == d_in &&
                  c.lambda.rows() == d_in && c.lambda.cols() == d_out,
              "dgmm: component shapes inconsistent with spec at layer " +
                  std::to_string(l));
      require(c.eta.allFinite() && c.lambda.allFinite() && c.psi.allFinite(),
              "dgmm: component parameters must be finite");
      require((c.psi.array() > 0.0).all(), "dgmm: psi entries must be positive");
      require(std::isfinite(c.weight) && c.weight > 0.0 && c.weight <= 1.0,
              "dgmm: component weights must lie in (0, 1]");
      weight_sum += c.weight;
    }
    require(std::abs(weight_sum - 1.0) <= 1e-10,
            "dgmm: layer weights must sum to 1");
  }
}

std::size_t path_index(const DgmmSpec& spec, const Path& path) {
  require(static_cast<int>(path.size()) == spec.depth(),
          "dgmm: path length must equal the layer count");
  std::size_t idx = 0;
  for (int l = 0; l < spec.depth(); ++l) {
    require(path[l] >= 0 && path[l] < spec.k[l], "dgmm: path entry out of range");
    idx = idx * static_cast<std::size_t>(spec.k[l]) + static_cast<std::size_t>(path[l]);
  }
  return idx;
}

Path path_from_index(const DgmmSpec& spec, std::size_t index) {
  require(index < spec.path_count(), "dgmm: path index out of range");
  Path path(spec.depth());
  for (int l = spec.depth() - 1; l >= 0; --l) {
    const auto k = static_cast<std::size_t>(spec.k[l]);
    path[l] = static_cast<int>(index % k);
    index /= k;
  }
  return path;
}

PathTable enumerate_paths(const DgmmParams& params) {
  params.validate();
  const std::size_t n = params.spec.path_count();
  PathTable table;
  table.paths.reserve(n);
  table.weights.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Path path = path_from_index(params.spec, i);
    double w = 1.0;
    for (int l = 0; l < params.spec.depth(); ++l) w *= params.layers[l][path[l]].weight;
    table.weights[static_cast<Eigen::Index>(i)] = w;
    table.paths.push_back(std::move(path));
  }
  return table;
}

CollapsedComponent collapse_path(const DgmmParams& params, const Path& path) {
  params.validate();
  path_index(params.spec, path);
  TailMoments t = collapse_from(params, 1, path.data());
  return {path, t.weight, std::move(t.mean), std::move(t.cov)};
}

std::vector<SubPathComponent> marginal_components(const DgmmParams& params, int l) {
  params.validate();
  require(l >= 0 && l <= params.spec.depth() - 1, "dgmm: marginal layer out of range");
  return all_tail_components(params)[l];
}

double log_likelihood(const DgmmParams& params, const Matrix& data) {
  return ModelEval(params).total_log_likelihood(data);
}

Vector path_posterior(const DgmmParams& params, const Vector& y) {
  ModelEval eval(params);
  Vector lj = eval.log_joint(y);
  normalize_log_joint(lj, nullptr);
  return lj;
}

Gaussian conditional_gaussian(const Matrix& lambda, const Vector& psi,
                              const Vector& eta, const Vector& tail_mean,
                              const Matrix& tail_cov, const Vector& z_prev) {
  const Eigen::Index d_in = lambda.rows();
  const Eigen::Index d_out = lambda.cols();
  require(psi.size() == d_in && eta.size() == d_in && z_prev.size() == d_in,
          "dgmm: conditional input dimensions must match the layer");
  require(tail_mean.size() == d_out && tail_cov.rows() == d_out && tail_cov.cols() == d_out,
          "dgmm: conditional tail dimensions must match the layer");
  require((psi.array() > 0.0).all(), "dgmm: psi entries must be positive");
  const auto tail_llt = cholesky_with_jitter(tail_cov);
  const Matrix lt_psi_inv = lambda.transpose() * psi.cwiseInverse().asDiagonal();
  const Matrix identity = Matrix::Identity(d_out, d_out);
  Matrix precision = tail_llt.solve(identity) + lt_psi_inv * lambda;
  const auto prec_llt = cholesky_with_jitter(precision);
  Gaussian g;
  g.mean = prec_llt.solve(lt_psi_inv * (z_prev - eta) + tail_llt.solve(tail_mean));
  Matrix xi = prec_llt.solve(identity);
  g.cov = 0.5 * (xi + xi.transpose());
  return g;
}

Gaussian conditional_posterior(const DgmmParams& params, int l,
                               const Vector& z_prev, const Path& path) {
  params.validate();
  const int h = params.spec.depth();
  require(l >= 1 && l <= h, "dgmm: conditional layer out of range");
  path_index(params.spec, path);
  require(z_prev.size() == params.spec.in_dim(l),
          "dgmm: z_prev must have the layer input dimension");
  const TailMoments tail = collapse_from(params, l + 1, path.data() + l);
  const LayerComponent& c = params.layers[l - 1][path[l - 1]];
  return conditional_gaussian(c.lambda, c.psi, c.eta, tail.mean, tail.cov, z_prev);
}

std::vector<int> classify(const DgmmParams& params, const Matrix& data) {
  ModelEval eval(params);
  const DgmmSpec& spec = eval.params().spec;
  require(data.cols() == spec.p, "dgmm: data column count must equal p");
  require(data.allFinite(), "dgmm: data must be finite");
  const auto block = static_cast<Eigen::Index>(spec.tail_count(2));
  std::vector<int> labels(static_cast<std::size_t>(data.rows()));
  Vector lj;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    lj = eval.log_joint(data.row(i).transpose());
    normalize_log_joint(lj, nullptr);
    int best = 0;
    double best_mass = -1.0;
    for (int j = 0; j < spec.k[0]; ++j) {
      const double mass = lj.segment(j * block, block).sum();
      if (mass > best_mass) {
        best = j;
        best_mass = mass;
      }
    }
    labels[static_cast<std::size_t>(i)] = best + 1;
  }
  return labels;
}

ModelEval::ModelEval(const DgmmParams& params) : params_(params) {
  params_.validate();
  table_ = enumerate_paths(params_);
  tails_ = all_tail_components(params_);
  const auto& components = tails_[0];
  collapsed_.reserve(components.size());
  log_weights_.resize(static_cast<Eigen::Index>(components.size()));
  for (std::size_t j = 0; j < components.size(); ++j) {
    collapsed_.emplace_back(Gaussian{components[j].mean, components[j].cov});
    log_weights_[static_cast<Eigen::Index>(j)] =
        std::log(table_.weights[static_cast<Eigen::Index>(j)]);
  }
}

Vector ModelEval::log_joint(const Vector& y) const {
  Vector lj(static_cast<Eigen::Index>(collapsed_.size()));
  for (std::size_t j = 0; j < collapsed_.size(); ++j)
    lj[static_cast<Eigen::Index>(j)] =
        log_weights_[static_cast<Eigen::Index>(j)] + collapsed_[j].log_density(y);
  return lj;
}

double ModelEval::row_log_likelihood(const Vector& y) const {
  return log_sum_exp(log_joint(y));
}

double ModelEval::total_log_likelihood(const Matrix& data) const {
  require(data.cols() == params_.spec.p, "dgmm: data column count must equal p");
  require(data.allFinite(), "dgmm: data must be finite");
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    total += row_log_likelihood(data.row(i).transpose());
  return total;
}

Matrix ModelEval::posterior_matrix(const Matrix& data, double* total_loglik) const {
  require(data.cols() == params_.spec.p, "dgmm: data column count must equal p");
  require(data.allFinite(), "dgmm: data must be finite");
  Matrix post(data.rows(), static_cast<Eigen::Index>(collapsed_.size()));
  double total = 0.0;
  Vector lj;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    lj = log_joint(data.row(i).transpose());
    double lse = 0.0;
    normalize_log_joint(lj, &lse);
    post.row(i) = lj.transpose();
    total += lse;
  }
  if (total_loglik) *total_loglik = total;
  return post;
}

Matrix ModelEval::posterior_matrix(const Matrix& data) const {
  return posterior_matrix(data, nullptr);
}

namespace {

void write_value(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

void write_vector(std::ostream& os, const char* key, const Vector& v) {
  os << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << ' ';
    write_value(os, v[i]);
  }
  os << '\n';
}

void write_matrix(std::ostream& os, const char* key, const Matrix& m) {
  os << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      write_value(os, m(r, c));
    }
    os << '\n';
  }
}

std::string next_token(std::istream& is) {
  std::string t;
  if (!(is >> t)) throw std::runtime_error("dgmm: truncated parameter file");
  return t;
}

void expect(std::istream& is, const char* token) {
  const std::string t = next_token(is);
  if (t != token)
    throw std::runtime_error("dgmm: malformed parameter file: expected '" +
                             std::string(token) + "', got '" + t + "'");
}

long read_int(std::istream& is) {
  long v = 0;
  if (!(is >> v)) throw std::runtime_error("dgmm: malformed integer in parameter file");
  return v;
}

double read_double(std::istream& is) {
  double v = 0.0;
  if (!(is >> v)) throw std::runtime_error("dgmm: malformed number in parameter file");
  return v;
}

Vector read_vector(std::istream& is, const char* key) {
  expect(is, key);
  const long n = read_int(is);
  if (n < 0) throw std::runtime_error("dgmm: negative vector length in parameter file");
  Vector v(n);
  for (long i = 0; i < n; ++i) v[i] = read_double(is);
  return v;
}

Matrix read_matrix(std::istream& is, const char* key) {
  expect(is, key);
  const long rows = read_int(is);
  const long cols = read_int(is);
  if (rows < 0 || cols < 0)
    throw std::runtime_error("dgmm: negative matrix shape in parameter file");
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = read_double(is);
  return m;
}

}  // namespace

void save_params(const DgmmParams& params, std::ostream& os) {
  params.validate();
  os << "dgmm-params 1\n";
  os << "p " << params.spec.p << '\n';
  os << "h " << params.spec.depth() << '\n';
  os << "k";
  for (int v : params.spec.k) os << ' ' << v;
  os << '\n' << "r";
  for (int v : params.spec.r) os << ' ' << v;
  os << '\n';
  for (int l = 1; l <= params.spec.depth(); ++l) {
    for (int j = 1; j <= params.spec.k[l - 1]; ++j) {
      const LayerComponent& c = params.layers[l - 1][j - 1];
      os << "layer " << l << " component " << j << '\n';
      os << "weight ";
      write_value(os, c.weight);
      os << '\n';
      write_vector(os, "eta", c.eta);
      write_matrix(os, "lambda", c.lambda);
      write_vector(os, "psi", c.psi);
    }
  }
  os << "end\n";
  if (!os) throw std::runtime_error("dgmm: failed while writing parameters");
}

void save_params(const DgmmParams& params, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dgmm: cannot open '" + path + "' for writing");
  save_params(params, os);
  os.flush();
  if (!os) throw std::runtime_error("dgmm: failed while writing '" + path + "'");
}

DgmmParams load_params(std::istream& is) {
  expect(is, "dgmm-params");
  if (read_int(is) != 1)
    throw std::runtime_error("dgmm: unsupported parameter format version");
  DgmmParams params;
  expect(is, "p");
  params.spec.p = static_cast<int>(read_int(is));
  expect(is, "h");
  const long h = read_int(is);
  if (h < 1 || h > 64) throw std::runtime_error("dgmm: invalid layer count in parameter file");
  params.spec.k.resize(static_cast<std::size_t>(h));
  params.spec.r.resize(static_cast<std::size_t>(h));
  expect(is, "k");
  for (auto& v : params.spec.k) v = static_cast<int>(read_int(is));
  expect(is, "r");
  for (auto& v : params.spec.r) v = static_cast<int>(read_int(is));
  params.spec.validate();
  params.layers.resize(static_cast<std::size_t>(h));
  for (int l = 1; l <= params.spec.depth(); ++l) {
    params.layers[l - 1].resize(static_cast<std::size_t>(params.spec.k[l - 1]));
    for (int j = 1; j <= params.spec.k[l - 1]; ++j) {
      expect(is, "layer");
      const long lv = read_int(is);
      expect(is, "component");
      const long jv = read_int(is);
      if (lv != l || jv != j)
        throw std::runtime_error("dgmm: parameter sections out of order");
      LayerComponent& c = params.layers[l - 1][j - 1];
      expect(is, "weight");
      c.weight = read_double(is);
      c.eta = read_vector(is, "eta");
      c.lambda = read_matrix(is, "lambda");
      c.psi = read_vector(is, "psi");
    }
  }
  expect(is, "end");
  params.validate();
  return params;
}

DgmmParams load_params(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dgmm: cannot open '" + path + "'");
  return load_params(is);
}

}  // namespace dgmm

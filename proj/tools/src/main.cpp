#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "dgmm/data.hpp"
#include "dgmm/metrics.hpp"
#include "dgmm/model.hpp"
#include "dgmm/random.hpp"
#include "dgmm/selection.hpp"
#include "dgmm/sem.hpp"
#include "dgmm/version.hpp"

namespace {

namespace fs = std::filesystem;
using dgmm::Matrix;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_dash(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (...) {
      throw std::invalid_argument(std::string("dgmm: cannot parse '") + text + "' for " +
                                  flag + " (expected a comma list of integers)");
    }
  }
  if (out.empty())
    throw std::invalid_argument(std::string("dgmm: empty integer list for ") + flag);
  return out;
}

std::pair<int, int> parse_range(const std::string& text, const char* flag) {
  try {
    const auto sep = text.find("..");
    std::size_t pos = 0;
    if (sep == std::string::npos) {
      const int v = std::stoi(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const int lo = std::stoi(text.substr(0, sep), &pos);
    if (pos != sep) throw std::invalid_argument(text);
    const std::string hi_text = text.substr(sep + 2);
    const int hi = std::stoi(hi_text, &pos);
    if (pos != hi_text.size() || lo > hi) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (...) {
    throw std::invalid_argument(std::string("dgmm: cannot parse '") + text + "' for " +
                                flag + " (expected N or LO..HI)");
  }
}

class Manifest {
 public:
  void set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  void write(const fs::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dgmm: cannot write '" + path.string() + "'");
    for (const auto& [key, value] : entries_) os << key << '=' << value << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void fingerprint_file(const std::string& path, Manifest& manifest, const std::string& prefix) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("dgmm: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string bytes = ss.str();
  manifest.set(prefix + "_bytes", static_cast<long long>(bytes.size()));
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(dgmm::fnv1a(bytes.data(), bytes.size())));
  manifest.set(prefix + "_fnv1a", buf);
}

fs::path resolve_out_dir(std::string out_dir, const std::string& command) {
  if (out_dir.empty()) {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    out_dir = std::string("out/") + buf + "-" + command;
  }
  fs::path dir(out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_labels_csv(const std::vector<int>& labels, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dgmm: cannot write '" + path.string() + "'");
  os << "label\n";
  for (int v : labels) os << v << '\n';
}

void write_trace_csv(const std::vector<double>& trace, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dgmm: cannot write '" + path.string() + "'");
  os << "iteration,loglik\n";
  for (std::size_t t = 0; t < trace.size(); ++t)
    os << t << ',' << format_double(trace[t]) << '\n';
}

void write_standardization_csv(const dgmm::Dataset& ds, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dgmm: cannot write '" + path.string() + "'");
  os << "column,name,mean,scale,constant\n";
  const auto& st = ds.standardization;
  for (Eigen::Index c = 0; c < ds.p(); ++c) {
    const bool constant = std::find(st.constant_columns.begin(), st.constant_columns.end(),
                                    static_cast<int>(c)) != st.constant_columns.end();
    os << (c + 1) << ','
       << (static_cast<std::size_t>(c) < ds.feature_names.size()
               ? ds.feature_names[static_cast<std::size_t>(c)]
               : "x" + std::to_string(c + 1))
       << ',' << format_double(st.mean[c]) << ',' << format_double(st.scale[c]) << ','
       << (constant ? 1 : 0) << '\n';
  }
}

std::vector<std::string> split_comma(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    const auto end = pos == std::string::npos ? line.size() : pos;
    std::string cell = line.substr(start, end - start);
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    if (pos == std::string::npos) return fields;
    start = pos + 1;
  }
}

// Accepts our labels.csv artifacts, generated datasets (class column), or a
// bare one-column file; values are factor-encoded by first appearance,
// which both metrics are invariant to.
std::vector<int> read_label_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dgmm: cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_comma(line));
  }
  if (rows.empty()) throw std::runtime_error("dgmm: '" + path + "' contains no labels");
  std::size_t col = rows.front().size() - 1;
  bool header = false;
  for (std::size_t c = 0; c < rows.front().size(); ++c)
    if (rows.front()[c] == "class" || rows.front()[c] == "label") {
      col = c;
      header = true;
      break;
    }
  if (!header) {
    char* end = nullptr;
    const std::string& cell = rows.front()[col];
    std::strtod(cell.c_str(), &end);
    header = cell.empty() || end != cell.c_str() + cell.size();
  }
  std::vector<int> labels;
  std::unordered_map<std::string, int> codes;
  for (std::size_t i = header ? 1 : 0; i < rows.size(); ++i) {
    if (rows[i].size() <= col)
      throw std::runtime_error("dgmm: '" + path + "' row " + std::to_string(i + 1) +
                               " is missing the label column");
    auto [it, inserted] =
        codes.try_emplace(rows[i][col], static_cast<int>(codes.size()) + 1);
    labels.push_back(it->second);
  }
  if (labels.empty()) throw std::runtime_error("dgmm: '" + path + "' contains no labels");
  return labels;
}

struct DataFlags {
  std::string path;
  std::string label_column;
  bool no_header = false;
  bool standardize = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool labels_help_required) {
  cmd->add_option("--data", flags.path, "input CSV file")->required();
  cmd->add_option("--labels", flags.label_column,
                  labels_help_required
                      ? "label column (header name or 0-based index)"
                      : "label column for ARI/m.r. reporting (name or 0-based index)");
  cmd->add_flag("--no-header", flags.no_header, "the CSV has no header row");
  cmd->add_flag("--standardize", flags.standardize,
                "center and unit-scale columns before fitting");
}

dgmm::Dataset load_dataset(const DataFlags& flags) {
  dgmm::CsvOptions options;
  options.has_header = !flags.no_header;
  if (!flags.label_column.empty()) {
    try {
      std::size_t pos = 0;
      const int idx = std::stoi(flags.label_column, &pos);
      if (pos == flags.label_column.size())
        options.label_index = idx;
      else
        options.label_column = flags.label_column;
    } catch (...) {
      options.label_column = flags.label_column;
    }
  }
  dgmm::Dataset ds = dgmm::load_csv(flags.path, options);
  if (flags.standardize) ds = dgmm::standardize(ds);
  return ds;
}

void describe_fit_config(const dgmm::FitConfig& config, Manifest& manifest) {
  manifest.set("m_replicates", config.m_replicates);
  manifest.set("max_iters", config.max_iters);
  manifest.set("burn_in", config.burn_in);
  manifest.set("n_starts", config.n_starts);
  manifest.set("seed", static_cast<long long>(config.seed));
  manifest.set("tol", config.tol);
  manifest.set("e_step_mode",
               config.e_step_mode == dgmm::EStepMode::monte_carlo ? "monte_carlo"
                                                                  : "exact_moments");
  manifest.set("threads", config.threads);
}

struct FitFlags {
  DataFlags data;
  std::string k_list, r_list;
  int h = 0;
  dgmm::FitConfig config;
  bool exact_moments = false;
  std::string out_dir;
};

void add_fit_config_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--starts", flags.config.n_starts, "independent chains (default 10)");
  cmd->add_option("--m", flags.config.m_replicates, "replicates per S-step (default 10)");
  cmd->add_option("--iters", flags.config.max_iters, "maximum iterations (default 200)");
  cmd->add_option("--burn-in", flags.config.burn_in, "iterations before averaging (default 20)");
  cmd->add_option("--tol", flags.config.tol, "relative stopping tolerance (default 1e-4)");
  cmd->add_option("--seed", flags.config.seed, "random seed");
  cmd->add_option("--threads", flags.config.threads, "worker cap (default 1)");
  cmd->add_flag("--exact-moments", flags.exact_moments,
                "closed-form conditional moments instead of replicate averages");
  cmd->add_option("--out-dir", flags.out_dir, "output directory (default out/<timestamp>-<cmd>)");
}

int cmd_fit(FitFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  if (flags.exact_moments) flags.config.e_step_mode = dgmm::EStepMode::exact_moments;
  dgmm::Dataset ds = load_dataset(flags.data);

  dgmm::DgmmSpec spec;
  spec.p = static_cast<int>(ds.p());
  spec.k = parse_int_list(flags.k_list, "--k");
  spec.r = parse_int_list(flags.r_list, "--r");
  if (flags.h > 0 && flags.h != static_cast<int>(spec.k.size()))
    throw std::invalid_argument("dgmm: --h disagrees with the lengths of --k/--r");
  spec.validate();

  const dgmm::FitResult result = dgmm::fit(spec, ds.x, flags.config);

  const fs::path dir = resolve_out_dir(flags.out_dir, "fit");
  dgmm::save_params(result.averaged_params, (dir / "params.txt").string());
  write_labels_csv(result.labels, dir / "labels.csv");
  write_trace_csv(result.loglik_trace, dir / "trace.csv");
  if (ds.standardization.applied) write_standardization_csv(ds, dir / "standardization.csv");

  Manifest manifest;
  manifest.set("command", "fit");
  manifest.set("version", DGMM_VERSION);
  manifest.set("data", flags.data.path);
  fingerprint_file(flags.data.path, manifest, "data");
  manifest.set("n", static_cast<long long>(ds.n()));
  manifest.set("p", static_cast<long long>(ds.p()));
  manifest.set("standardize", ds.standardization.applied ? 1 : 0);
  manifest.set("h", spec.depth());
  manifest.set("k", join_dash(spec.k));
  manifest.set("r", join_dash(spec.r));
  describe_fit_config(flags.config, manifest);
  manifest.set("loglik", result.loglik);
  manifest.set("bic", result.bic);
  manifest.set("converged", result.converged ? 1 : 0);
  manifest.set("best_chain", result.best_chain);

  std::cout << "loglik " << format_double(result.loglik) << '\n';
  std::cout << "bic " << format_double(result.bic) << '\n';
  if (ds.has_labels()) {
    const double ari = dgmm::adjusted_rand_index(ds.labels, result.labels);
    const double mr = dgmm::misclassification_rate(ds.labels, result.labels);
    manifest.set("ari", ari);
    manifest.set("mr", mr);
    std::cout << "ari " << format_double(ari) << '\n';
    std::cout << "mr " << format_double(mr) << '\n';
  }
  manifest.set("wall_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  manifest.write(dir / "manifest.txt");
  std::cout << "out " << dir.string() << '\n';
  return 0;
}

struct SelectFlags {
  DataFlags data;
  int k1 = 0;
  std::string h_range = "1..3";
  std::string k_hidden_range = "1..5";
  std::vector<std::string> r_chains;
  int refit_starts = 0;
  FitFlags fit;  // reuses config + out-dir flags
};

int cmd_select(SelectFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  if (flags.fit.exact_moments) flags.fit.config.e_step_mode = dgmm::EStepMode::exact_moments;
  dgmm::Dataset ds = load_dataset(flags.data);

  dgmm::SearchSpace space;
  space.k1 = flags.k1;
  const auto [h_lo, h_hi] = parse_range(flags.h_range, "--h");
  space.h_values.clear();
  for (int h = h_lo; h <= h_hi; ++h) space.h_values.push_back(h);
  std::tie(space.hidden_k_min, space.hidden_k_max) = parse_range(flags.k_hidden_range, "--k2");
  for (const std::string& chain : flags.r_chains)
    space.r_chains.push_back(parse_int_list(chain, "--r"));

  const dgmm::SearchResult result = dgmm::model_search(
      ds.x, space, flags.fit.config, ds.has_labels() ? &ds.labels : nullptr);

  const fs::path dir = resolve_out_dir(flags.fit.out_dir, "select");
  {
    std::ofstream os(dir / "scores.csv");
    if (!os) throw std::runtime_error("dgmm: cannot write scores.csv");
    os << dgmm::score_table_csv(result);
  }
  if (ds.standardization.applied) write_standardization_csv(ds, dir / "standardization.csv");

  const dgmm::ModelScore& best = result.best();
  std::cout << "best h=" << best.spec.depth() << " k=" << join_dash(best.spec.k)
            << " r=" << join_dash(best.spec.r) << " bic=" << format_double(best.bic)
            << " loglik=" << format_double(best.loglik);
  if (std::isfinite(best.ari)) std::cout << " ari=" << format_double(best.ari);
  std::cout << '\n';

  Manifest manifest;
  manifest.set("command", "select");
  manifest.set("version", DGMM_VERSION);
  manifest.set("data", flags.data.path);
  fingerprint_file(flags.data.path, manifest, "data");
  manifest.set("n", static_cast<long long>(ds.n()));
  manifest.set("p", static_cast<long long>(ds.p()));
  manifest.set("standardize", ds.standardization.applied ? 1 : 0);
  manifest.set("k1", flags.k1);
  manifest.set("h", flags.h_range);
  manifest.set("k2", flags.k_hidden_range);
  describe_fit_config(flags.fit.config, manifest);
  manifest.set("grid_size", static_cast<long long>(result.table.size()));
  manifest.set("best_spec", best.spec.to_string());
  manifest.set("best_bic", best.bic);

  if (flags.refit_starts > 0) {
    dgmm::FitConfig refit_config = flags.fit.config;
    refit_config.n_starts = flags.refit_starts;
    refit_config.seed = dgmm::mix_seed(flags.fit.config.seed, 0x726566697471ULL);
    const dgmm::FitResult refit = dgmm::fit(best.spec, ds.x, refit_config);
    dgmm::save_params(refit.averaged_params, (dir / "params.txt").string());
    write_labels_csv(refit.labels, dir / "labels.csv");
    write_trace_csv(refit.loglik_trace, dir / "trace.csv");
    manifest.set("refit_starts", flags.refit_starts);
    manifest.set("refit_loglik", refit.loglik);
    manifest.set("refit_bic", refit.bic);
    if (ds.has_labels()) {
      const double ari = dgmm::adjusted_rand_index(ds.labels, refit.labels);
      manifest.set("refit_ari", ari);
      std::cout << "refit bic=" << format_double(refit.bic)
                << " ari=" << format_double(ari) << '\n';
    } else {
      std::cout << "refit bic=" << format_double(refit.bic) << '\n';
    }
  }
  manifest.set("wall_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  manifest.write(dir / "manifest.txt");
  std::cout << "out " << dir.string() << '\n';
  return 0;
}

struct GenerateFlags {
  std::string shape;
  int n = 1000;
  double sd_eyes = 0.45;
  double sd_mouth = 0.35;
  double sd_noise = 0.5;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_generate(GenerateFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  if (flags.shape != "smiley")
    throw std::invalid_argument("dgmm: unknown shape '" + flags.shape + "' (only: smiley)");
  dgmm::RandomStream rng(flags.seed);
  const dgmm::Dataset ds =
      dgmm::generate_smiley(flags.n, flags.sd_eyes, flags.sd_mouth, flags.sd_noise, rng);
  const fs::path dir = resolve_out_dir(flags.out_dir, "generate");
  const fs::path file = dir / "smiley.csv";
  dgmm::save_csv(ds, file.string());

  Manifest manifest;
  manifest.set("command", "generate");
  manifest.set("version", DGMM_VERSION);
  manifest.set("shape", flags.shape);
  manifest.set("n", flags.n);
  manifest.set("sd_eyes", flags.sd_eyes);
  manifest.set("sd_mouth", flags.sd_mouth);
  manifest.set("sd_noise", flags.sd_noise);
  manifest.set("seed", static_cast<long long>(flags.seed));
  fingerprint_file(file.string(), manifest, "output");
  manifest.set("wall_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  manifest.write(dir / "manifest.txt");
  std::cout << "out " << file.string() << '\n';
  return 0;
}

struct EvaluateFlags {
  std::string true_path;
  std::string pred_path;
};

int cmd_evaluate(const EvaluateFlags& flags) {
  const std::vector<int> truth = read_label_file(flags.true_path);
  const std::vector<int> pred = read_label_file(flags.pred_path);
  std::cout << "ari " << format_double(dgmm::adjusted_rand_index(truth, pred)) << '\n';
  std::cout << "mr " << format_double(dgmm::misclassification_rate(truth, pred)) << '\n';
  return 0;
}

struct PredictFlags {
  std::string params_path;
  DataFlags data;
  std::string out_dir;
};

int cmd_predict(PredictFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  const dgmm::DgmmParams params = dgmm::load_params(flags.params_path);
  dgmm::Dataset ds = load_dataset(flags.data);
  const std::vector<int> labels = dgmm::classify(params, ds.x);
  const fs::path dir = resolve_out_dir(flags.out_dir, "predict");
  write_labels_csv(labels, dir / "labels.csv");

  Manifest manifest;
  manifest.set("command", "predict");
  manifest.set("version", DGMM_VERSION);
  manifest.set("params", flags.params_path);
  manifest.set("data", flags.data.path);
  fingerprint_file(flags.data.path, manifest, "data");
  manifest.set("n", static_cast<long long>(ds.n()));
  if (ds.has_labels()) {
    manifest.set("ari", dgmm::adjusted_rand_index(ds.labels, labels));
    manifest.set("mr", dgmm::misclassification_rate(ds.labels, labels));
  }
  manifest.set("wall_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  manifest.write(dir / "manifest.txt");
  std::cout << "out " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep Gaussian mixture models: fitting, selection, and evaluation"};
  app.require_subcommand(1);
  // --h is a model flag, so help stays on --help only
  app.set_help_flag("--help", "print help");

  FitFlags fit_flags;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one architecture by stochastic EM");
  fit_cmd->set_help_flag("--help", "print help");
  add_data_flags(fit_cmd, fit_flags.data, false);
  fit_cmd->add_option("--h", fit_flags.h, "layer count (checked against --k/--r)");
  fit_cmd->add_option("--k", fit_flags.k_list, "components per layer, e.g. 4,1")->required();
  fit_cmd->add_option("--r", fit_flags.r_list, "latent dimensions per layer, e.g. 2,1")->required();
  add_fit_config_flags(fit_cmd, fit_flags);

  SelectFlags select_flags;
  CLI::App* select_cmd =
      app.add_subcommand("select", "grid-search architectures and rank by BIC");
  select_cmd->set_help_flag("--help", "print help");
  add_data_flags(select_cmd, select_flags.data, false);
  select_cmd->add_option("--k1", select_flags.k1, "first-layer cluster count")->required();
  select_cmd->add_option("--h", select_flags.h_range, "layer counts, e.g. 2 or 1..3");
  select_cmd->add_option("--k2", select_flags.k_hidden_range,
                         "hidden-layer component range, e.g. 1..5");
  select_cmd->add_option("--r", select_flags.r_chains,
                         "pin latent-dimension chain(s), e.g. --r 2,1 (repeatable)");
  select_cmd->add_option("--refit-starts", select_flags.refit_starts,
                         "refit the winner with this many starts");
  add_fit_config_flags(select_cmd, select_flags.fit);

  GenerateFlags generate_flags;
  CLI::App* generate_cmd = app.add_subcommand("generate", "write a synthetic benchmark CSV");
  generate_cmd->add_option("shape", generate_flags.shape, "shape name (smiley)")->required();
  generate_cmd->add_option("--n", generate_flags.n, "observations (default 1000)");
  generate_cmd->add_option("--sd-eyes", generate_flags.sd_eyes, "eye spread (default 0.45)");
  generate_cmd->add_option("--sd-mouth", generate_flags.sd_mouth, "mouth jitter (default 0.35)");
  generate_cmd->add_option("--sd-noise", generate_flags.sd_noise,
                           "third-coordinate noise (default 0.5)");
  generate_cmd->add_option("--seed", generate_flags.seed, "random seed");
  generate_cmd->add_option("--out-dir", generate_flags.out_dir, "output directory");

  EvaluateFlags evaluate_flags;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "compare two label files (ARI, misclassification)");
  evaluate_cmd->add_option("--true", evaluate_flags.true_path, "reference labels CSV")->required();
  evaluate_cmd->add_option("--pred", evaluate_flags.pred_path, "predicted labels CSV")->required();

  PredictFlags predict_flags;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "assign clusters with previously fitted parameters");
  predict_cmd->add_option("--params", predict_flags.params_path, "parameter file")->required();
  add_data_flags(predict_cmd, predict_flags.data, false);
  predict_cmd->add_option("--out-dir", predict_flags.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_flags);
    if (select_cmd->parsed()) return cmd_select(select_flags);
    if (generate_cmd->parsed()) return cmd_generate(generate_flags);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_flags);
    if (predict_cmd->parsed()) return cmd_predict(predict_flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

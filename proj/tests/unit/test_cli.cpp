// End-to-end tests that drive the installed command-line binary. The path of
// the executable is injected by the build as DGMM_CLI_PATH.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

#ifndef DGMM_CLI_PATH
#error "DGMM_CLI_PATH must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DGMM_CLI_PATH + "\" " + args + " 2>&1";
  CliResult res;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, got);
  const int status = ::pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("dgmm_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  REQUIRE(os.good());
  os << text;
}

// deterministic two-cluster CSV; dims columns plus an optional class column
fs::path write_blobs(const fs::path& dir, int n_per, int dims, bool with_class) {
  const fs::path file = dir / "blobs.csv";
  std::ostringstream os;
  for (int j = 0; j < dims; ++j) os << (j ? "," : "") << "f" << (j + 1);
  if (with_class) os << ",class";
  os << '\n';
  // fixed-point xorshift jitter keeps the file identical across runs
  std::uint64_t state = 0x2545F4914F6CDD1DULL;
  auto jitter = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  };
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n_per; ++i) {
      for (int j = 0; j < dims; ++j)
        os << (j ? "," : "") << ((c == 0 ? -4.0 : 4.0) + jitter());
      if (with_class) os << ',' << (c + 1);
      os << '\n';
    }
  write_file(file, os.str());
  return file;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help text and argument errors") {
  const auto help = run_cli("--help");
  CHECK(help.exit_code == 0);
  for (const char* sub : {"fit", "select", "generate", "evaluate", "predict"})
    CHECK(contains(help.output, sub));

  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("fit --k 2 --r 1").exit_code == 2);  // --data is required
  CHECK(run_cli("fit --data x.csv --k 2 --r 1 --bogus-flag").exit_code == 2);

  const auto dir = scratch_dir("argerr");
  const auto data = write_blobs(dir, 10, 2, false);
  const auto bad_k = run_cli("fit --data " + q(data) + " --k 2a --r 1");
  CHECK(bad_k.exit_code == 2);
  const auto bad_h = run_cli("fit --data " + q(data) + " --h 2 --k 2 --r 1");
  CHECK(bad_h.exit_code == 2);
  CHECK(contains(bad_h.output, "--h"));
}

TEST_CASE("generate writes the dataset and its manifest") {
  const auto dir = scratch_dir("generate");
  const auto res = run_cli("generate smiley --n 120 --seed 5 --out-dir " + q(dir));
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "smiley.csv"));
  CHECK(contains(res.output, "out "));
  const std::string manifest = read_file(dir / "manifest.txt");
  CHECK(contains(manifest, "command=generate"));
  CHECK(contains(manifest, "n=120"));
  CHECK(contains(manifest, "seed=5"));

  // same seed, second directory: byte-identical dataset
  const auto dir2 = scratch_dir("generate2");
  CHECK(run_cli("generate smiley --n 120 --seed 5 --out-dir " + q(dir2)).exit_code == 0);
  CHECK(read_file(dir2 / "smiley.csv") == read_file(dir / "smiley.csv"));

  CHECK(run_cli("generate frown --out-dir " + q(dir)).exit_code == 2);
}

TEST_CASE("fit produces artifacts, scores, and label metrics") {
  const auto dir = scratch_dir("fit");
  const auto data = write_blobs(dir, 30, 2, true);
  const auto out = dir / "run";
  const auto res = run_cli("fit --data " + q(data) +
                           " --labels class --k 2 --r 1 --starts 2 --iters 15"
                           " --burn-in 4 --seed 7 --out-dir " + q(out));
  CHECK(res.exit_code == 0);
  for (const char* name : {"params.txt", "labels.csv", "trace.csv", "manifest.txt"})
    CHECK(fs::exists(out / name));
  CHECK(contains(res.output, "loglik "));
  CHECK(contains(res.output, "bic "));
  CHECK(contains(res.output, "ari 1\n"));  // blobs 8 units apart: exact recovery
  CHECK(contains(res.output, "mr 0\n"));

  const std::string labels = read_file(out / "labels.csv");
  CHECK(labels.substr(0, 6) == "label\n");
  CHECK(std::count(labels.begin(), labels.end(), '\n') == 61);
  const std::string trace = read_file(out / "trace.csv");
  CHECK(trace.substr(0, 18) == "iteration,loglik\n0");
  const std::string manifest = read_file(out / "manifest.txt");
  CHECK(contains(manifest, "command=fit"));
  CHECK(contains(manifest, "k=2"));
  CHECK(contains(manifest, "seed=7"));
  CHECK(contains(manifest, "data_fnv1a="));
}

TEST_CASE("fit runs are reproducible byte for byte") {
  const auto dir = scratch_dir("repro");
  const auto data = write_blobs(dir, 25, 2, false);
  const std::string common = "fit --data " + q(data) +
                             " --k 2 --r 1 --starts 2 --iters 12 --burn-in 3 --seed 11"
                             " --out-dir ";
  CHECK(run_cli(common + q(dir / "a")).exit_code == 0);
  CHECK(run_cli(common + q(dir / "b")).exit_code == 0);
  CHECK(read_file(dir / "a" / "labels.csv") == read_file(dir / "b" / "labels.csv"));
  CHECK(read_file(dir / "a" / "params.txt") == read_file(dir / "b" / "params.txt"));
  CHECK(read_file(dir / "a" / "trace.csv") == read_file(dir / "b" / "trace.csv"));
}

TEST_CASE("predict with saved parameters reproduces the training labels") {
  const auto dir = scratch_dir("predict");
  const auto data = write_blobs(dir, 25, 2, false);
  CHECK(run_cli("fit --data " + q(data) +
                " --k 2 --r 1 --starts 2 --iters 12 --burn-in 3 --seed 13 --out-dir " +
                q(dir / "fit")).exit_code == 0);
  const auto res = run_cli("predict --params " + q(dir / "fit" / "params.txt") +
                           " --data " + q(data) + " --out-dir " + q(dir / "pred"));
  CHECK(res.exit_code == 0);
  CHECK(read_file(dir / "pred" / "labels.csv") == read_file(dir / "fit" / "labels.csv"));
}

TEST_CASE("evaluate reports the agreed hand values") {
  const auto dir = scratch_dir("evaluate");
  write_file(dir / "true.csv", "label\n1\n1\n2\n2\n");
  write_file(dir / "pred.csv", "label\n1\n2\n1\n2\n");
  const auto res = run_cli("evaluate --true " + q(dir / "true.csv") + " --pred " +
                           q(dir / "pred.csv"));
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "ari -0.5"));
  CHECK(contains(res.output, "mr 0.5"));

  const auto perfect = run_cli("evaluate --true " + q(dir / "true.csv") + " --pred " +
                               q(dir / "true.csv"));
  CHECK(perfect.exit_code == 0);
  CHECK(contains(perfect.output, "ari 1\n"));
  CHECK(contains(perfect.output, "mr 0\n"));
}

TEST_CASE("select searches a small grid and writes the score table") {
  const auto dir = scratch_dir("select");
  const auto data = write_blobs(dir, 25, 3, true);
  const auto out = dir / "run";
  const auto res = run_cli("select --data " + q(data) +
                           " --labels class --k1 2 --h 1..2 --k2 1..2 --starts 1"
                           " --iters 12 --burn-in 3 --seed 9 --out-dir " + q(out));
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "best h="));
  CHECK(contains(res.output, "ari="));
  const std::string scores = read_file(out / "scores.csv");
  CHECK(scores.substr(0, scores.find('\n')) ==
        "h,k_chain,r_chain,loglik,n_params,bic,ari,runtime_s");
  // grid: h=1 with r in {1,2}, h=2 with (2,1) and k2 in {1,2} -> 4 rows
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 5);
}

TEST_CASE("missing input files exit with an I/O failure code") {
  CHECK(run_cli("fit --data /nonexistent/nope.csv --k 2 --r 1").exit_code == 1);
  CHECK(run_cli("evaluate --true /nonexistent/a.csv --pred /nonexistent/b.csv").exit_code == 1);
  CHECK(run_cli("predict --params /nonexistent/p.txt --data /nonexistent/d.csv").exit_code == 1);
}

}  // TEST_SUITE

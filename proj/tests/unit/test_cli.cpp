#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnlab/cli.hpp"
#include "bnlab/config_io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bnlab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* kSmall = R"(
[grid]
dim = 1
n = 32
length = 2pi

[model]
nu = 0.1

[step]
dt = 1e-2
t_end = 0.1
scheme = imex_ark2
snapshot_every = 5

[initial]
seed = 7
amplitude = 1e-2
k_lo = 1
k_hi = 4

[run]
system = bn
observers = conservation, pressure_gap, energy

[rate]
nus = 1e-1, 1e-2, 1e-3

[energy]
nu = 1e-2
js = -1, 0, 1, 2

[lp]
field = alpha_plus
s = 0.5
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bnlab_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

// Last line of stderr holds the error JSON.
json error_json(const std::string& err) {
  const auto end = err.find_last_not_of('\n');
  const auto start = err.rfind('\n', end);
  return json::parse(err.substr(start == std::string::npos ? 0 : start + 1, end - start));
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(BNLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors exit 2") {
  TempDir tmp;
  const fs::path log = tmp.path / "log.txt";
  CHECK(run_binary("simulate", log) == 2);
  const std::string text = slurp(log);
  CHECK(text.find("--config") != std::string::npos);
  CHECK(text.find("\"kind\":\"Usage\"") != std::string::npos);
  CHECK(run_binary("", log) == 2);
  CHECK(run_binary("frobnicate -c x.cfg", log) == 2);
  CHECK(run_binary("--version", log) == 0);
  CHECK(slurp(log).find("1.0.0") != std::string::npos);

  const Run missing = run({"simulate", "-c", (tmp.path / "nope.cfg").string()});
  CHECK(missing.code == 2);
  CHECK(error_json(missing.err)["kind"] == "Io");

  const fs::path bad = write_file(tmp.path / "bad.cfg", "[grid]\ndim = 1\nwidth = 3\n");
  const Run unknown = run({"simulate", "-c", bad.string(), "-o", (tmp.path / "bad").string()});
  CHECK(unknown.code == 2);
  const json e = error_json(unknown.err);
  CHECK(e["kind"] == "ConfigInvalid");
  CHECK(e["exit_code"] == 2);
  CHECK(e["status"] == "error");
  CHECK(e["subcommand"] == "simulate");
}

TEST_CASE("dry run echoes the validated config") {
  TempDir tmp;
  const fs::path cfg = write_file(tmp.path / "small.cfg", kSmall);
  const Run r = run({"rate-study", "-c", cfg.string(), "--dry-run"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["status"] == "dry-run");
  CHECK(j["subcommand"] == "rate-study");
  CHECK(j["config_hash"].get<std::string>().size() == 64);
  CHECK(j["config"]["grid"]["n"] == 32);
  CHECK(j["config"]["model"]["mu"].get<double>() == doctest::Approx(0.1 / 3.0));
  CHECK(!fs::exists(tmp.path / "out"));
  CHECK(j["config_hash"] == config_hash(load_config(cfg)));
}

TEST_CASE("numerical failures exit 1 and leave error.json") {
  TempDir tmp;
  std::string text = kSmall;
  text.replace(text.find("dt = 1e-2"), 9, "dt = 0.5");
  text.replace(text.find("t_end = 0.1"), 11, "t_end = 1.0");
  const fs::path cfg = write_file(tmp.path / "cfl.cfg", text);
  const fs::path out = tmp.path / "cfl";
  const Run r = run({"simulate", "-c", cfg.string(), "-o", out.string()});
  CHECK(r.code == 1);
  const json e = json::parse(slurp(out / "error.json"));
  CHECK(e["kind"] == "CflViolation");
  CHECK(e["exit_code"] == 1);
}

TEST_CASE("simulate writes snapshots, traces and a manifest") {
  TempDir tmp;
  const fs::path cfg = write_file(tmp.path / "small.cfg", kSmall);
  const fs::path out = tmp.path / "sim";
  const Run r = run({"simulate", "-c", cfg.string(), "-o", out.string()});
  REQUIRE(r.code == 0);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "simulate");
  CHECK(m["config_hash"] == config_hash(load_config(cfg)));
  CHECK(m["seeds"]["initial"] == 7);
  CHECK(m["versions"].contains("fftw"));

  const std::string trace = slurp(out / "trace.csv");
  CHECK(trace.rfind("t,mean_m_plus,mean_m_minus,max_alpha_sum_error,max_pressure_gap,gap_besov", 0) == 0);
  CHECK(count_lines(trace) == 4);
  CHECK(fs::exists(out / "energy.csv"));

  const Snapshot s = read_snapshot(out / "snapshot_000010.json");
  CHECK(s.time == doctest::Approx(0.1));
  CHECK(s.grid.points_per_axis == 32);
  REQUIRE(s.fields.size() == 4);
  CHECK(s.fields[0].first == "alpha_plus");
  CHECK(s.fields[3].first == "u0");
  CHECK(fs::file_size(out / "snapshot_000010.bin") == 4 * 32 * sizeof(double));
  CHECK(s.header["format"] == "bnlab-snapshot");

  const fs::path lp = tmp.path / "lp";
  const Run a = run({"lp-analyze", "-c", cfg.string(), "-o", lp.string(), "--snapshot",
                     (out / "snapshot_000000.json").string()});
  REQUIRE(a.code == 0);
  const std::string csv = slurp(lp / "lp_analysis.csv");
  CHECK(csv.rfind("j,block_l2,weighted", 0) == 0);
  const json lj = json::parse(slurp(lp / "lp_analysis.json"));
  CHECK(lj["partition_residual"].get<double>() < 1e-10);
  CHECK(lj["besov_norm"].get<double>() > 0.0);

  // Snapshot and initial data agree at t = 0.
  const fs::path lp0 = tmp.path / "lp0";
  REQUIRE(run({"lp-analyze", "-c", cfg.string(), "-o", lp0.string()}).code == 0);
  CHECK(slurp(lp0 / "lp_analysis.csv") == csv);
}

TEST_CASE("reform-check and energy-monitor") {
  TempDir tmp;
  const fs::path cfg = write_file(tmp.path / "small.cfg", kSmall);
  const fs::path out = tmp.path / "rc";
  REQUIRE(run({"reform-check", "-c", cfg.string(), "-o", out.string()}).code == 0);
  const json j = json::parse(slurp(out / "reform_check.json"));
  CHECK(j["points"] == 10000);
  CHECK(j["max_psi_phi_residual"].get<double>() < 1e-10);
  CHECK(j["max_phi_psi_residual"].get<double>() < 1e-10);
  // Coarse grid: the two tendencies dealias their products differently.
  CHECK(j["chain_rule_relative_residual"]["w"].get<double>() < 1e-3);

  const fs::path em = tmp.path / "em";
  const Run e = run({"energy-monitor", "-c", cfg.string(), "-o", em.string()});
  CHECK(e.code == 0);
  const json rep = json::parse(slurp(em / "energy_report.json"));
  CHECK(rep["status"] == "ok");
  CHECK(rep["worst_slack"].get<double>() <= 0.05);
  CHECK(slurp(em / "energy.csv").rfind("t,j,L_j,bound", 0) == 0);
}

TEST_CASE("rate-study outputs are reproducible") {
  TempDir tmp;
  const fs::path cfg = write_file(tmp.path / "small.cfg", kSmall);
  const fs::path a = tmp.path / "a", b = tmp.path / "b";
  REQUIRE(run({"rate-study", "-c", cfg.string(), "-o", a.string()}).code == 0);
  REQUIRE(run({"rate-study", "-c", cfg.string(), "-o", b.string()}).code == 0);
  const json ma = json::parse(slurp(a / "manifest.json"));
  const json mb = json::parse(slurp(b / "manifest.json"));
  REQUIRE(ma["config_hash"] == mb["config_hash"]);
  for (const char* f : {"rate_study.csv", "pressure_gap.csv", "rate_study.json"})
    CHECK(slurp(a / f) == slurp(b / f));
  const std::string csv = slurp(a / "rate_study.csv");
  CHECK(csv.rfind("nu,error_norm,gap_norm,l1_du,damped_integral", 0) == 0);
  CHECK(count_lines(csv) == 4);
  const json r = json::parse(slurp(a / "rate_study.json"));
  CHECK(r["slope"].get<double>() > 0.3);
  CHECK(r["monotone"] == true);
}

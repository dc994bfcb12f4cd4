#include "bnlab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bnlab/config_io.hpp"
#include "bnlab/harness.hpp"

namespace bnlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string output_dir;
  std::string snapshot;
  bool dry_run = false;
};

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::string snapshot_stem(long k) {
  std::ostringstream ss;
  ss << "snapshot_" << std::setw(6) << std::setfill('0') << k;
  return ss.str();
}

std::vector<std::pair<std::string, Field>> phase_fields(const PhaseState& s) {
  std::vector<std::pair<std::string, Field>> out{
      {"alpha_plus", s.alpha_plus}, {"rho_plus", s.rho_plus}, {"rho_minus", s.rho_minus}};
  for (int k = 0; k < s.u.dim(); ++k) out.emplace_back("u" + std::to_string(k), s.u[k]);
  return out;
}

// --- simulate ---------------------------------------------------------------

json cmd_simulate(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const ModelParams& p = cfg.model;
  const PhaseState initial = make_initial_data(cfg);

  std::unique_ptr<SplitSystem> sys;
  Bundle y0;
  std::function<PhaseState(const Bundle&)> to_phase_state;
  if (cfg.system == "bn") {
    sys = std::make_unique<BnSystem>(p);
    y0 = BnSystem::pack(initial);
    to_phase_state = [](const Bundle& y) { return BnSystem::unpack(y); };
  } else if (cfg.system == "kapila") {
    const KapilaState k0 = cfg.initial_data.well_prepared
                               ? KapilaState::from_phase(initial, p)
                               : KapilaState{initial.alpha_plus, mixture(initial, p).P, initial.u};
    sys = std::make_unique<KapilaSystem>(p);
    y0 = KapilaSystem::pack(k0);
    to_phase_state = [p](const Bundle& y) { return KapilaSystem::unpack(y).to_phase(p); };
  } else {
    sys = std::make_unique<ReformSystem>(p, cfg.delta2);
    y0 = ReformSystem::pack(to_reform(initial, p));
    to_phase_state = [p, d2 = cfg.delta2](const Bundle& y) { return to_phase(ReformSystem::unpack(y), p, d2); };
  }

  auto has = [&](const std::string& o) {
    return std::find(cfg.observers.begin(), cfg.observers.end(), o) != cfg.observers.end();
  };
  const int d = cfg.grid.dim;
  const double s_gap = 0.5 * d - 0.5;
  std::vector<std::string> columns{"t"};
  if (has("conservation")) columns.insert(columns.end(), {"mean_m_plus", "mean_m_minus", "max_alpha_sum_error"});
  if (has("pressure_gap")) columns.insert(columns.end(), {"max_pressure_gap", "gap_besov"});
  CsvWriter trace(dir / "trace.csv", columns);

  const LinearCoeffs lin = LinearCoeffs::from_model(p);
  EnergyRecorder energy(lin, cfg.js, 0.5 * d - 1.0);

  std::vector<std::string> outputs{"trace.csv"};
  double m0p = 0.0, m0m = 0.0, drift = 0.0, gap_max = 0.0;
  long snaps = 0;
  Observer obs = [&](long k, double t, const Bundle& y) {
    const PhaseState s = to_phase_state(y);
    const std::string stem = snapshot_stem(k);
    write_snapshot(dir, stem, t, phase_fields(s), cfg);
    outputs.push_back(stem + ".json");
    outputs.push_back(stem + ".bin");
    ++snaps;
    std::vector<double> row{t};
    if (has("conservation")) {
      const double mp = pointwise_mul(s.alpha_plus, s.rho_plus).mean();
      const double mm = pointwise_mul(s.alpha_minus(), s.rho_minus).mean();
      if (k == 0) {
        m0p = mp;
        m0m = mm;
      }
      drift = std::max({drift, std::abs(mp - m0p), std::abs(mm - m0m)});
      double sum_err = 0.0;
      const Field am = s.alpha_minus();
      for (std::size_t i = 0; i < am.size(); ++i) sum_err = std::max(sum_err, std::abs(s.alpha_plus[i] + am[i] - 1.0));
      row.insert(row.end(), {mp, mm, sum_err});
    }
    if (has("pressure_gap")) {
      const Field gap = pointwise(s.rho_plus, s.rho_minus, [&](double a, double b) {
        return pressure_scalar(a, Phase::Plus, p) - pressure_scalar(b, Phase::Minus, p);
      });
      gap_max = std::max(gap_max, gap.max_abs());
      row.insert(row.end(), {gap.max_abs(), lp::besov_norm(gap, s_gap).total});
    }
    trace.row(row);
    if (has("energy")) {
      const ReformState r = to_reform(s, p);
      energy.record(t, r.w, r.r, r.u);
    }
  };
  const Trajectory tr = integrate(*sys, std::move(y0), cfg.step, {obs});

  json summary{{"status", "ok"},
               {"system", cfg.system},
               {"steps", cfg.step.num_steps()},
               {"dt", cfg.step.effective_dt()},
               {"final_time", tr.times.back()},
               {"snapshots", snaps}};
  if (has("conservation")) summary["mass_drift"] = drift;
  if (has("pressure_gap")) summary["max_pressure_gap"] = gap_max;
  if (has("energy")) {
    const EnergyTrace& et = energy.trace();
    CsvWriter csv(dir / "energy.csv", {"t", "j", "L_j", "norm"});
    for (int j : et.js)
      for (std::size_t k = 0; k < et.times.size(); ++k) csv.row({et.times[k], double(j), et.L.at(j)[k], et.norms.at(j)[k]});
    outputs.push_back("energy.csv");
    summary["worst_equivalence_violation"] = et.worst_equivalence_violation;
    summary["damped_integral"] = et.int_w_over_nu.back();
  }
  write_json(dir / "summary.json", summary);
  outputs.push_back("summary.json");
  write_manifest(dir, cfg, "simulate", outputs);
  return summary;
}

// --- reform-check -------------------------------------------------------------

json cmd_reform_check(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const ModelParams& p = cfg.model;
  std::mt19937_64 rng(cfg.initial_data.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double a = cfg.delta2 / 4.0;
  double fwd = 0.0, bwd = 0.0;
  const int n_points = 10000;
  for (int i = 0; i < n_points; ++i) {
    const double da = a * std::min(p.alpha_bar_plus, p.alpha_bar_minus()) * U(rng);
    const PhysPoint x{p.alpha_bar_plus + da, p.rho_bar_plus * (1.0 + a * U(rng)),
                      p.rho_bar_minus * (1.0 + a * U(rng))};
    const ReformPoint z = phi_point(x, p);
    const PhysPoint x2 = psi_point(z, p, cfg.delta2);
    bwd = std::max({bwd, std::abs(x2.alpha_plus - x.alpha_plus), std::abs(x2.rho_plus - x.rho_plus),
                    std::abs(x2.rho_minus - x.rho_minus)});
    const ReformPoint z2 = phi_point(x2, p);
    fwd = std::max({fwd, std::abs(z2.w - z.w), std::abs(z2.R - z.R), std::abs(z2.Y - z.Y)});
  }

  const PhaseState s = make_initial_data(cfg);
  const ReformState rs = to_reform(s, p);
  const ReformTendency direct = reform_rhs(rs, p, cfg.delta2);
  const ReformTendency chained = chain_rule_tendency(s, bn_rhs(s, p), p);
  auto rel = [](const Field& x, const Field& y) {
    const double scale = std::max(x.max_abs(), y.max_abs());
    return scale > 0.0 ? max_abs_diff(x, y) / scale : 0.0;
  };
  json res{{"status", "ok"},
           {"points", n_points},
           {"radius", a},
           {"max_phi_psi_residual", fwd},
           {"max_psi_phi_residual", bwd},
           {"chain_rule_relative_residual",
            {{"y", rel(direct.y, chained.y)},
             {"w", rel(direct.w, chained.w)},
             {"r", rel(direct.r, chained.r)},
             {"u", [&] {
                double m = 0.0;
                for (int k = 0; k < cfg.grid.dim; ++k) m = std::max(m, rel(direct.u[k], chained.u[k]));
                return m;
              }()}}},
           {"max_inversion_distance", max_inversion_distance(rs, p)}};
  write_json(dir / "reform_check.json", res);
  write_manifest(dir, cfg, "reform-check", {"reform_check.json"});
  return res;
}

// --- energy-monitor -----------------------------------------------------------

json cmd_energy_monitor(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const LinearCoeffs& c = cfg.linear;
  const GridSpec& g = cfg.grid;
  const InitialData& d = cfg.initial_data;
  Bundle y0;
  for (int i = 0; i < 2 + g.dim; ++i)
    y0.push_back(random_band_field(g, d.seed + static_cast<std::uint64_t>(i), d.k_lo, d.k_hi, d.amplitude));

  const LinearSystem sys(c);
  EnergyRecorder rec(c, cfg.js, 0.5 * g.dim - 1.0);
  Observer obs = [&](long, double t, const Bundle& y) {
    VectorField u;
    for (int k = 0; k < g.dim; ++k) u.components.push_back(y[static_cast<std::size_t>(2 + k)]);
    rec.record(t, y[0], y[1], u);
  };
  integrate(sys, std::move(y0), cfg.step, {obs});
  const EnergyTrace& et = rec.trace();
  const DecayReport rep = decay_report(et, c);

  CsvWriter csv(dir / "energy.csv", {"t", "j", "L_j", "bound"});
  for (int j : et.js) {
    const auto& L = et.L.at(j);
    for (std::size_t k = 0; k < et.times.size(); ++k)
      csv.row({et.times[k], double(j), L[k], L.front() * std::exp(-rep.rate.at(j) * et.times[k])});
  }
  json slack = json::object();
  for (const auto& [j, v] : rep.slack) slack[std::to_string(j)] = v;
  json res{{"status", rep.passed ? "ok" : "failed"},
           {"kappa", et.kappa},
           {"eps_ell", et.eps_ell},
           {"eps_h", et.eps_h},
           {"C1", et.C1},
           {"C2", et.C2},
           {"C3", et.C3},
           {"worst_slack", rep.worst_slack},
           {"worst_j", rep.worst_j},
           {"slack", slack},
           {"worst_equivalence_violation", et.worst_equivalence_violation},
           {"int_w_over_nu", et.int_w_over_nu.back()},
           {"int_u", et.int_u.back()}};
  write_json(dir / "energy_report.json", res);
  write_manifest(dir, cfg, "energy-monitor", {"energy.csv", "energy_report.json"});
  monitor_decay(et, c);
  return res;
}

// --- rate-study ---------------------------------------------------------------

json cmd_rate_study(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const RateStudyResult r = run_rate_study(cfg, cfg.nus);
  {
    CsvWriter csv(dir / "rate_study.csv", {"nu", "error_norm", "gap_norm", "l1_du", "damped_integral"});
    for (std::size_t i = 0; i < r.nu_values.size(); ++i)
      csv.row({r.nu_values[i], r.error_norms[i], r.gap_norms[i], r.l1_du[i], r.damped_integrals[i]});
  }
  {
    CsvWriter csv(dir / "pressure_gap.csv", {"nu", "t", "s", "besov_norm"});
    for (std::size_t i = 0; i < r.nu_values.size(); ++i) {
      const PressureGapTrace& g = r.gap_traces[i];
      for (double s : g.s_list)
        for (std::size_t k = 0; k < g.times.size(); ++k) csv.row({r.nu_values[i], g.times[k], s, g.gap.at(s)[k]});
    }
  }
  json res{{"status", "ok"},
           {"nu_values", r.nu_values},
           {"error_norms", r.error_norms},
           {"gap_norms", r.gap_norms},
           {"l1_du", r.l1_du},
           {"damped_integrals", r.damped_integrals},
           {"s1", r.s1},
           {"s2", r.s2},
           {"slope", r.fit.slope},
           {"intercept", r.fit.intercept},
           {"r_squared", r.fit.r_squared},
           {"gap_slope", r.gap_fit.slope},
           {"gap_r_squared", r.gap_fit.r_squared},
           {"monotone", r.monotone}};
  write_json(dir / "rate_study.json", res);
  write_manifest(dir, cfg, "rate-study", {"rate_study.json", "rate_study.csv", "pressure_gap.csv"});
  return res;
}

// --- lp-analyze ---------------------------------------------------------------

json cmd_lp_analyze(const RunConfig& cfg, const std::string& snapshot) {
  const fs::path dir = prepare_dir(cfg);
  Field f;
  if (!snapshot.empty()) {
    const Snapshot snap = read_snapshot(snapshot);
    for (const auto& [name, field] : snap.fields)
      if (name == cfg.lp_field) f = field;
    if (f.size() == 0) throw Error(Errc::ConfigInvalid, "snapshot has no field '" + cfg.lp_field + "'");
  } else {
    const PhaseState s = make_initial_data(cfg);
    for (const auto& [name, field] : phase_fields(s))
      if (name == cfg.lp_field) f = field;
  }
  const lp::BesovReport rep = lp::besov_norm(f, cfg.lp_s);
  CsvWriter csv(dir / "lp_analysis.csv", {"j", "block_l2", "weighted"});
  for (const auto& [j, l2] : rep.block_l2) csv.row({double(j), l2, rep.per_j.at(j)});
  json res{{"status", "ok"},       {"field", cfg.lp_field},   {"s", rep.s},
           {"j_min", rep.j_min},   {"j_max", rep.j_max},      {"besov_norm", rep.total},
           {"low", rep.low},       {"high", rep.high},        {"l2_norm", f.l2_norm()},
           {"partition_residual", lp::partition_residual(f.grid())}};
  write_json(dir / "lp_analysis.json", res);
  write_manifest(dir, cfg, "lp-analyze", {"lp_analysis.csv", "lp_analysis.json"});
  return res;
}

int exit_code_for(Errc c) { return c == Errc::ConfigInvalid ? kExitUsage : kExitNumerical; }

void report_error(std::ostream& err, const std::string& sub, const std::string& kind, const std::string& msg,
                  int code, const std::string& output_dir) {
  const json j{{"status", "error"}, {"subcommand", sub}, {"kind", kind}, {"message", msg}, {"exit_code", code}};
  err << j.dump() << "\n";
  if (output_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) return;
  try {
    write_json(fs::path(output_dir) / "error.json", j);
  } catch (const Error&) {
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Baer-Nunziato relaxation laboratory", "bnlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"simulate", "Integrate one system and write snapshots plus traces"},
      {"reform-check", "Round-trip and chain-rule residuals of the change of unknowns"},
      {"energy-monitor", "Block energy functionals of the linear system and their decay"},
      {"rate-study", "Sweep nu and fit the relaxation rate against the limit system"},
      {"lp-analyze", "Littlewood-Paley block norms of one field"}};
  for (const auto& [name, desc] : subs) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("-c,--config", opt.config, "INI config file")->required();
    sc->add_option("-o,--output-dir", opt.output_dir, "Override run.output_dir");
    sc->add_flag("--dry-run", opt.dry_run, "Validate and echo the config, then stop");
    if (name == "lp-analyze") sc->add_option("--snapshot", opt.snapshot, "Snapshot header to analyze");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    const CLI::App* sc = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    report_error(err, sc ? sc->get_name() : "", "Usage", e.what(), kExitUsage, "");
    return kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  std::string output_dir;
  try {
    RunConfig cfg = load_config(opt.config);
    if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
    output_dir = cfg.output_dir;
    if (opt.dry_run) {
      const json j{{"status", "dry-run"},
                   {"subcommand", sub},
                   {"config_hash", config_hash(cfg)},
                   {"config", config_to_json(cfg)}};
      out << j.dump(2) << "\n";
      return kExitOk;
    }
    json res;
    if (sub == "simulate") res = cmd_simulate(cfg);
    else if (sub == "reform-check") res = cmd_reform_check(cfg);
    else if (sub == "energy-monitor") res = cmd_energy_monitor(cfg);
    else if (sub == "rate-study") res = cmd_rate_study(cfg);
    else res = cmd_lp_analyze(cfg, opt.snapshot);
    out << res.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    // A config that cannot be read is a usage error.
    const int code = e.code() == Errc::Io && output_dir.empty() ? kExitUsage : exit_code_for(e.code());
    if (code == kExitUsage && output_dir.empty()) err << app.get_subcommand(sub)->help();
    report_error(err, sub, std::string(to_string(e.code())), e.what(), code, output_dir);
    return code;
  } catch (const std::exception& e) {
    report_error(err, sub, "Internal", e.what(), kExitNumerical, output_dir);
    return kExitNumerical;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace bnlab

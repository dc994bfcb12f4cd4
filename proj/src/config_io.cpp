#include "bnlab/config_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <fftw3.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

namespace bnlab {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  double scale = 1.0;
  // "8pi" and "8*pi" denote multiples of pi.
  if (v.size() >= 2 && v.compare(v.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    v = trim(v.substr(0, v.size() - 2));
    if (!v.empty() && v.back() == '*') v = trim(v.substr(0, v.size() - 1));
    if (v.empty()) return scale;
  }
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(Errc::ConfigInvalid, key + ": '" + raw + "' is not a number");
  return x * scale;
}

long to_long(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(Errc::ConfigInvalid, key + ": '" + raw + "' is not an integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::ConfigInvalid, key + ": '" + raw + "' is not a boolean");
}

std::vector<std::string> to_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else if constexpr (std::is_floating_point_v<T>)
      out += num(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

struct Pending {
  std::optional<double> model_nu;
  bool model_lame = false;
  std::optional<double> energy_nu;
};

using Setter = std::function<void(RunConfig&, Pending&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["grid.dim"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.grid.dim = static_cast<int>(to_long(k, v));
    };
    t["grid.n"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.grid.points_per_axis = static_cast<int>(to_long(k, v));
    };
    t["grid.length"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.grid.length = to_double(k, v);
    };

    auto model = [&t](const std::string& name, double ModelParams::*field) {
      t["model." + name] = [field](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
        c.model.*field = to_double(k, v);
      };
    };
    model("gamma_plus", &ModelParams::gamma_plus);
    model("gamma_minus", &ModelParams::gamma_minus);
    model("A_plus", &ModelParams::A_plus);
    model("A_minus", &ModelParams::A_minus);
    model("eta", &ModelParams::eta);
    model("alpha_bar_plus", &ModelParams::alpha_bar_plus);
    model("rho_bar_plus", &ModelParams::rho_bar_plus);
    model("rho_bar_minus", &ModelParams::rho_bar_minus);
    t["model.mu"] = [](RunConfig& c, Pending& p, const std::string& k, const std::string& v) {
      c.model.mu = to_double(k, v);
      p.model_lame = true;
    };
    t["model.lambda"] = [](RunConfig& c, Pending& p, const std::string& k, const std::string& v) {
      c.model.lambda = to_double(k, v);
      p.model_lame = true;
    };
    t["model.nu"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) {
      p.model_nu = to_double(k, v);
    };

    t["step.dt"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.step.dt = to_double(k, v);
    };
    t["step.t_end"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.step.t_end = to_double(k, v);
    };
    t["step.cfl_safety"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.step.cfl_safety = to_double(k, v);
    };
    t["step.scheme"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) {
      c.step.scheme = parse_scheme(trim(v));
    };
    t["step.snapshot_every"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.step.snapshot_every = static_cast<int>(to_long(k, v));
    };
    t["step.relax_substeps"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.step.relax_substeps = static_cast<int>(to_long(k, v));
    };

    t["initial.seed"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      const long s = to_long(k, v);
      if (s < 0) throw Error(Errc::ConfigInvalid, k + " must be nonnegative");
      c.initial_data.seed = static_cast<std::uint64_t>(s);
    };
    t["initial.amplitude"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.initial_data.amplitude = to_double(k, v);
    };
    t["initial.k_lo"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.initial_data.k_lo = static_cast<int>(to_long(k, v));
    };
    t["initial.k_hi"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.initial_data.k_hi = static_cast<int>(to_long(k, v));
    };
    t["initial.well_prepared"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.initial_data.well_prepared = to_bool(k, v);
    };

    t["run.system"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) { c.system = trim(v); };
    t["run.observers"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) {
      c.observers = to_list(v);
    };
    t["run.output_dir"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) {
      c.output_dir = trim(v);
    };
    t["run.delta2"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.delta2 = to_double(k, v);
    };

    t["rate.nus"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.nus.clear();
      for (const auto& s : to_list(v)) c.nus.push_back(to_double(k, s));
    };

    auto energy = [&t](const std::string& name, double LinearCoeffs::*field) {
      t["energy." + name] = [field](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
        c.linear.*field = to_double(k, v);
      };
    };
    energy("h1", &LinearCoeffs::h1);
    energy("h2", &LinearCoeffs::h2);
    energy("h3", &LinearCoeffs::h3);
    energy("h4", &LinearCoeffs::h4);
    energy("h5", &LinearCoeffs::h5);
    energy("h6", &LinearCoeffs::h6);
    energy("eta", &LinearCoeffs::eta);
    t["energy.nu"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) {
      p.energy_nu = to_double(k, v);
    };
    t["energy.js"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.js.clear();
      for (const auto& s : to_list(v)) c.js.push_back(static_cast<int>(to_long(k, s)));
    };

    t["lp.field"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) { c.lp_field = trim(v); };
    t["lp.s"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.lp_s = to_double(k, v); };
    return t;
  }();
  return table;
}

RunConfig from_tree(const pt::ptree& tree) {
  RunConfig cfg;
  Pending pending;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(Errc::ConfigInvalid, "key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw Error(Errc::ConfigInvalid, "unknown key '" + full + "'");
      it->second(cfg, pending, full, value.data());
    }
  }
  if (pending.model_nu) {
    if (pending.model_lame) throw Error(Errc::ConfigInvalid, "give either model.nu or model.mu/model.lambda");
    cfg.model.mu = *pending.model_nu / 3.0;
    cfg.model.lambda = *pending.model_nu / 3.0;
  }
  if (pending.energy_nu) {
    cfg.linear.nu = *pending.energy_nu;
    cfg.linear.mu = *pending.energy_nu / 3.0;
    cfg.linear.lambda = *pending.energy_nu / 3.0;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigInvalid, e.message() + " at line " + std::to_string(e.line()));
  }
  return from_tree(tree);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_dump(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  kv["grid.dim"] = std::to_string(c.grid.dim);
  kv["grid.n"] = std::to_string(c.grid.points_per_axis);
  kv["grid.length"] = num(c.grid.length);
  const ModelParams& m = c.model;
  kv["model.gamma_plus"] = num(m.gamma_plus);
  kv["model.gamma_minus"] = num(m.gamma_minus);
  kv["model.A_plus"] = num(m.A_plus);
  kv["model.A_minus"] = num(m.A_minus);
  kv["model.mu"] = num(m.mu);
  kv["model.lambda"] = num(m.lambda);
  kv["model.eta"] = num(m.eta);
  kv["model.alpha_bar_plus"] = num(m.alpha_bar_plus);
  kv["model.rho_bar_plus"] = num(m.rho_bar_plus);
  kv["model.rho_bar_minus"] = num(m.rho_bar_minus);
  kv["step.dt"] = num(c.step.dt);
  kv["step.t_end"] = num(c.step.t_end);
  kv["step.cfl_safety"] = num(c.step.cfl_safety);
  kv["step.scheme"] = to_string(c.step.scheme);
  kv["step.snapshot_every"] = std::to_string(c.step.snapshot_every);
  kv["step.relax_substeps"] = std::to_string(c.step.relax_substeps);
  kv["initial.seed"] = std::to_string(c.initial_data.seed);
  kv["initial.amplitude"] = num(c.initial_data.amplitude);
  kv["initial.k_lo"] = std::to_string(c.initial_data.k_lo);
  kv["initial.k_hi"] = std::to_string(c.initial_data.k_hi);
  kv["initial.well_prepared"] = c.initial_data.well_prepared ? "true" : "false";
  kv["run.system"] = c.system;
  kv["run.observers"] = join(c.observers);
  kv["run.output_dir"] = c.output_dir;
  kv["run.delta2"] = num(c.delta2);
  kv["rate.nus"] = join(c.nus);
  kv["energy.h1"] = num(c.linear.h1);
  kv["energy.h2"] = num(c.linear.h2);
  kv["energy.h3"] = num(c.linear.h3);
  kv["energy.h4"] = num(c.linear.h4);
  kv["energy.h5"] = num(c.linear.h5);
  kv["energy.h6"] = num(c.linear.h6);
  kv["energy.eta"] = num(c.linear.eta);
  kv["energy.nu"] = num(c.linear.nu);
  kv["energy.js"] = join(c.js);
  kv["lp.field"] = c.lp_field;
  kv["lp.s"] = num(c.lp_s);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  // Where results go does not change what they are.
  RunConfig c = cfg;
  c.output_dir.clear();
  const std::string dump = canonical_dump(c);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(dump.data(), dump.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::Io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["grid"] = {{"dim", c.grid.dim}, {"n", c.grid.points_per_axis}, {"length", c.grid.length}};
  const ModelParams& m = c.model;
  j["model"] = {{"gamma_plus", m.gamma_plus}, {"gamma_minus", m.gamma_minus}, {"A_plus", m.A_plus},
                {"A_minus", m.A_minus},       {"mu", m.mu},                   {"lambda", m.lambda},
                {"nu", m.nu()},               {"eta", m.eta},                 {"alpha_bar_plus", m.alpha_bar_plus},
                {"rho_bar_plus", m.rho_bar_plus}, {"rho_bar_minus", m.rho_bar_minus}};
  j["step"] = {{"dt", c.step.dt},
               {"t_end", c.step.t_end},
               {"cfl_safety", c.step.cfl_safety},
               {"scheme", to_string(c.step.scheme)},
               {"snapshot_every", c.step.snapshot_every},
               {"relax_substeps", c.step.relax_substeps}};
  j["initial"] = {{"seed", c.initial_data.seed},
                  {"amplitude", c.initial_data.amplitude},
                  {"k_lo", c.initial_data.k_lo},
                  {"k_hi", c.initial_data.k_hi},
                  {"well_prepared", c.initial_data.well_prepared}};
  j["run"] = {{"system", c.system}, {"observers", c.observers}, {"output_dir", c.output_dir}, {"delta2", c.delta2}};
  j["rate"] = {{"nus", c.nus}};
  j["energy"] = {{"h1", c.linear.h1}, {"h2", c.linear.h2}, {"h3", c.linear.h3}, {"h4", c.linear.h4},
                 {"h5", c.linear.h5}, {"h6", c.linear.h6}, {"eta", c.linear.eta}, {"nu", c.linear.nu},
                 {"js", c.js}};
  j["lp"] = {{"field", c.lp_field}, {"s", c.lp_s}};
  return j;
}

nlohmann::json version_info() {
  nlohmann::json j;
  j["bnlab"] = kVersion;
  j["fftw"] = std::string(fftw_version);
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["boost"] = BOOST_LIB_VERSION;
  j["openssl"] = OPENSSL_VERSION_TEXT;
  j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  j["compiler"] = __VERSION__;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& subcommand,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "bnlab";
  j["subcommand"] = subcommand;
  j["config_hash"] = config_hash(cfg);
  j["config"] = config_to_json(cfg);
  j["seeds"] = {{"initial", cfg.initial_data.seed}};
  j["versions"] = version_info();
  j["outputs"] = outputs;
  write_json(dir / "manifest.json", j);
}

void write_snapshot(const std::filesystem::path& dir, const std::string& stem, double time,
                    const std::vector<std::pair<std::string, Field>>& fields, const RunConfig& cfg) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
  const std::string bin = stem + ".bin";
  std::ofstream out(dir / bin, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + (dir / bin).string() + "'");
  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, f] : fields) {
    const auto s = f.samples();
    out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(double)));
    entries.push_back({{"name", name}, {"offset_bytes", offset}, {"count", s.size()}});
    offset += s.size() * sizeof(double);
  }
  if (!out) throw Error(Errc::Io, "write failed for '" + (dir / bin).string() + "'");
  nlohmann::json h;
  h["format"] = "bnlab-snapshot";
  h["format_version"] = 1;
  h["time"] = time;
  h["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.points_per_axis}, {"length", cfg.grid.length}};
  h["dtype"] = "float64";
  h["byte_order"] = "little";
  h["layout"] = "row-major, last axis fastest";
  h["binary"] = bin;
  h["fields"] = entries;
  h["model"] = config_to_json(cfg)["model"];
  h["config_hash"] = config_hash(cfg);
  write_json(dir / (stem + ".json"), h);
}

Snapshot read_snapshot(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) throw Error(Errc::Io, "cannot open snapshot header '" + header.string() + "'");
  Snapshot snap;
  try {
    in >> snap.header;
    const auto& h = snap.header;
    if (h.at("format") != "bnlab-snapshot") throw Error(Errc::Io, "not a bnlab snapshot");
    snap.grid = GridSpec{h.at("grid").at("dim").get<int>(), h.at("grid").at("n").get<int>(),
                         h.at("grid").at("length").get<double>()};
    snap.grid.validate();
    snap.time = h.at("time").get<double>();
    std::ifstream bin(header.parent_path() / h.at("binary").get<std::string>(), std::ios::binary);
    if (!bin) throw Error(Errc::Io, "missing snapshot payload");
    for (const auto& e : h.at("fields")) {
      const auto count = e.at("count").get<std::size_t>();
      if (count != snap.grid.size()) throw Error(Errc::Io, "field size does not match the grid");
      std::vector<double> data(count);
      bin.seekg(static_cast<std::streamoff>(e.at("offset_bytes").get<std::size_t>()));
      bin.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(double)));
      if (!bin) throw Error(Errc::Io, "truncated snapshot payload");
      snap.fields.emplace_back(e.at("name").get<std::string>(), Field(snap.grid, std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Io, std::string("malformed snapshot header: ") + e.what());
  }
  return snap;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : f_(std::fopen(path.string().c_str(), "w")), ncols_(columns.size()) {
  if (!f_) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  std::fputs(join(columns).c_str(), f_);
  std::fputc('\n', f_);
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) throw Error(Errc::Io, "CSV row width mismatch");
  std::fputs(join(values).c_str(), f_);
  std::fputc('\n', f_);
}

}  // namespace bnlab

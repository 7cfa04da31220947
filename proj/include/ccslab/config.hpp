#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: INI-style `key = value` under `[section]` headers.
 *
 * Values are numbers, strings, or comma-separated lists. Every key is checked
 * against the known set for its section before any computation starts.
 */

#include "ccslab/propagator.hpp"
#include "ccslab/sampler.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ccslab {

enum class Experiment { DoubleWellFidelity, TripleWellOccupation, ClassicalSingle, PropertySuite };

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::DoubleWellFidelity: return "doublewell-fidelity";
    case Experiment::TripleWellOccupation: return "triplewell-occupation";
    case Experiment::ClassicalSingle: return "classical-single";
    case Experiment::PropertySuite: return "property-suite";
  }
  return "?";
}

enum class SamplerKind { Single, Grid, Conditioned };

enum class ModelKind { DoubleWell, TripleWell };

struct RunConfig {
  Experiment experiment = Experiment::DoubleWellFidelity;
  Scheme scheme = Scheme::NonUnitary;

  ModelKind model = ModelKind::DoubleWell;
  double omega = 1.0;
  double chi = 0.0;
  std::vector<int> N{100};

  SamplerKind sampler = SamplerKind::Grid;
  Label center;  // one entry per label component
  double spacing_eta = 0.1;
  double spacing_zeta = 0.1;
  int extent_eta = 8;
  int extent_zeta = 8;
  int reference_N = 0;
  std::vector<double> sigma_theta;
  std::vector<double> sigma_phi;
  double epsilon_limit = 1e10;
  std::vector<int> target_M{1};
  int max_attempts = 10000;
  WidthMode width_mode = WidthMode::StdDev;

  double t_final = 10.0;  // in units of 1/|Omega|
  int samples = 101;
  double tol = 1e-8;
  double epsilon_guard = kEpsilonGuard;
  std::uint64_t seed = 1;
  std::string output = "out.csv";

  /// Canonical key = value listing used for hashing and file headers.
  std::string canonical_text() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto t = trim(v);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("`" + key + "`: expected a number, got '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto t = trim(v);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("`" + key + "`: expected an integer, got '" + v + "'");
  return x;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

inline std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(parse_int(key, s)));
  return out;
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

}  // namespace detail

inline std::string RunConfig::canonical_text() const {
  std::vector<double> cre, cim;
  for (Eigen::Index a = 0; a < center.size(); ++a) {
    cre.push_back(center[a].real());
    cim.push_back(center[a].imag());
  }
  std::ostringstream os;
  os << "experiment.name = " << experiment_name(experiment) << "\n"
     << "experiment.scheme = " << scheme_name(scheme) << "\n"
     << "model.kind = " << (model == ModelKind::DoubleWell ? "doublewell" : "triplewell") << "\n"
     << "model.omega = " << detail::fmt_double(omega) << "\n"
     << "model.chi = " << detail::fmt_double(chi) << "\n"
     << "model.N = " << detail::join(N) << "\n"
     << "sampler.kind = "
     << (sampler == SamplerKind::Single ? "single" : sampler == SamplerKind::Grid ? "grid" : "conditioned") << "\n"
     << "sampler.center_re = " << detail::join(cre) << "\n"
     << "sampler.center_im = " << detail::join(cim) << "\n";
  if (sampler == SamplerKind::Grid) {
    os << "sampler.spacing_eta = " << detail::fmt_double(spacing_eta) << "\n"
       << "sampler.spacing_zeta = " << detail::fmt_double(spacing_zeta) << "\n"
       << "sampler.extent_eta = " << extent_eta << "\n"
       << "sampler.extent_zeta = " << extent_zeta << "\n"
       << "sampler.reference_N = " << reference_N << "\n";
  }
  if (sampler == SamplerKind::Conditioned) {
    os << "sampler.sigma_theta = " << detail::join(sigma_theta) << "\n"
       << "sampler.sigma_phi = " << detail::join(sigma_phi) << "\n"
       << "sampler.epsilon_limit = " << detail::fmt_double(epsilon_limit) << "\n"
       << "sampler.target_M = " << detail::join(target_M) << "\n"
       << "sampler.max_attempts = " << max_attempts << "\n"
       << "sampler.width = " << (width_mode == WidthMode::StdDev ? "stddev" : "variance") << "\n";
  }
  os << "time.t_final = " << detail::fmt_double(t_final) << "\n"
     << "time.samples = " << samples << "\n"
     << "integrator.tol = " << detail::fmt_double(tol) << "\n"
     << "integrator.epsilon_guard = " << detail::fmt_double(epsilon_guard) << "\n"
     << "run.seed = " << seed << "\n"
     << "run.output = " << output << "\n";
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical_text())));
  return buf;
}

namespace detail {

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"experiment", {"name", "scheme"}},
      {"model", {"kind", "omega", "chi", "N"}},
      {"sampler",
       {"kind", "center_theta", "center_phi", "center_re", "center_im", "spacing_eta", "spacing_zeta", "spacing",
        "extent_eta", "extent_zeta", "extent", "reference_N", "sigma_theta", "sigma_phi", "epsilon_limit", "target_M",
        "max_attempts", "width"}},
      {"time", {"t_final", "samples"}},
      {"integrator", {"tol", "epsilon_guard"}},
      {"run", {"seed", "output"}},
  };
  return k;
}

}  // namespace detail

/// Parses and validates a configuration; throws ConfigError on any problem.
inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }

  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    const auto& known = detail::known_keys();
    auto sec = known.find(section);
    if (sec == known.end()) {
      if (body.empty()) throw ConfigError("key `" + section + "` must be inside a [section]");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, val] : body) {
      if (!sec->second.count(key)) throw ConfigError("unknown key `" + key + "` in [" + section + "]");
      kv[section + "." + key] = detail::trim(val.data());
    }
  }
  auto has = [&](const std::string& k) { return kv.count(k) > 0; };
  auto get = [&](const std::string& k) -> const std::string& { return kv.at(k); };
  auto num = [&](const std::string& k, double& out) {
    if (has(k)) out = detail::parse_double(k, get(k));
  };
  auto integer = [&](const std::string& k, int& out) {
    if (has(k)) out = static_cast<int>(detail::parse_int(k, get(k)));
  };

  RunConfig c;
  if (!has("experiment.name")) throw ConfigError("missing `name` in [experiment]");
  {
    const auto& n = get("experiment.name");
    if (n == "doublewell-fidelity") {
      c.experiment = Experiment::DoubleWellFidelity;
    } else if (n == "triplewell-occupation") {
      c.experiment = Experiment::TripleWellOccupation;
    } else if (n == "classical-single") {
      c.experiment = Experiment::ClassicalSingle;
    } else if (n == "property-suite") {
      c.experiment = Experiment::PropertySuite;
    } else {
      throw ConfigError("unknown experiment '" + n + "'");
    }
  }
  if (c.experiment == Experiment::PropertySuite) return c;

  // Defaults that depend on the experiment.
  switch (c.experiment) {
    case Experiment::DoubleWellFidelity:
      c.scheme = Scheme::NonUnitary;
      c.model = ModelKind::DoubleWell;
      c.sampler = SamplerKind::Grid;
      break;
    case Experiment::TripleWellOccupation:
      c.scheme = Scheme::Unitary;
      c.model = ModelKind::TripleWell;
      c.sampler = SamplerKind::Conditioned;
      break;
    default:
      c.scheme = Scheme::Classical;
      c.model = ModelKind::DoubleWell;
      c.sampler = SamplerKind::Single;
      break;
  }

  if (has("experiment.scheme")) {
    const auto& s = get("experiment.scheme");
    if (s == "unitary") {
      c.scheme = Scheme::Unitary;
    } else if (s == "nonunitary") {
      c.scheme = Scheme::NonUnitary;
    } else if (s == "classical") {
      c.scheme = Scheme::Classical;
    } else {
      throw ConfigError("unknown scheme '" + s + "'");
    }
  }
  if (has("model.kind")) {
    const auto& s = get("model.kind");
    if (s == "doublewell") {
      c.model = ModelKind::DoubleWell;
    } else if (s == "triplewell") {
      c.model = ModelKind::TripleWell;
    } else {
      throw ConfigError("unknown model '" + s + "'");
    }
  }
  if (c.experiment == Experiment::DoubleWellFidelity && c.model != ModelKind::DoubleWell)
    throw ConfigError("doublewell-fidelity needs the double-well model");
  if (c.experiment == Experiment::TripleWellOccupation && c.model != ModelKind::TripleWell)
    throw ConfigError("triplewell-occupation needs the triple-well model");

  num("model.omega", c.omega);
  num("model.chi", c.chi);
  if (has("model.N")) c.N = detail::parse_ints("model.N", get("model.N"));

  if (has("sampler.kind")) {
    const auto& s = get("sampler.kind");
    if (s == "single") {
      c.sampler = SamplerKind::Single;
    } else if (s == "grid") {
      c.sampler = SamplerKind::Grid;
    } else if (s == "conditioned") {
      c.sampler = SamplerKind::Conditioned;
    } else {
      throw ConfigError("unknown sampler '" + s + "'");
    }
  }
  if (c.scheme == Scheme::Classical) c.sampler = SamplerKind::Single;

  const int dim = c.model == ModelKind::DoubleWell ? 1 : 2;
  const bool angles = has("sampler.center_theta") || has("sampler.center_phi");
  const bool cart = has("sampler.center_re") || has("sampler.center_im");
  if (angles && cart) throw ConfigError("give the centre either as angles or as re/im, not both");
  c.center = Label::Zero(dim);
  if (angles) {
    const auto th = detail::parse_doubles("center_theta",
                                          has("sampler.center_theta") ? get("sampler.center_theta") : "0");
    const auto ph = has("sampler.center_phi") ? detail::parse_doubles("center_phi", get("sampler.center_phi"))
                                              : std::vector<double>(th.size(), 0.0);
    if (static_cast<int>(th.size()) != dim || static_cast<int>(ph.size()) != dim)
      throw ConfigError("centre needs " + std::to_string(dim) + " component(s)");
    for (int a = 0; a < dim; ++a) {
      try {
        c.center[a] = su2_label(th[a], ph[a]);
      } catch (const Error& e) {
        throw ConfigError(std::string("centre angles: ") + e.what());
      }
    }
  } else if (cart) {
    const auto re = has("sampler.center_re") ? detail::parse_doubles("center_re", get("sampler.center_re"))
                                             : std::vector<double>(dim, 0.0);
    const auto im = has("sampler.center_im") ? detail::parse_doubles("center_im", get("sampler.center_im"))
                                             : std::vector<double>(re.size(), 0.0);
    if (static_cast<int>(re.size()) != dim || static_cast<int>(im.size()) != dim)
      throw ConfigError("centre needs " + std::to_string(dim) + " component(s)");
    for (int a = 0; a < dim; ++a) c.center[a] = {re[a], im[a]};
  } else {
    throw ConfigError("missing sampler centre (center_theta/center_phi or center_re/center_im)");
  }

  if (has("sampler.spacing")) c.spacing_eta = c.spacing_zeta = detail::parse_double("spacing", get("sampler.spacing"));
  num("sampler.spacing_eta", c.spacing_eta);
  num("sampler.spacing_zeta", c.spacing_zeta);
  if (has("sampler.extent")) c.extent_eta = c.extent_zeta = static_cast<int>(detail::parse_int("extent", get("sampler.extent")));
  integer("sampler.extent_eta", c.extent_eta);
  integer("sampler.extent_zeta", c.extent_zeta);
  integer("sampler.reference_N", c.reference_N);
  if (has("sampler.sigma_theta")) c.sigma_theta = detail::parse_doubles("sigma_theta", get("sampler.sigma_theta"));
  if (has("sampler.sigma_phi")) c.sigma_phi = detail::parse_doubles("sigma_phi", get("sampler.sigma_phi"));
  num("sampler.epsilon_limit", c.epsilon_limit);
  if (has("sampler.target_M")) c.target_M = detail::parse_ints("target_M", get("sampler.target_M"));
  integer("sampler.max_attempts", c.max_attempts);
  if (has("sampler.width")) {
    const auto& s = get("sampler.width");
    if (s == "stddev") {
      c.width_mode = WidthMode::StdDev;
    } else if (s == "variance") {
      c.width_mode = WidthMode::Variance;
    } else {
      throw ConfigError("sampler width must be `stddev` or `variance`");
    }
  }

  num("time.t_final", c.t_final);
  integer("time.samples", c.samples);
  num("integrator.tol", c.tol);
  num("integrator.epsilon_guard", c.epsilon_guard);
  if (has("run.seed")) {
    const auto v = detail::parse_int("seed", get("run.seed"));
    if (v < 0) throw ConfigError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  }
  if (has("run.output")) c.output = get("run.output");

  // Validation.
  if (c.N.empty()) throw ConfigError("N list is empty");
  for (int n : c.N)
    if (n < 2) throw ConfigError("every N must be >= 2");
  if (!std::isfinite(c.omega) || !std::isfinite(c.chi)) throw ConfigError("omega and chi must be finite");
  if (!(c.t_final >= 0.0)) throw ConfigError("t_final must be >= 0");
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  if (!(c.tol > 0.0) || c.tol >= 1.0) throw ConfigError("tol must lie in (0, 1)");
  if (!(c.epsilon_guard > 1.0)) throw ConfigError("epsilon_guard must exceed 1");
  if (c.output.empty()) throw ConfigError("output path is empty");
  if (c.experiment != Experiment::ClassicalSingle && c.scheme == Scheme::Classical && c.sampler != SamplerKind::Single)
    throw ConfigError("the classical scheme uses a single basis element");
  if (c.sampler == SamplerKind::Grid) {
    if (c.model != ModelKind::DoubleWell) throw ConfigError("the regular grid is defined for SU(2) only");
    if (!(c.spacing_eta > 0.0) || !(c.spacing_zeta > 0.0)) throw ConfigError("grid spacings must be positive");
    if (c.extent_eta < 0 || c.extent_zeta < 0) throw ConfigError("grid extents must be >= 0");
    if (c.reference_N < 0) throw ConfigError("reference_N must be >= 0");
  }
  if (c.sampler == SamplerKind::Conditioned) {
    if (static_cast<int>(c.sigma_theta.size()) != dim || static_cast<int>(c.sigma_phi.size()) != dim)
      throw ConfigError("need " + std::to_string(dim) + " sigma_theta and sigma_phi value(s)");
    for (double s : c.sigma_theta)
      if (!(s > 0.0)) throw ConfigError("sampling widths must be positive");
    for (double s : c.sigma_phi)
      if (!(s > 0.0)) throw ConfigError("sampling widths must be positive");
    if (!(c.epsilon_limit > 1.0)) throw ConfigError("epsilon_limit must exceed 1");
    if (c.target_M.empty()) throw ConfigError("target_M list is empty");
    for (int m : c.target_M)
      if (m < 1) throw ConfigError("target_M must be >= 1");
    if (c.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  }
  if (c.scheme == Scheme::NonUnitary && c.sampler == SamplerKind::Conditioned)
    throw ConfigError("the non-unitary scheme needs grid weights; use the grid or single sampler");
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in);
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace ccslab

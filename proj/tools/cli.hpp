#pragma once

// Command-line runner: config parsing, dispatch, CSV and JSON artifacts.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdeform/qdeform.hpp"

namespace qdeform::cli {

using json = nlohmann::ordered_json;

enum class Command { eval, verify, fp_stationary, fp_evolve, schrod_eigen, schrod_free, schrod_evolve };
enum class Format { csv, json };

inline constexpr std::string_view kCommandNames[] = {"eval",        "verify",       "fp-stationary", "fp-evolve",
                                                     "schrod-eigen", "schrod-free", "schrod-evolve"};

inline std::string_view to_string(Command c) { return kCommandNames[static_cast<int>(c)]; }

struct Sweep {
  std::string key = "q";
  double from = 0.0;
  double to = 0.0;
  int points = 1;

  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < points; ++i) v.push_back(points == 1 ? from : from + (to - from) * i / (points - 1));
    return v;
  }
};

struct RunConfig {
  Command command = Command::verify;
  double q = 2.0;
  struct {
    std::optional<double> lambda0;
    std::optional<std::size_t> count;
    Branch branch = Branch::positive;
  } lattice;
  struct {
    double hbar = 1.0;
    double mass = 1.0;
    double gamma = 1.0;
    double alpha = 1.0;
    double k = 1.0;
    std::size_t levels = 0;
    std::string potential = "free";  ///< free | oscillator
    std::string drift = "linear";    ///< linear | brownian
    std::string initial = "q_gaussian";  ///< q_gaussian | lattice_stationary
  } physics;
  struct {
    double tol_rel = 1e-8;
    double dt = 1.0;
    long steps = 20;
    DilatationConvention convention = DilatationConvention::argument_scaling;
    TimeScheme scheme = TimeScheme::implicit_euler;
  } numerics;
  struct {
    std::string path = "-";
    std::optional<Format> format;
  } output;
  std::optional<Sweep> sweep;
};

// ---------------------------------------------------------------------------
// parsing

/// A raw key = value setting and where it came from ("line 3", "flag --q").
struct Setting {
  std::string value;
  std::string origin;
};
using Settings = std::map<std::string, Setting>;

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command", "q",     "lambda0", "count",      "branch", "hbar",   "mass",   "gamma", "alpha",
      "k",       "levels", "potential", "drift",   "initial", "tol_rel", "dt",   "steps", "convention",
      "scheme",  "output", "format",  "sweep"};
  return keys;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat `key = value` text with `#` comments.
inline Settings read_config_text(std::string_view text) {
  Settings out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError("expected key = value at " + where);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError("unknown key '" + key + "' at " + where);
    }
    out[key] = {value, where};
  }
  return out;
}

namespace detail {

inline std::string where(const std::string& key, const Setting& s) { return "'" + key + "' (" + s.origin + ")"; }

inline double to_double(const std::string& key, const Setting& s) {
  double v = 0.0;
  const char* b = s.value.data();
  const char* e = b + s.value.size();
  const auto r = std::from_chars(b, e, v);
  if (s.value.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) {
    throw UsageError("malformed number '" + s.value + "' for " + where(key, s));
  }
  return v;
}

inline long to_long(const std::string& key, const Setting& s) {
  long v = 0;
  const char* b = s.value.data();
  const char* e = b + s.value.size();
  const auto r = std::from_chars(b, e, v);
  if (s.value.empty() || r.ec != std::errc() || r.ptr != e) {
    throw UsageError("malformed integer '" + s.value + "' for " + where(key, s));
  }
  return v;
}

inline double positive(const std::string& key, const Setting& s) {
  const double v = to_double(key, s);
  if (!(v > 0.0)) throw UsageError(where(key, s) + " must be positive, got " + s.value);
  return v;
}

template <class E>
E choice(const std::string& key, const Setting& s, std::initializer_list<std::pair<std::string_view, E>> opts) {
  for (const auto& [name, v] : opts) {
    if (s.value == name) return v;
  }
  std::string allowed;
  for (const auto& [name, v] : opts) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw UsageError("invalid value '" + s.value + "' for " + where(key, s) + "; expected one of " + allowed);
}

inline Sweep parse_sweep(const std::string& key, const Setting& s) {
  const auto eq = s.value.find('=');
  const auto c1 = s.value.find(':', eq == std::string::npos ? 0 : eq);
  const auto c2 = c1 == std::string::npos ? std::string::npos : s.value.find(':', c1 + 1);
  if (eq == std::string::npos || c2 == std::string::npos) {
    throw UsageError("sweep must look like q=a:b:n, got '" + s.value + "' for " + where(key, s));
  }
  Sweep w;
  w.key = s.value.substr(0, eq);
  if (w.key != "q") throw UsageError("only q can be swept, got '" + w.key + "' for " + where(key, s));
  w.from = positive("q", {s.value.substr(eq + 1, c1 - eq - 1), s.origin});
  w.to = positive("q", {s.value.substr(c1 + 1, c2 - c1 - 1), s.origin});
  const long n = to_long(key, {s.value.substr(c2 + 1), s.origin});
  if (n < 1) throw UsageError("sweep needs at least one point for " + where(key, s));
  w.points = static_cast<int>(n);
  return w;
}

}  // namespace detail

inline RunConfig build_config(const Settings& s) {
  RunConfig c;
  using namespace detail;
  for (const auto& [key, v] : s) {
    if (key == "command") {
      c.command = choice<Command>(key, v, {{"eval", Command::eval},
                                           {"verify", Command::verify},
                                           {"fp-stationary", Command::fp_stationary},
                                           {"fp-evolve", Command::fp_evolve},
                                           {"schrod-eigen", Command::schrod_eigen},
                                           {"schrod-free", Command::schrod_free},
                                           {"schrod-evolve", Command::schrod_evolve}});
    } else if (key == "q") {
      c.q = positive(key, v);
    } else if (key == "lambda0") {
      c.lattice.lambda0 = positive(key, v);
    } else if (key == "count") {
      const long n = to_long(key, v);
      if (n < 2) throw UsageError(where(key, v) + " must be at least 2, got " + v.value);
      c.lattice.count = static_cast<std::size_t>(n);
    } else if (key == "branch") {
      c.lattice.branch = choice<Branch>(key, v, {{"positive", Branch::positive}, {"symmetric", Branch::symmetric}});
    } else if (key == "hbar") {
      c.physics.hbar = positive(key, v);
    } else if (key == "mass") {
      c.physics.mass = positive(key, v);
    } else if (key == "gamma") {
      c.physics.gamma = positive(key, v);
    } else if (key == "alpha") {
      c.physics.alpha = positive(key, v);
    } else if (key == "k") {
      c.physics.k = to_double(key, v);
    } else if (key == "levels") {
      const long n = to_long(key, v);
      if (n < 0) throw UsageError(where(key, v) + " must be non-negative, got " + v.value);
      c.physics.levels = static_cast<std::size_t>(n);
    } else if (key == "potential") {
      c.physics.potential = choice<std::string>(key, v, {{"free", "free"}, {"oscillator", "oscillator"}});
    } else if (key == "drift") {
      c.physics.drift = choice<std::string>(key, v, {{"linear", "linear"}, {"brownian", "brownian"}});
    } else if (key == "initial") {
      c.physics.initial = choice<std::string>(
          key, v, {{"q_gaussian", "q_gaussian"}, {"lattice_stationary", "lattice_stationary"}});
    } else if (key == "tol_rel") {
      c.numerics.tol_rel = positive(key, v);
    } else if (key == "dt") {
      c.numerics.dt = positive(key, v);
    } else if (key == "steps") {
      c.numerics.steps = to_long(key, v);
      if (c.numerics.steps < 0) throw UsageError(where(key, v) + " must be non-negative, got " + v.value);
    } else if (key == "convention") {
      c.numerics.convention = choice<DilatationConvention>(
          key, v, {{"argument_scaling", DilatationConvention::argument_scaling},
                   {"literal_qx", DilatationConvention::literal_qx}});
    } else if (key == "scheme") {
      c.numerics.scheme = choice<TimeScheme>(key, v, {{"explicit", TimeScheme::explicit_euler},
                                                      {"implicit", TimeScheme::implicit_euler},
                                                      {"auto", TimeScheme::automatic}});
    } else if (key == "output") {
      if (v.value.empty()) throw UsageError("empty output path for " + where(key, v));
      c.output.path = v.value;
    } else if (key == "format") {
      c.output.format = choice<Format>(key, v, {{"csv", Format::csv}, {"json", Format::json}});
    } else if (key == "sweep") {
      c.sweep = parse_sweep(key, v);
    } else {
      throw UsageError("unknown key '" + key + "' (" + v.origin + ")");
    }
  }
  if (c.sweep && c.output.path == "-") {
    throw UsageError("a sweep writes one file per point; set --output to a file path");
  }
  if (c.command == Command::verify && c.output.format == Format::csv) {
    throw UsageError("verify writes a JSON report; --format csv is not available");
  }
  return c;
}

struct Invocation {
  RunConfig config;
  bool help = false;
  std::string help_text;
};

/// argv -> RunConfig. Values from --config are read first; flags override them.
inline Invocation parse_config(int argc, const char* const* argv) {
  CLI::App app{"q-deformed calculus, Fokker-Planck and Schroedinger experiments", "qdeform"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(QDEFORM_VERSION));

  std::map<std::string, std::string> flags;
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file (flags override it)");
  const std::vector<std::pair<std::string, std::string>> options{
      {"q", "deformation parameter q > 0"},
      {"lambda0", "lattice anchor lambda0 > 0"},
      {"count", "points per half-line"},
      {"branch", "positive | symmetric"},
      {"hbar", "reduced Planck constant"},
      {"mass", "particle mass"},
      {"gamma", "drift strength"},
      {"alpha", "stationary width parameter (J2 = gamma/alpha)"},
      {"k", "plane-wave number (eval: exponent scale a)"},
      {"levels", "eigen levels required (0: whatever survives)"},
      {"potential", "free | oscillator"},
      {"drift", "fp-evolve drift: linear | brownian"},
      {"initial", "fp-evolve initial density: q_gaussian | lattice_stationary"},
      {"tol-rel", "eigen residual threshold"},
      {"dt", "time step"},
      {"steps", "number of time steps"},
      {"convention", "argument_scaling | literal_qx"},
      {"scheme", "explicit | implicit | auto"},
      {"format", "csv | json"},
      {"sweep", "q=a:b:n, one output file per point"},
  };
  for (const auto& [name, help] : options) {
    app.add_option("--" + name, flags[name], help)->allow_extra_args(false);
  }
  app.add_option("-o,--output", flags["output"], "output path, - for stdout");
  for (std::string_view c : kCommandNames) app.add_subcommand(std::string(c), "run " + std::string(c));

  Invocation inv;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    inv.help = true;
    inv.help_text = app.help();
    return inv;
  } catch (const CLI::CallForVersion&) {
    inv.help = true;
    inv.help_text = std::string(QDEFORM_VERSION) + "\n";
    return inv;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  Settings s;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot read config file '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    s = read_config_text(buf.str());
  }
  for (const auto& [name, help] : options) {
    if (app.count("--" + name) > 0) {
      const std::string key = name == "tol-rel" ? "tol_rel" : name;
      s[key] = {flags[name], "flag --" + name};
    }
  }
  if (app.count("--output") > 0) s["output"] = {flags["output"], "flag --output"};
  for (const CLI::App* sub : app.get_subcommands()) s["command"] = {sub->get_name(), "command line"};
  if (s.find("command") == s.end()) throw UsageError("no command given; expected one of eval, verify, fp-stationary, fp-evolve, schrod-eigen, schrod-free, schrod-evolve");
  inv.config = build_config(s);
  return inv;
}

// ---------------------------------------------------------------------------
// artifacts

namespace detail {

inline std::string num(double v) { return format_number(v); }

/// Comma separated rows with the two fixed header lines.
class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void comment(const std::string& c) { comments_.push_back(c); }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw Error("CSV row width does not match the header");
    rows_.push_back(cells);
  }
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
    out += "\n# schema-version 1\n";
    for (const auto& c : comments_) out += "# " + c + "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

inline json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

inline LatticePtr make_lattice(const RunConfig& c, double top, std::size_t count) {
  const DeformationParameter d(c.q);
  const double lambda0 = c.lattice.lambda0.value_or(c.q < 1.0 ? top : top * c.q);
  return GeometricLattice::build(lambda0, d, c.lattice.count.value_or(count), c.lattice.branch);
}

inline json lattice_json(const GeometricLattice& lat) {
  return json{{"q", lat.q()},
              {"lambda0", lat.lambda0()},
              {"count", lat.count()},
              {"branch", std::string(to_string(lat.branch()))},
              {"points", lat.size()}};
}

inline json config_json(const RunConfig& c) {
  return json{{"command", std::string(to_string(c.command))},
              {"q", c.q},
              {"hbar", c.physics.hbar},
              {"mass", c.physics.mass},
              {"gamma", c.physics.gamma},
              {"alpha", c.physics.alpha},
              {"k", c.physics.k},
              {"levels", c.physics.levels},
              {"potential", c.physics.potential},
              {"tol_rel", c.numerics.tol_rel},
              {"dt", c.numerics.dt},
              {"steps", c.numerics.steps},
              {"convention", std::string(to_string(c.numerics.convention))},
              {"scheme", std::string(to_string(c.numerics.scheme))}};
}

inline SchrodingerProblem schrodinger_problem(const RunConfig& c) {
  SchrodingerProblem p;
  p.lattice = make_lattice(c, 2.0, 16);
  p.hbar = c.physics.hbar;
  p.mass = c.physics.mass;
  if (c.physics.potential == "oscillator") p.potential = verify::oscillator_potential();
  return p;
}

inline FPProblem fp_problem(const RunConfig& c, bool operator_drift) {
  FPProblem p;
  p.drift = operator_drift ? DriftSpec::brownian(c.physics.gamma) : DriftSpec::linear(c.physics.gamma);
  p.diffusion = DiffusionSpec::from_brownian(c.physics.gamma, c.physics.alpha);
  p.lattice = make_lattice(c, 3.0, 40);
  p.convention = c.numerics.convention;
  return p;
}

}  // namespace detail

/// What a run produced: the artifact text and the exit status.
struct RunResult {
  std::string text;
  int status = 0;
  std::vector<std::string> warnings;
};

inline json report_json(const verify::Report& r, const RunConfig& c) {
  json suites = json::object();
  for (const auto& s : r.suites) {
    json params = json::object();
    for (const auto& [k, v] : s.parameters) params[k] = v;
    suites[s.name] = {{"criterion", s.criterion}, {"max_defect", s.max_defect}, {"tolerance", s.tolerance},
                      {"passed", s.passed},       {"samples", s.samples},       {"measure", s.measure},
                      {"parameters", params}};
  }
  json surveys = json::object();
  for (const auto& s : r.surveys) {
    json values = json::object();
    for (const auto& [k, v] : s.values) values[k] = v;
    surveys[s.name] = {{"values", values}, {"note", s.note}};
  }
  json flags = json::object();
  for (const auto& [k, v] : r.flags) flags[k] = v;
  return json{{"schema_version", 1},
              {"environment", {{"version", r.version}, {"q", r.q}, {"lattice", r.lattice_summary}}},
              {"config", detail::config_json(c)},
              {"passed", r.passed()},
              {"suites", suites},
              {"surveys", surveys},
              {"flags", flags},
              {"warnings", r.warnings}};
}

inline RunResult run_verify(const RunConfig& c) {
  verify::Options o;
  o.q = c.q;
  const verify::Report r = verify::run_all(o);
  return {report_json(r, c).dump(2) + "\n", r.passed() ? 0 : 2, r.warnings};
}

inline RunResult run_eval(const RunConfig& c, Format f) {
  const auto lat = detail::make_lattice(c, 2.0, 20);
  const DeformationParameter& d = lat->deformation();
  const double a = c.physics.k;
  std::vector<DomainFlag> flags(lat->size());
  const auto e = LatticeFunction::sample(lat, [&](double x) { return q_exp(a * x, d).value; });
  for (std::size_t i = 0; i < lat->size(); ++i) flags[i] = q_exp(a * lat->point(i), d).domain_flag;
  const LatticeFunction de = jackson_derivative(e);
  std::vector<bool> padded(lat->size(), false);
  for (std::size_t r : de.padded_rows()) padded[r] = true;
  RunResult out;
  if (f == Format::csv) {
    detail::Csv csv({"x", "E_q_re", "E_q_im", "E_q_domain_flag", "DqE_re", "DqE_im", "padded"});
    csv.comment("E_q(a x) with a = " + detail::num(a) + ", q = " + detail::num(c.q));
    for (std::size_t i = 0; i < lat->size(); ++i) {
      csv.row({detail::num(lat->point(i)), detail::num(e[i].real()), detail::num(e[i].imag()),
               std::string(to_string(flags[i])), detail::num(de[i].real()), detail::num(de[i].imag()),
               padded[i] ? "1" : "0"});
    }
    out.text = csv.str();
  } else {
    json rows = json::array();
    for (std::size_t i = 0; i < lat->size(); ++i) {
      rows.push_back({{"x", lat->point(i)}, {"E_q", detail::cjson(e[i])}, {"domain_flag", std::string(to_string(flags[i]))},
                      {"DqE", detail::cjson(de[i])}, {"padded", bool(padded[i])}});
    }
    out.text = json{{"schema_version", 1}, {"config", detail::config_json(c)}, {"lattice", detail::lattice_json(*lat)},
                    {"a", a}, {"rows", rows}}.dump(2) + "\n";
  }
  return out;
}

inline RunResult run_fp_stationary(const RunConfig& c, Format f) {
  const FPProblem p = detail::fp_problem(c, true);
  const StationaryDensity st = fp_stationary(p);
  const DeformationParameter& d = p.deformation();
  const double alpha = p.diffusion.alpha;
  const double residual = stationary_residual([&](double x) { return q_exp(-alpha * x * x, d).value; }, p,
                                              p.convention);
  RunResult out;
  out.warnings = st.warnings;
  if (f == Format::csv) {
    detail::Csv csv({"x", "f_st", "E_q_domain_flag"});
    csv.comment("convention " + std::string(to_string(p.convention)) + ", stationary_residual " +
                detail::num(residual) + ", normalization " + detail::num(st.normalization));
    for (const auto& w : st.warnings) csv.comment("warning: " + w);
    for (std::size_t i = 0; i < st.density.size(); ++i) {
      csv.row({detail::num(p.lattice->point(i)), detail::num(st.density[i].real()),
               std::string(to_string(st.domain_flags[i]))});
    }
    out.text = csv.str();
  } else {
    json x = json::array(), fs = json::array(), fl = json::array();
    for (std::size_t i = 0; i < st.density.size(); ++i) {
      x.push_back(p.lattice->point(i));
      fs.push_back(st.density[i].real());
      fl.push_back(std::string(to_string(st.domain_flags[i])));
    }
    out.text = json{{"schema_version", 1},
                    {"config", detail::config_json(c)},
                    {"lattice", detail::lattice_json(*p.lattice)},
                    {"convention", std::string(to_string(p.convention))},
                    {"stationary_residual", residual},
                    {"normalization", st.normalization},
                    {"x", x},
                    {"f_st", fs},
                    {"E_q_domain_flag", fl},
                    {"warnings", st.warnings}}
                   .dump(2) + "\n";
  }
  return out;
}

inline RunResult run_fp_evolve(const RunConfig& c, Format f) {
  const FPProblem p = detail::fp_problem(c, c.physics.drift == "brownian");
  const LatticeFunction f0 = c.physics.initial == "lattice_stationary" ? fp_stationary_lattice(p)
                                                                       : fp_stationary(p).density;
  const FPTrajectory tr = fp_evolve(f0, p, c.numerics.dt, static_cast<int>(c.numerics.steps), c.numerics.scheme);
  const double rho = fp_step_spectral_radius(p, c.numerics.dt, tr.scheme);
  RunResult out;
  out.warnings = tr.warnings;
  if (rho > 1.0 + 1e-12) {
    out.warnings.push_back("fp_evolve: step spectral radius " + detail::num(rho) +
                           " exceeds 1; the truncated operator amplifies some modes at this dt");
  }
  if (f == Format::csv) {
    detail::Csv csv({"step", "t", "x", "f_re", "f_im", "mass", "mass_drift"});
    csv.comment("scheme " + std::string(to_string(tr.scheme)) + ", drift " + c.physics.drift + ", initial " +
                c.physics.initial + ", step_spectral_radius " + detail::num(rho));
    for (const auto& w : out.warnings) csv.comment("warning: " + w);
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
      for (std::size_t i = 0; i < f0.size(); ++i) {
        csv.row({std::to_string(s), detail::num(tr.times[s]), detail::num(p.lattice->point(i)),
                 detail::num(tr.states[s][i].real()), detail::num(tr.states[s][i].imag()), detail::num(tr.mass[s]),
                 detail::num(tr.mass_drift[s])});
      }
    }
    out.text = csv.str();
  } else {
    json states = json::array();
    for (const auto& s : tr.states) {
      json v = json::array();
      for (std::size_t i = 0; i < s.size(); ++i) v.push_back(detail::cjson(s[i]));
      states.push_back(v);
    }
    json x = json::array();
    for (std::size_t i = 0; i < f0.size(); ++i) x.push_back(p.lattice->point(i));
    out.text = json{{"schema_version", 1},
                    {"config", detail::config_json(c)},
                    {"lattice", detail::lattice_json(*p.lattice)},
                    {"scheme", std::string(to_string(tr.scheme))},
                    {"step_spectral_radius", rho},
                    {"frozen_rows", tr.frozen_rows},
                    {"x", x},
                    {"times", tr.times},
                    {"mass", tr.mass},
                    {"mass_drift", tr.mass_drift},
                    {"states", states},
                    {"warnings", out.warnings}}
                   .dump(2) + "\n";
  }
  return out;
}

inline SpectralDecomposition solve_for(const RunConfig& c, const SchrodingerProblem& p) {
  StationaryOptions o;
  o.max_residual = c.numerics.tol_rel;
  return solve_stationary(p, c.physics.levels, o);
}

inline RunResult run_schrod_eigen(const RunConfig& c, Format f) {
  const SchrodingerProblem p = detail::schrodinger_problem(c);
  const SpectralDecomposition s = solve_for(c, p);
  RunResult out;
  out.warnings = s.warnings;
  if (f == Format::csv) {
    detail::Csv csv({"level", "E_re", "E_im", "residual", "interior_mass", "partner_residual", "proximity_distance"});
    csv.comment("gram_condition " + detail::num(s.gram_condition) + ", retained " + std::to_string(s.size()) +
                " of " + std::to_string(s.total));
    for (const auto& w : s.warnings) csv.comment("warning: " + w);
    for (std::size_t n = 0; n < s.size(); ++n) {
      csv.row({std::to_string(n), detail::num(s.eigenvalues_q[n].real()), detail::num(s.eigenvalues_q[n].imag()),
               detail::num(s.residuals[n]), detail::num(s.interior_mass[n]), detail::num(s.partner_residual[n]),
               detail::num(s.proximity.distance[n])});
    }
    out.text = csv.str();
    return out;
  }
  json ev = json::array(), lit = json::array();
  for (const cplx& e : s.eigenvalues_q) ev.push_back(detail::cjson(e));
  for (const cplx& e : s.literal_qinv_eigenvalues) lit.push_back(detail::cjson(e));
  out.text = json{{"schema_version", 1},
                  {"config", detail::config_json(c)},
                  {"lattice", detail::lattice_json(*p.lattice)},
                  {"potential", p.potential.name},
                  {"eigenvalues", ev},
                  {"residuals", s.residuals},
                  {"interior_mass", s.interior_mass},
                  {"gram_condition", s.gram_condition},
                  {"pairing",
                   {{"rule", "biorthogonal partner u_n = W^-1 (row n of V^-1)^H"},
                    {"partner_residual", s.partner_residual},
                    {"literal_qinv_eigenvalues", lit},
                    {"proximity",
                     {{"tolerance", s.proximity.tolerance},
                      {"matched", s.proximity.matched},
                      {"unmatched", s.proximity.unmatched},
                      {"nearest", s.proximity.nearest},
                      {"distance", s.proximity.distance}}}}},
                  {"total", s.total},
                  {"dropped", s.dropped},
                  {"warnings", s.warnings}}
                 .dump(2) + "\n";
  return out;
}

inline RunResult run_schrod_free(const RunConfig& c, Format f) {
  SchrodingerProblem p;
  const DeformationParameter d(c.q);
  const double k = c.physics.k;
  p.lattice = c.lattice.lambda0 || c.lattice.count ? detail::make_lattice(c, 2.0, 40)
                                                   : plane_wave_lattice(d, k, 0.05, 6.0, c.lattice.branch);
  p.hbar = c.physics.hbar;
  p.mass = c.physics.mass;
  const double residual = free_particle_residual(k, p);
  const double defect = eq54_pointwise_defect(k, p);
  const auto pw = QPairedState::sample(p.lattice, [k](double x, const DeformationParameter& q) {
    return q_plane_wave(k, x, q);
  });
  const LatticeFunction rho = probability_density(pw);
  RunResult out;
  if (f == Format::csv) {
    detail::Csv csv({"x", "phi_q_re", "phi_q_im", "phi_qinv_re", "phi_qinv_im", "rho_re", "rho_im"});
    csv.comment("k " + detail::num(k) + ", free_particle_residual " + detail::num(residual) +
                ", eq54_pointwise_defect " + detail::num(defect));
    for (std::size_t i = 0; i < rho.size(); ++i) {
      csv.row({detail::num(p.lattice->point(i)), detail::num(pw.psi_q[i].real()), detail::num(pw.psi_q[i].imag()),
               detail::num(pw.psi_qinv[i].real()), detail::num(pw.psi_qinv[i].imag()), detail::num(rho[i].real()),
               detail::num(rho[i].imag())});
    }
    out.text = csv.str();
  } else {
    double rho_dev = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) rho_dev = std::max(rho_dev, std::abs(rho[i] - 1.0));
    out.text = json{{"schema_version", 1},
                    {"config", detail::config_json(c)},
                    {"lattice", detail::lattice_json(*p.lattice)},
                    {"k", k},
                    {"energy", p.kinetic_coefficient() * k * k},
                    {"free_particle_residual", residual},
                    {"eq54_pointwise_defect", defect},
                    {"density_max_deviation_from_1", rho_dev}}
                   .dump(2) + "\n";
  }
  return out;
}

inline RunResult run_schrod_evolve(const RunConfig& c, Format f) {
  const SchrodingerProblem p = detail::schrodinger_problem(c);
  const SpectralDecomposition s = solve_for(c, p);
  const std::size_t modes = std::min(s.size(), std::max<std::size_t>(c.physics.levels, 2));
  if (modes == 0) throw DegradedSpectrum("no retained levels to evolve", 0);
  QPairedState psi = s.state(0);
  for (std::size_t n = 1; n < modes; ++n) psi = psi + s.state(n);
  psi = cplx(1.0 / std::sqrt(q_inner_product(psi, psi).value.real())) * psi;
  std::vector<double> times;
  for (long i = 0; i <= c.numerics.steps; ++i) times.push_back(static_cast<double>(i) * c.numerics.dt);
  const EvolvedState ev = evolve_spectral(psi, s, times, p.hbar);
  const OperatorMatrix x = position_matrix(p.lattice);
  std::vector<cplx> xmean;
  for (const auto& st : ev.states) {
    const cplx n = q_inner_product(st, st).value;
    xmean.push_back(expectation_value(x, cplx(1.0 / std::sqrt(n)) * st));
  }
  RunResult out;
  out.warnings = s.warnings;
  if (f == Format::csv) {
    detail::Csv csv({"t", "norm_re", "norm_im", "x_mean_re", "x_mean_im"});
    csv.comment("equal superposition of the lowest " + std::to_string(modes) + " retained levels");
    for (const auto& w : s.warnings) csv.comment("warning: " + w);
    for (std::size_t i = 0; i < times.size(); ++i) {
      csv.row({detail::num(times[i]), detail::num(ev.norm_trace[i].real()), detail::num(ev.norm_trace[i].imag()),
               detail::num(xmean[i].real()), detail::num(xmean[i].imag())});
    }
    out.text = csv.str();
  } else {
    json nt = json::array(), xm = json::array();
    for (const cplx& v : ev.norm_trace) nt.push_back(detail::cjson(v));
    for (const cplx& v : xmean) xm.push_back(detail::cjson(v));
    out.text = json{{"schema_version", 1},
                    {"config", detail::config_json(c)},
                    {"lattice", detail::lattice_json(*p.lattice)},
                    {"modes", modes},
                    {"times", times},
                    {"norm_trace", nt},
                    {"x_mean", xm},
                    {"warnings", s.warnings}}
                   .dump(2) + "\n";
  }
  return out;
}

inline Format default_format(Command c) {
  switch (c) {
    case Command::verify:
    case Command::schrod_eigen:
    case Command::schrod_free: return Format::json;
    default: return Format::csv;
  }
}

/// Produces the artifact for one configuration without touching the disk.
inline RunResult produce(const RunConfig& c) {
  const Format f = c.output.format.value_or(default_format(c.command));
  switch (c.command) {
    case Command::eval: return run_eval(c, f);
    case Command::verify: return run_verify(c);
    case Command::fp_stationary: return run_fp_stationary(c, f);
    case Command::fp_evolve: return run_fp_evolve(c, f);
    case Command::schrod_eigen: return run_schrod_eigen(c, f);
    case Command::schrod_free: return run_schrod_free(c, f);
    case Command::schrod_evolve: return run_schrod_evolve(c, f);
  }
  throw UsageError("unknown command");
}

inline void write_artifact(const std::string& path, const std::string& text, std::ostream& stdout_sink) {
  if (path == "-") {
    stdout_sink << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Error("cannot write output path '" + path + "'");
}

/// `out.csv` with q = 0.8 -> `out_q0.8.csv`.
inline std::string sweep_path(const std::string& path, double q) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_q" + format_number(q) + p.extension().string())).string();
}

/// Runs a configuration (and its sweep, if any) and writes the artifacts.
/// Returns 0 on success, 2 when a verification suite failed, 1 on errors.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto one = [](const RunConfig& cfg, const std::string& path, std::ostream& sink, std::string& log) {
    try {
      const RunResult r = produce(cfg);
      for (const auto& w : r.warnings) log += "warning: " + w + "\n";
      write_artifact(path, r.text, sink);
      return r.status;
    } catch (const UsageError& e) {
      log += "usage error: " + std::string(e.what()) + "\n";
      return 1;
    } catch (const std::exception& e) {
      log += "error: " + std::string(e.what()) + "\n";
      return 1;
    }
  };
  if (!c.sweep) {
    std::string log;
    const int status = one(c, c.output.path, out, log);
    err << log;
    return status;
  }
  // Independent problems, one output file each; nothing shared but the
  // read-only base config.
  const std::vector<double> qs = c.sweep->values();
  std::vector<std::future<std::pair<int, std::string>>> jobs;
  for (double q : qs) {
    RunConfig cfg = c;
    cfg.sweep.reset();
    cfg.q = q;
    cfg.output.path = sweep_path(c.output.path, q);
    jobs.push_back(std::async(std::launch::async, [cfg, one]() {
      std::string log;
      std::ostringstream unused;
      const int s = one(cfg, cfg.output.path, unused, log);
      return std::pair{s, log};
    }));
  }
  int status = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto [s, log] = jobs[i].get();
    std::istringstream lines(log);
    for (std::string line; std::getline(lines, line);) err << "[q=" << format_number(qs[i]) << "] " << line << "\n";
    status = std::max(status, s);
  }
  return status;
}

/// Full command-line entry point.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const Invocation inv = parse_config(argc, argv);
    if (inv.help) {
      out << inv.help_text;
      return 0;
    }
    return run(inv.config, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qdeform::cli

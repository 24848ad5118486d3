#include "ssatlas/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ssatlas {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::spectrum_sweep, "spectrum-sweep"}, {Command::scattering_sweep, "scattering-sweep"},
    {Command::ss_find, "ss-find"},               {Command::ss_atlas, "ss-atlas"},
    {Command::trace_gc, "trace-gc"},             {Command::verify_exact, "verify-exact"},
    {Command::cross_validate, "cross-validate"},
};

const std::map<Command, std::string> kSummaries = {
    {Command::spectrum_sweep, "complex spectrum summaries over a range of g"},
    {Command::scattering_sweep, "T, R_left, R_right along g at fixed k or along k at fixed g"},
    {Command::ss_find, "Newton search for one spectral singularity from a seed (g0, k0)"},
    {Command::ss_atlas, "all spectral singularities for one or more A, with the predicted count"},
    {Command::trace_gc, "critical values g* as functions of A"},
    {Command::verify_exact, "check the lattice spectrum and the residual against the exact bound state"},
    {Command::cross_validate, "compare the first spectral singularity with the first spectral bifurcation"},
};

double parse_double(const std::string& flag, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty() || !std::isfinite(v)) {
    throw UsageError("--" + flag + ": malformed number '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& flag, const std::string& text) {
  int v = 0;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw UsageError("--" + flag + ": malformed integer '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& flag, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw UsageError("--" + flag + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(parse_double(flag, item));
  if (out.empty() || text.back() == ',') throw UsageError("--" + flag + ": malformed number list '" + text + "'");
  return out;
}

template <class Enum>
Enum parse_enum(const std::string& flag, const std::string& text, Enum (*conv)(const std::string&)) {
  try {
    return conv(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--" + flag + ": " + e.what());
  }
}

double json_number(const std::string& flag, const json& v) {
  if (!v.is_number()) throw UsageError("--" + flag + ": expected a number in the config file");
  return v.get<double>();
}

std::string json_text(const std::string& flag, const json& v) {
  if (!v.is_string()) throw UsageError("--" + flag + ": expected a string in the config file");
  return v.get<std::string>();
}

struct Field {
  std::string name;
  std::string help;
  std::function<bool(const RunConfig&)> applies;
  std::function<bool(const RunConfig&)> required;
  std::function<void(RunConfig&, const std::string&)> from_text;
  std::function<void(RunConfig&, const json&)> from_json;
  std::function<std::optional<json>(const RunConfig&)> to_json;
};

using Pred = std::function<bool(const RunConfig&)>;

Pred on(std::initializer_list<Command> cmds) {
  std::vector<Command> list(cmds);
  return [list](const RunConfig& c) { return std::find(list.begin(), list.end(), c.command) != list.end(); };
}

Pred never() {
  return [](const RunConfig&) { return false; };
}

Pred always() {
  return [](const RunConfig&) { return true; };
}

Pred scattering_axis(SweepAxis axis) {
  return [axis](const RunConfig& c) { return c.command == Command::scattering_sweep && c.axis == axis; };
}

Pred either(Pred a, Pred b) {
  return [a, b](const RunConfig& c) { return a(c) || b(c); };
}

template <class T>
Field real_field(std::string name, std::string help, Pred applies, Pred required, T getter) {
  Field f;
  f.name = name;
  f.help = std::move(help);
  f.applies = std::move(applies);
  f.required = std::move(required);
  f.from_text = [name, getter](RunConfig& c, const std::string& s) { getter(c) = parse_double(name, s); };
  f.from_json = [name, getter](RunConfig& c, const json& v) { getter(c) = json_number(name, v); };
  f.to_json = [getter](const RunConfig& c) -> std::optional<json> { return json(getter(c)); };
  return f;
}

template <class T>
Field optional_real_field(std::string name, std::string help, Pred applies, Pred required, T getter) {
  Field f;
  f.name = name;
  f.help = std::move(help);
  f.applies = std::move(applies);
  f.required = std::move(required);
  f.from_text = [name, getter](RunConfig& c, const std::string& s) { getter(c) = parse_double(name, s); };
  f.from_json = [name, getter](RunConfig& c, const json& v) { getter(c) = json_number(name, v); };
  f.to_json = [getter](const RunConfig& c) -> std::optional<json> {
    const auto& v = getter(c);
    if (!v) return std::nullopt;
    return json(*v);
  };
  return f;
}

template <class T>
Field int_field(std::string name, std::string help, Pred applies, T getter) {
  Field f;
  f.name = name;
  f.help = std::move(help);
  f.applies = std::move(applies);
  f.required = never();
  f.from_text = [name, getter](RunConfig& c, const std::string& s) { getter(c) = parse_int(name, s); };
  f.from_json = [name, getter](RunConfig& c, const json& v) {
    if (!v.is_number_integer()) throw UsageError("--" + name + ": expected an integer in the config file");
    getter(c) = v.get<int>();
  };
  f.to_json = [getter](const RunConfig& c) -> std::optional<json> { return json(getter(c)); };
  return f;
}

template <class T>
Field bool_field(std::string name, std::string help, Pred applies, T getter) {
  Field f;
  f.name = name;
  f.help = std::move(help);
  f.applies = std::move(applies);
  f.required = never();
  f.from_text = [name, getter](RunConfig& c, const std::string& s) { getter(c) = parse_bool(name, s); };
  f.from_json = [name, getter](RunConfig& c, const json& v) {
    if (!v.is_boolean()) throw UsageError("--" + name + ": expected true or false in the config file");
    getter(c) = v.get<bool>();
  };
  f.to_json = [getter](const RunConfig& c) -> std::optional<json> { return json(getter(c)); };
  return f;
}

template <class E, class T>
Field enum_field(std::string name, std::string help, Pred applies, Pred required, E (*conv)(const std::string&),
                 T getter) {
  Field f;
  f.name = name;
  f.help = std::move(help);
  f.applies = std::move(applies);
  f.required = std::move(required);
  f.from_text = [name, getter, conv](RunConfig& c, const std::string& s) { getter(c) = parse_enum(name, s, conv); };
  f.from_json = [name, getter, conv](RunConfig& c, const json& v) {
    getter(c) = parse_enum(name, json_text(name, v), conv);
  };
  f.to_json = [getter](const RunConfig& c) -> std::optional<json> {
    return json(to_string(getter(c)));
  };
  return f;
}

const std::vector<Field>& fields() {
  using C = Command;
  static const std::vector<Field> table = [] {
    const Pred grid_cmds = on({C::spectrum_sweep, C::verify_exact, C::cross_validate});
    const Pred transfer_cmds = on({C::scattering_sweep, C::ss_find, C::ss_atlas, C::trace_gc, C::cross_validate});
    const Pred root_cmds = on({C::ss_find, C::ss_atlas, C::trace_gc, C::cross_validate});
    const Pred scan_cmds = on({C::ss_atlas, C::trace_gc, C::cross_validate});
    const Pred detection_cmds = on({C::spectrum_sweep, C::verify_exact, C::cross_validate});

    std::vector<Field> t;
    {
      // ss-atlas takes a comma-separated list, every other command one value.
      const Pred uses_A = on({C::spectrum_sweep, C::scattering_sweep, C::ss_find, C::ss_atlas, C::cross_validate});
      Field f;
      f.name = "A";
      f.help = "amplitude of the sech profile (ss-atlas: comma-separated list)";
      f.applies = uses_A;
      f.required = uses_A;
      f.from_text = [](RunConfig& c, const std::string& s) {
        if (c.command == Command::ss_atlas) {
          c.A_list = parse_list("A", s);
        } else {
          c.A = parse_double("A", s);
        }
      };
      f.from_json = [](RunConfig& c, const json& v) {
        if (c.command != Command::ss_atlas) {
          c.A = json_number("A", v);
          return;
        }
        if (!v.is_array()) throw UsageError("--A: expected an array in the config file");
        c.A_list.clear();
        for (const auto& x : v) c.A_list.push_back(json_number("A", x));
      };
      f.to_json = [](const RunConfig& c) -> std::optional<json> {
        return c.command == Command::ss_atlas ? json(c.A_list) : json(c.A);
      };
      t.push_back(f);
    }
    const Pred trace = on({C::trace_gc});
    t.push_back(real_field("A-lo", "first amplitude", trace, trace, [](auto& c) -> auto& { return c.A_lo; }));
    t.push_back(real_field("A-hi", "last amplitude", trace, trace, [](auto& c) -> auto& { return c.A_hi; }));
    t.push_back(real_field("A-step", "amplitude step", trace, trace, [](auto& c) -> auto& { return c.A_step; }));
    t.push_back(enum_field("axis", "sweep axis, g or k", on({C::scattering_sweep}), on({C::scattering_sweep}),
                           &sweep_axis_from_string, [](auto& c) -> auto& { return c.axis; }));
    t.push_back(real_field("g", "coupling (fixed g for a k sweep; the exact state's g for verify-exact)",
                           either(scattering_axis(SweepAxis::k), on({C::verify_exact})),
                           scattering_axis(SweepAxis::k), [](auto& c) -> auto& { return c.g; }));
    t.push_back(real_field("k", "fixed wave number for a g sweep", scattering_axis(SweepAxis::g),
                           scattering_axis(SweepAxis::g), [](auto& c) -> auto& { return c.k; }));
    const Pred g_range = either(on({C::spectrum_sweep, C::ss_atlas}), scattering_axis(SweepAxis::g));
    const Pred g_range_req = either(on({C::spectrum_sweep}), scattering_axis(SweepAxis::g));
    t.push_back(optional_real_field("g-lo", "lower end of the g range (ss-atlas: scan window)", g_range, g_range_req,
                                    [](auto& c) -> auto& { return c.g_lo; }));
    t.push_back(optional_real_field("g-hi", "upper end of the g range (ss-atlas: scan window)", g_range, g_range_req,
                                    [](auto& c) -> auto& { return c.g_hi; }));
    t.push_back(real_field("g-step", "g spacing of the sweep", on({C::spectrum_sweep}), never(),
                           [](auto& c) -> auto& { return c.g_step; }));
    const Pred k_range = either(on({C::ss_atlas}), scattering_axis(SweepAxis::k));
    const Pred k_range_req = scattering_axis(SweepAxis::k);
    t.push_back(optional_real_field("k-lo", "lower end of the k range (ss-atlas: scan window)", k_range, k_range_req,
                                    [](auto& c) -> auto& { return c.k_lo; }));
    t.push_back(optional_real_field("k-hi", "upper end of the k range (ss-atlas: scan window)", k_range, k_range_req,
                                    [](auto& c) -> auto& { return c.k_hi; }));
    t.push_back(int_field("samples", "number of sweep points, both ends included", on({C::scattering_sweep}),
                          [](auto& c) -> auto& { return c.samples; }));
    t.push_back(real_field("g0", "Newton seed g", on({C::ss_find}), on({C::ss_find}),
                           [](auto& c) -> auto& { return c.g0; }));
    t.push_back(real_field("k0", "Newton seed k", on({C::ss_find}), on({C::ss_find}),
                           [](auto& c) -> auto& { return c.k0; }));
    t.push_back(bool_field("spectra", "include the physical eigenvalues of every g", on({C::spectrum_sweep}),
                           [](auto& c) -> auto& { return c.spectra; }));
    t.push_back(bool_field("warm-start", "continue the previous A's roots by Newton", trace,
                           [](auto& c) -> auto& { return c.warm_start; }));
    t.push_back(real_field("half-width", "computational domain [-L, L]", always(), never(),
                           [](auto& c) -> auto& { return c.grid.half_width; }));
    t.push_back(int_field("n-points", "lattice nodes on [-L, L]", grid_cmds,
                          [](auto& c) -> auto& { return c.grid.n_points; }));
    t.push_back(enum_field("boundary", "twisted-periodic or dirichlet", grid_cmds, never(), &boundary_from_string,
                           [](auto& c) -> auto& { return c.grid.boundary; }));
    t.push_back(real_field("truncation-tol", "upper bound on sech(L)", grid_cmds, never(),
                           [](auto& c) -> auto& { return c.grid.truncation_tol; }));
    t.push_back(int_field("onset-n-points", "lattice nodes of the coarse onset walk", on({C::cross_validate}),
                          [](auto& c) -> auto& { return c.onset_n_points; }));
    t.push_back(real_field("onset-step", "g step of the coarse onset walk", on({C::cross_validate}), never(),
                           [](auto& c) -> auto& { return c.onset_step; }));
    t.push_back(real_field("tol-g", "bracket width of the transition bisection", on({C::cross_validate}), never(),
                           [](auto& c) -> auto& { return c.tol_g; }));
    t.push_back(real_field("im-threshold", "|Im E| above which a pair counts as complex", detection_cmds, never(),
                           [](auto& c) -> auto& { return c.detection.im_threshold; }));
    t.push_back(real_field("ipr-factor", "bound states need IPR above this multiple of the median", detection_cmds,
                           never(), [](auto& c) -> auto& { return c.detection.ipr_factor; }));
    t.push_back(real_field("window-fraction", "physical window as a fraction of the band top 4/h^2",
                           detection_cmds, never(), [](auto& c) -> auto& { return c.detection.window_fraction; }));
    t.push_back(real_field("h", "finite-difference step of the residual check", on({C::verify_exact}), never(),
                           [](auto& c) -> auto& { return c.h; }));
    t.push_back(real_field("rel-tol", "integrator tolerance", transfer_cmds, never(),
                           [](auto& c) -> auto& { return c.rel_tol; }));
    t.push_back(real_field("root-tol", "Newton stops once |m22| is below this", root_cmds, never(),
                           [](auto& c) -> auto& { return c.root_tol; }));
    t.push_back(int_field("max-iter", "Newton iteration limit", root_cmds,
                          [](auto& c) -> auto& { return c.max_iter; }));
    t.push_back(real_field("fd-step", "finite-difference step of the Newton Jacobian", root_cmds, never(),
                           [](auto& c) -> auto& { return c.fd_step; }));
    t.push_back(int_field("coarse-n", "scan grid points per axis", scan_cmds,
                          [](auto& c) -> auto& { return c.coarse_n; }));
    t.push_back(real_field("seed-threshold", "only |m22| minima below this seed Newton", scan_cmds, never(),
                           [](auto& c) -> auto& { return c.seed_threshold; }));
    t.push_back(real_field("coarse-rel-tol", "integrator tolerance on the scan grid", scan_cmds, never(),
                           [](auto& c) -> auto& { return c.coarse_rel_tol; }));
    {
      Field f;
      f.name = "output";
      f.help = "output file (default: standard output)";
      f.applies = always();
      f.required = never();
      f.from_text = [](RunConfig& c, const std::string& s) { c.output = s; };
      f.from_json = [](RunConfig& c, const json& v) { c.output = json_text("output", v); };
      f.to_json = [](const RunConfig& c) -> std::optional<json> { return json(c.output); };
      t.push_back(f);
    }
    t.push_back(enum_field("format", "json or csv", always(), never(), &format_from_string,
                           [](auto& c) -> auto& { return c.format; }));
    t.push_back(int_field("threads", "worker threads, 0 = one per core", always(),
                          [](auto& c) -> auto& { return c.threads; }));
    return t;
  }();
  return table;
}

bool applies_to_command(const Field& f, Command cmd) {
  RunConfig probe;
  probe.command = cmd;
  for (SweepAxis axis : {SweepAxis::g, SweepAxis::k}) {
    probe.axis = axis;
    if (f.applies(probe)) return true;
  }
  return false;
}

std::string flag_list(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "--" : ", --") + n;
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

std::size_t sweep_count(double lo, double hi, double step) {
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

void validate(const RunConfig& c) {
  const auto positive = [](double v, const char* flag) {
    require(v > 0.0, std::string("--") + flag + " must be positive");
  };
  const auto range = [](const std::optional<double>& lo, const std::optional<double>& hi, const char* name) {
    if (!lo && !hi) return;
    require(lo && hi, std::string("--") + name + "-lo and --" + name + "-hi must be given together");
    require(*lo < *hi, std::string("--") + name + "-lo must be below --" + name + "-hi");
  };

  require(c.threads >= 0, "--threads must be >= 0");
  positive(c.grid.half_width, "half-width");

  const bool grid_cmd = c.command == Command::spectrum_sweep || c.command == Command::verify_exact ||
                        c.command == Command::cross_validate;
  if (grid_cmd) {
    require(c.grid.n_points >= 3, "--n-points must be at least 3");
    positive(c.grid.truncation_tol, "truncation-tol");
    require(sech(c.grid.half_width) < c.grid.truncation_tol,
            "--half-width leaves sech(L) above --truncation-tol");
    positive(c.detection.im_threshold, "im-threshold");
    positive(c.detection.ipr_factor, "ipr-factor");
    positive(c.detection.window_fraction, "window-fraction");
    require(c.grid.n_points <= 20001, "--n-points above 20001 is not supported");
  }
  const bool transfer_cmd = c.command == Command::scattering_sweep || c.command == Command::ss_find ||
                            c.command == Command::ss_atlas || c.command == Command::trace_gc ||
                            c.command == Command::cross_validate;
  if (transfer_cmd) positive(c.rel_tol, "rel-tol");
  const bool root_cmd = c.command == Command::ss_find || c.command == Command::ss_atlas ||
                        c.command == Command::trace_gc || c.command == Command::cross_validate;
  if (root_cmd) {
    positive(c.root_tol, "root-tol");
    require(c.max_iter >= 1, "--max-iter must be at least 1");
    positive(c.fd_step, "fd-step");
  }
  const bool scan_cmd =
      c.command == Command::ss_atlas || c.command == Command::trace_gc || c.command == Command::cross_validate;
  if (scan_cmd) {
    require(c.coarse_n >= 16, "--coarse-n must be at least 16");
    positive(c.seed_threshold, "seed-threshold");
    positive(c.coarse_rel_tol, "coarse-rel-tol");
  }

  // Largest amplitude and smallest wave number the transfer matrix will see.
  auto check_tail = [&](double A, double k) {
    require(c.grid.half_width >= minimum_half_width(A, k),
            "--half-width too small: A sech(L) must stay below 1e-10 max(1, k^2); need L >= " +
                std::to_string(minimum_half_width(A, k)));
  };

  switch (c.command) {
    case Command::spectrum_sweep:
      require(c.A >= 0.0, "--A must be non-negative");
      range(c.g_lo, c.g_hi, "g");
      positive(c.g_step, "g-step");
      require(sweep_count(*c.g_lo, *c.g_hi, c.g_step) <= 100000, "--g-step gives more than 100000 points");
      break;
    case Command::scattering_sweep:
      require(c.A >= 0.0, "--A must be non-negative");
      require(c.samples >= 2, "--samples must be at least 2");
      if (c.axis == SweepAxis::k) {
        range(c.k_lo, c.k_hi, "k");
        require(*c.k_lo >= kSmallKGuard, "--k-lo is below the small-k guard 1e-3");
        check_tail(c.A, *c.k_lo);
      } else {
        range(c.g_lo, c.g_hi, "g");
        require(c.k >= kSmallKGuard, "--k is below the small-k guard 1e-3");
        check_tail(c.A, c.k);
      }
      break;
    case Command::ss_find:
      require(c.A >= 0.0, "--A must be non-negative");
      require(c.k0 >= kSmallKGuard, "--k0 is below the small-k guard 1e-3");
      check_tail(c.A, kSmallKGuard);
      break;
    case Command::ss_atlas: {
      require(!c.A_list.empty(), "--A needs at least one value");
      for (double A : c.A_list) require(A >= 0.0, "--A values must be non-negative");
      range(c.g_lo, c.g_hi, "g");
      range(c.k_lo, c.k_hi, "k");
      if (c.k_lo) require(*c.k_lo >= kSmallKGuard, "--k-lo is below the small-k guard 1e-3");
      const double A_max = *std::max_element(c.A_list.begin(), c.A_list.end());
      check_tail(A_max, c.k_lo.value_or(0.05));
      break;
    }
    case Command::trace_gc:
      require(c.A_lo >= 0.0, "--A-lo must be non-negative");
      require(c.A_lo < c.A_hi, "--A-lo must be below --A-hi");
      positive(c.A_step, "A-step");
      require(sweep_count(c.A_lo, c.A_hi, c.A_step) <= 10000, "--A-step gives more than 10000 points");
      check_tail(c.A_hi, 0.05);
      break;
    case Command::verify_exact:
      require(c.g * c.g < 0.25, "--g must satisfy g^2 < 1/4 for the exact bound state");
      positive(c.h, "h");
      break;
    case Command::cross_validate:
      require(c.A >= 0.0, "--A must be non-negative");
      require(c.onset_n_points >= 3, "--onset-n-points must be at least 3");
      positive(c.onset_step, "onset-step");
      positive(c.tol_g, "tol-g");
      check_tail(c.A, 0.05);
      break;
  }
}

RunConfig from_json_object(const json& j, std::set<std::string>& given) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  RunConfig cfg;
  if (!j.contains("command")) throw UsageError("config file lacks \"command\"");
  const std::string name = json_text("command", j.at("command"));
  try {
    cfg.command = command_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "command") continue;
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.name == key; });
    if (it == fields().end() || !applies_to_command(*it, cfg.command)) {
      throw UsageError("--" + key + ": not a flag of " + name);
    }
    it->from_json(cfg, value);
    given.insert(key);
  }
  return cfg;
}

void finish(RunConfig& cfg, const std::set<std::string>& given) {
  std::vector<std::string> missing;
  for (const auto& f : fields()) {
    const bool applies = f.applies(cfg);
    if (given.count(f.name) && !applies) {
      throw UsageError("--" + f.name + " is not used by " + to_string(cfg.command) +
                       (cfg.command == Command::scattering_sweep ? " --axis " + to_string(cfg.axis) : ""));
    }
    if (applies && f.required(cfg) && !given.count(f.name)) missing.push_back(f.name);
  }
  if (!missing.empty()) throw UsageError("missing required flag(s) for " + to_string(cfg.command) + ": " + flag_list(missing));
  validate(cfg);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (const auto& [cmd, n] : kCommands)
    if (n == name) return cmd;
  throw std::invalid_argument("unknown command '" + name + "'");
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> list = [] {
    std::vector<Command> v;
    for (const auto& [cmd, name] : kCommands) v.push_back(cmd);
    return v;
  }();
  return list;
}

std::string to_string(Format f) { return f == Format::json ? "json" : "csv"; }

Format format_from_string(const std::string& name) {
  if (name == "json") return Format::json;
  if (name == "csv") return Format::csv;
  throw std::invalid_argument("unknown format '" + name + "' (json or csv)");
}

RunConfig parse_config(const std::vector<std::string>& argv) {
  if (argv.size() < 2) throw UsageError("missing command\n\n" + usage());
  const std::string& name = argv[1];
  if (name == "--help" || name == "-h" || name == "help") throw HelpRequested(usage());
  Command cmd;
  try {
    cmd = command_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(e.what()) + "\n\n" + usage());
  }

  CLI::App app("ssatlas " + name, "ssatlas " + name);
  app.set_help_flag("--help", "show the flags of this command");
  std::map<std::string, std::string> raw;
  std::vector<std::string> order;
  for (const auto& f : fields()) {
    if (!applies_to_command(f, cmd)) continue;
    app.add_option("--" + f.name, raw[f.name], f.help);
    order.push_back(f.name);
  }
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; explicit flags override it");

  std::vector<std::string> args(argv.rbegin(), argv.rend() - 2);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(usage(cmd));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  std::set<std::string> given;
  RunConfig cfg;
  cfg.command = cmd;
  if (!config_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
      throw UsageError("--config: " + std::string(e.what()));
    }
    cfg = from_json_object(j, given);
    if (cfg.command != cmd) throw UsageError("--config: file is for " + to_string(cfg.command) + ", not " + name);
  }
  for (const auto& f : fields()) {
    if (!applies_to_command(f, cmd) || app.count("--" + f.name) == 0) continue;
    f.from_text(cfg, raw[f.name]);
    given.insert(f.name);
  }
  finish(cfg, given);
  return cfg;
}

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  std::set<std::string> given;
  RunConfig cfg = from_json_object(j, given);
  finish(cfg, given);
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["command"] = to_string(cfg.command);
  for (const auto& f : fields()) {
    if (!f.applies(cfg)) continue;
    if (auto v = f.to_json(cfg)) j[f.name] = *v;
  }
  return j.dump();
}

std::string usage(const std::optional<Command>& command) {
  std::ostringstream out;
  if (!command) {
    out << "usage: ssatlas <command> [flags]\n\ncommands:\n";
    for (const auto& [cmd, name] : kCommands) {
      out << "  " << name << std::string(18 - name.size(), ' ') << kSummaries.at(cmd) << "\n";
    }
    out << "\nRun 'ssatlas <command> --help' for the flags of one command.\n"
           "Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.\n";
    return out.str();
  }
  out << "usage: ssatlas " << to_string(*command) << " [flags]\n\n" << kSummaries.at(*command) << "\n\nflags:\n";
  RunConfig defaults;
  defaults.command = *command;
  for (const auto& f : fields()) {
    if (!applies_to_command(f, *command)) continue;
    out << "  --" << f.name << std::string(f.name.size() < 18 ? 18 - f.name.size() : 1, ' ') << f.help;
    bool required = false;
    for (SweepAxis axis : {SweepAxis::g, SweepAxis::k}) {
      defaults.axis = axis;
      required = required || (f.applies(defaults) && f.required(defaults));
    }
    if (required) out << " (required" << (*command == Command::scattering_sweep && f.name != "A" && f.name != "axis" ? " for its axis" : "") << ")";
    out << "\n";
  }
  out << "  --config            JSON config file; explicit flags override it\n";
  return out.str();
}

}  // namespace ssatlas

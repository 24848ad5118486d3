#include "ssatlas/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "ssatlas/ode.hpp"
#include "ssatlas/ss_atlas.hpp"

namespace ssatlas {

namespace {

using Record = std::map<std::string, std::string>;

CsvTable flatten(std::vector<std::string> header, const std::vector<Record>& records) {
  CsvTable t;
  t.header = std::move(header);
  for (const auto& r : records) {
    std::vector<std::string> row;
    for (const auto& col : t.header) {
      const auto it = r.find(col);
      row.push_back(it == r.end() ? "" : it->second);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> arithmetic_values(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = round15(lo + step * static_cast<double>(i));
  return v;
}

std::string describe(const char* what, double value) {
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s %.15g", what, value);
  return buf;
}

// ---- spectrum-sweep -------------------------------------------------------

void spectrum_sweep_command(const RunConfig& c, ResultEnvelope& env) {
  const std::vector<double> gs = arithmetic_values(*c.g_lo, *c.g_hi, c.g_step);
  const std::vector<SpectrumResult> spectra = spectrum_sweep(c.A, gs, c.grid, c.threads);

  std::vector<SweepSummary> rows;
  ordered_json jrows = ordered_json::array();
  std::vector<Record> records;
  bool coarse = false;
  for (const auto& s : spectra) {
    const SweepSummary r = summarize(s, c.detection);
    coarse = coarse || s.coarse_grid;
    rows.push_back(r);
    ordered_json j;
    j["g"] = number(r.g);
    j["max_im"] = number(r.max_im);
    j["pair_re"] = number(r.pair_re);
    j["pair_im"] = number(r.pair_im);
    j["n_pairs"] = r.n_pairs;
    j["n_bound"] = r.n_bound;
    j["ground_re"] = number(r.ground_re);
    jrows.push_back(j);
    records.push_back({{"kind", "summary"},
                       {"g", csv_axis(r.g)},
                       {"max_im", csv_value(r.max_im)},
                       {"pair_re", csv_value(r.pair_re)},
                       {"pair_im", csv_value(r.pair_im)},
                       {"n_pairs", std::to_string(r.n_pairs)},
                       {"n_bound", std::to_string(r.n_bound)},
                       {"ground_re", csv_value(r.ground_re)}});
  }
  if (coarse) env.warnings.push_back("grid under-resolves the potential: h^2 max|V| > 1");

  // Brackets where the pair indicator flips between neighbouring g values.
  ordered_json transitions = ordered_json::array();
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const bool a = rows[i].max_im > c.detection.im_threshold;
    const bool b = rows[i + 1].max_im > c.detection.im_threshold;
    if (a == b) continue;
    const SweepSummary& broken = a ? rows[i] : rows[i + 1];
    const SweepSummary& unbroken = a ? rows[i + 1] : rows[i];
    ordered_json t;
    t["kind"] = unbroken.n_bound > broken.n_bound ? "collision" : "bifurcation";
    t["g_below"] = number(rows[i].g);
    t["g_above"] = number(rows[i + 1].g);
    t["pair_re"] = number(broken.pair_re);
    transitions.push_back(t);
  }

  env.payload["A"] = number(c.A);
  env.payload["rows"] = jrows;
  env.payload["transitions"] = transitions;

  std::vector<std::string> header = {"g", "max_im", "pair_re", "pair_im", "n_pairs", "n_bound", "ground_re"};
  if (c.spectra) {
    const double cutoff = physical_energy_cutoff(c.grid, c.detection);
    ordered_json js = ordered_json::array();
    std::vector<Record> all;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
      all.push_back(records[i]);
      ordered_json entry;
      entry["g"] = number(gs[i]);
      ordered_json ev = ordered_json::array();
      const auto& s = spectra[i];
      for (std::size_t n = 0; n < s.eigenvalues.size(); ++n) {
        const cplx e = s.eigenvalues[n];
        if (e.real() >= cutoff) continue;
        ev.push_back({number(e.real()), number(e.imag()), number(s.ipr[n])});
        all.push_back({{"kind", "eigenvalue"},
                       {"g", csv_axis(gs[i])},
                       {"re", csv_value(e.real())},
                       {"im", csv_value(e.imag())},
                       {"ipr", csv_value(s.ipr[n])}});
      }
      entry["eigenvalues"] = ev;  // [Re E, Im E, IPR]
      js.push_back(entry);
    }
    env.payload["spectra"] = js;
    header.insert(header.begin(), "kind");
    for (const char* col : {"re", "im", "ipr"}) header.push_back(col);
    env.table = flatten(header, all);
  } else {
    env.table = flatten(header, records);
  }
}

// ---- scattering-sweep -----------------------------------------------------

void scattering_sweep_command(const RunConfig& c, ResultEnvelope& env) {
  ScatteringSweepSpec spec;
  spec.axis = c.axis;
  spec.A = c.A;
  spec.fixed = c.axis == SweepAxis::k ? c.g : c.k;
  spec.lo = c.axis == SweepAxis::k ? *c.k_lo : *c.g_lo;
  spec.hi = c.axis == SweepAxis::k ? *c.k_hi : *c.g_hi;
  spec.n_samples = c.samples;
  spec.half_width = c.grid.half_width;
  spec.rel_tol = c.rel_tol;
  const auto rows = scattering_sweep(spec, c.threads);

  const std::string axis = to_string(c.axis);
  ordered_json jrows = ordered_json::array();
  std::vector<Record> records;
  int overflows = 0;
  for (const auto& r : rows) {
    ordered_json j;
    j[axis] = number(r.axis_value);
    j["T"] = number(r.coeff.T);
    j["R_left"] = number(r.coeff.R_left);
    j["R_right"] = number(r.coeff.R_right);
    j["overflow"] = r.coeff.overflow;
    jrows.push_back(j);
    records.push_back({{axis, csv_axis(r.axis_value)},
                       {"T", csv_value(r.coeff.T)},
                       {"R_left", csv_value(r.coeff.R_left)},
                       {"R_right", csv_value(r.coeff.R_right)},
                       {"overflow", csv_bool(r.coeff.overflow)}});
    overflows += r.coeff.overflow;
  }
  if (overflows > 0) {
    env.warnings.push_back(std::to_string(overflows) + " point(s) with |m22| below 1e-12 |M|; values clamped");
  }
  env.payload["A"] = number(c.A);
  env.payload["axis"] = axis;
  env.payload[c.axis == SweepAxis::k ? "g" : "k"] = number(spec.fixed);
  env.payload["rows"] = jrows;
  env.table = flatten({axis, "T", "R_left", "R_right", "overflow"}, records);
}

// ---- roots ----------------------------------------------------------------

NewtonOptions newton_options(const RunConfig& c) {
  NewtonOptions o;
  o.tol = c.root_tol;
  o.max_iter = c.max_iter;
  o.fd_step = c.fd_step;
  o.half_width = c.grid.half_width;
  o.rel_tol = c.rel_tol;
  return o;
}

ScanOptions scan_options(const RunConfig& c) {
  ScanOptions o;
  o.coarse_n = c.coarse_n;
  o.seed_threshold = c.seed_threshold;
  o.coarse_rel_tol = c.coarse_rel_tol;
  o.newton = newton_options(c);
  o.threads = c.threads;
  return o;
}

const std::vector<std::string> kRootColumns = {"g_star", "k_star", "residual", "newton_iterations",
                                               "m_norm", "m11_abs", "det_residual"};

ordered_json root_json(const SSRoot& r) {
  ordered_json j;
  j["g_star"] = number(r.g_star);
  j["k_star"] = number(r.k_star);
  j["residual"] = number(r.residual);
  j["newton_iterations"] = r.newton_iterations;
  j["m_norm"] = number(r.m_norm);
  j["m11_abs"] = number(r.m11_abs);
  j["det_residual"] = number(r.det_residual);
  return j;
}

Record root_record(const SSRoot& r) {
  return {{"g_star", csv_value(r.g_star)},
          {"k_star", csv_value(r.k_star)},
          {"residual", csv_value(r.residual)},
          {"newton_iterations", std::to_string(r.newton_iterations)},
          {"m_norm", csv_value(r.m_norm)},
          {"m11_abs", csv_value(r.m11_abs)},
          {"det_residual", csv_value(r.det_residual)}};
}

void ss_find_command(const RunConfig& c, ResultEnvelope& env) {
  const SSRoot r = find_ss(c.A, c.g0, c.k0, newton_options(c));
  env.payload["A"] = number(c.A);
  env.payload["root"] = root_json(r);
  std::vector<std::string> header = {"A"};
  header.insert(header.end(), kRootColumns.begin(), kRootColumns.end());
  Record rec = root_record(r);
  rec["A"] = csv_axis(c.A);
  env.table = flatten(header, {rec});
}

void ss_atlas_command(const RunConfig& c, ResultEnvelope& env) {
  ordered_json atlases = ordered_json::array();
  std::vector<Record> records;
  const ScanOptions opt = scan_options(c);
  for (double A : c.A_list) {
    std::optional<ScanWindow> window;
    if (c.g_lo || c.k_lo) {
      ScanWindow w = ScanWindow::defaults(A);
      if (c.g_lo) w.g_lo = *c.g_lo, w.g_hi = *c.g_hi;
      if (c.k_lo) w.k_lo = *c.k_lo, w.k_hi = *c.k_hi;
      window = w;
    }
    const SSAtlas atlas = count_ss(A, window, opt);
    ordered_json j;
    j["A"] = number(A);
    j["count"] = atlas.count;
    j["predicted_count"] = atlas.predicted_count;
    j["boundary"] = atlas.boundary;
    j["window"] = {{"g_lo", number(atlas.window.g_lo)},
                   {"g_hi", number(atlas.window.g_hi)},
                   {"k_lo", number(atlas.window.k_lo)},
                   {"k_hi", number(atlas.window.k_hi)}};
    ordered_json roots = ordered_json::array();
    for (const auto& r : atlas.roots) roots.push_back(root_json(r));
    j["roots"] = roots;
    atlases.push_back(j);

    records.push_back({{"kind", "atlas"},
                       {"A", csv_axis(A)},
                       {"count", std::to_string(atlas.count)},
                       {"predicted_count", std::to_string(atlas.predicted_count)},
                       {"boundary", csv_bool(atlas.boundary)}});
    for (const auto& r : atlas.roots) {
      Record rec = root_record(r);
      rec["kind"] = "root";
      rec["A"] = csv_axis(A);
      records.push_back(rec);
    }
    if (atlas.boundary) {
      env.warnings.push_back(describe("A =", A) + " sits on a staircase step; the count there is not asserted");
    } else if (atlas.count != atlas.predicted_count) {
      env.warnings.push_back(describe("A =", A) + ": found " + std::to_string(atlas.count) + " root(s), staircase predicts " +
                             std::to_string(atlas.predicted_count));
    }
  }
  env.payload["atlases"] = atlases;
  std::vector<std::string> header = {"kind", "A", "count", "predicted_count", "boundary"};
  header.insert(header.end(), kRootColumns.begin(), kRootColumns.end());
  env.table = flatten(header, records);
}

void trace_gc_command(const RunConfig& c, ResultEnvelope& env) {
  const std::vector<double> As = arithmetic_values(c.A_lo, c.A_hi, c.A_step);
  const auto points = trace_gc_curve(As, c.warm_start, scan_options(c));
  ordered_json jpoints = ordered_json::array();
  std::vector<Record> records;
  for (const auto& p : points) {
    ordered_json j;
    j["A"] = number(p.A);
    j["count"] = static_cast<int>(p.roots.size());
    j["warm_started"] = p.warm_started;
    ordered_json gs = ordered_json::array(), ks = ordered_json::array();
    for (const auto& r : p.roots) {
      gs.push_back(number(r.g_star));
      ks.push_back(number(r.k_star));
    }
    j["g_star"] = gs;
    j["k_star"] = ks;
    jpoints.push_back(j);
    records.push_back({{"kind", "point"}, {"A", csv_axis(p.A)}, {"count", std::to_string(p.roots.size())}});
    for (std::size_t b = 0; b < p.roots.size(); ++b) {
      records.push_back({{"kind", "root"},
                         {"A", csv_axis(p.A)},
                         {"branch", std::to_string(b)},
                         {"g_star", csv_value(p.roots[b].g_star)},
                         {"k_star", csv_value(p.roots[b].k_star)},
                         {"residual", csv_value(p.roots[b].residual)}});
    }
  }
  env.payload["points"] = jpoints;
  env.table = flatten({"kind", "A", "count", "branch", "g_star", "k_star", "residual"}, records);
}

// ---- verify-exact ---------------------------------------------------------

void verify_exact_command(const RunConfig& c, ResultEnvelope& env) {
  const ExactBoundState es = exact_bound_state(c.g);
  if (es.marginal()) env.warnings.push_back("g = 0 puts E = 0 on the continuum edge; no bound state is asserted");

  const SpectrumResult s = compute_spectrum(es.params(), c.grid);
  if (s.coarse_grid) env.warnings.push_back("grid under-resolves the potential: h^2 max|V| > 1");
  const StateClasses classes = classify_states(s, c.detection);
  std::optional<std::size_t> best;
  for (std::size_t i : classes.bound) {
    if (!best || std::abs(s.eigenvalues[i] - es.energy()) < std::abs(s.eigenvalues[*best] - es.energy())) best = i;
  }
  if (!best) env.warnings.push_back("no bound state found in the lattice spectrum");

  auto residual_at = [&](double h) {
    const double span = 20.0;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * span / h)) + 1;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = -span + h * static_cast<double>(i);
    return schrodinger_residual([&](double t) { return es.psi(t); }, es.energy(), es.params(), x, h);
  };
  const double r1 = residual_at(c.h), r2 = residual_at(0.5 * c.h);
  const double decay = std::abs(es.psi(20.0)) / std::abs(es.psi(0.0));

  ordered_json& p = env.payload;
  p["g"] = number(c.g);
  p["A"] = number(es.A());
  p["E_exact"] = number(es.energy());
  p["bound_found"] = best.has_value();
  p["E_lattice"] = best ? number(s.eigenvalues[*best].real()) : ordered_json(nullptr);
  p["E_lattice_im"] = best ? number(s.eigenvalues[*best].imag()) : ordered_json(nullptr);
  p["abs_error"] = best ? number(std::abs(s.eigenvalues[*best] - es.energy())) : ordered_json(nullptr);
  p["ipr"] = best ? number(s.ipr[*best]) : ordered_json(nullptr);
  p["h"] = number(c.h);
  p["residual_h"] = number(r1);
  p["residual_half_h"] = number(r2);
  p["residual_ratio"] = number(r1 / r2);
  p["decay_20"] = number(decay);

  auto opt_value = [&](bool ok, double v) { return ok ? csv_value(v) : std::string(); };
  env.table = flatten(
      {"g", "A", "E_exact", "bound_found", "E_lattice", "E_lattice_im", "abs_error", "ipr", "h", "residual_h",
       "residual_half_h", "residual_ratio", "decay_20"},
      {{{"g", csv_axis(c.g)},
        {"A", csv_value(es.A())},
        {"E_exact", csv_value(es.energy())},
        {"bound_found", csv_bool(best.has_value())},
        {"E_lattice", opt_value(best.has_value(), best ? s.eigenvalues[*best].real() : 0.0)},
        {"E_lattice_im", opt_value(best.has_value(), best ? s.eigenvalues[*best].imag() : 0.0)},
        {"abs_error", opt_value(best.has_value(), best ? std::abs(s.eigenvalues[*best] - es.energy()) : 0.0)},
        {"ipr", opt_value(best.has_value(), best ? s.ipr[*best] : 0.0)},
        {"h", csv_value(c.h)},
        {"residual_h", csv_value(r1)},
        {"residual_half_h", csv_value(r2)},
        {"residual_ratio", csv_value(r1 / r2)},
        {"decay_20", csv_value(decay)}}});
}

// ---- cross-validate -------------------------------------------------------

void cross_validate_command(const RunConfig& c, ResultEnvelope& env) {
  CrossValidationOptions opt;
  opt.grid = c.grid;
  opt.onset_grid = c.grid;
  opt.onset_grid.n_points = c.onset_n_points;
  opt.onset_step = c.onset_step;
  opt.tol_g = c.tol_g;
  opt.detection = c.detection;
  opt.scan = scan_options(c);
  const CrossValidation cv = cross_validate_transition(c.A, opt);

  auto maybe = [](bool ok, double v) { return ok ? number(v) : ordered_json(nullptr); };
  const bool both = cv.ss_found && cv.transition_found;
  ordered_json& p = env.payload;
  p["A"] = number(c.A);
  p["ss_found"] = cv.ss_found;
  p["transition_found"] = cv.transition_found;
  p["g_star"] = maybe(cv.ss_found, cv.root ? cv.root->g_star : 0.0);
  p["k_star"] = maybe(cv.ss_found, cv.root ? cv.root->k_star : 0.0);
  p["g_c"] = maybe(cv.transition_found, cv.transition ? cv.transition->g_c : 0.0);
  p["k_c"] = maybe(cv.transition_found, cv.transition ? cv.transition->k_c : 0.0);
  p["E_c_re"] = maybe(cv.transition_found, cv.transition ? cv.transition->E_c.real() : 0.0);
  p["E_c_im"] = maybe(cv.transition_found, cv.transition ? cv.transition->E_c.imag() : 0.0);
  p["dg"] = maybe(both, cv.dg);
  p["dk"] = maybe(both, cv.dk);

  Record rec{{"A", csv_axis(c.A)}, {"ss_found", csv_bool(cv.ss_found)}, {"transition_found", csv_bool(cv.transition_found)}};
  for (const char* key : {"g_star", "k_star", "g_c", "k_c", "E_c_re", "E_c_im", "dg", "dk"}) {
    rec[key] = p[key].is_null() ? "" : csv_value(p[key].get<double>());
  }
  env.table = flatten({"A", "ss_found", "transition_found", "g_star", "k_star", "g_c", "k_c", "E_c_re", "E_c_im", "dg", "dk"},
                      {rec});
}

std::string module_of(const std::exception& e) {
  if (dynamic_cast<const EigenFailure*>(&e) || dynamic_cast<const TransitionNotFound*>(&e)) return "eigensolver";
  if (dynamic_cast<const NewtonFailure*>(&e)) return "ss_atlas";
  if (dynamic_cast<const ScatteringError*>(&e) || dynamic_cast<const ode::IntegrationError*>(&e)) return "scattering";
  return "ssatlas";
}

}  // namespace

std::string version() { return SSATLAS_VERSION; }

ResultEnvelope run(const RunConfig& config) {
  ResultEnvelope env;
  env.config = config;
  env.version = version();
  env.payload = ordered_json::object();
  const auto t0 = std::chrono::steady_clock::now();
  switch (config.command) {
    case Command::spectrum_sweep:
      spectrum_sweep_command(config, env);
      break;
    case Command::scattering_sweep:
      scattering_sweep_command(config, env);
      break;
    case Command::ss_find:
      ss_find_command(config, env);
      break;
    case Command::ss_atlas:
      ss_atlas_command(config, env);
      break;
    case Command::trace_gc:
      trace_gc_command(config, env);
      break;
    case Command::verify_exact:
      verify_exact_command(config, env);
      break;
    case Command::cross_validate:
      cross_validate_command(config, env);
      break;
  }
  env.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return env;
}

std::string serialize(const ResultEnvelope& envelope, Format format) {
  if (format == Format::csv) return envelope.table.str();
  ordered_json j;
  j["config"] = ordered_json::parse(config_to_json(envelope.config));
  j["version"] = envelope.version;
  j["wall_time_s"] = number(envelope.wall_time_s);
  j["payload"] = envelope.payload;
  j["warnings"] = envelope.warnings;
  return j.dump(2) + "\n";
}

void write_result(const ResultEnvelope& envelope, std::ostream& out) {
  const std::string text = serialize(envelope, envelope.config.format);
  if (envelope.config.output.empty()) {
    out << text;
    out.flush();
    if (!out) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream file(envelope.config.output, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + envelope.config.output + "' for writing");
  file << text;
  file.close();
  if (!file) throw IoError("failed writing '" + envelope.config.output + "'");
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = parse_config(argv);
    const ResultEnvelope env = run(config);
    for (const auto& w : env.warnings) err << "ssatlas: warning: " << w << "\n";
    write_result(env, out);
    return kExitOk;
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "ssatlas: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "ssatlas: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "ssatlas: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "ssatlas: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ssatlas: numerical failure in " << module_of(e) << ": " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace ssatlas

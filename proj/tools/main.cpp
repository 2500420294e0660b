// qbootstrap: partition functions, singularity scans, bootstrap checks and
// pt-spectrum fits from the command line.
//
// Exit codes: 0 success (physics-level failures are reported as data),
// 2 configuration error, 3 I/O error, 4 data-schema error.

#include <cmath>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "qboot/bootstrap.hpp"
#include "qboot/io.hpp"
#include "qboot/quadrature.hpp"
#include "qboot/spectra.hpp"

namespace qbtool {
namespace {

using namespace qboot;

struct Global {
  std::string config_path;
  std::string units = "GeV";
  std::string output;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  try {
    write_file(path, text);
  } catch (const io_error& e) {
    throw tool_error(kIoError, e.what());
  }
}

std::string dump(const json& j) {
  return j.dump(2) + "\n";
}

json zq_json(const ZqValue& z) {
  json j{{"status", std::string(to_string(z.status))}, {"value", number_or_null(z.value)}};
  if (!z.message.empty()) j["message"] = z.message;
  return j;
}

json rel_dev(const ZqValue& x, const ZqValue& y) {
  if (!x.ok() || !y.ok()) return nullptr;
  return number_or_null(*x.value / *y.value - 1.0);
}

// --- zq ----------------------------------------------------------------------

struct ZqCmd {
  ModelFlags model;
  std::optional<double> beta;
  std::optional<double> T;
  std::optional<double> q;

  void add(CLI::App* app, Registry& reg) {
    model.add(app, reg);
    reg.add(app, "beta", beta, "inverse temperature [GeV^-1]");
    reg.add(app, "T", T, "temperature (configured unit); alternative to --beta");
    reg.add(app, "q", q, "entropic index of the weight; default matches q0'");
  }

  json run(const Units& u) const {
    const BootstrapParams p = model.params(u);
    const CutoffParams cut = model.cutoffs(p);
    double b = 0.0;
    if (beta) {
      b = *beta;
    } else if (T) {
      b = 1.0 / u.gev(*T);
    } else {
      throw config_error("beta: one of --beta or --T is required");
    }
    if (!(b > 0.0) || !std::isfinite(b)) throw config_error("beta: must be positive");
    QDeform d = matched_deformation(b, p);
    if (q) {
      try {
        d = QDeform::from_q(*q, b);
      } catch (const std::domain_error& e) {
        throw config_error(std::string("q: ") + e.what());
      }
    }
    const ZqValue energy = zq_energy_rep(d, p);
    const ZqValue gamma = zq_gamma_closed_form(d, p);
    const ZqValue asym = zq_asymptotic(d, p);
    const ZqValue mass = zq_mass_rep(d, p, cut);

    json rep;
    rep["command"] = "zq";
    rep["beta"] = b;
    rep["T"] = u.from_gev(1.0 / b);
    rep["beta_minus_beta0"] = b - p.beta0;
    rep["q"] = d.q();
    rep["constraints"] = {
        {"above_limiting_temperature", mass.validity.above_limiting_temperature},
        {"convergence_constraint", mass.validity.convergence_constraint},
        {"matched_deformation", mass.validity.matched_deformation}};
    rep["representations"] = {{"energy_rep", zq_json(energy)},
                              {"gamma_closed_form", zq_json(gamma)},
                              {"asymptotic", zq_json(asym)},
                              {"mass_rep", zq_json(mass)}};
    rep["deviations"] = {{"energy_rep_vs_gamma_closed_form", rel_dev(energy, gamma)},
                         {"asymptotic_vs_gamma_closed_form", rel_dev(asym, gamma)},
                         {"mass_rep_vs_energy_rep", rel_dev(mass, energy)}};
    rep["config"] = {{"params", to_json(p)}, {"cutoffs", to_json(cut)}, {"units", u.name}};
    return rep;
  }
};

// --- scan-beta ---------------------------------------------------------------

struct ScanCmd {
  ModelFlags model;
  double gap_min = 1e-3;
  double gap_max = 1e-1;
  int count = 30;
  std::string spacing = "log";
  std::vector<double> betas;
  std::string slope_json;

  void add(CLI::App* app, Registry& reg) {
    model.add(app, reg);
    reg.add(app, "gap-min", gap_min, "smallest beta - beta0 [GeV^-1]");
    reg.add(app, "gap-max", gap_max, "largest beta - beta0 [GeV^-1]");
    reg.add(app, "count", count, "number of grid points");
    reg.add(app, "spacing", spacing, "log or linear")->check(CLI::IsMember({"log", "linear"}));
    reg.add(app, "betas", betas, "explicit beta grid (overrides the gap grid)")->delimiter(',');
    reg.add(app, "slope-json", slope_json, "write the slope report here");
  }

  std::vector<double> grid(const BootstrapParams& p) const {
    if (!betas.empty()) {
      if (betas.size() < 2) throw config_error("betas: slope undefined for fewer than 2 points");
      return betas;
    }
    if (count < 2) throw config_error("count: slope undefined for fewer than 2 grid points");
    if (!(gap_min > 0.0) || !(gap_max > gap_min)) {
      throw config_error("gap-min, gap-max: require 0 < gap-min < gap-max");
    }
    std::vector<double> g;
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      const double gap = spacing == "log" ? gap_min * std::pow(gap_max / gap_min, t)
                                          : gap_min + (gap_max - gap_min) * t;
      g.push_back(p.beta0 + gap);
    }
    return g;
  }

  std::pair<std::string, json> run(const Units& u, unsigned threads) const {
    const BootstrapParams p = model.params(u);
    const ScanResult scan = singularity_scan(p, grid(p), threads);
    std::ostringstream csv;
    write_scan_csv(csv, scan);
    std::size_t flagged = 0;
    for (const auto& r : scan.rows) flagged += r.status != ZqStatus::ok;
    json rep;
    rep["command"] = "scan-beta";
    rep["slope"] = number_or_null(scan.slope);
    rep["intercept"] = number_or_null(scan.intercept);
    rep["predicted_slope"] = scan.predicted_slope;
    rep["deviation"] = scan.slope ? json(*scan.slope - scan.predicted_slope) : json(nullptr);
    rep["relative_deviation"] =
        scan.slope ? json(*scan.slope / scan.predicted_slope - 1.0) : json(nullptr);
    rep["gamma_corrected_slope"] = number_or_null(scan.gamma_corrected_slope);
    rep["points_used"] = scan.points_used;
    rep["rows_flagged"] = flagged;
    rep["config"] = {{"params", to_json(p)}, {"units", u.name}, {"threads", threads}};
    return {csv.str(), rep};
  }
};

// --- check-bootstrap ---------------------------------------------------------

struct CheckCmd {
  ModelFlags model;
  std::optional<double> q;
  double tail_gap = 5e-3;
  double mom_q = 1.05;
  int mom_n = 1;
  std::vector<double> beta_m{10.0, 30.0, 100.0, 300.0};

  void add(CLI::App* app, Registry& reg) {
    model.add(app, reg);
    reg.add(app, "q", q, "entropic index at beta0; default matches q0'");
    reg.add(app, "tail-gap", tail_gap, "beta - beta0 of the tail diagnostic [GeV^-1]");
    reg.add(app, "mom-q", mom_q, "q of the momentum-integral grid");
    reg.add(app, "mom-n", mom_n, "cluster index n of the momentum-integral grid");
    reg.add(app, "beta-m", beta_m, "beta*m grid of the momentum-integral check")->delimiter(',');
  }

  json run(const Units& u) const {
    const BootstrapParams p = model.params(u);
    const CutoffParams cut = model.cutoffs(p);
    QDeform d = matched_deformation(p.beta0, p);
    if (q) {
      try {
        d = QDeform::from_q(*q, p.beta0);
      } catch (const std::domain_error& e) {
        throw config_error(std::string("q: ") + e.what());
      }
    }
    if (!(tail_gap > 0.0)) throw config_error("tail-gap: must be positive");
    if (mom_n < 1) throw config_error("mom-n: must be >= 1");
    const ConsistencyReport cr = consistency_report(p, d, cut);

    json conditions;
    const auto& wc = cr.weak_constraint;
    conditions["weak_constraint"] = {{"pass", wc.pass}, {"x", wc.x}, {"ln_sigma", wc.ln_sigma},
                                     {"ln_rho", wc.ln_rho}, {"ratio", wc.ratio}};
    const auto& md = cr.matched_deformation;
    conditions["matched_deformation"] = {{"pass", md.pass},
                                         {"q0p_minus_one", md.q0_prime_minus_one},
                                         {"beta_times_q_minus_one", md.q_double_prime_minus_one}};
    const auto& em = cr.exponent_matching;
    conditions["exponent_matching"] = {{"pass", em.pass},
                                       {"a_plus_one", em.a_plus_one},
                                       {"alpha_at_beta0", em.alpha_at_beta0},
                                       {"implied_V0", em.implied_V0},
                                       {"implied_a", em.implied_a}};
    const auto& fq = cr.fq_constancy;
    conditions["fq_constancy"] = {{"pass", fq.pass},         {"gap_near", fq.gap_near},
                                  {"gap_far", fq.gap_far},   {"fq_near", fq.fq_near},
                                  {"fq_far", fq.fq_far},     {"rel_diff", fq.rel_diff}};

    json tail;
    const auto t1 = tail_log_divergence(p, cut, p.beta0 + tail_gap);
    const auto t2 = tail_log_divergence(p, cut, p.beta0 + 0.5 * tail_gap);
    const double halving = t2.quadrature - t1.quadrature;
    tail["gap"] = tail_gap;
    tail["quadrature"] = t1.quadrature;
    tail["hypergeometric"] = number_or_null(t1.hypergeometric);
    tail["anchored_estimate"] = t1.anchored_estimate;
    tail["log_estimate"] = t1.log_estimate;
    tail["anchor_factor"] = t1.anchor_factor;
    tail["regime_ok"] = t1.regime_ok && t2.regime_ok;
    tail["halving_increase"] = halving;
    tail["halving_vs_ln2"] = halving / std::log(2.0) - 1.0;
    json warnings = json::array();
    for (const auto& w : t1.warnings) warnings.push_back(w);
    tail["warnings"] = warnings;

    json mom = json::array();
    bool shrinking = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double bm : beta_m) {
      if (!(bm > 0.0)) throw config_error("beta-m: entries must be positive");
      const QDeform dm = QDeform::from_q(mom_q, 1.0);
      json row{{"beta_m", bm}};
      try {
        const double num = momentum_integral_numeric(bm, mom_n, dm);
        const double asy = momentum_integral_asymptotic(bm, mom_n, dm);
        const double err = std::fabs(asy / num - 1.0);
        row["numeric"] = num;
        row["asymptotic"] = asy;
        row["rel_error"] = number_or_null(err);
        shrinking = shrinking && err < prev;
        prev = err;
      } catch (const quadrature_error& e) {
        row["error"] = e.what();
        shrinking = false;
      }
      mom.push_back(row);
    }

    json notes = json::array();
    for (const auto& n : cr.notes) notes.push_back(n);

    json rep;
    rep["command"] = "check-bootstrap";
    rep["all_pass"] = cr.all_pass();
    rep["conditions"] = conditions;
    rep["diagnostics"] = {{"tail", tail},
                          {"momentum_integral",
                           {{"q", mom_q}, {"n", mom_n}, {"error_shrinking", shrinking}, {"rows", mom}}}};
    rep["notes"] = notes;
    rep["config"] = {{"params", to_json(p)},
                     {"cutoffs", to_json(cut)},
                     {"q", d.q()},
                     {"units", u.name}};
    return rep;
  }
};

// --- fit ---------------------------------------------------------------------

struct FitCmd {
  std::string data;
  std::optional<double> init_T0;
  double init_q = 1.1;
  double init_c = 1.0;
  std::vector<std::string> fix;
  std::string curve;
  int curve_points = 200;

  void add(CLI::App* app, Registry& reg) {
    app->add_option("data", data, "dataset CSV (pt_gev,value,err)")->required();
    reg.add(app, "init-T0", init_T0, "initial T0 (configured unit); default 150 MeV");
    reg.add(app, "init-q", init_q, "initial q");
    reg.add(app, "init-c", init_c, "initial c");
    reg.add(app, "fix", fix, "freeze a parameter: T0, q or c, optionally NAME=VALUE");
    reg.add(app, "curve", curve, "write the best-fit curve (pt,model_value) here");
    reg.add(app, "curve-points", curve_points, "points in the curve CSV");
  }

  json run(const Units& u) const {
    SpectrumModel init{init_T0 ? u.gev(*init_T0) : 0.150, init_q, init_c};
    FitOptions opt;
    json fixed_json = json::object();
    for (const auto& f : fix) {
      const auto eq = f.find('=');
      const std::string name = f.substr(0, eq);
      std::optional<double> value;
      if (eq != std::string::npos) {
        try {
          value = parse_double(f.substr(eq + 1), "fix " + name);
        } catch (const std::invalid_argument& e) {
          throw config_error(e.what());
        }
      }
      if (name == "T0") {
        opt.fixed[kT0] = true;
        if (value) init.T0 = u.gev(*value);
      } else if (name == "q") {
        opt.fixed[kQ] = true;
        if (value) init.q = *value;
      } else if (name == "c") {
        opt.fixed[kC] = true;
        if (value) init.c = *value;
      } else {
        throw config_error("fix: unknown parameter '" + name + "' (expected T0, q or c)");
      }
    }
    try {
      init.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("init: ") + e.what());
    }
    if (curve_points < 2) throw config_error("curve-points: must be >= 2");

    SpectrumDataset ds;
    try {
      ds = read_dataset_csv(data);
    } catch (const io_error& e) {
      throw tool_error(kIoError, e.what());
    } catch (const data_schema_error& e) {
      throw tool_error(kSchemaError, data + ": " + e.what());
    }
    FitReport fr;
    try {
      fr = fit_spectrum(ds, init, opt);
    } catch (const degenerate_data& e) {
      throw tool_error(kSchemaError, data + ": " + e.what());
    }

    if (!curve.empty()) {
      std::ostringstream out;
      write_curve_csv(out, fr.model,
                      log_grid(ds.points.front().pt, ds.points.back().pt,
                               static_cast<std::size_t>(curve_points)));
      emit(out.str(), curve);
    }

    json cov = json::array();
    for (const auto& row : fr.covariance) cov.push_back(json(std::vector<double>(row.begin(), row.end())));
    json rep;
    rep["t0_gev"] = fr.model.T0;
    rep["t0_unit_echo"] = {{"unit", u.name},
                           {"t0", u.from_gev(fr.model.T0)},
                           {"sigma", u.from_gev(fr.sigma(kT0))}};
    rep["q"] = fr.model.q;
    rep["c"] = fr.model.c;
    rep["chi2"] = fr.chi2;
    rep["ndf"] = fr.ndf;
    rep["converged"] = fr.converged;
    rep["iterations"] = fr.iterations;
    rep["covariance"] = cov;
    rep["sigma"] = {{"t0_gev", fr.sigma(kT0)}, {"q", fr.sigma(kQ)}, {"c", fr.sigma(kC)}};
    rep["fixed"] = {{"T0", opt.fixed[kT0]}, {"q", opt.fixed[kQ]}, {"c", opt.fixed[kC]}};
    rep["config"] = {{"data", data},
                     {"points", ds.points.size()},
                     {"init", {{"t0_gev", init.T0}, {"q", init.q}, {"c", init.c}}},
                     {"fix", fix},
                     {"units", u.name}};
    return rep;
  }
};

// --- gen-spectrum ------------------------------------------------------------

struct GenCmd {
  std::optional<double> T0;
  double q = 1.2;
  double c = 1.0;
  double pt_min = 0.1;
  double pt_max = 6.0;
  int points = 50;
  double noise = 0.05;
  std::uint64_t seed = 1;

  void add(CLI::App* app, Registry& reg) {
    reg.add(app, "T0", T0, "spectrum temperature (configured unit); default 110 MeV");
    reg.add(app, "q", q, "entropic index");
    reg.add(app, "c", c, "normalization");
    reg.add(app, "pt-min", pt_min, "lowest pt [GeV]");
    reg.add(app, "pt-max", pt_max, "highest pt [GeV]");
    reg.add(app, "points", points, "number of log-spaced pt points");
    reg.add(app, "noise", noise, "relative Gaussian noise");
    reg.add(app, "seed", seed, "random seed");
  }

  std::string run(const Units& u) const {
    const SpectrumModel m{T0 ? u.gev(*T0) : 0.110, q, c};
    if (points < 2) throw config_error("points: must be >= 2");
    SpectrumDataset ds;
    try {
      m.validate();
      ds = generate_synthetic(m, log_grid(pt_min, pt_max, static_cast<std::size_t>(points)),
                              noise, seed);
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    std::ostringstream out;
    write_dataset_csv(out, ds);
    return out.str();
  }
};

int run(int argc, char** argv) {
  CLI::App app{"q-deformed self-consistent fireball thermodynamics", "qbootstrap"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config_path, "JSON config file; command-line flags win");
  app.add_option("--units", g.units, "temperature unit for input and output")
      ->check(CLI::IsMember({"MeV", "GeV"}));
  app.add_option("-o,--output", g.output, "output file (default: standard output)");
  app.fallthrough();

  Registry reg_zq, reg_scan, reg_check, reg_fit, reg_gen;
  ZqCmd zq;
  ScanCmd scan;
  CheckCmd check;
  FitCmd fit;
  GenCmd gen;
  auto* c_zq = app.add_subcommand("zq", "evaluate Z_q in every representation");
  zq.add(c_zq, reg_zq);
  auto* c_scan = app.add_subcommand("scan-beta", "scan Z_q towards beta0 and fit the log-log slope");
  scan.add(c_scan, reg_scan);
  auto* c_check = app.add_subcommand("check-bootstrap", "self-consistency conditions and diagnostics");
  check.add(c_check, reg_check);
  auto* c_fit = app.add_subcommand("fit", "fit the pt spectrum model to a dataset");
  fit.add(c_fit, reg_fit);
  auto* c_gen = app.add_subcommand("gen-spectrum", "generate a synthetic pt spectrum");
  gen.add(c_gen, reg_gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "qbootstrap: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (!g.config_path.empty()) {
      const json cfg = load_config_file(g.config_path);
      if (app.get_option("--units")->count() == 0 && cfg.contains("units")) {
        g.units = cfg["units"].get<std::string>();
        if (g.units != "MeV" && g.units != "GeV") throw config_error("units: expected MeV or GeV");
      }
      for (const auto* r : {&reg_zq, &reg_scan, &reg_check, &reg_fit, &reg_gen}) r->merge(cfg);
    }
    const Units u{g.units};
    const unsigned threads = env_threads();

    if (c_zq->parsed()) {
      emit(dump(zq.run(u)), g.output);
    } else if (c_scan->parsed()) {
      auto [csv, rep] = scan.run(u, threads);
      emit(csv, g.output);
      if (!scan.slope_json.empty()) {
        emit(dump(rep), scan.slope_json);
      } else if (!g.output.empty() && g.output != "-") {
        std::cout << dump(rep);
      } else {
        std::cerr << dump(rep);
      }
    } else if (c_check->parsed()) {
      emit(dump(check.run(u)), g.output);
    } else if (c_fit->parsed()) {
      emit(dump(fit.run(u)), g.output);
    } else if (c_gen->parsed()) {
      emit(gen.run(u), g.output);
    }
  } catch (const tool_error& e) {
    std::cerr << "qbootstrap: " << e.what() << "\n";
    return e.code();
  } catch (const json::exception& e) {
    std::cerr << "qbootstrap: config: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qbootstrap: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace
}  // namespace qbtool

int main(int argc, char** argv) {
  return qbtool::run(argc, argv);
}

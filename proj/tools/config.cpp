#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace qbtool {

void Registry::merge(const json& cfg) const {
  for (const auto& e : entries_) {
    if (e.opt->count() > 0 || !cfg.contains(e.key)) continue;
    try {
      e.set(cfg.at(e.key));
    } catch (const json::exception& ex) {
      throw config_error("config key '" + e.key + "': " + ex.what());
    }
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tool_error(kIoError, "cannot open config file " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw config_error("config file " + path + ": " + ex.what());
  }
  if (!cfg.is_object()) throw config_error("config file " + path + ": top level must be an object");
  return cfg;
}

void ModelFlags::add(CLI::App* app, Registry& reg) {
  reg.add(app, "T0", T0, "limiting temperature (configured unit); default 110 MeV");
  reg.add(app, "beta0", beta0, "limiting inverse temperature [GeV^-1]; overrides --T0");
  reg.add(app, "q0p-minus-one", q0_prime_minus_one, "q0' - 1 of the spectrum growth factor");
  reg.add(app, "gamma", gamma, "mass-spectrum normalization");
  reg.add(app, "a", a, "level-density power (> -1)");
  reg.add(app, "b", b, "level-density normalization; default closes the amplitudes");
  reg.add(app, "V0", V0, "fireball volume [GeV^-3]; default closes a + 1 = alpha(beta0)");
  reg.add(app, "M", M, "mass split point [GeV]; default 20/beta0");
  reg.add(app, "m-tilde", m_tilde, "lower tail anchor [GeV]; default M/100");
  reg.add(app, "a-tilde", a_tilde, "upper scale anchor [GeV^-1]; default 0.05/m_tilde");
  reg.add(app, "m-min", m_min, "spectrum threshold [GeV]; default pion mass");
}

qboot::BootstrapParams ModelFlags::params(const Units& u) const {
  qboot::BootstrapParams p;
  if (beta0) {
    p.beta0 = *beta0;
  } else {
    const double t0 = T0 ? u.gev(*T0) : 0.110;
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw config_error("T0: must be positive");
    p.beta0 = 1.0 / t0;
  }
  p.q0_prime_minus_one = q0_prime_minus_one;
  p.gamma_const = gamma;
  p.a_exp = a;
  p.b_const = 1.0;
  p.V0 = 1.0;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  p.V0 = V0 ? *V0 : qboot::closing_volume(p);
  p.b_const = b ? *b : qboot::matched_amplitude(p, cutoffs(p));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return p;
}

qboot::CutoffParams ModelFlags::cutoffs(const qboot::BootstrapParams& p) const {
  qboot::CutoffParams c = qboot::CutoffParams::defaults_for(p);
  if (M) {
    c.M = *M;
    c.m_tilde = c.M / 100.0;
    c.a_tilde = 0.05 / c.m_tilde;
  }
  if (m_tilde) {
    c.m_tilde = *m_tilde;
    c.a_tilde = 0.05 / c.m_tilde;
  }
  if (a_tilde) c.a_tilde = *a_tilde;
  if (m_min) c.m_min = *m_min;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return c;
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json number_or_null(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

json to_json(const qboot::BootstrapParams& p) {
  return json{{"beta0", p.beta0},
              {"q0p_minus_one", p.q0_prime_minus_one},
              {"gamma", p.gamma_const},
              {"a", p.a_exp},
              {"b", p.b_const},
              {"V0", p.V0}};
}

json to_json(const qboot::CutoffParams& c) {
  return json{{"M", c.M}, {"m_tilde", c.m_tilde}, {"a_tilde", c.a_tilde}, {"m_min", c.m_min}};
}

unsigned env_threads() {
  const char* env = std::getenv("QBOOTSTRAP_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v <= 0) {
    throw config_error(std::string("QBOOTSTRAP_THREADS: expected a positive integer, got '") +
                       env + "'");
  }
  return static_cast<unsigned>(v);
}

}  // namespace qbtool

#pragma once

// Flag registry for qbootstrap: every option can also come from a JSON config
// file (same key as the long flag, without dashes), with flags winning.

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qboot/bootstrap.hpp"

namespace qbtool {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kSchemaError = 4 };

class tool_error : public std::runtime_error {
 public:
  tool_error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

inline tool_error config_error(const std::string& what) {
  return tool_error(kConfigError, what);
}

class Registry {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& dest, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + key, dest, help);
    entries_.push_back({key, opt, [&dest](const json& j) { assign(dest, j); }});
    return opt;
  }

  /// Fills every option not given on the command line from cfg[key].
  void merge(const json& cfg) const;

 private:
  template <class T>
  static void assign(T& dest, const json& j) {
    dest = j.get<T>();
  }
  template <class T>
  static void assign(std::optional<T>& dest, const json& j) {
    dest = j.get<T>();
  }
  template <class T>
  static void assign(std::vector<T>& dest, const json& j) {
    dest = j.is_array() ? j.get<std::vector<T>>() : std::vector<T>{j.get<T>()};
  }

  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> set;
  };
  std::vector<Entry> entries_;
};

/// Reads and parses a JSON config file (object at top level).
json load_config_file(const std::string& path);

/// Temperature unit at the I/O boundary; internal values are always GeV.
struct Units {
  std::string name = "GeV";
  double gev(double v) const { return name == "MeV" ? v / 1000.0 : v; }
  double from_gev(double v) const { return name == "MeV" ? v * 1000.0 : v; }
};

/// Model flags shared by the bootstrap subcommands. Temperatures are in the
/// configured unit; omitted V0 and b are closed from the other parameters.
struct ModelFlags {
  std::optional<double> T0;
  std::optional<double> beta0;
  double q0_prime_minus_one = 1e-4;
  double gamma = 1.0;
  double a = 1.0;
  std::optional<double> b;
  std::optional<double> V0;
  std::optional<double> M;
  std::optional<double> m_tilde;
  std::optional<double> a_tilde;
  std::optional<double> m_min;

  void add(CLI::App* app, Registry& reg);
  /// Throws tool_error(kConfigError) naming the offending field.
  qboot::BootstrapParams params(const Units& u) const;
  qboot::CutoffParams cutoffs(const qboot::BootstrapParams& p) const;
};

json to_json(const qboot::BootstrapParams& p);
json to_json(const qboot::CutoffParams& c);
json number_or_null(double v);
json number_or_null(const std::optional<double>& v);

/// Validated QBOOTSTRAP_THREADS, 0 when unset.
unsigned env_threads();

}  // namespace qbtool

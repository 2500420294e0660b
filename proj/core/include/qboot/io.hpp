#pragma once

// CSV tables exchanged by the command-line tool.
//
//   dataset  pt_gev,value,err
//   scan     beta,beta_minus_beta0,zq,ln_zq,ln_inv_gap   (zq, ln_zq may be "divergent")
//   curve    pt,model_value
//
// Floats are written in shortest round-trip form, lines end in LF.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qboot/bootstrap.hpp"
#include "qboot/spectra.hpp"

namespace qboot {

/// A CSV that does not follow its schema. row is 1-based counting the header
/// as row 1; column is the header name (or empty when the row itself is bad).
class data_schema_error : public std::runtime_error {
 public:
  data_schema_error(const std::string& what, std::size_t row, std::string column)
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Strict full-string parse; throws std::invalid_argument naming `field`.
double parse_double(const std::string& text, const std::string& field);

SpectrumDataset parse_dataset_csv(std::istream& in);
SpectrumDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const SpectrumDataset& ds);

inline constexpr const char* kDivergentToken = "divergent";

void write_scan_csv(std::ostream& out, const ScanResult& scan);
std::vector<ScanRow> parse_scan_csv(std::istream& in);

void write_curve_csv(std::ostream& out, const SpectrumModel& m, const std::vector<double>& pts);

/// Writes text to path, throwing io_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace qboot

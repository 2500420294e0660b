#include "qboot/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qboot {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

void expect_header(std::istream& in, const std::vector<std::string>& cols) {
  std::string line;
  if (!std::getline(in, line)) {
    throw data_schema_error("row 1: missing header row (expected " + join(cols) + ")", 1, "");
  }
  line = strip_cr(line);
  if (!line.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto got = split(line);
  if (got != cols) {
    throw data_schema_error("row 1: header must be " + join(cols) + ", got " + line, 1, "");
  }
}

double cell(const std::vector<std::string>& cells, std::size_t i, const std::string& name,
            std::size_t row) {
  try {
    return parse_double(cells[i], name);
  } catch (const std::invalid_argument&) {
    throw data_schema_error("row " + std::to_string(row) + ", column " + name +
                                ": not a number: '" + cells[i] + "'",
                            row, name);
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

double parse_double(const std::string& text, const std::string& field) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != last) {
    throw std::invalid_argument(field + ": not a number: '" + text + "'");
  }
  return v;
}

SpectrumDataset parse_dataset_csv(std::istream& in) {
  const std::vector<std::string> header{"pt_gev", "value", "err"};
  expect_header(in, header);
  SpectrumDataset ds;
  std::string line;
  std::size_t row = 1;
  double prev = 0.0;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw data_schema_error("row " + std::to_string(row) + ": expected 3 columns, got " +
                                  std::to_string(cells.size()),
                              row, "");
    }
    SpectrumPoint p;
    p.pt = cell(cells, 0, header[0], row);
    p.value = cell(cells, 1, header[1], row);
    p.err = cell(cells, 2, header[2], row);
    auto fail = [&](const std::string& col, const std::string& why) {
      throw data_schema_error("row " + std::to_string(row) + ", column " + col + ": " + why, row,
                              col);
    };
    if (!(p.pt > 0.0) || !std::isfinite(p.pt)) fail("pt_gev", "must be a positive finite number");
    if (!ds.points.empty() && !(p.pt > prev)) fail("pt_gev", "must be strictly increasing");
    if (!(p.value > 0.0) || !std::isfinite(p.value)) fail("value", "must be a positive finite number");
    if (!(p.err > 0.0) || !std::isfinite(p.err)) fail("err", "must be a positive finite number");
    prev = p.pt;
    ds.points.push_back(p);
  }
  return ds;
}

SpectrumDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  auto ds = parse_dataset_csv(in);
  ds.meta = path;
  return ds;
}

void write_dataset_csv(std::ostream& out, const SpectrumDataset& ds) {
  out << "pt_gev,value,err\n";
  for (const auto& p : ds.points) {
    out << format_double(p.pt) << ',' << format_double(p.value) << ',' << format_double(p.err)
        << '\n';
  }
}

void write_scan_csv(std::ostream& out, const ScanResult& scan) {
  out << "beta,beta_minus_beta0,zq,ln_zq,ln_inv_gap\n";
  for (const auto& r : scan.rows) {
    out << format_double(r.beta) << ',' << format_double(r.gap) << ',';
    if (r.status == ZqStatus::ok) {
      out << format_double(*r.zq) << ',' << format_double(*r.ln_zq);
    } else if (r.status == ZqStatus::divergent) {
      out << kDivergentToken << ',' << kDivergentToken;
    } else {
      out << to_string(r.status) << ',' << to_string(r.status);
    }
    out << ',' << (r.ln_inv_gap ? format_double(*r.ln_inv_gap) : std::string("nan")) << '\n';
  }
}

std::vector<ScanRow> parse_scan_csv(std::istream& in) {
  const std::vector<std::string> header{"beta", "beta_minus_beta0", "zq", "ln_zq", "ln_inv_gap"};
  expect_header(in, header);
  std::vector<ScanRow> rows;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw data_schema_error("row " + std::to_string(row) + ": expected 5 columns", row, "");
    }
    ScanRow r;
    r.beta = cell(cells, 0, header[0], row);
    r.gap = cell(cells, 1, header[1], row);
    if (cells[2] == kDivergentToken) {
      r.status = ZqStatus::divergent;
    } else if (cells[2] == to_string(ZqStatus::constraint_violation)) {
      r.status = ZqStatus::constraint_violation;
    } else {
      r.zq = cell(cells, 2, header[2], row);
      r.ln_zq = cell(cells, 3, header[3], row);
    }
    const double lig = cell(cells, 4, header[4], row);
    if (!std::isnan(lig)) r.ln_inv_gap = lig;
    rows.push_back(r);
  }
  return rows;
}

void write_curve_csv(std::ostream& out, const SpectrumModel& m, const std::vector<double>& pts) {
  out << "pt,model_value\n";
  for (double pt : pts) {
    out << format_double(pt) << ',' << format_double(pt_density(pt, m)) << '\n';
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw io_error("write to " + path + " failed");
}

}  // namespace qboot

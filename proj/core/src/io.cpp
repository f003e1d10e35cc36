#include "iir/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "iir/error.hpp"
#include "shortest.hpp"

#ifndef IIR_VERSION
#define IIR_VERSION "0.0.0"
#endif

namespace iir {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Strict: the whole cell must be a finite number.
bool parse_double(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string format_double(double v) { return detail::shortest(v); }

}  // namespace

DataSet parse_csv(const std::string& text, int target_column, bool has_header, Task task) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split_line(line, ',');
    if (width == 0) {
      width = cells.size();
      if (width < 2) throw ParseError("line " + std::to_string(line_no) +
                                          ": need at least one feature and a target", line_no);
    } else if (cells.size() != width) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(cells[c], row[c])) {
        throw ParseError("line " + std::to_string(line_no) + ", column " +
                             std::to_string(c + 1) + ": '" + cells[c] +
                             "' is not a finite number",
                         line_no, c + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty CSV input", line_no);

  const auto target = target_column < 0 ? width - 1 : static_cast<std::size_t>(target_column);
  if (target >= width) {
    throw ContractViolation("target column " + std::to_string(target_column) +
                            " out of range for " + std::to_string(width) + " columns");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix x(n, static_cast<Eigen::Index>(width - 1));
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target) {
        y(i) = rows[static_cast<std::size_t>(i)][c];
      } else {
        x(i, col++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  return DataSet(std::move(x), std::move(y), task);
}

DataSet load_csv(const std::filesystem::path& path, int target_column, bool has_header,
                 Task task) {
  return parse_csv(read_file(path), target_column, has_header, task);
}

DataSet parse_libsvm(const std::string& text, Task task) {
  struct Row {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Row> rows;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    Row row{};
    if (!parse_double(token, row.label)) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid label '" + token + "'",
                       line_no, 1);
    }
    std::size_t previous = 0;
    std::size_t column = 1;
    while (tokens >> token) {
      ++column;
      const auto colon = token.find(':');
      long long index = 0;
      double value = 0.0;
      const std::string idx_text = colon == std::string::npos ? "" : token.substr(0, colon);
      const auto [ptr, ec] =
          std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
      if (colon == std::string::npos || ec != std::errc() ||
          ptr != idx_text.data() + idx_text.size() ||
          !parse_double(token.substr(colon + 1), value)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed pair '" + token + "'",
                         line_no, column);
      }
      if (index < 1) {
        throw ParseError("line " + std::to_string(line_no) + ": feature index " +
                             std::to_string(index) + " must be >= 1",
                         line_no, column);
      }
      const auto idx = static_cast<std::size_t>(index);
      if (idx <= previous) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": feature indices must be strictly ascending",
                         line_no, column);
      }
      previous = idx;
      dim = std::max(dim, idx);
      row.entries.emplace_back(idx, value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty LIBSVM input", line_no);
  if (dim == 0) throw ParseError("LIBSVM input has no features", line_no);

  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix x = Matrix::Zero(n, static_cast<Eigen::Index>(dim));
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    y(i) = row.label;
    for (const auto& [idx, value] : row.entries) x(i, static_cast<Eigen::Index>(idx - 1)) = value;
  }
  return DataSet(std::move(x), std::move(y), task);
}

DataSet load_libsvm(const std::filesystem::path& path, Task task) {
  return parse_libsvm(read_file(path), task);
}

DataSet load_dataset(const std::filesystem::path& path, Task task, int target_column,
                     bool has_header) {
  const auto ext = path.extension().string();
  if (ext == ".csv" || ext == ".txt") return load_csv(path, target_column, has_header, task);
  return load_libsvm(path, task);
}

std::string dataset_to_csv(const DataSet& data) {
  std::string out;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      out += format_double(data.inputs()(i, j));
      out += ',';
    }
    out += format_double(data.y(i));
    out += '\n';
  }
  return out;
}

std::string curve_to_csv(std::span<const CurvePoint> curve) {
  std::string out = "epoch,train,validation,test\n";
  for (const auto& p : curve) {
    out += std::to_string(p.epoch) + ',' + format_double(p.train) + ',' +
           format_double(p.validation) + ',' + format_double(p.test) + '\n';
  }
  return out;
}

std::vector<CurvePoint> curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "epoch,train,validation,test") {
    throw ParseError("curve CSV: missing header 'epoch,train,validation,test'", 1);
  }
  std::vector<CurvePoint> curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, ',');
    double v[4];
    if (cells.size() != 4) throw ParseError("curve CSV: expected 4 columns", line_no);
    for (int c = 0; c < 4; ++c) {
      if (!parse_double(cells[static_cast<std::size_t>(c)], v[c])) {
        throw ParseError("curve CSV: bad number", line_no, static_cast<std::size_t>(c) + 1);
      }
    }
    curve.push_back({static_cast<std::int64_t>(v[0]), v[1], v[2], v[3]});
  }
  return curve;
}

std::string baseline_to_csv(std::span<const BaselineRow> rows) {
  std::string out = "dataset,task,kiir,kir,krr,kiir_epochs,kir_epochs,krr_lambda,runs\n";
  for (const auto& r : rows) {
    out += r.dataset + ',' + to_string(r.task) + ',' + format_double(r.kiir) + ',' +
           format_double(r.kir) + ',' + format_double(r.krr) + ',' +
           format_double(r.kiir_epochs) + ',' + format_double(r.kir_epochs) + ',' +
           format_double(r.krr_lambda) + ',' + std::to_string(r.runs) + '\n';
  }
  return out;
}

nlohmann::json to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::json to_json(const RateEstimate& est) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [lx, ly] : est.points) points.push_back({lx, ly});
  return {{"slope", est.slope},
          {"intercept", est.intercept},
          {"stderr", est.stderr_slope},
          {"points", points}};
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json entry{{"name", c.name}};
    if (c.applicable) {
      entry["status"] = c.pass ? "pass" : "fail";
      entry["max_ratio"] = c.max_ratio;
      entry["worst_epoch"] = c.worst_epoch;
    } else {
      entry["status"] = "skipped";
    }
    checks.push_back(entry);
  }
  return {{"r", report.r},
          {"gamma", report.gamma},
          {"n", report.n},
          {"epochs", report.epochs},
          {"closed_form_gap", report.closed_form_gap},
          {"checks", checks},
          {"status", report.pass ? "pass" : "fail"}};
}

nlohmann::json to_json(const ConcentrationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"threshold", c.threshold},
                      {"exceedance_frequency", c.exceedance_frequency},
                      {"max_deviation", c.max_deviation},
                      {"status", c.pass ? "pass" : "fail"}});
  }
  return {{"n", report.n},       {"delta", report.delta}, {"trials", report.trials},
          {"kappa", report.kappa}, {"M", report.M},       {"gamma", report.gamma},
          {"checks", checks},    {"status", report.pass ? "pass" : "fail"}};
}

nlohmann::json to_json(const std::vector<IdentityCheck>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"instances", c.instances},
                   {"max_error", c.max_error},
                   {"tolerance", c.tolerance},
                   {"status", c.pass ? "pass" : "fail"}});
  }
  return out;
}

nlohmann::json to_json(const BaselineRow& row) {
  return {{"dataset", row.dataset},        {"task", to_string(row.task)},
          {"kiir", row.kiir},              {"kir", row.kir},
          {"krr", row.krr},                {"kiir_epochs", row.kiir_epochs},
          {"kir_epochs", row.kir_epochs},  {"krr_lambda", row.krr_lambda},
          {"runs", row.runs}};
}

nlohmann::json to_json(const RiskReport& report) {
  nlohmann::json j{{"empirical_risk", report.empirical_risk}};
  if (report.excess_risk) j["excess_risk"] = *report.excess_risk;
  if (report.iterate_distance) j["iterate_distance"] = *report.iterate_distance;
  return j;
}

nlohmann::json ResultEnvelope::to_json() const {
  return {{"tool_version", tool_version},
          {"command", command},
          {"config", config},
          {"seed", seed},
          {"metrics", metrics},
          {"timing", {{"elapsed_seconds", elapsed_seconds}}}};
}

ResultEnvelope ResultEnvelope::from_json(const nlohmann::json& j) {
  ResultEnvelope env;
  env.tool_version = j.at("tool_version").get<std::string>();
  env.command = j.at("command").get<std::string>();
  env.config = j.at("config");
  env.seed = j.at("seed").get<std::uint64_t>();
  env.metrics = j.at("metrics");
  env.elapsed_seconds = j.at("timing").at("elapsed_seconds").get<double>();
  return env;
}

std::string ResultEnvelope::dump() const { return to_json().dump(2) + "\n"; }

std::string tool_version() { return IIR_VERSION; }

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace iir

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iir/harness.hpp"
#include "iir/model.hpp"

namespace iir {

// ---------------------------------------------------------------------------
// Dataset readers

/// Numeric CSV. `target_column` is 0-based; -1 selects the last column.
/// Every other column becomes a feature, in file order.
DataSet load_csv(const std::filesystem::path& path, int target_column = -1,
                 bool has_header = false, Task task = Task::regression);
DataSet parse_csv(const std::string& text, int target_column = -1, bool has_header = false,
                  Task task = Task::regression);

/// "label idx:val idx:val ..." with 1-based ascending indices. The result is
/// dense with d = largest index seen; absent entries are 0.
DataSet load_libsvm(const std::filesystem::path& path, Task task = Task::regression);
DataSet parse_libsvm(const std::string& text, Task task = Task::regression);

/// Chooses the reader by extension: .csv / .txt (CSV) or anything else (LIBSVM).
DataSet load_dataset(const std::filesystem::path& path, Task task = Task::regression,
                     int target_column = -1, bool has_header = false);

/// Features followed by the target, no header.
std::string dataset_to_csv(const DataSet& data);

// ---------------------------------------------------------------------------
// Curves and tables

/// Header "epoch,train,validation,test", one row per epoch.
std::string curve_to_csv(std::span<const CurvePoint> curve);
std::vector<CurvePoint> curve_from_csv(const std::string& text);

std::string baseline_to_csv(std::span<const BaselineRow> rows);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const RateEstimate& est);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const ConcentrationReport& report);
nlohmann::json to_json(const std::vector<IdentityCheck>& checks);
nlohmann::json to_json(const BaselineRow& row);
nlohmann::json to_json(const RiskReport& report);
nlohmann::json to_json(const Vector& v);

/// Wrapper for every structured report.
struct ResultEnvelope {
  std::string tool_version;
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  nlohmann::json metrics;
  double elapsed_seconds = 0.0;

  nlohmann::json to_json() const;
  static ResultEnvelope from_json(const nlohmann::json& j);
  /// Pretty-printed, keys sorted; `timing` is the only run-dependent field.
  std::string dump() const;
};

std::string tool_version();

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace iir

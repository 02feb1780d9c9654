#pragma once

// CSV/JSON emission of run records, prefixed by the resolved run
// configuration so an output file is enough to reproduce the run.
//
// CSV: `# key=value` header lines, one column-name row, then one row per
// iteration with a fixed column order:
//   iter, actual_density, buildup_factor, redundant_traffic_factor,
//   error_norm, error_norm_scaled, threshold, loss,
//   time_grad, time_select, time_comm, time_overhead
// Doubles are printed with %.17g, so identical runs produce identical bytes.
//
// JSON: { "config": {...}, "threshold_error_scaling": number|null,
//         "error_norm_scaled": [...], "records": [ {...}, ... ] }

#include "sparsim/harness.hpp"
#include "sparsim/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace sparsim {

enum class RecordFormat { csv, json };

RecordFormat parse_record_format(std::string_view name);
std::string_view to_string(RecordFormat format);

nlohmann::json config_to_json(const RunConfig& config);

void emit(const RunConfig& config, const std::vector<IterationRecord>& records,
          RecordFormat format, const std::filesystem::path& path);

struct RecordFile {
  nlohmann::json config;
  std::optional<double> threshold_error_scaling;
  std::vector<IterationRecord> records;
};

RecordFile read_records_json(const std::filesystem::path& path);

}  // namespace sparsim

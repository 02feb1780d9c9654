#include "sparsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <string>

namespace sparsim {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr const char* kColumns =
    "iter,actual_density,buildup_factor,redundant_traffic_factor,error_norm,"
    "error_norm_scaled,threshold,loss,time_grad,time_select,time_comm,time_overhead";

std::optional<double> scaling_of(const std::vector<IterationRecord>& records) {
  if (records.empty()) return std::nullopt;
  std::vector<double> deltas, errors;
  deltas.reserve(records.size());
  errors.reserve(records.size());
  for (const auto& r : records) {
    deltas.push_back(r.threshold);
    errors.push_back(r.error_norm);
  }
  return threshold_error_scaling(deltas, errors);
}

void emit_csv(const RunConfig& config, const std::vector<IterationRecord>& records,
              std::ofstream& out) {
  const auto scaling = scaling_of(records);
  const nlohmann::json header = config_to_json(config);
  for (const auto& [key, value] : header.items()) {
    out << "# " << key << '=';
    if (value.is_string())
      out << value.get<std::string>();
    else
      out << value.dump();
    out << '\n';
  }
  out << "# threshold_error_scaling=" << (scaling ? fmt(*scaling) : "none") << '\n';
  out << kColumns << '\n';
  const double factor = scaling.value_or(0.0);
  for (const auto& r : records) {
    out << r.t << ',' << fmt(r.actual_density) << ',' << fmt(r.buildup_factor) << ','
        << fmt(r.redundant_traffic_factor) << ',' << fmt(r.error_norm) << ','
        << fmt(r.error_norm * factor) << ',' << fmt(r.threshold) << ',' << fmt(r.loss) << ','
        << fmt(r.time_grad) << ',' << fmt(r.time_select) << ',' << fmt(r.time_comm) << ','
        << fmt(r.time_overhead) << '\n';
  }
}

void emit_json(const RunConfig& config, const std::vector<IterationRecord>& records,
               std::ofstream& out) {
  const auto scaling = scaling_of(records);
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["threshold_error_scaling"] = scaling ? nlohmann::json(*scaling) : nlohmann::json(nullptr);
  const double factor = scaling.value_or(0.0);
  auto scaled = nlohmann::json::array();
  auto rows = nlohmann::json::array();
  for (const auto& r : records) {
    scaled.push_back(r.error_norm * factor);
    rows.push_back({{"t", r.t},
                    {"actual_density", r.actual_density},
                    {"buildup_factor", r.buildup_factor},
                    {"redundant_traffic_factor", r.redundant_traffic_factor},
                    {"error_norm", r.error_norm},
                    {"threshold", r.threshold},
                    {"loss", r.loss},
                    {"time_grad", r.time_grad},
                    {"time_select", r.time_select},
                    {"time_comm", r.time_comm},
                    {"time_overhead", r.time_overhead}});
  }
  j["error_norm_scaled"] = std::move(scaled);
  j["records"] = std::move(rows);
  out << j.dump(2) << '\n';
}

}  // namespace

RecordFormat parse_record_format(std::string_view name) {
  if (name == "csv") return RecordFormat::csv;
  if (name == "json") return RecordFormat::json;
  throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected csv|json)");
}

std::string_view to_string(RecordFormat format) {
  return format == RecordFormat::csv ? "csv" : "json";
}

nlohmann::json config_to_json(const RunConfig& c) {
  return {{"sparsifier", std::string(to_string(c.sparsifier.kind))},
          {"task", std::string(to_string(c.task))},
          {"workers", c.workers},
          {"iterations", c.iterations},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"dimension", c.dimension},
          {"samples", c.samples},
          {"density", c.sparsifier.density},
          {"delta0", c.sparsifier.initial_threshold},
          {"alpha", c.sparsifier.scaling_factor},
          {"eps_delta", c.sparsifier.min_threshold},
          {"per_worker_k", std::string(to_string(c.sparsifier.target))},
          {"lr", c.lr.initial},
          {"decay_factor", c.lr.decay_factor},
          {"decay_at", c.lr.decay_at},
          {"error_feedback", c.error_feedback},
          {"latency_per_collective", c.cost_model.latency_per_collective},
          {"bytes_per_element", c.cost_model.bytes_per_element},
          {"bandwidth", c.cost_model.bandwidth},
          {"compute_time_per_op", c.compute_time_per_op}};
}

void emit(const RunConfig& config, const std::vector<IterationRecord>& records,
          RecordFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("emit: cannot open '" + path.string() + "' for writing");
  if (format == RecordFormat::csv)
    emit_csv(config, records, out);
  else
    emit_json(config, records, out);
  out.flush();
  if (!out) throw std::runtime_error("emit: write failed for '" + path.string() + "'");
}

RecordFile read_records_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_json: cannot open '" + path.string() + "'");
  nlohmann::json j;
  in >> j;

  RecordFile file;
  file.config = j.at("config");
  const auto& scaling = j.at("threshold_error_scaling");
  if (!scaling.is_null()) file.threshold_error_scaling = scaling.get<double>();
  for (const auto& row : j.at("records")) {
    IterationRecord r;
    r.t = row.at("t").get<std::int64_t>();
    r.actual_density = row.at("actual_density").get<double>();
    r.buildup_factor = row.at("buildup_factor").get<double>();
    r.redundant_traffic_factor = row.at("redundant_traffic_factor").get<double>();
    r.error_norm = row.at("error_norm").get<double>();
    r.threshold = row.at("threshold").get<double>();
    r.loss = row.at("loss").get<double>();
    r.time_grad = row.at("time_grad").get<double>();
    r.time_select = row.at("time_select").get<double>();
    r.time_comm = row.at("time_comm").get<double>();
    r.time_overhead = row.at("time_overhead").get<double>();
    file.records.push_back(r);
  }
  return file;
}

}  // namespace sparsim

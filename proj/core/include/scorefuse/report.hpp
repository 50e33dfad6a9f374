#ifndef SCOREFUSE_REPORT_HPP
#define SCOREFUSE_REPORT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace scorefuse {

inline constexpr const char* kCodeVersion = "scorefuse 0.1.0";

struct MetricRow {
  std::string name;
  double value = 0.0;
  std::optional<double> tolerance;  // printed when present
  std::optional<bool> pass;         // absent for informational metrics
};

// Deterministic record of one scenario run. Metric values are exactly
// reproducible from (config, seed); wall-clock timing lives only in the
// instrumentation JSON and never in the metrics table.
struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::vector<MetricRow> metrics;
  nlohmann::json instrumentation = nlohmann::json::object();

  void add(std::string name, double value) {
    metrics.push_back({std::move(name), value, std::nullopt, std::nullopt});
  }
  void add_check(std::string name, double value, double tolerance, bool pass) {
    metrics.push_back({std::move(name), value, tolerance, pass});
  }

  bool all_passed() const;
};

std::string report_to_csv(const RunReport& report);
nlohmann::json report_to_json(const RunReport& report);

// Writes report.csv and report.json into out_dir (created if missing).
void write_report(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace scorefuse

#endif  // SCOREFUSE_REPORT_HPP

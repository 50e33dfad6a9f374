#include "scorefuse/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scorefuse {

namespace {
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

bool RunReport::all_passed() const {
  for (const auto& m : metrics) {
    if (m.pass.has_value() && !*m.pass) return false;
  }
  return true;
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "scenario,metric,value,tolerance,pass\n";
  for (const auto& m : report.metrics) {
    out << report.scenario << ',' << m.name << ',' << format_double(m.value) << ',';
    if (m.tolerance) out << format_double(*m.tolerance);
    out << ',';
    if (m.pass) out << (*m.pass ? '1' : '0');
    out << '\n';
  }
  return out.str();
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["config_hash"] = report.config_hash;
  j["code_version"] = report.code_version;
  j["metrics"] = nlohmann::json::array();
  for (const auto& m : report.metrics) {
    nlohmann::json row;
    row["name"] = m.name;
    row["value"] = m.value;
    if (m.tolerance) row["tolerance"] = *m.tolerance;
    if (m.pass) row["pass"] = *m.pass;
    j["metrics"].push_back(row);
  }
  j["instrumentation"] = report.instrumentation;
  return j;
}

void write_report(const RunReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "report.csv", std::ios::binary);
    csv << report_to_csv(report);
  }
  {
    std::ofstream js(out_dir / "report.json", std::ios::binary);
    js << report_to_json(report).dump(2) << '\n';
  }
}

}  // namespace scorefuse

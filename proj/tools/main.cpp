// Command-line front end: seeded scenario runners emitting report.csv /
// report.json, exiting nonzero when any assertion-class metric fails.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "scorefuse/scenarios.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool snapshots = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "Path to the scenario config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out", args.out_dir, "Output directory for report.csv / report.json");
  cmd->add_flag("--snapshots", args.snapshots, "Record intermediate-state snapshots");
}

void print_summary(const scorefuse::RunReport& report) {
  for (const auto& m : report.metrics) {
    std::printf("%-42s %-24.17g", m.name.c_str(), m.value);
    if (m.tolerance) std::printf(" (tol %.6g)", *m.tolerance);
    if (m.pass) std::printf(" [%s]", *m.pass ? "pass" : "FAIL");
    std::printf("\n");
  }
}

int run_command(const std::string& scenario, const CommonArgs& args) {
  scorefuse::ExperimentConfig cfg = scorefuse::load_config(args.config_path);
  if (cfg.scenario != scenario) {
    std::fprintf(stderr, "error: config declares scenario '%s' but subcommand is '%s'\n",
                 cfg.scenario.c_str(), scenario.c_str());
    return 2;
  }
  const std::uint64_t seed = args.seed.value_or(cfg.seed);
  scorefuse::ScenarioOptions options;
  if (!args.out_dir.empty()) options.out_dir = args.out_dir;
  options.snapshots = args.snapshots;

  const scorefuse::RunReport report = scorefuse::run_scenario(cfg, seed, options);
  print_summary(report);
  if (!args.out_dir.empty()) scorefuse::write_report(report, args.out_dir);
  return report.all_passed() ? 0 : 1;
}

int report_command(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", path.string().c_str());
    return 2;
  }
  nlohmann::json j = nlohmann::json::parse(in);
  std::printf("scenario:    %s\n", j.at("scenario").get<std::string>().c_str());
  std::printf("seed:        %llu\n",
              static_cast<unsigned long long>(j.at("seed").get<std::uint64_t>()));
  std::printf("config hash: %s\n", j.at("config_hash").get<std::string>().c_str());
  bool all_pass = true;
  for (const auto& m : j.at("metrics")) {
    std::printf("%-42s %-24.17g", m.at("name").get<std::string>().c_str(),
                m.at("value").get<double>());
    if (m.contains("tolerance")) std::printf(" (tol %.6g)", m.at("tolerance").get<double>());
    if (m.contains("pass")) {
      const bool p = m.at("pass").get<bool>();
      all_pass = all_pass && p;
      std::printf(" [%s]", p ? "pass" : "FAIL");
    }
    std::printf("\n");
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional score-fusion sampling laboratory"};
  app.require_subcommand(1);

  const std::vector<std::string> scenarios = {"validate-theorem", "sample", "ablate-vrs",
                                              "sweep-s", "condition-check"};
  std::map<std::string, CommonArgs> args;
  for (const auto& name : scenarios) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " scenario");
    add_common(cmd, args[name]);
  }
  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize a previously written report");
  report_cmd->add_option("--out", report_dir, "Directory containing report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) return report_command(report_dir);
    for (const auto& name : scenarios) {
      if (app.get_subcommand(name)->parsed()) return run_command(name, args[name]);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

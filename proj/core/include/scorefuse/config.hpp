#ifndef SCOREFUSE_CONFIG_HPP
#define SCOREFUSE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scorefuse/compose.hpp"
#include "scorefuse/models.hpp"
#include "scorefuse/schedule.hpp"

namespace scorefuse {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
  int n_steps = kDefaultSteps;
  double sigma_min = kDefaultSigmaMin;
  double sigma_max = kDefaultSigmaMax;
  double rho = kDefaultRho;

  SigmaSchedule build() const { return karras_sigmas(n_steps, sigma_min, sigma_max, rho); }
};

struct CompositionSettings {
  std::string mode = "convex";  // "convex" | "exact"
  double s = 0.5;
  int n_rollback = 0;
  int rollback_repeats = 1;
  bool swap_orientation = false;
  bool variance_matched_renoise = false;
  double rollback_interp = 1.0;

  CompositionConfig build() const;
};

struct TheoremConfig {
  int n_models = 20;
  int n_points = 50;
  std::vector<double> noise_levels{0.0, 0.5, 2.0, 10.0};
  int view_min = 2, view_max = 5;
  int frame_min = 2, frame_max = 5;
  int dim_min = 1, dim_max = 3;
  double tolerance = 1e-8;
  bool negative_control = true;
  double negative_min_error = 1e-4;
  double negative_pass_fraction = 0.9;
};

// Scalar two-component mixture used for the mismatched-denoiser scenarios:
// modes at center +- half-separation... here: modes {-(center), +center} for
// the video model and {-center + delta, center + delta} for the multi-view
// model, each with isotropic std mode_std over the whole row/column vector.
struct VrsConfig {
  int views = 4;
  int frames = 4;
  double mode_center = 3.0;
  double delta = 1.0;
  double mode_std = 0.3;
  std::vector<double> weights{0.5, 0.5};
  int n_seeds = 2000;
  int bootstrap_resamples = 1000;
  int snapshot_step = 4;
  double bimodality_threshold = 5.0 / 9.0;
  double ci_alpha = 0.05;
  double control_alpha = 0.01;
  bool zero_delta_control = true;
};

struct SweepConfig {
  std::vector<double> s_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> noise_levels{0.5, 2.0};
  int n_models = 5;
  int n_points = 20;
  int view_min = 2, view_max = 4;
  int frame_min = 2, frame_max = 4;
  int dim_min = 1, dim_max = 2;
};

struct ConditionCheckConfig {
  int views = 3;
  int frames = 3;
  int dim = 1;
  double coupling = 0.6;  // uniform positive structural coefficient
  int n_runs = 100;
  int n_reference = 200;
  int n_permutations = 500;
  double alpha = 0.01;
};

// Gaussian-mixture specification as nested numeric arrays. Covariances are
// either isotropic (stds, one per component) or full matrices.
struct GmmSpec {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<double> stds;                  // isotropic variant
  std::vector<Eigen::MatrixXd> covariances;  // full variant

  GmmModel build() const;
};
GmmSpec gmm_spec_from_json(const nlohmann::json& j);
nlohmann::json gmm_spec_to_json(const GmmSpec& spec);

// Explicit pivot-tree serialization (nested numeric arrays).
nlohmann::json pivot_tree_to_json(const PivotTreeSpec& spec);
PivotTreeSpec pivot_tree_from_json(const nlohmann::json& j);

struct SampleEntryCondition {
  int view = 0;
  int frame = 0;
  Eigen::VectorXd value;
};

struct SampleConfig {
  int views = 2;
  int frames = 2;
  int dim = 1;
  GmmSpec row_gmm;  // dimension frames*dim
  GmmSpec col_gmm;  // dimension views*dim
  std::vector<SampleEntryCondition> conditions;
};

struct ExperimentConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  ScheduleConfig schedule;
  CompositionSettings composition;
  std::optional<TheoremConfig> theorem;
  std::optional<VrsConfig> vrs;
  std::optional<SweepConfig> sweep;
  std::optional<ConditionCheckConfig> condition;
  std::optional<SampleConfig> sample;

  std::string config_hash;  // FNV-1a over the raw config bytes
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace scorefuse

#endif  // SCOREFUSE_CONFIG_HPP

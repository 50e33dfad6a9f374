#include "scorefuse/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace scorefuse {

namespace {
using nlohmann::json;

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec(const json& j, const char* key, std::vector<double>& out) {
  if (j.contains(key)) out = j.at(key).get<std::vector<double>>();
}

Eigen::VectorXd to_vector(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json from_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::MatrixXd to_matrix(const json& j) {
  auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw ConfigError("matrix: empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw ConfigError("matrix: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

json from_matrix(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.row(r).data(), m.row(r).data() + m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  }
  return rows;
}

ScheduleConfig parse_schedule(const json& j) {
  require_keys(j, "schedule", {"n_steps", "sigma_min", "sigma_max", "rho"});
  ScheduleConfig c;
  read(j, "n_steps", c.n_steps);
  read(j, "sigma_min", c.sigma_min);
  read(j, "sigma_max", c.sigma_max);
  read(j, "rho", c.rho);
  return c;
}

CompositionSettings parse_composition(const json& j) {
  require_keys(j, "composition",
               {"mode", "s", "n_rollback", "rollback_repeats", "swap_orientation",
                "variance_matched_renoise", "rollback_interp"});
  CompositionSettings c;
  read(j, "mode", c.mode);
  read(j, "s", c.s);
  read(j, "n_rollback", c.n_rollback);
  read(j, "rollback_repeats", c.rollback_repeats);
  read(j, "swap_orientation", c.swap_orientation);
  read(j, "variance_matched_renoise", c.variance_matched_renoise);
  read(j, "rollback_interp", c.rollback_interp);
  if (c.mode != "convex" && c.mode != "exact") {
    throw ConfigError("composition.mode: expected 'convex' or 'exact'");
  }
  return c;
}

TheoremConfig parse_theorem(const json& j) {
  require_keys(j, "theorem",
               {"n_models", "n_points", "noise_levels", "view_range", "frame_range", "dim_range",
                "tolerance", "negative_control", "negative_min_error", "negative_pass_fraction"});
  TheoremConfig c;
  read(j, "n_models", c.n_models);
  read(j, "n_points", c.n_points);
  read_vec(j, "noise_levels", c.noise_levels);
  const auto range = [&](const char* key, int& lo, int& hi) {
    if (!j.contains(key)) return;
    auto r = j.at(key).get<std::vector<int>>();
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError(std::string("theorem.") + key);
    lo = r[0];
    hi = r[1];
  };
  range("view_range", c.view_min, c.view_max);
  range("frame_range", c.frame_min, c.frame_max);
  range("dim_range", c.dim_min, c.dim_max);
  read(j, "tolerance", c.tolerance);
  read(j, "negative_control", c.negative_control);
  read(j, "negative_min_error", c.negative_min_error);
  read(j, "negative_pass_fraction", c.negative_pass_fraction);
  return c;
}

VrsConfig parse_vrs(const json& j) {
  require_keys(j, "vrs",
               {"views", "frames", "mode_center", "delta", "mode_std", "weights", "n_seeds",
                "bootstrap_resamples", "snapshot_step", "bimodality_threshold", "ci_alpha",
                "control_alpha", "zero_delta_control"});
  VrsConfig c;
  read(j, "views", c.views);
  read(j, "frames", c.frames);
  read(j, "mode_center", c.mode_center);
  read(j, "delta", c.delta);
  read(j, "mode_std", c.mode_std);
  read_vec(j, "weights", c.weights);
  read(j, "n_seeds", c.n_seeds);
  read(j, "bootstrap_resamples", c.bootstrap_resamples);
  read(j, "snapshot_step", c.snapshot_step);
  read(j, "bimodality_threshold", c.bimodality_threshold);
  read(j, "ci_alpha", c.ci_alpha);
  read(j, "control_alpha", c.control_alpha);
  read(j, "zero_delta_control", c.zero_delta_control);
  return c;
}

SweepConfig parse_sweep(const json& j) {
  require_keys(j, "sweep",
               {"s_grid", "noise_levels", "n_models", "n_points", "view_range", "frame_range",
                "dim_range"});
  SweepConfig c;
  read_vec(j, "s_grid", c.s_grid);
  read_vec(j, "noise_levels", c.noise_levels);
  read(j, "n_models", c.n_models);
  read(j, "n_points", c.n_points);
  const auto range = [&](const char* key, int& lo, int& hi) {
    if (!j.contains(key)) return;
    auto r = j.at(key).get<std::vector<int>>();
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError(std::string("sweep.") + key);
    lo = r[0];
    hi = r[1];
  };
  range("view_range", c.view_min, c.view_max);
  range("frame_range", c.frame_min, c.frame_max);
  range("dim_range", c.dim_min, c.dim_max);
  return c;
}

ConditionCheckConfig parse_condition(const json& j) {
  require_keys(j, "condition",
               {"views", "frames", "dim", "coupling", "n_runs", "n_reference", "n_permutations",
                "alpha"});
  ConditionCheckConfig c;
  read(j, "views", c.views);
  read(j, "frames", c.frames);
  read(j, "dim", c.dim);
  read(j, "coupling", c.coupling);
  read(j, "n_runs", c.n_runs);
  read(j, "n_reference", c.n_reference);
  read(j, "n_permutations", c.n_permutations);
  read(j, "alpha", c.alpha);
  return c;
}

SampleConfig parse_sample(const json& j) {
  require_keys(j, "sample", {"views", "frames", "dim", "row_gmm", "col_gmm", "conditions"});
  SampleConfig c;
  read(j, "views", c.views);
  read(j, "frames", c.frames);
  read(j, "dim", c.dim);
  c.row_gmm = gmm_spec_from_json(j.at("row_gmm"));
  c.col_gmm = gmm_spec_from_json(j.at("col_gmm"));
  if (j.contains("conditions")) {
    for (const auto& e : j.at("conditions")) {
      require_keys(e, "sample.conditions[]", {"view", "frame", "value"});
      SampleEntryCondition cond;
      cond.view = e.at("view").get<int>();
      cond.frame = e.at("frame").get<int>();
      cond.value = to_vector(e.at("value"));
      c.conditions.push_back(std::move(cond));
    }
  }
  return c;
}
}  // namespace

CompositionConfig CompositionSettings::build() const {
  CompositionConfig c;
  c.mode = mode == "exact" ? CompositionMode::kExact : CompositionMode::kConvex;
  const double s_value = s;
  c.s_schedule = [s_value](int) { return s_value; };
  c.n_rollback = n_rollback;
  c.rollback_repeats = rollback_repeats;
  c.swap_orientation = swap_orientation;
  c.variance_matched_renoise = variance_matched_renoise;
  c.rollback_interp = rollback_interp;
  return c;
}

GmmSpec gmm_spec_from_json(const nlohmann::json& j) {
  require_keys(j, "gmm", {"weights", "means", "stds", "covariances"});
  GmmSpec spec;
  spec.weights = j.at("weights").get<std::vector<double>>();
  for (const auto& m : j.at("means")) spec.means.push_back(to_vector(m));
  if (j.contains("stds") == j.contains("covariances")) {
    throw ConfigError("gmm: exactly one of 'stds' or 'covariances' is required");
  }
  if (j.contains("stds")) spec.stds = j.at("stds").get<std::vector<double>>();
  if (j.contains("covariances")) {
    for (const auto& m : j.at("covariances")) spec.covariances.push_back(to_matrix(m));
  }
  return spec;
}

nlohmann::json gmm_spec_to_json(const GmmSpec& spec) {
  json j;
  j["weights"] = spec.weights;
  j["means"] = json::array();
  for (const auto& m : spec.means) j["means"].push_back(from_vector(m));
  if (!spec.stds.empty()) j["stds"] = spec.stds;
  if (!spec.covariances.empty()) {
    j["covariances"] = json::array();
    for (const auto& c : spec.covariances) j["covariances"].push_back(from_matrix(c));
  }
  return j;
}

GmmModel GmmSpec::build() const {
  std::vector<GaussianModel> comps;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (!stds.empty()) {
      comps.emplace_back(means[k], stds[k] * stds[k] *
                                       Eigen::MatrixXd::Identity(means[k].size(), means[k].size()));
    } else {
      comps.emplace_back(means[k], covariances[k]);
    }
  }
  return GmmModel(weights, std::move(comps));
}

nlohmann::json pivot_tree_to_json(const PivotTreeSpec& spec) {
  json j;
  j["v"] = spec.v;
  j["f"] = spec.f;
  j["d"] = spec.d;
  j["pivot"] = {spec.pivot.view, spec.pivot.frame};
  j["pivot_mean"] = from_vector(spec.pivot_mean);
  j["pivot_cov"] = from_matrix(spec.pivot_cov);
  const auto dump_int_map = [&](const std::map<int, Eigen::MatrixXd>& m) {
    json arr = json::array();
    for (const auto& [k, mat] : m) arr.push_back({{"index", k}, {"matrix", from_matrix(mat)}});
    return arr;
  };
  const auto dump_pair_map = [&](const std::map<std::pair<int, int>, Eigen::MatrixXd>& m) {
    json arr = json::array();
    for (const auto& [k, mat] : m) {
      arr.push_back({{"view", k.first}, {"frame", k.second}, {"matrix", from_matrix(mat)}});
    }
    return arr;
  };
  j["row_coeffs"] = dump_int_map(spec.row_coeffs);
  j["col_coeffs"] = dump_int_map(spec.col_coeffs);
  j["rest_coeffs"] = dump_pair_map(spec.rest_coeffs);
  j["noise_vars"] = dump_pair_map(spec.noise_vars);
  j["cross_coeffs"] = dump_pair_map(spec.cross_coeffs);
  return j;
}

PivotTreeSpec pivot_tree_from_json(const nlohmann::json& j) {
  require_keys(j, "pivot_tree",
               {"v", "f", "d", "pivot", "pivot_mean", "pivot_cov", "row_coeffs", "col_coeffs",
                "rest_coeffs", "noise_vars", "cross_coeffs"});
  PivotTreeSpec spec;
  spec.v = j.at("v").get<int>();
  spec.f = j.at("f").get<int>();
  spec.d = j.at("d").get<int>();
  auto p = j.at("pivot").get<std::vector<int>>();
  if (p.size() != 2) throw ConfigError("pivot_tree.pivot: expected [view, frame]");
  spec.pivot = {p[0], p[1]};
  spec.pivot_mean = to_vector(j.at("pivot_mean"));
  spec.pivot_cov = to_matrix(j.at("pivot_cov"));
  const auto load_int_map = [&](const char* key, std::map<int, Eigen::MatrixXd>& out) {
    if (!j.contains(key)) return;
    for (const auto& e : j.at(key)) {
      require_keys(e, key, {"index", "matrix"});
      out[e.at("index").get<int>()] = to_matrix(e.at("matrix"));
    }
  };
  const auto load_pair_map = [&](const char* key,
                                 std::map<std::pair<int, int>, Eigen::MatrixXd>& out) {
    if (!j.contains(key)) return;
    for (const auto& e : j.at(key)) {
      require_keys(e, key, {"view", "frame", "matrix"});
      out[{e.at("view").get<int>(), e.at("frame").get<int>()}] = to_matrix(e.at("matrix"));
    }
  };
  load_int_map("row_coeffs", spec.row_coeffs);
  load_int_map("col_coeffs", spec.col_coeffs);
  load_pair_map("rest_coeffs", spec.rest_coeffs);
  load_pair_map("noise_vars", spec.noise_vars);
  load_pair_map("cross_coeffs", spec.cross_coeffs);
  return spec;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  require_keys(j, "config",
               {"scenario", "seed", "schedule", "composition", "theorem", "vrs", "sweep",
                "condition", "sample"});
  ExperimentConfig cfg;
  if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario'");
  cfg.scenario = j.at("scenario").get<std::string>();
  read(j, "seed", cfg.seed);
  if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));
  if (j.contains("composition")) cfg.composition = parse_composition(j.at("composition"));
  if (j.contains("theorem")) cfg.theorem = parse_theorem(j.at("theorem"));
  if (j.contains("vrs")) cfg.vrs = parse_vrs(j.at("vrs"));
  if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("condition")) cfg.condition = parse_condition(j.at("condition"));
  if (j.contains("sample")) cfg.sample = parse_sample(j.at("sample"));
  cfg.config_hash = fnv1a_hex(text);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scorefuse

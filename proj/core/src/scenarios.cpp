#include "scorefuse/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "scorefuse/stats.hpp"

namespace scorefuse {

namespace {

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Max over random points of the normalized error of
// row + col - pivot versus the exact joint score at the pivot entry.
struct ComposeError {
  double max_abs = 0.0;
  double max_normalized = 0.0;
};

ComposeError compose_error_at_pivot(const MatrixGaussianModel& model, EntryIndex pivot,
                                    int n_points, Stream& rng) {
  const int v = model.views(), f = model.frames(), d = model.entry_dim();
  std::vector<EntryIndex> row_entries, col_entries;
  for (int j = 0; j < f; ++j) row_entries.push_back({pivot.view, j});
  for (int i = 0; i < v; ++i) col_entries.push_back({i, pivot.frame});
  const GaussianModel row_marg = model.marginal(row_entries);
  const GaussianModel col_marg = model.marginal(col_entries);
  const std::vector<EntryIndex> pivot_only{pivot};
  const GaussianModel piv_marg = model.marginal(pivot_only);

  const Eigen::Index piv_offset = model.entry_offset(pivot);
  const Eigen::Index row_pos = static_cast<Eigen::Index>(pivot.frame) * d;
  const Eigen::Index col_pos = static_cast<Eigen::Index>(pivot.view) * d;

  ComposeError err;
  for (int p = 0; p < n_points; ++p) {
    const Eigen::VectorXd x = model.joint().draw(rng);
    const Eigen::VectorXd joint_at_pivot = model.joint().score(x).segment(piv_offset, d);

    Eigen::VectorXd x_row(static_cast<Eigen::Index>(f) * d);
    for (int j = 0; j < f; ++j) {
      x_row.segment(static_cast<Eigen::Index>(j) * d, d) =
          x.segment(model.entry_offset({pivot.view, j}), d);
    }
    Eigen::VectorXd x_col(static_cast<Eigen::Index>(v) * d);
    for (int i = 0; i < v; ++i) {
      x_col.segment(static_cast<Eigen::Index>(i) * d, d) =
          x.segment(model.entry_offset({i, pivot.frame}), d);
    }
    const Eigen::VectorXd row_score = row_marg.score(x_row).segment(row_pos, d);
    const Eigen::VectorXd col_score = col_marg.score(x_col).segment(col_pos, d);
    const Eigen::VectorXd piv_score = piv_marg.score(x.segment(piv_offset, d));

    const Eigen::VectorXd composed = compose_scores_exact(row_score, col_score, piv_score);
    const double abs_err = (composed - joint_at_pivot).cwiseAbs().maxCoeff();
    err.max_abs = std::max(err.max_abs, abs_err);
    err.max_normalized =
        std::max(err.max_normalized, abs_err / (1.0 + joint_at_pivot.cwiseAbs().maxCoeff()));
  }
  return err;
}

int draw_in_range(Stream& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool exact_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

RunReport run_validate_theorem(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.theorem) throw ConfigError("validate-theorem: missing 'theorem' section");
  const TheoremConfig& tc = *cfg.theorem;
  const RngRoot root(seed);
  WallClock clock;

  RunReport report;
  report.scenario = "validate-theorem";
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  double global_norm = 0.0, global_abs = 0.0;
  double independent_max = 0.0;
  int skipped = 0;
  int negative_exceeds = 0, negative_total = 0;
  nlohmann::json per_model = nlohmann::json::array();

  for (int m = 0; m < tc.n_models; ++m) {
    Stream dims = root.stream(StreamTag::kScenario, 0, static_cast<std::uint64_t>(m));
    const int v = draw_in_range(dims, tc.view_min, tc.view_max);
    const int f = draw_in_range(dims, tc.frame_min, tc.frame_max);
    const int d = draw_in_range(dims, tc.dim_min, tc.dim_max);

    double model_norm = 0.0, model_abs = 0.0, model_negative = 0.0;
    bool model_skipped = false;
    for (std::size_t li = 0; li < tc.noise_levels.size(); ++li) {
      const double level = tc.noise_levels[li];
      Stream srng = root.stream(StreamTag::kModel, static_cast<std::uint64_t>(m), li);
      Stream prng = root.stream(StreamTag::kScenario, 1, static_cast<std::uint64_t>(m), li);
      PivotTreeSpec spec = random_pivot_tree_spec(srng, v, f, d, level, false);
      try {
        const MatrixGaussianModel model = build_pivot_tree(spec);
        const ComposeError err = compose_error_at_pivot(model, spec.pivot, tc.n_points, prng);
        model_norm = std::max(model_norm, err.max_normalized);
        model_abs = std::max(model_abs, err.max_abs);

        // Independence sanity family: same spec with all couplings zeroed.
        PivotTreeSpec indep = spec;
        for (auto& [k, mat] : indep.row_coeffs) mat.setZero();
        for (auto& [k, mat] : indep.col_coeffs) mat.setZero();
        for (auto& [k, mat] : indep.rest_coeffs) mat.setZero();
        Stream iprng = root.stream(StreamTag::kScenario, 2, static_cast<std::uint64_t>(m), li);
        const ComposeError ierr =
            compose_error_at_pivot(build_pivot_tree(indep), indep.pivot, tc.n_points, iprng);
        independent_max = std::max(independent_max, ierr.max_abs);

        if (tc.negative_control) {
          Stream nrng = root.stream(StreamTag::kModel, static_cast<std::uint64_t>(m), li, 99);
          PivotTreeSpec bad = random_pivot_tree_spec(nrng, v, f, d, level, true);
          Stream nprng = root.stream(StreamTag::kScenario, 3, static_cast<std::uint64_t>(m), li);
          const ComposeError nerr =
              compose_error_at_pivot(build_pivot_tree(bad), bad.pivot, tc.n_points, nprng);
          model_negative = std::max(model_negative, nerr.max_abs);
        }
      } catch (const DegenerateModelError&) {
        ++skipped;
        model_skipped = true;
      }
    }
    global_norm = std::max(global_norm, model_norm);
    global_abs = std::max(global_abs, model_abs);
    if (tc.negative_control && !model_skipped) {
      ++negative_total;
      if (model_negative > tc.negative_min_error) ++negative_exceeds;
    }
    per_model.push_back({{"model", m},
                         {"views", v},
                         {"frames", f},
                         {"dim", d},
                         {"max_normalized_error", model_norm},
                         {"max_abs_error", model_abs},
                         {"negative_control_max_error", model_negative},
                         {"skipped", model_skipped}});
  }

  report.add_check("max_normalized_error", global_norm, tc.tolerance,
                   global_norm <= tc.tolerance);
  report.add("max_abs_error", global_abs);
  report.add_check("independent_family_max_error", independent_max, 1e-10,
                   independent_max <= 1e-10);
  if (tc.negative_control) {
    const double frac = negative_total == 0
                            ? 0.0
                            : static_cast<double>(negative_exceeds) / negative_total;
    report.add_check("negative_control_fraction", frac, tc.negative_pass_fraction,
                     frac >= tc.negative_pass_fraction);
  }
  report.add("skipped_models", static_cast<double>(skipped));
  report.instrumentation["per_model"] = per_model;
  report.instrumentation["timing_seconds"] = clock.seconds();
  return report;
}

RunReport run_sweep_s(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.sweep) throw ConfigError("sweep-s: missing 'sweep' section");
  const SweepConfig& sc = *cfg.sweep;
  const RngRoot root(seed);
  WallClock clock;

  RunReport report;
  report.scenario = "sweep-s";
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  std::vector<double> dev_sum(sc.s_grid.size(), 0.0), dev_max(sc.s_grid.size(), 0.0);
  long long dev_count = 0;
  double independent_max = 0.0;
  nlohmann::json curves = nlohmann::json::array();

  for (int m = 0; m < sc.n_models; ++m) {
    Stream dims = root.stream(StreamTag::kScenario, 0, static_cast<std::uint64_t>(m));
    const int v = draw_in_range(dims, sc.view_min, sc.view_max);
    const int f = draw_in_range(dims, sc.frame_min, sc.frame_max);
    const int d = draw_in_range(dims, sc.dim_min, sc.dim_max);
    for (std::size_t li = 0; li < sc.noise_levels.size(); ++li) {
      Stream srng = root.stream(StreamTag::kModel, static_cast<std::uint64_t>(m), li);
      PivotTreeSpec spec = random_pivot_tree_spec(srng, v, f, d, sc.noise_levels[li], false);
      MatrixGaussianModel model = build_pivot_tree(spec);
      PivotTreeSpec indep = spec;
      for (auto& [k, mat] : indep.row_coeffs) mat.setZero();
      for (auto& [k, mat] : indep.col_coeffs) mat.setZero();
      for (auto& [k, mat] : indep.rest_coeffs) mat.setZero();
      MatrixGaussianModel indep_model = build_pivot_tree(indep);

      std::vector<EntryIndex> row_entries, col_entries;
      for (int j = 0; j < f; ++j) row_entries.push_back({spec.pivot.view, j});
      for (int i = 0; i < v; ++i) col_entries.push_back({i, spec.pivot.frame});
      const std::vector<EntryIndex> pivot_only{spec.pivot};

      const auto deviations = [&](const MatrixGaussianModel& mdl, Stream& prng,
                                  std::vector<double>* sums, std::vector<double>* maxes,
                                  double* indep_track) {
        const GaussianModel row_marg = mdl.marginal(row_entries);
        const GaussianModel col_marg = mdl.marginal(col_entries);
        const GaussianModel piv_marg = mdl.marginal(pivot_only);
        const Eigen::Index piv_offset = mdl.entry_offset(spec.pivot);
        for (int p = 0; p < sc.n_points; ++p) {
          const Eigen::VectorXd x = mdl.joint().draw(prng);
          Eigen::VectorXd x_row(static_cast<Eigen::Index>(f) * d);
          for (int j = 0; j < f; ++j) {
            x_row.segment(static_cast<Eigen::Index>(j) * d, d) =
                x.segment(mdl.entry_offset({spec.pivot.view, j}), d);
          }
          Eigen::VectorXd x_col(static_cast<Eigen::Index>(v) * d);
          for (int i = 0; i < v; ++i) {
            x_col.segment(static_cast<Eigen::Index>(i) * d, d) =
                x.segment(mdl.entry_offset({i, spec.pivot.frame}), d);
          }
          const Eigen::VectorXd row_score =
              row_marg.score(x_row).segment(static_cast<Eigen::Index>(spec.pivot.frame) * d, d);
          const Eigen::VectorXd col_score =
              col_marg.score(x_col).segment(static_cast<Eigen::Index>(spec.pivot.view) * d, d);
          const Eigen::VectorXd piv_score = piv_marg.score(x.segment(piv_offset, d));
          const Eigen::VectorXd exact = compose_scores_exact(row_score, col_score, piv_score);
          for (std::size_t si = 0; si < sc.s_grid.size(); ++si) {
            const Eigen::VectorXd convex =
                compose_scores_convex(row_score, col_score, sc.s_grid[si]);
            const double dev = (convex - exact).cwiseAbs().maxCoeff();
            if (sums) {
              (*sums)[si] += dev;
              (*maxes)[si] = std::max((*maxes)[si], dev);
            }
            if (indep_track) *indep_track = std::max(*indep_track, dev);
          }
        }
      };

      Stream prng = root.stream(StreamTag::kScenario, 1, static_cast<std::uint64_t>(m), li);
      deviations(model, prng, &dev_sum, &dev_max, nullptr);
      dev_count += sc.n_points;
      Stream iprng = root.stream(StreamTag::kScenario, 2, static_cast<std::uint64_t>(m), li);
      deviations(indep_model, iprng, nullptr, nullptr, &independent_max);
    }
  }

  for (std::size_t si = 0; si < sc.s_grid.size(); ++si) {
    char name[64];
    std::snprintf(name, sizeof(name), "convex_dev_mean[s=%g]", sc.s_grid[si]);
    report.add(name, dev_sum[si] / static_cast<double>(dev_count));
    std::snprintf(name, sizeof(name), "convex_dev_max[s=%g]", sc.s_grid[si]);
    report.add(name, dev_max[si]);
    curves.push_back({{"s", sc.s_grid[si]},
                      {"mean", dev_sum[si] / static_cast<double>(dev_count)},
                      {"max", dev_max[si]}});
  }
  report.add_check("independent_family_max_deviation", independent_max, 1e-10,
                   independent_max <= 1e-10);
  report.instrumentation["curve"] = curves;
  report.instrumentation["timing_seconds"] = clock.seconds();
  return report;
}

namespace {

GmmModel scalar_two_mode_gmm(double lo_mode, double hi_mode, double mode_std,
                             const std::vector<double>& weights) {
  const Eigen::MatrixXd cov = mode_std * mode_std * Eigen::MatrixXd::Identity(1, 1);
  std::vector<GaussianModel> comps;
  comps.emplace_back(Eigen::VectorXd::Constant(1, lo_mode), cov);
  comps.emplace_back(Eigen::VectorXd::Constant(1, hi_mode), cov);
  return GmmModel(weights, std::move(comps));
}

double nearest_consensus_distance(const LatentMatrix& m, double lo, double hi) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m.data().size(); ++k) {
    acc += std::min(std::abs(m.data()[k] - lo), std::abs(m.data()[k] - hi));
  }
  return acc / static_cast<double>(m.data().size());
}

// Per-coordinate |D_video - D_multiview| over all entries: the magnitude of
// the disagreement between the two estimators about the same state. Entries
// the estimators agree on contribute a tight cluster near delta times the
// posterior contraction; entries pulled toward opposite modes contribute a
// second cluster near the full mode separation, so unresolved conflicts show
// up as bimodality of this pool.
std::vector<double> model_gap_values(const LatentMatrix& m, const Denoiser& video,
                                     const Denoiser& multiview, double sigma) {
  const int v = m.views(), f = m.frames(), d = m.entry_dim();
  LatentMatrix video_pred(v, f, d), multiview_pred(v, f, d);
  for (int i = 0; i < v; ++i) {
    video_pred.view_row(i) = video.evaluate(m.view_row(i), sigma);
  }
  for (int j = 0; j < f; ++j) {
    multiview_pred.set_frame_column(j, multiview.evaluate(m.frame_column(j), sigma));
  }
  const Eigen::VectorXd gap = (video_pred.data() - multiview_pred.data()).cwiseAbs();
  return std::vector<double>(gap.data(), gap.data() + gap.size());
}

void write_snapshot_csv(const std::filesystem::path& path, const SamplerRun& run, int v, int f,
                        int d) {
  std::ofstream out(path, std::ios::binary);
  out << "step,repeat,sigma,view,frame,coord,value\n";
  char buf[64];
  for (const auto& snap : run.snapshots) {
    for (int i = 0; i < v; ++i) {
      for (int j = 0; j < f; ++j) {
        for (int k = 0; k < d; ++k) {
          const double value = snap.state[(static_cast<Eigen::Index>(i) * f + j) * d + k];
          std::snprintf(buf, sizeof(buf), "%.17g", value);
          out << snap.step << ',' << snap.repeat << ',' << snap.sigma << ',' << i << ',' << j
              << ',' << k << ',' << buf << '\n';
        }
      }
    }
  }
}

struct VrsArmResult {
  std::vector<double> distances;
  std::vector<double> snapshot_gap_pool;  // |D_video - D_multiview| across runs
  std::vector<double> final_model_gap;
};

double model_gap(const LatentMatrix& m, const Denoiser& video, const Denoiser& multiview,
                 double sigma) {
  const std::vector<double> gaps = model_gap_values(m, video, multiview, sigma);
  return sample_mean(gaps);
}

VrsArmResult run_vrs_arm(const VrsConfig& vc, const ExperimentConfig& cfg, double delta,
                         bool with_rollback, std::uint64_t seed,
                         const std::filesystem::path* snapshot_path) {
  const int v = vc.views, f = vc.frames, d = 1;
  // Entrywise two-mode scalar priors: the video model has modes at
  // +-mode_center, the multi-view model the same modes shifted by delta.
  const EntrywiseDenoiser video(
      std::make_shared<GmmDenoiser>(
          scalar_two_mode_gmm(-vc.mode_center, vc.mode_center, vc.mode_std, vc.weights)),
      f);
  const EntrywiseDenoiser multiview(
      std::make_shared<GmmDenoiser>(scalar_two_mode_gmm(-vc.mode_center + delta,
                                                        vc.mode_center + delta, vc.mode_std,
                                                        vc.weights)),
      v);
  const SigmaSchedule schedule = cfg.schedule.build();
  CompositionConfig comp = cfg.composition.build();
  if (!with_rollback) {
    comp.n_rollback = 0;
    comp.rollback_repeats = 1;
  }
  const double lo_consensus = -vc.mode_center + delta / 2.0;
  const double hi_consensus = vc.mode_center + delta / 2.0;

  const RngRoot seeder(seed);
  VrsArmResult result;
  result.distances.reserve(vc.n_seeds);
  for (int r = 0; r < vc.n_seeds; ++r) {
    const std::uint64_t run_seed =
        seeder.stream(StreamTag::kScenario, static_cast<std::uint64_t>(r)).next_u64();
    SampleOptions opts;
    opts.record_snapshots = true;
    const SampleResult res = sample_matrix(video, multiview, schedule, comp, ConditionSet{},
                                           {v, f, d}, run_seed, opts);
    result.distances.push_back(nearest_consensus_distance(res.matrix, lo_consensus, hi_consensus));

    // Compare the states the samplers actually act on at the snapshot step:
    // repeat 0 without rollback, the post-renoise repeat with rollback.
    const int snapshot_repeat =
        vc.snapshot_step < comp.n_rollback ? comp.rollback_repeats - 1 : 0;
    for (const auto& snap : res.run.snapshots) {
      if (snap.step == vc.snapshot_step && snap.repeat == snapshot_repeat) {
        LatentMatrix state(v, f, d);
        state.data() = snap.state;
        const auto gaps = model_gap_values(state, video, multiview, snap.sigma);
        result.snapshot_gap_pool.insert(result.snapshot_gap_pool.end(), gaps.begin(),
                                        gaps.end());
        break;
      }
    }
    result.final_model_gap.push_back(model_gap(res.matrix, video, multiview, vc.mode_std));

    if (r == 0 && snapshot_path) {
      write_snapshot_csv(*snapshot_path, res.run, v, f, d);
    }
  }
  return result;
}

}  // namespace

RunReport run_ablate_vrs(const ExperimentConfig& cfg, std::uint64_t seed,
                         const ScenarioOptions& options) {
  if (!cfg.vrs) throw ConfigError("ablate-vrs: missing 'vrs' section");
  const VrsConfig& vc = *cfg.vrs;
  WallClock clock;

  RunReport report;
  report.scenario = "ablate-vrs";
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  std::filesystem::path snap_dir;
  const bool dump_snapshots = options.snapshots && options.out_dir.has_value();
  if (dump_snapshots) {
    snap_dir = *options.out_dir / "snapshots";
    std::filesystem::create_directories(snap_dir);
  }
  const std::filesystem::path with_path = snap_dir / "vrs_on.csv";
  const std::filesystem::path without_path = snap_dir / "vrs_off.csv";

  const VrsArmResult with_vrs =
      run_vrs_arm(vc, cfg, vc.delta, true, seed, dump_snapshots ? &with_path : nullptr);
  const VrsArmResult without_vrs =
      run_vrs_arm(vc, cfg, vc.delta, false, seed, dump_snapshots ? &without_path : nullptr);

  std::vector<double> paired_diff(with_vrs.distances.size());
  for (std::size_t i = 0; i < paired_diff.size(); ++i) {
    paired_diff[i] = without_vrs.distances[i] - with_vrs.distances[i];
  }
  Stream boot = RngRoot(seed).stream(StreamTag::kScenario, 7001);
  const BootstrapInterval ci =
      bootstrap_mean_ci(paired_diff, vc.bootstrap_resamples, vc.ci_alpha, boot);

  report.add("mean_distance_vrs", sample_mean(with_vrs.distances));
  report.add("mean_distance_no_vrs", sample_mean(without_vrs.distances));
  report.add("paired_diff_mean", ci.mean);
  report.add("paired_diff_ci_lo", ci.lo);
  report.add("paired_diff_ci_hi", ci.hi);
  report.add_check("vrs_improves_consensus", ci.lo, 0.0, ci.lo > 0.0 && ci.mean > 0.0);

  const double bimod_no = bimodality_coefficient(without_vrs.snapshot_gap_pool);
  const double bimod_with = bimodality_coefficient(with_vrs.snapshot_gap_pool);
  report.add_check("bimodality_snapshot_no_vrs", bimod_no, vc.bimodality_threshold,
                   bimod_no > vc.bimodality_threshold);
  report.add_check("bimodality_snapshot_vrs_lower", bimod_with, bimod_no, bimod_with < bimod_no);

  // At sigma = 0 the reconciled states must sit where both estimators agree:
  // the residual disagreement is bounded by the built-in mode shift delta,
  // while an unreconciled entry stuck between opposite modes contributes a
  // gap of roughly the full mode separation.
  const double gap_with = sample_mean(with_vrs.final_model_gap);
  const double gap_without = sample_mean(without_vrs.final_model_gap);
  report.add("final_model_gap_no_vrs", gap_without);
  report.add_check("final_model_gap_vrs", gap_with, vc.delta,
                   gap_with <= vc.delta && gap_with < gap_without);

  if (vc.zero_delta_control) {
    const std::uint64_t control_seed = RngRoot(seed).stream(StreamTag::kScenario, 7002).next_u64();
    const VrsArmResult ctl_with = run_vrs_arm(vc, cfg, 0.0, true, control_seed, nullptr);
    const VrsArmResult ctl_without = run_vrs_arm(vc, cfg, 0.0, false, control_seed, nullptr);
    std::vector<double> ctl_diff(ctl_with.distances.size());
    for (std::size_t i = 0; i < ctl_diff.size(); ++i) {
      ctl_diff[i] = ctl_without.distances[i] - ctl_with.distances[i];
    }
    Stream ctl_boot = RngRoot(seed).stream(StreamTag::kScenario, 7003);
    const BootstrapInterval ctl_ci =
        bootstrap_mean_ci(ctl_diff, vc.bootstrap_resamples, vc.control_alpha, ctl_boot);
    report.add("control_mean_distance_vrs", sample_mean(ctl_with.distances));
    report.add("control_mean_distance_no_vrs", sample_mean(ctl_without.distances));
    report.add("control_diff_mean", ctl_ci.mean);
    report.add("control_diff_ci_lo", ctl_ci.lo);
    report.add("control_diff_ci_hi", ctl_ci.hi);
    report.add_check("control_no_significant_difference", ctl_ci.mean, 0.0,
                     ctl_ci.lo <= 0.0 && ctl_ci.hi >= 0.0);
  }

  report.instrumentation["timing_seconds"] = clock.seconds();
  return report;
}

namespace {

PivotTreeSpec homogeneous_pivot_tree(int v, int f, int d, double coupling) {
  PivotTreeSpec spec;
  spec.v = v;
  spec.f = f;
  spec.d = d;
  spec.pivot = {0, 0};
  spec.pivot_mean = Eigen::VectorXd::Zero(d);
  spec.pivot_cov = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd c = coupling * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  for (int j = 1; j < f; ++j) spec.row_coeffs[j] = c;
  for (int i = 1; i < v; ++i) spec.col_coeffs[i] = c;
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      if (i == 0 && j == 0) continue;
      spec.noise_vars[{i, j}] = id;
      if (i > 0 && j > 0) spec.rest_coeffs[{i, j}] = c;
    }
  }
  return spec;
}

}  // namespace

RunReport run_condition_check(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.condition) throw ConfigError("condition-check: missing 'condition' section");
  const ConditionCheckConfig& cc = *cfg.condition;
  WallClock clock;

  RunReport report;
  report.scenario = "condition-check";
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  const int v = cc.views, f = cc.frames, d = cc.dim;
  const MatrixGaussianModel model =
      build_pivot_tree(homogeneous_pivot_tree(v, f, d, cc.coupling));
  std::vector<EntryIndex> row_entries, col_entries;
  for (int j = 0; j < f; ++j) row_entries.push_back({0, j});
  for (int i = 0; i < v; ++i) col_entries.push_back({i, 0});
  const GaussianDenoiser video(model.marginal(row_entries));
  const GaussianDenoiser multiview(model.marginal(col_entries));

  const SigmaSchedule schedule = cfg.schedule.build();
  const CompositionConfig comp = cfg.composition.build();
  const RngRoot root(seed);

  // Bit-exact preservation of conditioned first row/column, with fresh
  // condition draws per run; also collects the coupling statistic.
  int bitexact_failures = 0;
  std::vector<double> pivot_values, interior_values;
  for (int r = 0; r < cc.n_runs; ++r) {
    Stream cond_rng = root.stream(StreamTag::kScenario, 0, static_cast<std::uint64_t>(r));
    const Eigen::VectorXd clean = model.joint().draw(cond_rng);
    ConditionSet conds;
    for (int j = 0; j < f; ++j) {
      conds.entries[{0, j}] = clean.segment(model.entry_offset({0, j}), d);
    }
    for (int i = 1; i < v; ++i) {
      conds.entries[{i, 0}] = clean.segment(model.entry_offset({i, 0}), d);
    }
    const std::uint64_t run_seed =
        root.stream(StreamTag::kScenario, 1, static_cast<std::uint64_t>(r)).next_u64();
    const SampleResult res =
        sample_matrix(video, multiview, schedule, comp, conds, {v, f, d}, run_seed);
    for (const auto& [key, value] : conds.entries) {
      if (!exact_equal(res.matrix.entry(key.first, key.second), value)) {
        ++bitexact_failures;
      }
    }
    if (v > 1 && f > 1) {
      pivot_values.push_back(clean[model.entry_offset({0, 0})]);
      interior_values.push_back(res.matrix.entry(1, 1)[0]);
    }
  }
  report.add_check("condition_bitexact_failures", static_cast<double>(bitexact_failures), 0.0,
                   bitexact_failures == 0);

  // Fully conditioned matrix must come back verbatim.
  {
    Stream cond_rng = root.stream(StreamTag::kScenario, 2);
    const Eigen::VectorXd clean = model.joint().draw(cond_rng);
    ConditionSet conds;
    for (int i = 0; i < v; ++i) {
      for (int j = 0; j < f; ++j) {
        conds.entries[{i, j}] = clean.segment(model.entry_offset({i, j}), d);
      }
    }
    const SampleResult res = sample_matrix(video, multiview, schedule, comp, conds, {v, f, d},
                                           root.stream(StreamTag::kScenario, 3).next_u64());
    const bool verbatim = exact_equal(res.matrix.data(), clean);
    report.add_check("fully_conditioned_verbatim", verbatim ? 1.0 : 0.0, 1.0, verbatim);
  }

  // Unconditional runs from two disjoint seed sets must be indistinguishable.
  {
    std::vector<Eigen::VectorXd> set_a, set_b;
    for (int r = 0; r < cc.n_runs; ++r) {
      const std::uint64_t s =
          root.stream(StreamTag::kScenario, 4, static_cast<std::uint64_t>(r)).next_u64();
      set_a.push_back(
          sample_matrix(video, multiview, schedule, comp, {}, {v, f, d}, s).matrix.data());
    }
    for (int r = 0; r < cc.n_reference; ++r) {
      const std::uint64_t s =
          root.stream(StreamTag::kScenario, 5, static_cast<std::uint64_t>(r)).next_u64();
      set_b.push_back(
          sample_matrix(video, multiview, schedule, comp, {}, {v, f, d}, s).matrix.data());
    }
    Stream perm = root.stream(StreamTag::kScenario, 6);
    const double pvalue = energy_permutation_pvalue(set_a, set_b, cc.n_permutations, perm);
    report.add("unconditional_energy_distance", energy_distance(set_a, set_b));
    report.add_check("unconditional_permutation_pvalue", pvalue, cc.alpha, pvalue > cc.alpha);
  }

  if (!pivot_values.empty()) {
    const double mx = sample_mean(pivot_values), my = sample_mean(interior_values);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < pivot_values.size(); ++i) {
      sxy += (pivot_values[i] - mx) * (interior_values[i] - my);
      sxx += (pivot_values[i] - mx) * (pivot_values[i] - mx);
      syy += (interior_values[i] - my) * (interior_values[i] - my);
    }
    report.add("pivot_interior_correlation", sxy / std::sqrt(sxx * syy));
  }

  // Coupling check with common random numbers: fixing the first row and
  // column at +c versus -c must move the interior entries in the same
  // direction, paired over identical sampler seeds.
  if (v > 1 && f > 1) {
    const double shift = 2.0;
    const auto shifted_mean = [&](double c) {
      ConditionSet conds;
      for (int j = 0; j < f; ++j) conds.entries[{0, j}] = Eigen::VectorXd::Constant(d, c);
      for (int i = 1; i < v; ++i) conds.entries[{i, 0}] = Eigen::VectorXd::Constant(d, c);
      double acc = 0.0;
      int count = 0;
      for (int r = 0; r < cc.n_runs; ++r) {
        const std::uint64_t s =
            root.stream(StreamTag::kScenario, 7, static_cast<std::uint64_t>(r)).next_u64();
        const SampleResult res = sample_matrix(video, multiview, schedule, comp, conds, {v, f, d}, s);
        for (int i = 1; i < v; ++i) {
          for (int j = 1; j < f; ++j) {
            acc += res.matrix.entry(i, j).mean();
            ++count;
          }
        }
      }
      return acc / count;
    };
    const double response = shifted_mean(shift) - shifted_mean(-shift);
    report.add_check("condition_shift_response", response, 0.0, response > 0.0);
  }

  report.instrumentation["timing_seconds"] = clock.seconds();
  return report;
}

RunReport run_sample(const ExperimentConfig& cfg, std::uint64_t seed,
                     const ScenarioOptions& options) {
  if (!cfg.sample) throw ConfigError("sample: missing 'sample' section");
  const SampleConfig& sc = *cfg.sample;
  WallClock clock;

  RunReport report;
  report.scenario = "sample";
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  const int v = sc.views, f = sc.frames, d = sc.dim;
  const GmmDenoiser video(sc.row_gmm.build());
  const GmmDenoiser multiview(sc.col_gmm.build());
  ConditionSet conds;
  for (const auto& c : sc.conditions) conds.entries[{c.view, c.frame}] = c.value;

  const SigmaSchedule schedule = cfg.schedule.build();
  const CompositionConfig comp = cfg.composition.build();
  SampleOptions opts;
  opts.record_snapshots = options.snapshots;
  const SampleResult res =
      sample_matrix(video, multiview, schedule, comp, conds, {v, f, d}, seed, opts);

  const long long expected_steps =
      schedule.n_steps() + static_cast<long long>(comp.n_rollback) * (comp.rollback_repeats - 1);
  report.add_check("composed_steps", static_cast<double>(res.run.composed_steps()),
                   static_cast<double>(expected_steps), res.run.composed_steps() == expected_steps);
  bool calls_ok = true;
  for (const auto& s : res.run.steps) calls_ok = calls_ok && s.denoiser_calls == v + f;
  report.add_check("denoiser_calls_per_step", calls_ok ? static_cast<double>(v + f) : -1.0,
                   static_cast<double>(v + f), calls_ok);
  report.add_check("output_finite", res.matrix.all_finite() ? 1.0 : 0.0, 1.0,
                   res.matrix.all_finite());
  report.add("total_denoiser_calls", static_cast<double>(res.run.total_denoiser_calls));

  bool conds_ok = true;
  for (const auto& [key, value] : conds.entries) {
    conds_ok = conds_ok && exact_equal(res.matrix.entry(key.first, key.second), value);
  }
  if (!conds.empty()) {
    report.add_check("conditions_bitexact", conds_ok ? 1.0 : 0.0, 1.0, conds_ok);
  }

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    std::ofstream out(*options.out_dir / "matrix.csv", std::ios::binary);
    out << "view,frame,coord,value\n";
    char buf[64];
    for (int i = 0; i < v; ++i) {
      for (int j = 0; j < f; ++j) {
        for (int k = 0; k < d; ++k) {
          std::snprintf(buf, sizeof(buf), "%.17g", res.matrix.entry(i, j)[k]);
          out << i << ',' << j << ',' << k << ',' << buf << '\n';
        }
      }
    }
    if (options.snapshots) {
      const std::filesystem::path snap_dir = *options.out_dir / "snapshots";
      std::filesystem::create_directories(snap_dir);
      write_snapshot_csv(snap_dir / "sample.csv", res.run, v, f, d);
    }
  }

  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : res.run.steps) {
    steps.push_back({{"step", s.step},
                     {"repeat", s.repeat},
                     {"sigma", s.sigma},
                     {"denoiser_calls", s.denoiser_calls}});
  }
  report.instrumentation["steps"] = steps;
  report.instrumentation["timing_seconds"] = clock.seconds();
  return report;
}

RunReport run_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                       const ScenarioOptions& options) {
  if (cfg.scenario == "validate-theorem") return run_validate_theorem(cfg, seed);
  if (cfg.scenario == "sweep-s") return run_sweep_s(cfg, seed);
  if (cfg.scenario == "ablate-vrs") return run_ablate_vrs(cfg, seed, options);
  if (cfg.scenario == "condition-check") return run_condition_check(cfg, seed);
  if (cfg.scenario == "sample") return run_sample(cfg, seed, options);
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

}  // namespace scorefuse

#ifndef SCOREFUSE_SCENARIOS_HPP
#define SCOREFUSE_SCENARIOS_HPP

#include <filesystem>
#include <optional>

#include "scorefuse/config.hpp"
#include "scorefuse/report.hpp"
#include "scorefuse/sampler.hpp"

namespace scorefuse {

struct ScenarioOptions {
  std::optional<std::filesystem::path> out_dir;
  bool snapshots = false;
};

// Score-decomposition validation on randomized pivot-tree families, with the
// independence sanity family and the negative control.
RunReport run_validate_theorem(const ExperimentConfig& cfg, std::uint64_t seed);

// Deviation of the convex combination from the exact decomposition across an
// s grid and noise levels, on oracle models.
RunReport run_sweep_s(const ExperimentConfig& cfg, std::uint64_t seed);

// Paired comparison of rollback sampling against the plain sampler on a
// mismatched denoiser pair, plus the zero-mismatch control.
RunReport run_ablate_vrs(const ExperimentConfig& cfg, std::uint64_t seed,
                         const ScenarioOptions& options = {});

// Inpainting-conditioning contract: bit-exact preservation, distributional
// null check, and the condition-to-neighbor coupling statistic.
RunReport run_condition_check(const ExperimentConfig& cfg, std::uint64_t seed);

// One instrumented sampler run from an explicit model config; writes the
// final matrix (and optionally snapshots) when an output directory is given.
RunReport run_sample(const ExperimentConfig& cfg, std::uint64_t seed,
                     const ScenarioOptions& options = {});

// Dispatch by cfg.scenario ("validate-theorem" | "sweep-s" | "ablate-vrs" |
// "condition-check" | "sample").
RunReport run_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                       const ScenarioOptions& options = {});

}  // namespace scorefuse

#endif  // SCOREFUSE_SCENARIOS_HPP

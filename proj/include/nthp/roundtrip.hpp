#pragma once

#include <vector>

#include "nthp/grouping.hpp"
#include "nthp/scenes.hpp"

namespace nthp {

// Scene -> fabricated outputs -> synthesis -> grouping, the harness that
// exercises the full pipeline without a network.
struct RoundTripConfig {
    SceneConfig scene;
    std::vector<LevelSpec> levels = default_levels();
    double epsilon = 0.2;
    double binarize_threshold = 0.5;
    GroupingConfig grouping;
    double noise_scale = 0.0;       // optional perturbation of the oracle outputs
    std::uint64_t noise_seed = 0;
};

struct SceneRun {
    GroundTruthScene scene;
    std::vector<ScoredInstance> part_candidates;
    std::vector<ScoredInstance> human_candidates;
    std::vector<ParsingResult> results;
};

// Synthesizes every level of the fabricated outputs and splits the extracted
// candidates into parts and humans by level kind. Levels are processed in
// table order, one at a time, so the large per-level mask stacks never
// coexist.
void extract_all_candidates(const OracleOutputs& outputs, const std::vector<LevelSpec>& specs,
                            double binarize_threshold,
                            std::vector<ScoredInstance>& part_candidates,
                            std::vector<ScoredInstance>& human_candidates);

SceneRun run_oracle_scene(const RoundTripConfig& cfg);

} // namespace nthp

#include "nthp/roundtrip.hpp"

#include <stdexcept>

#include "nthp/synthesis.hpp"

namespace nthp {

void extract_all_candidates(const OracleOutputs& outputs, const std::vector<LevelSpec>& specs,
                            double binarize_threshold,
                            std::vector<ScoredInstance>& part_candidates,
                            std::vector<ScoredInstance>& human_candidates) {
    if (outputs.levels.size() != specs.size()) {
        throw std::invalid_argument("extract_all_candidates: level count mismatch");
    }
    for (std::size_t lv = 0; lv < specs.size(); ++lv) {
        if (outputs.levels[lv].level_id != specs[lv].id) {
            throw std::invalid_argument("extract_all_candidates: level order mismatch");
        }
        const DenseMap masks = combine_masks(outputs.prototypes, outputs.levels[lv].coefficients);
        auto candidates =
            extract_candidates(outputs.levels[lv].category_scores, masks, binarize_threshold);
        auto& sink =
            specs[lv].kind == InstanceKind::Human ? human_candidates : part_candidates;
        for (auto& c : candidates) sink.push_back(std::move(c));
    }
}

SceneRun run_oracle_scene(const RoundTripConfig& cfg) {
    SceneRun run;
    run.scene = generate_scene(cfg.scene);

    OracleOutputs outputs = oracle_outputs(run.scene, cfg.levels, cfg.epsilon, 0,
                                           cfg.scene.category_count);
    if (cfg.noise_scale > 0.0) {
        outputs = perturb(outputs, cfg.noise_scale, cfg.noise_seed);
    }

    extract_all_candidates(outputs, cfg.levels, cfg.binarize_threshold, run.part_candidates,
                           run.human_candidates);
    run.results = run_pipeline(run.part_candidates, run.human_candidates, cfg.grouping);
    return run;
}

} // namespace nthp

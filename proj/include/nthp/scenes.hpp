#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nthp/assignment.hpp"
#include "nthp/mask.hpp"
#include "nthp/synthesis.hpp"

namespace nthp {

// Configuration of the deterministic toy-scene generator. Humans are unions
// of geometric parts placed on a slot grid so that humans never collide and
// parts within one human stay pairwise disjoint.
struct SceneConfig {
    std::size_t height = 96;            // multiples of 4
    std::size_t width = 96;
    int min_humans = 2;
    int max_humans = 6;
    int min_parts = 2;                  // parts per human
    int max_parts = 5;
    bool rectangles = true;
    bool ellipses = true;
    double occlusion_probability = 0.0; // chance a human is pulled onto its neighbor
    int category_count = 8;             // part categories
    std::uint64_t seed = 0;
};

void validate(const SceneConfig& cfg);

GroundTruthScene generate_scene(const SceneConfig& cfg);

// Fabricated network outputs for one level.
struct LevelOracle {
    std::string level_id;
    CoefficientGrid coefficients;     // one-hot at assigned cells
    CategoryGrid category_scores;     // 1.0 at assigned cells
};

// Fabricated outputs that reproduce a scene exactly through the synthesis
// and grouping pipeline: prototype k is the +/-10 logit map of instance k's
// mask, so a one-hot coefficient column binarizes back to the instance at
// threshold 0.5.
struct OracleOutputs {
    PrototypeBank prototypes;         // K x H x W
    std::vector<LevelOracle> levels;
};

// prototype_count 0 sizes the bank to the instance count; category_count 0
// derives the class count from the largest part category in the scene.
OracleOutputs oracle_outputs(const GroundTruthScene& scene, const std::vector<LevelSpec>& specs,
                             double epsilon, std::size_t prototype_count = 0,
                             int category_count = 0);

// Adds seeded uniform noise in [-scale, scale] to every coefficient and
// category score (category scores are clamped back to [0,1]). Prototypes are
// left untouched.
OracleOutputs perturb(const OracleOutputs& outputs, double noise_scale, std::uint64_t seed);

} // namespace nthp

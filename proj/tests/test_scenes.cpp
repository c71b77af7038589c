#include <doctest.h>

#include <stdexcept>

#include "nthp/metrics.hpp"
#include "nthp/roundtrip.hpp"
#include "nthp/scenes.hpp"
#include "nthp/synthesis.hpp"

using namespace nthp;

TEST_CASE("generator is deterministic in the seed") {
    SceneConfig cfg;
    cfg.seed = 1234;
    const auto a = generate_scene(cfg);
    const auto b = generate_scene(cfg);
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
        CHECK(a.instances[i].kind == b.instances[i].kind);
        CHECK(a.instances[i].category == b.instances[i].category);
        CHECK(a.instances[i].parent == b.instances[i].parent);
        CHECK(a.instances[i].mask == b.instances[i].mask);
    }

    cfg.seed = 1235;
    const auto c = generate_scene(cfg);
    bool identical = a.instances.size() == c.instances.size();
    if (identical) {
        for (std::size_t i = 0; i < a.instances.size(); ++i) {
            if (!(a.instances[i].mask == c.instances[i].mask)) identical = false;
        }
    }
    CHECK(!identical);
}

TEST_CASE("single-part humans equal their part") {
    SceneConfig cfg;
    cfg.min_parts = cfg.max_parts = 1;
    cfg.seed = 99;
    const auto scene = generate_scene(cfg);
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        const auto& inst = scene.instances[i];
        if (inst.kind != InstanceKind::Part) continue;
        CHECK(inst.mask == scene.instances[static_cast<std::size_t>(inst.parent)].mask);
    }
}

TEST_CASE("generated scenes satisfy the structural invariants") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        SceneConfig cfg;
        cfg.seed = seed;
        cfg.occlusion_probability = seed % 3 == 0 ? 0.5 : 0.0;
        const auto scene = generate_scene(cfg);   // generate_scene validates internally
        // parts are pairwise disjoint within a human, and unions reproduce it
        for (std::size_t h = 0; h < scene.instances.size(); ++h) {
            if (scene.instances[h].kind != InstanceKind::Human) continue;
            BinaryMask cover = BinaryMask::zeros(scene.height, scene.width);
            for (std::size_t p = 0; p < scene.instances.size(); ++p) {
                const auto& part = scene.instances[p];
                if (part.kind != InstanceKind::Part ||
                    part.parent != static_cast<int>(h)) {
                    continue;
                }
                for (std::size_t px = 0; px < part.mask.data.size(); ++px) {
                    if (part.mask.data[px]) {
                        CHECK(cover.data[px] == 0);
                        cover.data[px] = 1;
                    }
                }
            }
            CHECK(cover == scene.instances[h].mask);
        }
    }
}

TEST_CASE("oracle outputs reproduce a single human and part exactly") {
    SceneConfig cfg;
    cfg.min_humans = cfg.max_humans = 1;
    cfg.min_parts = cfg.max_parts = 1;
    cfg.seed = 5;
    RoundTripConfig rt;
    rt.scene = cfg;
    const SceneRun run = run_oracle_scene(rt);

    REQUIRE(run.results.size() >= 1);
    CHECK(run.results[0].human_mask == run.scene.instances[0].mask);
}

TEST_CASE("oracle soft masks binarize to the ground truth") {
    SceneConfig cfg;
    cfg.seed = 8;
    const auto scene = generate_scene(cfg);
    const auto outputs = oracle_outputs(scene, default_levels(), 0.2, 0, cfg.category_count);

    const auto& level = outputs.levels[4];    // humans
    const DenseMap masks = combine_masks(outputs.prototypes, level.coefficients);
    const std::size_t cells = level.coefficients.dims[1] * level.coefficients.dims[2];
    const std::size_t plane = scene.height * scene.width;
    for (std::size_t k = 0; k < scene.instances.size(); ++k) {
        for (std::size_t cell = 0; cell < cells; ++cell) {
            if (level.coefficients.data[k * cells + cell] != 1.0) continue;
            // sigmoid(+-10)
            for (std::size_t px = 0; px < plane; ++px) {
                const double v = masks.data[cell * plane + px];
                if (scene.instances[k].mask.data[px]) {
                    CHECK(v == doctest::Approx(0.9999546021312976).epsilon(1e-12));
                } else {
                    CHECK(v == doctest::Approx(4.5397868702434395e-05).epsilon(1e-12));
                }
            }
            BinaryMask bin = BinaryMask::zeros(scene.height, scene.width);
            for (std::size_t px = 0; px < plane; ++px) {
                bin.data[px] = masks.data[cell * plane + px] > 0.5 ? 1 : 0;
            }
            CHECK(bin == scene.instances[k].mask);
        }
    }
}

TEST_CASE("empty scenes produce no candidates") {
    SceneConfig cfg;
    cfg.min_humans = cfg.max_humans = 0;
    cfg.seed = 3;
    RoundTripConfig rt;
    rt.scene = cfg;
    const SceneRun run = run_oracle_scene(rt);
    CHECK(run.scene.instances.empty());
    CHECK(run.part_candidates.empty());
    CHECK(run.human_candidates.empty());
    CHECK(run.results.empty());

    const auto outputs = oracle_outputs(run.scene, default_levels(), 0.2);
    for (const auto& level : outputs.levels) {
        for (double v : level.category_scores.data) CHECK(v == 0.0);
    }
}

TEST_CASE("oracle rejects more instances than prototypes") {
    SceneConfig cfg;
    cfg.seed = 4;
    const auto scene = generate_scene(cfg);
    CHECK_THROWS_AS(oracle_outputs(scene, default_levels(), 0.2, 1), std::invalid_argument);
}

TEST_CASE("perturb: zero noise is the identity, same seed repeats") {
    SceneConfig cfg;
    cfg.seed = 21;
    const auto scene = generate_scene(cfg);
    const auto outputs = oracle_outputs(scene, default_levels(), 0.2, 0, cfg.category_count);

    const auto zero = perturb(outputs, 0.0, 77);
    for (std::size_t lv = 0; lv < outputs.levels.size(); ++lv) {
        CHECK(zero.levels[lv].coefficients == outputs.levels[lv].coefficients);
        CHECK(zero.levels[lv].category_scores == outputs.levels[lv].category_scores);
    }

    const auto a = perturb(outputs, 0.05, 123);
    const auto b = perturb(outputs, 0.05, 123);
    const auto c = perturb(outputs, 0.05, 124);
    bool same_ab = true, same_ac = true;
    for (std::size_t lv = 0; lv < a.levels.size(); ++lv) {
        if (!(a.levels[lv].coefficients == b.levels[lv].coefficients)) same_ab = false;
        if (!(a.levels[lv].coefficients == c.levels[lv].coefficients)) same_ac = false;
    }
    CHECK(same_ab);
    CHECK(!same_ac);

    // category scores stay inside [0,1]
    for (const auto& level : a.levels) {
        for (double v : level.category_scores.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("round trip stays perfect under small oracle noise") {
    RoundTripConfig rt;
    rt.scene.seed = 404;
    rt.noise_scale = 0.05;
    rt.noise_seed = 11;
    const SceneRun run = run_oracle_scene(rt);

    const GtSet gts = {gt_humans_from_scene(run.scene)};
    const ResultSet results = {run.results};
    CHECK(ap_p(results, gts, 0.5).value == 1.0);
}

TEST_CASE("oracle round trip scores perfectly on a handful of seeds") {
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL}) {
        RoundTripConfig rt;
        rt.scene.seed = seed;
        const SceneRun run = run_oracle_scene(rt);

        const GtSet gts = {gt_humans_from_scene(run.scene)};
        const ResultSet results = {run.results};
        CHECK(ap_p(results, gts, 0.5).value == 1.0);
        CHECK(ap_p_vol(results, gts) == 1.0);
        CHECK(pcp50(results, gts).value == 1.0);
    }
}

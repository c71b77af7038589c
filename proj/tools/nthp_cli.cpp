#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nthp/assignment.hpp"
#include "nthp/formats.hpp"
#include "nthp/grouping.hpp"
#include "nthp/losses.hpp"
#include "nthp/metrics.hpp"
#include "nthp/rng.hpp"
#include "nthp/roundtrip.hpp"
#include "nthp/scenes.hpp"
#include "nthp/synthesis.hpp"
#include "nthp/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace nthp;

namespace {

// Exit codes: 0 ok, 1 usage, 2 I/O, 3 validation.
int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

struct SceneFlags {
    SceneConfig cfg;
    std::string shape = "both";

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", cfg.seed, "Scene seed")->capture_default_str();
        cmd->add_option("--width", cfg.width, "Image width (multiple of 4)")
            ->capture_default_str();
        cmd->add_option("--height", cfg.height, "Image height (multiple of 4)")
            ->capture_default_str();
        cmd->add_option("--min-humans", cfg.min_humans)->capture_default_str();
        cmd->add_option("--max-humans", cfg.max_humans)->capture_default_str();
        cmd->add_option("--min-parts", cfg.min_parts, "Parts per human, lower bound")
            ->capture_default_str();
        cmd->add_option("--max-parts", cfg.max_parts, "Parts per human, upper bound")
            ->capture_default_str();
        cmd->add_option("--categories", cfg.category_count, "Part category count")
            ->capture_default_str();
        cmd->add_option("--occlusion", cfg.occlusion_probability,
                        "Probability a human is pulled onto its neighbor")
            ->capture_default_str();
        cmd->add_option("--shape", shape, "Part shapes: both|rect|ellipse")
            ->check(CLI::IsMember({"both", "rect", "ellipse"}))
            ->capture_default_str();
    }

    SceneConfig resolve() const {
        SceneConfig out = cfg;
        out.rectangles = shape != "ellipse";
        out.ellipses = shape != "rect";
        return out;
    }
};

struct GroupingFlags {
    GroupingConfig cfg;
    std::string nms = "gaussian";

    void attach(CLI::App* cmd) {
        cmd->add_option("--n-part", cfg.part_limit, "Max part instances kept")
            ->capture_default_str();
        cmd->add_option("--s-part", cfg.part_score_threshold, "Min part score")
            ->capture_default_str();
        cmd->add_option("--s-human", cfg.human_score_threshold, "Min human score")
            ->capture_default_str();
        cmd->add_option("--r-human", cfg.overlap_threshold, "Min part/human overlap ratio")
            ->capture_default_str();
        cmd->add_option("--nms", nms, "Matrix NMS kernel: gaussian|linear")
            ->check(CLI::IsMember({"gaussian", "linear"}))
            ->capture_default_str();
        cmd->add_option("--nms-sigma", cfg.nms_sigma, "Gaussian kernel sigma")
            ->capture_default_str();
        cmd->add_option("--n-human", cfg.human_limit, "Max humans kept after NMS")
            ->capture_default_str();
    }

    GroupingConfig resolve() const {
        GroupingConfig out = cfg;
        out.nms_method = nms == "linear" ? NmsMethod::Linear : NmsMethod::Gaussian;
        return out;
    }
};

std::vector<LevelSpec> load_levels(const std::string& path) {
    return path.empty() ? default_levels() : read_levels(path);
}

void write_assignment(const fs::path& out_dir, const std::vector<GridTargets>& targets) {
    fs::create_directories(out_dir);
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& t : targets) {
        const std::string cat_file = "targets_" + t.level_id + "_category.nthp";
        Tensor cat;
        cat.dtype = TensorDtype::Uint8;
        cat.dims = {static_cast<std::size_t>(t.grid_count), static_cast<std::size_t>(t.grid_count)};
        for (int v : t.category_target) {
            if (v < 0 || v > 255) {
                throw std::invalid_argument("assign: category id too large for the byte format");
            }
            cat.bytes.push_back(static_cast<std::uint8_t>(v));
        }
        write_tensor(out_dir / cat_file, cat);

        nlohmann::json level;
        nlohmann::json mask_table = nlohmann::json::object();
        for (const auto& [cell, mask] : t.mask_targets) {
            char name[64];
            std::snprintf(name, sizeof name, "targets_%s_mask_%04d.nthp", t.level_id.c_str(), cell);
            write_tensor(out_dir / name, mask);
            mask_table[std::to_string(cell)] = name;
        }
        level["level"] = t.level_id;
        level["grids"] = t.grid_count;
        level["category_file"] = cat_file;
        level["masks"] = mask_table;
        levels.push_back(level);
    }
    nlohmann::json doc;
    doc["levels"] = levels;
    write_text_atomic(out_dir / "targets.json", doc.dump(2) + "\n");
}

double max_relative_error(const DenseMap& analytic, const DenseMap& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.data.size(); ++i) {
        const double a = analytic.data[i], b = numeric.data[i];
        const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
        worst = std::max(worst, std::abs(a - b) / denom);
    }
    return worst;
}

// Central finite differences over every prediction entry.
template <typename Loss>
DenseMap finite_difference(DenseMap pred, Loss&& loss, double h) {
    DenseMap grad = DenseMap::zeros(pred.dims);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double keep = pred.data[i];
        pred.data[i] = keep + h;
        const double up = loss(pred);
        pred.data[i] = keep - h;
        const double down = loss(pred);
        pred.data[i] = keep;
        grad.data[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

int gradient_check(std::uint64_t seed, int trials) {
    constexpr double kStep = 1e-4;
    constexpr double kTolerance = 1e-4;
    SplitMix64 rng(split_seed(seed, 3));
    double worst_focal = 0.0, worst_dice = 0.0;

    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t classes = 1 + rng.next_below(3);
        const std::size_t s = 2 + rng.next_below(3);
        DenseMap pred = DenseMap::zeros({classes, s, s});
        for (double& v : pred.data) v = 0.05 + 0.9 * rng.next_unit();
        std::vector<int> target(s * s);
        for (int& t : target) {
            t = static_cast<int>(rng.next_below(classes + 1));  // 0 = background
        }
        const double gamma = rng.next_below(2) == 0 ? 2.0 : 1.0 + rng.next_unit();
        const double alpha = 0.25;

        const LossGrad analytic = focal_loss(pred, target, gamma, alpha);
        const DenseMap numeric = finite_difference(
            pred, [&](const DenseMap& p) { return focal_loss(p, target, gamma, alpha).value; },
            kStep);
        worst_focal = std::max(worst_focal, max_relative_error(analytic.grad, numeric));
    }

    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t h = 3 + rng.next_below(5);
        const std::size_t w = 3 + rng.next_below(5);
        DenseMap pred = DenseMap::zeros({h, w});
        for (double& v : pred.data) v = 0.05 + 0.9 * rng.next_unit();
        BinaryMask gt = BinaryMask::zeros(h, w);
        for (auto& v : gt.data) v = rng.next_below(2) ? 1 : 0;

        const LossGrad analytic = dice_loss(pred, gt);
        const DenseMap numeric = finite_difference(
            pred, [&](const DenseMap& p) { return dice_loss(p, gt).value; }, kStep);
        worst_dice = std::max(worst_dice, max_relative_error(analytic.grad, numeric));
    }

    std::printf("focal gradient: %d trials, max relative error %.3e\n", trials, worst_focal);
    std::printf("dice gradient:  %d trials, max relative error %.3e\n", trials, worst_dice);
    const bool ok = worst_focal < kTolerance && worst_dice < kTolerance;
    std::printf("%s\n", ok ? "OK" : "FAILED");
    return ok ? 0 : 3;
}

void print_demo_report(const std::vector<MetricRecord>& records) {
    for (const auto& r : records) {
        std::string name;
        if (r.metric == "ap_p") name = "AP^p_50";
        else if (r.metric == "ap_p_vol") name = "AP^p_vol";
        else if (r.metric == "pcp") name = "PCP_50";
        else if (r.metric == "ap_r") {
            char buf[16];
            std::snprintf(buf, sizeof buf, "AP^r_%d", static_cast<int>(r.threshold * 10) * 10);
            name = buf;
        } else if (r.metric == "ap_r_vol") name = "AP^r_vol";
        else name = r.metric;
        std::printf("%s = %.4f\n", name.c_str(), r.value);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic prototype-based multi-human parsing pipeline"};
    app.require_subcommand(1);

    // gen-scene
    auto* gen = app.add_subcommand("gen-scene", "Generate a synthetic ground-truth scene");
    SceneFlags gen_scene_flags;
    std::string gen_out;
    gen_scene_flags.attach(gen);
    gen->add_option("--out", gen_out, "Output directory")->required();

    // assign
    auto* assign = app.add_subcommand("assign", "Build per-level grid targets for a scene");
    std::string assign_scene, assign_out, assign_levels;
    double assign_epsilon = 0.2;
    assign->add_option("--scene", assign_scene, "Scene manifest")->required();
    assign->add_option("--out", assign_out, "Output directory")->required();
    assign->add_option("--epsilon", assign_epsilon, "Center region scale factor")
        ->capture_default_str();
    assign->add_option("--levels", assign_levels, "Level table config (JSON)");

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "Combine prototypes and coefficients");
    std::string synth_p, synth_f, synth_out;
    synth->add_option("--prototypes", synth_p, "Prototype bank tensor (K x H x W)")->required();
    synth->add_option("--coefficients", synth_f, "Coefficient tensor (K x S x S)")->required();
    synth->add_option("--out", synth_out, "Output tensor (S^2 x H x W)")->required();

    // group
    auto* group = app.add_subcommand("group", "Run the grouping pipeline on candidates");
    GroupingFlags group_flags;
    std::string group_parts, group_humans, group_out;
    group->add_option("--parts", group_parts, "Part candidates (JSON)")->required();
    group->add_option("--humans", group_humans, "Human candidates (JSON)")->required();
    group->add_option("--out", group_out, "Output directory")->required();
    group_flags.attach(group);

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate parsing results against ground truth");
    std::vector<std::string> eval_gt, eval_pred;
    std::string eval_out;
    eval->add_option("--gt", eval_gt, "Scene manifest, once per image")->required();
    eval->add_option("--pred", eval_pred, "results.json, once per image")->required();
    eval->add_option("--out", eval_out, "Write the report here as well");

    // loss-check
    auto* loss = app.add_subcommand("loss-check", "Finite-difference check of loss gradients");
    std::uint64_t loss_seed = 0;
    int loss_trials = 20;
    loss->add_option("--seed", loss_seed)->capture_default_str();
    loss->add_option("--trials", loss_trials)->capture_default_str();

    // demo
    auto* demo = app.add_subcommand("demo", "Oracle round trip: generate, synthesize, group, eval");
    SceneFlags demo_scene_flags;
    GroupingFlags demo_group_flags;
    demo_scene_flags.cfg.seed = 7;
    std::string demo_out, demo_levels;
    int demo_scenes = 1;
    double demo_noise = 0.0;
    std::uint64_t demo_noise_seed = 0;
    demo_scene_flags.attach(demo);
    demo_group_flags.attach(demo);
    demo->add_option("--scenes", demo_scenes, "Number of scenes")->capture_default_str();
    demo->add_option("--noise", demo_noise, "Uniform noise added to the fabricated outputs")
        ->capture_default_str();
    demo->add_option("--noise-seed", demo_noise_seed)->capture_default_str();
    demo->add_option("--levels", demo_levels, "Level table config (JSON)");
    demo->add_option("--out", demo_out, "Directory for scenes, results and the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (gen->parsed()) {
        return run_guarded([&] {
            const GroundTruthScene scene = generate_scene(gen_scene_flags.resolve());
            write_scene(gen_out, scene);
            std::printf("wrote %zu instances to %s\n", scene.instances.size(), gen_out.c_str());
        });
    }

    if (assign->parsed()) {
        return run_guarded([&] {
            const GroundTruthScene scene = read_scene(assign_scene);
            const auto targets = build_targets(scene, load_levels(assign_levels), assign_epsilon);
            write_assignment(assign_out, targets);
            std::size_t cells = 0;
            for (const auto& t : targets) cells += t.mask_targets.size();
            std::printf("wrote targets for %zu levels (%zu positive cells) to %s\n",
                        targets.size(), cells, assign_out.c_str());
        });
    }

    if (synth->parsed()) {
        return run_guarded([&] {
            const DenseMap prototypes = read_map(synth_p);
            const DenseMap coefficients = read_map(synth_f);
            write_tensor(fs::path(synth_out), combine_masks(prototypes, coefficients));
            std::printf("wrote %s\n", synth_out.c_str());
        });
    }

    if (group->parsed()) {
        return run_guarded([&] {
            const auto parts = read_candidates(group_parts);
            const auto humans = read_candidates(group_humans);
            const auto results = run_pipeline(parts, humans, group_flags.resolve());
            write_results(group_out, results);
            std::printf("wrote %zu results to %s\n", results.size(), group_out.c_str());
        });
    }

    if (eval->parsed()) {
        return run_guarded([&] {
            if (eval_gt.size() != eval_pred.size()) {
                throw std::invalid_argument("eval: --gt and --pred counts differ");
            }
            GtSet gts;
            ResultSet results;
            for (std::size_t i = 0; i < eval_gt.size(); ++i) {
                gts.push_back(gt_humans_from_scene(read_scene(eval_gt[i])));
                results.push_back(read_results(eval_pred[i]));
            }
            const auto records = standard_report(results, gts);
            const std::string json = report_to_json(records);
            std::fputs(json.c_str(), stdout);
            if (!eval_out.empty()) write_report(eval_out, records);
        });
    }

    if (loss->parsed()) {
        return gradient_check(loss_seed, loss_trials);
    }

    if (demo->parsed()) {
        return run_guarded([&] {
            RoundTripConfig cfg;
            cfg.scene = demo_scene_flags.resolve();
            cfg.grouping = demo_group_flags.resolve();
            cfg.levels = load_levels(demo_levels);
            cfg.noise_scale = demo_noise;
            cfg.noise_seed = demo_noise_seed;

            GtSet gts;
            ResultSet results;
            for (int i = 0; i < demo_scenes; ++i) {
                RoundTripConfig scene_cfg = cfg;
                scene_cfg.scene.seed = cfg.scene.seed + static_cast<std::uint64_t>(i);
                const SceneRun run = run_oracle_scene(scene_cfg);
                if (!demo_out.empty()) {
                    char dir[64];
                    std::snprintf(dir, sizeof dir, "scene_%03d", i);
                    write_scene(fs::path(demo_out) / dir, run.scene);
                    std::snprintf(dir, sizeof dir, "results_%03d", i);
                    write_results(fs::path(demo_out) / dir, run.results);
                }
                gts.push_back(gt_humans_from_scene(run.scene));
                results.push_back(run.results);
            }
            const auto records = standard_report(results, gts);
            print_demo_report(records);
            if (!demo_out.empty()) {
                write_report(fs::path(demo_out) / "report.json", records);
            }
        });
    }

    return 0;
}

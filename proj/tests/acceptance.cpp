// Acceptance suite: every criterion prints one PASS/FAIL line; the binary
// exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nthp/assignment.hpp"
#include "nthp/grouping.hpp"
#include "nthp/losses.hpp"
#include "nthp/metrics.hpp"
#include "nthp/rng.hpp"
#include "nthp/roundtrip.hpp"
#include "nthp/scenes.hpp"
#include "nthp/synthesis.hpp"
#include "nthp/tensor_io.hpp"
#include "oracles.hpp"

using namespace nthp;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* title, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, title,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- 1 --------

void criterion_combine_oracle() {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + rng.next_below(8);
        const std::size_t s = 1 + rng.next_below(6);
        const std::size_t hw = 8 + rng.next_below(25);   // up to 32
        const auto prototypes = oracles::random_map(rng, {k, hw, hw}, -4.0, 4.0);
        const auto coefficients = oracles::random_map(rng, {k, s, s}, -2.0, 2.0);
        worst = std::max(worst, oracles::max_abs_diff(
                                    combine_masks(prototypes, coefficients),
                                    oracles::naive_combine(prototypes, coefficients)));
    }
    const double elapsed = seconds_since(start);
    char detail[128];
    std::snprintf(detail, sizeof detail, "max |diff| %.2e over 100 cases, %.2f s", worst,
                  elapsed);
    report(1, "mask synthesis equals the per-pixel dot-product oracle within 1e-6",
           worst < 1e-6 && elapsed < 5.0, detail);
}

// ---------------------------------------------------------------- 2 --------

void criterion_overlap_oracle() {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nh = 1 + rng.next_below(10);
        const std::size_t np = 1 + rng.next_below(40);
        std::vector<ScoredInstance> humans, parts;
        for (std::size_t i = 0; i < nh; ++i) {
            humans.push_back({oracles::random_box_mask(rng, 24, 24), 0, 0.9});
        }
        for (std::size_t i = 0; i < np; ++i) {
            parts.push_back({oracles::random_box_mask(rng, 24, 24), 1, 0.8});
        }
        const auto got = overlap_ratios(parts, humans);
        const auto want = oracles::naive_overlap_ratios(parts, humans);
        for (std::size_t h = 0; h < nh; ++h) {
            for (std::size_t p = 0; p < np; ++p) {
                worst = std::max(worst, std::abs(got[h][p] - want[h][p]));
            }
        }
    }
    const double elapsed = seconds_since(start);
    char detail[128];
    std::snprintf(detail, sizeof detail, "max |diff| %.2e over 100 scenes, %.2f s", worst,
                  elapsed);
    report(2, "overlap ratio matrix equals the per-pair pixel loop within 1e-6",
           worst < 1e-6 && elapsed < 10.0, detail);
}

// ---------------------------------------------------------------- 3 --------

void criterion_gradients() {
    SplitMix64 rng(1003);
    double worst_focal = 0.0, worst_dice = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t classes = 1 + rng.next_below(3);
        const std::size_t s = 2 + rng.next_below(3);
        DenseMap pred = DenseMap::zeros({classes, s, s});
        for (double& v : pred.data) v = 0.05 + 0.9 * rng.next_unit();
        std::vector<int> target(s * s);
        for (int& t : target) t = static_cast<int>(rng.next_below(classes + 1));
        const double gamma = trial % 4 == 0 ? 0.0 : 2.0;

        const auto analytic = focal_loss(pred, target, gamma, 0.25);
        const auto fd = oracles::finite_difference(
            pred, [&](const DenseMap& p) { return focal_loss(p, target, gamma, 0.25).value; },
            1e-4);
        worst_focal = std::max(worst_focal, oracles::max_rel_error(analytic.grad, fd));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t h = 3 + rng.next_below(5);
        const std::size_t w = 3 + rng.next_below(5);
        DenseMap pred = DenseMap::zeros({h, w});
        for (double& v : pred.data) v = 0.05 + 0.9 * rng.next_unit();
        BinaryMask gt = BinaryMask::zeros(h, w);
        for (auto& v : gt.data) v = rng.next_below(2) ? 1 : 0;

        const auto analytic = dice_loss(pred, gt);
        const auto fd = oracles::finite_difference(
            pred, [&](const DenseMap& p) { return dice_loss(p, gt).value; }, 1e-4);
        worst_dice = std::max(worst_dice, oracles::max_rel_error(analytic.grad, fd));
    }

    // dice gradient at the perfect prediction
    BinaryMask gt = BinaryMask::zeros(6, 6);
    for (std::size_t p = 0; p < 14; ++p) gt.data[p] = 1;
    DenseMap perfect = DenseMap::zeros({6, 6});
    for (std::size_t p = 0; p < 36; ++p) perfect.data[p] = static_cast<double>(gt.data[p]);
    double grad_inf = 0.0;
    for (double g : dice_loss(perfect, gt).grad.data) grad_inf = std::max(grad_inf, std::abs(g));

    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "focal rel %.2e, dice rel %.2e (20 points each), perfect-point grad %.2e",
                  worst_focal, worst_dice, grad_inf);
    report(3, "analytic gradients match central finite differences",
           worst_focal < 1e-4 && worst_dice < 1e-4 && grad_inf < 1e-6, detail);
}

// ---------------------------------------------------------------- 4 --------

void criterion_matrix_nms() {
    bool ok = true;
    std::string why;

    BinaryMask m = BinaryMask::zeros(8, 8);
    for (std::size_t p = 0; p < 20; ++p) m.data[p] = 1;
    GroupingConfig linear;
    linear.nms_method = NmsMethod::Linear;
    const auto pair = matrix_nms({{m, 0, 0.9}, {m, 0, 0.8}}, linear);
    if (pair.size() != 2 || pair[0].score != 0.9 || pair[1].score != 0.0) {
        ok = false;
        why = "identical-mask linear decay did not zero the second score";
    }

    GroupingConfig gauss;
    BinaryMask a = BinaryMask::zeros(8, 8), b = BinaryMask::zeros(8, 8);
    for (std::size_t p = 0; p < 10; ++p) a.data[p] = 1;
    for (std::size_t p = 30; p < 44; ++p) b.data[p] = 1;
    for (auto cfg : {gauss, linear}) {
        const auto disjoint = matrix_nms({{a, 0, 0.7}, {b, 0, 0.6}}, cfg);
        if (disjoint[0].score != 0.7 || disjoint[1].score != 0.6) {
            ok = false;
            why = "disjoint masks were decayed";
        }
    }

    SplitMix64 rng(1004);
    double worst = 0.0;
    bool top_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        GroupingConfig cfg;
        cfg.nms_method = trial % 2 == 0 ? NmsMethod::Gaussian : NmsMethod::Linear;
        const std::size_t n = 2 + rng.next_below(7);
        std::vector<ScoredInstance> humans;
        std::vector<BinaryMask> masks;
        std::vector<double> scores;
        for (std::size_t i = 0; i < n; ++i) {
            auto mk = oracles::random_box_mask(rng, 16, 16);
            const double s = 0.95 - 0.07 * static_cast<double>(i);
            humans.push_back({mk, 0, s});
            masks.push_back(std::move(mk));
            scores.push_back(s);
        }
        const auto want = oracles::naive_nms_scores(
            masks, scores, cfg.nms_method == NmsMethod::Gaussian, cfg.nms_sigma);
        const auto got = matrix_nms(humans, cfg);

        std::vector<double> got_scores, want_scores = want;
        for (const auto& c : got) got_scores.push_back(c.score);
        std::sort(got_scores.begin(), got_scores.end());
        std::sort(want_scores.begin(), want_scores.end());
        for (std::size_t i = 0; i < got_scores.size(); ++i) {
            worst = std::max(worst, std::abs(got_scores[i] - want_scores[i]));
        }
        if (!got.empty() && got[0].score != scores[0]) top_ok = false;
    }
    if (worst >= 1e-6) {
        ok = false;
        why = "loop oracle disagreement";
    }
    if (!top_ok) {
        ok = false;
        why = "top-scored mask was decayed";
    }

    char detail[128];
    std::snprintf(detail, sizeof detail, "loop-oracle max |diff| %.2e over 100 sets%s%s", worst,
                  why.empty() ? "" : "; ", why.c_str());
    report(4, "matrix NMS edge cases and scalar-loop equivalence", ok, detail);
}

// ---------------------------------------------------------------- 5 --------

void criterion_label_assignment() {
    SplitMix64 rng(1005);
    bool count_ok = true, monotone_ok = true, route_ok = true;
    const std::size_t image = 96;

    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t bw = 1 + rng.next_below(64);
        const std::size_t bh = 1 + rng.next_below(64);
        const std::size_t x0 = rng.next_below(image - bw + 1);
        const std::size_t y0 = rng.next_below(image - bh + 1);
        BinaryMask mask = BinaryMask::zeros(image, image);
        for (std::size_t y = y0; y < y0 + bh; ++y) {
            for (std::size_t x = x0; x < x0 + bw; ++x) mask.at(y, x) = 1;
        }

        const int s = 8 + static_cast<int>(rng.next_below(33));   // 8..40
        const double eps_small = 0.05 + 0.3 * rng.next_unit();
        const double eps_big = eps_small + (1.0 - eps_small) * rng.next_unit();

        const auto big = activated_grids(mask, s, eps_big, image, image);
        const auto small = activated_grids(mask, s, eps_small, image, image);

        if (big.empty() || big.size() > 9 || small.empty() || small.size() > 9) count_ok = false;
        if (small.size() > big.size()) monotone_ok = false;
        if (big.size() < 9) {
            for (const auto& c : small) {
                if (std::find(big.begin(), big.end(), c) == big.end()) monotone_ok = false;
            }
        }

        if (route_levels(instance_scale(mask), InstanceKind::Part, default_levels()).empty()) {
            route_ok = false;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "1000 instances: counts in [1,9] %s, epsilon monotonicity %s, routing %s",
                  count_ok ? "ok" : "VIOLATED", monotone_ok ? "ok" : "VIOLATED",
                  route_ok ? "ok" : "VIOLATED");
    report(5, "label assignment bounds, monotonicity and routing",
           count_ok && monotone_ok && route_ok, detail);
}

// ---------------------------------------------------------------- 6 --------

void criterion_round_trip() {
    const auto start = std::chrono::steady_clock::now();
    GtSet gts;
    ResultSet results;
    bool per_scene_ok = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RoundTripConfig cfg;            // scene defaults: 96x96, 2-6 humans, 2-5 parts
        cfg.scene.seed = seed;
        const SceneRun run = run_oracle_scene(cfg);

        const GtSet scene_gts = {gt_humans_from_scene(run.scene)};
        const ResultSet scene_results = {run.results};
        if (ap_p(scene_results, scene_gts, 0.5).value != 1.0) per_scene_ok = false;

        gts.push_back(scene_gts[0]);
        results.push_back(scene_results[0]);
    }
    const double ap50 = ap_p(results, gts, 0.5).value;
    const double vol = ap_p_vol(results, gts);
    const double pcp = pcp50(results, gts).value;
    const double elapsed = seconds_since(start);

    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "AP^p_50 %.17g, AP^p_vol %.17g, PCP_50 %.17g over 50 scenes, %.1f s", ap50,
                  vol, pcp, elapsed);
    report(6, "oracle round trip reproduces every scene exactly",
           ap50 == 1.0 && vol == 1.0 && pcp == 1.0 && per_scene_ok && elapsed < 60.0, detail);
}

// ---------------------------------------------------------------- 7 --------

BinaryMask acc_box(std::size_t image, std::size_t x0, std::size_t y0, std::size_t w,
                   std::size_t h) {
    BinaryMask m = BinaryMask::zeros(image, image);
    for (std::size_t y = y0; y < y0 + h; ++y) {
        for (std::size_t x = x0; x < x0 + w; ++x) m.at(y, x) = 1;
    }
    return m;
}

ParsingResult acc_result(const std::vector<std::pair<int, BinaryMask>>& parts, double score) {
    ParsingResult r;
    r.human_mask = BinaryMask::zeros(parts[0].second.height, parts[0].second.width);
    r.category_map.assign(r.human_mask.size(), 0);
    for (const auto& [cat, mask] : parts) {
        for (std::size_t px = 0; px < mask.data.size(); ++px) {
            if (!mask.data[px]) continue;
            r.human_mask.data[px] = 1;
            r.category_map[px] = cat + 1;
        }
    }
    r.parsing_score = score;
    return r;
}

GtHuman acc_gt(const std::vector<std::pair<int, BinaryMask>>& parts) {
    GtHuman gt;
    gt.human_mask = BinaryMask::zeros(parts[0].second.height, parts[0].second.width);
    for (const auto& [cat, mask] : parts) {
        for (std::size_t px = 0; px < mask.data.size(); ++px) {
            if (mask.data[px]) gt.human_mask.data[px] = 1;
        }
        gt.part_masks.emplace(cat, mask);
    }
    return gt;
}

void criterion_metric_micro_cases() {
    bool ok = true;
    std::string why;

    // PR hand case
    const auto gt = acc_gt({{0, acc_box(16, 2, 2, 4, 4)}});
    auto good = acc_result({{0, acc_box(16, 2, 2, 4, 4)}}, 0.9);
    auto bad = acc_result({{0, acc_box(16, 10, 10, 4, 4)}}, 0.8);
    if (ap_p({{good, bad}}, {{gt}}, 0.5).value != 1.0) {
        ok = false;
        why = "TP-then-FP did not give AP 1.0";
    }
    good.parsing_score = 0.8;
    bad.parsing_score = 0.9;
    if (ap_p({{good, bad}}, {{gt}}, 0.5).value != 0.5) {
        ok = false;
        why = "FP-then-TP did not give AP 0.5";
    }

    // 5/9 volume case: category IoUs 1.0 and 0.1 -> mean 0.55
    const auto gt2 = acc_gt({{0, acc_box(20, 2, 2, 4, 4)}, {1, acc_box(20, 10, 10, 5, 2)}});
    const auto partial =
        acc_result({{0, acc_box(20, 2, 2, 4, 4)}, {1, acc_box(20, 10, 10, 1, 1)}}, 0.9);
    const double vol = ap_p_vol({{partial}}, {{gt2}});
    if (std::abs(vol - 5.0 / 9.0) > 1e-15) {
        ok = false;
        why = "threshold-count case did not give 5/9";
    }

    // per-person PCP 0.75: three of four categories parsed
    const auto gt3 = acc_gt({{0, acc_box(24, 2, 2, 4, 4)},
                             {1, acc_box(24, 8, 2, 4, 4)},
                             {2, acc_box(24, 2, 8, 4, 4)},
                             {3, acc_box(24, 8, 8, 4, 4)}});
    const auto three = acc_result({{0, acc_box(24, 2, 2, 4, 4)},
                                   {1, acc_box(24, 8, 2, 4, 4)},
                                   {2, acc_box(24, 2, 8, 4, 4)},
                                   {3, acc_box(24, 16, 16, 4, 4)}},
                                  0.9);
    if (pcp50({{three}}, {{gt3}}).value != 0.75) {
        ok = false;
        why = "per-person PCP case did not give 0.75";
    }

    report(7, "metric conformance micro-cases reproduce exactly", ok, why);
}

// ---------------------------------------------------------------- 8 --------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool directories_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
    }
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        why = "file lists differ";
        return false;
    }
    for (const auto& rel : rel_a) {
        if (slurp(a / rel) != slurp(b / rel)) {
            why = "byte mismatch in " + rel.string();
            return false;
        }
    }
    return true;
}

void criterion_determinism() {
    bool ok = true;
    std::string why;

    const fs::path base = fs::temp_directory_path() / "nthp_acceptance_demo";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path out1 = base / "run1", out2 = base / "run2";

    const auto run_demo = [&](const fs::path& out, const fs::path& log) {
        const std::string cmd = std::string(NTHP_CLI_BIN) + " demo --seed 7 --out " +
                                out.string() + " > " + log.string() + " 2>&1";
        return std::system(cmd.c_str());
    };
    if (run_demo(out1, base / "log1.txt") != 0 || run_demo(out2, base / "log2.txt") != 0) {
        ok = false;
        why = "demo run failed";
    }
    if (ok && slurp(base / "log1.txt") != slurp(base / "log2.txt")) {
        ok = false;
        why = "demo stdout differs between runs";
    }
    if (ok && !directories_identical(out1, out2, why)) ok = false;

    // tensor roundtrip: rewrite of a read file is byte-identical
    if (ok) {
        SplitMix64 rng(1008);
        const DenseMap bank = oracles::random_map(rng, {3, 7, 5}, -10.0, 10.0);
        write_tensor(base / "t1.nthp", bank);
        write_tensor(base / "t2.nthp", read_map(base / "t1.nthp"));
        if (slurp(base / "t1.nthp") != slurp(base / "t2.nthp")) {
            ok = false;
            why = "tensor rewrite not byte-identical";
        }
        BinaryMask mask = oracles::random_mask(rng, 6, 6, 0.5);
        write_tensor(base / "m1.nthp", mask);
        write_tensor(base / "m2.nthp", read_mask(base / "m1.nthp"));
        if (slurp(base / "m1.nthp") != slurp(base / "m2.nthp")) {
            ok = false;
            why = "mask rewrite not byte-identical";
        }
    }
    fs::remove_all(base);
    report(8, "demo --seed 7 runs and tensor roundtrips are byte-identical", ok, why);
}

} // namespace

int main() {
    criterion_combine_oracle();
    criterion_overlap_oracle();
    criterion_gradients();
    criterion_matrix_nms();
    criterion_label_assignment();
    criterion_round_trip();
    criterion_metric_micro_cases();
    criterion_determinism();

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}

#include "nthp/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nthp {

namespace {

void check_same_shape(const std::vector<ScoredInstance>& instances) {
    for (std::size_t i = 1; i < instances.size(); ++i) {
        if (!instances[i].mask.same_shape(instances[0].mask)) {
            throw std::invalid_argument("grouping: candidate masks disagree on image size");
        }
    }
}

// Stable descending sort by score; equal scores keep input order.
std::vector<std::size_t> order_by_score(const std::vector<ScoredInstance>& instances) {
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return instances[a].score > instances[b].score;
    });
    return order;
}

double decay_kernel(double x, const GroupingConfig& cfg) {
    if (cfg.nms_method == NmsMethod::Gaussian) {
        return std::exp(-x * x / cfg.nms_sigma);
    }
    return 1.0 - x;
}

} // namespace

std::vector<ScoredInstance> select_parts(std::vector<ScoredInstance> candidates,
                                         const GroupingConfig& cfg) {
    std::erase_if(candidates,
                  [&](const ScoredInstance& c) { return !(c.score > cfg.part_score_threshold); });
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ScoredInstance& a, const ScoredInstance& b) {
                         return a.score > b.score;
                     });
    if (candidates.size() > static_cast<std::size_t>(cfg.part_limit)) {
        candidates.resize(static_cast<std::size_t>(cfg.part_limit));
    }
    return candidates;
}

std::vector<ScoredInstance> matrix_nms(std::vector<ScoredInstance> humans,
                                       const GroupingConfig& cfg) {
    std::erase_if(humans,
                  [&](const ScoredInstance& c) { return !(c.score > cfg.human_score_threshold); });
    check_same_shape(humans);

    const std::size_t n = humans.size();
    if (n == 0) return humans;

    std::vector<ScoredInstance> sorted;
    sorted.reserve(n);
    for (std::size_t idx : order_by_score(humans)) sorted.push_back(std::move(humans[idx]));

    // Pairwise IoU for i < j over the score-sorted list.
    std::vector<std::size_t> areas(n);
    for (std::size_t i = 0; i < n; ++i) areas[i] = sorted[i].mask.area();
    std::vector<double> iou_matrix(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::size_t inter = 0;
            const auto& a = sorted[i].mask.data;
            const auto& b = sorted[j].mask.data;
            for (std::size_t p = 0; p < a.size(); ++p) inter += static_cast<std::size_t>(a[p] & b[p]);
            const std::size_t uni = areas[i] + areas[j] - inter;
            iou_matrix[i * n + j] = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
        }
    }

    // iou_max[i]: the strongest overlap candidate i suffers from any
    // higher-scored one; its decay kernel value compensates the suppression
    // candidate i itself already received.
    std::vector<double> iou_max(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < i; ++k) m = std::max(m, iou_matrix[k * n + i]);
        iou_max[i] = m;
    }

    for (std::size_t j = 1; j < n; ++j) {
        double decay = 1.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double compensate = decay_kernel(iou_max[i], cfg);
            if (!(compensate > 0.0)) continue;   // suppressor itself fully decayed
            decay = std::min(decay, decay_kernel(iou_matrix[i * n + j], cfg) / compensate);
        }
        sorted[j].score *= decay;
    }

    std::vector<ScoredInstance> out;
    out.reserve(n);
    for (std::size_t idx : order_by_score(sorted)) out.push_back(std::move(sorted[idx]));
    if (out.size() > static_cast<std::size_t>(cfg.human_limit)) {
        out.resize(static_cast<std::size_t>(cfg.human_limit));
    }
    return out;
}

std::vector<std::vector<double>> overlap_ratios(const std::vector<ScoredInstance>& parts,
                                                const std::vector<ScoredInstance>& humans) {
    if (!parts.empty() && !humans.empty() && !parts[0].mask.same_shape(humans[0].mask)) {
        throw std::invalid_argument("overlap_ratios: part/human image sizes differ");
    }
    check_same_shape(parts);
    check_same_shape(humans);

    std::vector<std::size_t> part_areas(parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) {
        part_areas[p] = parts[p].mask.area();
        if (part_areas[p] == 0) {
            throw std::invalid_argument("overlap_ratios: part with zero area");
        }
    }

    // inter[h][p] = <human_h, part_p> on the flattened masks.
    std::vector<std::vector<double>> ratios(humans.size(),
                                            std::vector<double>(parts.size(), 0.0));
    for (std::size_t h = 0; h < humans.size(); ++h) {
        const auto& hm = humans[h].mask.data;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            const auto& pm = parts[p].mask.data;
            std::size_t inter = 0;
            for (std::size_t px = 0; px < hm.size(); ++px) {
                inter += static_cast<std::size_t>(hm[px] & pm[px]);
            }
            ratios[h][p] = static_cast<double>(inter) / static_cast<double>(part_areas[p]);
        }
    }
    return ratios;
}

std::vector<ParsingResult> assemble(const std::vector<ScoredInstance>& humans,
                                    const std::vector<ScoredInstance>& parts,
                                    const std::vector<std::vector<double>>& ratios,
                                    const GroupingConfig& cfg) {
    if (ratios.size() != humans.size()) {
        throw std::invalid_argument("assemble: ratio matrix rows disagree with humans");
    }
    for (const auto& row : ratios) {
        if (row.size() != parts.size()) {
            throw std::invalid_argument("assemble: ratio matrix columns disagree with parts");
        }
    }

    std::vector<ParsingResult> results;
    for (std::size_t h = 0; h < humans.size(); ++h) {
        std::vector<std::size_t> selected;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (ratios[h][p] > cfg.overlap_threshold) selected.push_back(p);
        }
        if (selected.empty()) continue;

        // Pixel contention: higher score claims first; ties by lower
        // category, then by input order.
        std::stable_sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
            if (parts[a].score != parts[b].score) return parts[a].score > parts[b].score;
            return parts[a].category < parts[b].category;
        });

        const BinaryMask& human_mask = humans[h].mask;
        ParsingResult result;
        result.human_mask = BinaryMask::zeros(human_mask.height, human_mask.width);
        result.category_map.assign(human_mask.size(), 0);
        std::vector<double> pixel_scores(human_mask.size(), 0.0);

        for (std::size_t p : selected) {
            const auto& pm = parts[p].mask.data;
            for (std::size_t px = 0; px < pm.size(); ++px) {
                if (!pm[px] || !human_mask.data[px]) continue;
                if (result.category_map[px] != 0) continue;
                result.human_mask.data[px] = 1;
                result.category_map[px] = parts[p].category + 1;
                pixel_scores[px] = parts[p].score;
            }
        }

        double score_sum = 0.0;
        std::size_t covered = 0;
        for (std::size_t px = 0; px < pixel_scores.size(); ++px) {
            if (result.human_mask.data[px]) {
                score_sum += pixel_scores[px];
                ++covered;
            }
        }
        // covered > 0 is guaranteed: a ratio above the threshold implies a
        // nonempty intersection with the human mask.
        result.parsing_score = humans[h].score * (score_sum / static_cast<double>(covered));
        results.push_back(std::move(result));
    }
    return results;
}

std::vector<ParsingResult> run_pipeline(const std::vector<ScoredInstance>& part_candidates,
                                        const std::vector<ScoredInstance>& human_candidates,
                                        const GroupingConfig& cfg) {
    const auto parts = select_parts(part_candidates, cfg);
    const auto humans = matrix_nms(human_candidates, cfg);
    const auto ratios = overlap_ratios(parts, humans);
    return assemble(humans, parts, ratios, cfg);
}

} // namespace nthp

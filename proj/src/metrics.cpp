#include "nthp/metrics.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace nthp {

namespace {

// Precomputed per-image similarity tables plus the pooled prediction order,
// shared by every threshold of a volume metric.
struct MatchTables {
    // sims[img][pred][gt]
    std::vector<std::vector<std::vector<double>>> sims;
    // pooled predictions as (image, index), sorted by score descending,
    // ties by pool order
    std::vector<std::pair<std::size_t, std::size_t>> order;
    std::size_t gt_total = 0;
};

template <typename Similarity>
MatchTables build_tables(const ResultSet& results, const GtSet& gts, Similarity&& similarity) {
    if (results.size() != gts.size()) {
        throw std::invalid_argument("metrics: per-image prediction/ground-truth counts differ");
    }
    MatchTables t;
    t.sims.resize(results.size());
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> pool;
    for (std::size_t img = 0; img < results.size(); ++img) {
        t.gt_total += gts[img].size();
        t.sims[img].resize(results[img].size());
        for (std::size_t p = 0; p < results[img].size(); ++p) {
            t.sims[img][p].resize(gts[img].size());
            for (std::size_t g = 0; g < gts[img].size(); ++g) {
                t.sims[img][p][g] = similarity(results[img][p], gts[img][g]);
            }
            pool.push_back({results[img][p].parsing_score, {img, p}});
        }
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    t.order.reserve(pool.size());
    for (const auto& e : pool) t.order.push_back(e.second);
    return t;
}

struct GreedyMatch {
    std::vector<bool> is_tp;                          // per prediction, in pooled order
    std::vector<std::vector<int>> gt_match;           // [img][gt] -> -1 or pooled pred rank
    MetricCounts counts;
};

// Greedy one-to-one matching: each prediction, best first, takes the
// unmatched same-image person with the highest similarity (ties by lowest
// ground-truth index) and is a true positive when similarity > t.
GreedyMatch greedy_match(const MatchTables& t, const GtSet& gts, double threshold) {
    GreedyMatch m;
    m.is_tp.assign(t.order.size(), false);
    m.gt_match.resize(gts.size());
    for (std::size_t img = 0; img < gts.size(); ++img) {
        m.gt_match[img].assign(gts[img].size(), -1);
    }

    for (std::size_t rank = 0; rank < t.order.size(); ++rank) {
        const auto [img, p] = t.order[rank];
        int best_gt = -1;
        double best_sim = -1.0;
        for (std::size_t g = 0; g < gts[img].size(); ++g) {
            if (m.gt_match[img][g] != -1) continue;
            const double s = t.sims[img][p][g];
            if (s > best_sim) {
                best_sim = s;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt != -1 && best_sim > threshold) {
            m.is_tp[rank] = true;
            m.gt_match[img][static_cast<std::size_t>(best_gt)] = static_cast<int>(rank);
            ++m.counts.tp;
        } else {
            ++m.counts.fp;
        }
    }
    m.counts.fn = t.gt_total - m.counts.tp;
    return m;
}

// Every true positive advances recall by exactly 1/G, so the area under the
// precision envelope is the mean envelope precision over true-positive
// events. Summing those (each <= 1) before one final division keeps the
// perfect case at exactly 1.0.
ApResult ap_from_match(const MatchTables& t, const GreedyMatch& m) {
    ApResult r;
    r.counts = m.counts;
    const std::size_t n = m.is_tp.size();
    if (t.gt_total == 0) return r;

    std::vector<double> precision(n, 0.0);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (m.is_tp[k]) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        r.curve.points.push_back(
            {static_cast<double>(tp) / static_cast<double>(t.gt_total), precision[k]});
    }
    std::vector<double> envelope(precision);
    for (std::size_t k = n; k-- > 1;) {
        envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (m.is_tp[k]) sum += envelope[k];
    }
    r.value = sum / static_cast<double>(t.gt_total);
    r.curve.ap = r.value;
    return r;
}

MatchTables part_iou_tables(const ResultSet& results, const GtSet& gts) {
    return build_tables(results, gts, [](const ParsingResult& p, const GtHuman& g) {
        return mean_part_iou(p, g);
    });
}

MatchTables person_iou_tables(const ResultSet& results, const GtSet& gts) {
    return build_tables(results, gts, [](const ParsingResult& p, const GtHuman& g) {
        return iou(p.human_mask, g.human_mask);
    });
}

constexpr double kVolThresholds[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

} // namespace

std::vector<GtHuman> gt_humans_from_scene(const GroundTruthScene& scene) {
    validate(scene);
    std::vector<GtHuman> out;
    std::vector<int> human_slot(scene.instances.size(), -1);
    for (std::size_t idx = 0; idx < scene.instances.size(); ++idx) {
        const auto& inst = scene.instances[idx];
        if (inst.kind != InstanceKind::Human) continue;
        human_slot[idx] = static_cast<int>(out.size());
        out.push_back({inst.mask, {}});
    }
    for (const auto& inst : scene.instances) {
        if (inst.kind != InstanceKind::Part) continue;
        GtHuman& owner = out[static_cast<std::size_t>(human_slot[static_cast<std::size_t>(inst.parent)])];
        auto [it, inserted] = owner.part_masks.emplace(inst.category, inst.mask);
        if (!inserted) {
            for (std::size_t p = 0; p < inst.mask.data.size(); ++p) {
                it->second.data[p] |= inst.mask.data[p];
            }
        }
    }
    return out;
}

double mean_part_iou(const ParsingResult& pred, const GtHuman& gt) {
    if (pred.category_map.size() != gt.human_mask.size()) {
        throw std::invalid_argument("mean_part_iou: image sizes differ");
    }
    std::set<int> categories;
    for (int v : pred.category_map) {
        if (v > 0) categories.insert(v - 1);
    }
    for (const auto& [cat, mask] : gt.part_masks) categories.insert(cat);
    if (categories.empty()) return 0.0;

    const std::size_t h = gt.human_mask.height, w = gt.human_mask.width;
    double sum = 0.0;
    for (int cat : categories) {
        BinaryMask pred_mask = BinaryMask::zeros(h, w);
        for (std::size_t px = 0; px < pred.category_map.size(); ++px) {
            if (pred.category_map[px] == cat + 1) pred_mask.data[px] = 1;
        }
        const auto gt_it = gt.part_masks.find(cat);
        const BinaryMask gt_mask = gt_it != gt.part_masks.end() ? gt_it->second
                                                                : BinaryMask::zeros(h, w);
        sum += iou(pred_mask, gt_mask);
    }
    return sum / static_cast<double>(categories.size());
}

ApResult ap_p(const ResultSet& results, const GtSet& gts, double t) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("ap_p: threshold must lie in (0,1)");
    const auto tables = part_iou_tables(results, gts);
    return ap_from_match(tables, greedy_match(tables, gts, t));
}

double ap_p_vol(const ResultSet& results, const GtSet& gts) {
    const auto tables = part_iou_tables(results, gts);
    double sum = 0.0;
    for (double t : kVolThresholds) {
        sum += ap_from_match(tables, greedy_match(tables, gts, t)).value;
    }
    return sum / 9.0;
}

PcpResult pcp50(const ResultSet& results, const GtSet& gts) {
    const auto tables = part_iou_tables(results, gts);
    const auto match = greedy_match(tables, gts, 0.5);

    PcpResult r;
    r.counts = match.counts;
    std::size_t persons = 0;
    double sum = 0.0;
    for (std::size_t img = 0; img < gts.size(); ++img) {
        for (std::size_t g = 0; g < gts[img].size(); ++g) {
            const GtHuman& gt = gts[img][g];
            if (gt.part_masks.empty()) {
                throw std::invalid_argument("pcp50: ground-truth person without categories");
            }
            ++persons;
            const int rank = match.gt_match[img][g];
            if (rank == -1) continue;            // missed person scores zero
            const auto [pimg, pidx] = tables.order[static_cast<std::size_t>(rank)];
            const ParsingResult& pred = results[pimg][pidx];

            std::size_t correct = 0;
            for (const auto& [cat, gt_mask] : gt.part_masks) {
                BinaryMask pred_mask = BinaryMask::zeros(gt_mask.height, gt_mask.width);
                for (std::size_t px = 0; px < pred.category_map.size(); ++px) {
                    if (pred.category_map[px] == cat + 1) pred_mask.data[px] = 1;
                }
                if (iou(pred_mask, gt_mask) > 0.5) ++correct;
            }
            sum += static_cast<double>(correct) / static_cast<double>(gt.part_masks.size());
        }
    }
    r.value = persons == 0 ? 0.0 : sum / static_cast<double>(persons);
    return r;
}

ApResult ap_r(const ResultSet& results, const GtSet& gts, double t) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("ap_r: threshold must lie in (0,1)");
    const auto tables = person_iou_tables(results, gts);
    return ap_from_match(tables, greedy_match(tables, gts, t));
}

double ap_r_vol(const ResultSet& results, const GtSet& gts) {
    const auto tables = person_iou_tables(results, gts);
    double sum = 0.0;
    for (double t : kVolThresholds) {
        sum += ap_from_match(tables, greedy_match(tables, gts, t)).value;
    }
    return sum / 9.0;
}

std::vector<MetricRecord> standard_report(const ResultSet& results, const GtSet& gts) {
    std::vector<MetricRecord> rows;
    const auto push_ap = [&rows](const std::string& name, double t, const ApResult& r) {
        MetricRecord row;
        row.metric = name;
        row.threshold = t;
        row.has_threshold = true;
        row.value = r.value;
        row.counts = r.counts;
        row.has_counts = true;
        rows.push_back(row);
    };

    push_ap("ap_p", 0.5, ap_p(results, gts, 0.5));
    rows.push_back({"ap_p_vol", 0.0, false, ap_p_vol(results, gts), {}, false});

    const auto pcp = pcp50(results, gts);
    rows.push_back({"pcp", 0.5, true, pcp.value, pcp.counts, true});

    for (double t : {0.5, 0.6, 0.7}) {
        push_ap("ap_r", t, ap_r(results, gts, t));
    }
    rows.push_back({"ap_r_vol", 0.0, false, ap_r_vol(results, gts), {}, false});
    return rows;
}

} // namespace nthp

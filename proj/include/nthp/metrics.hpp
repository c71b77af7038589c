#pragma once

#include <map>
#include <string>
#include <vector>

#include "nthp/assignment.hpp"
#include "nthp/grouping.hpp"
#include "nthp/mask.hpp"

namespace nthp {

// Ground-truth person for evaluation: the whole-person mask plus one binary
// mask per part category present on that person.
struct GtHuman {
    BinaryMask human_mask;
    std::map<int, BinaryMask> part_masks;
};

// Groups a scene's part instances under their parent humans; parts sharing a
// category within one human are unioned.
std::vector<GtHuman> gt_humans_from_scene(const GroundTruthScene& scene);

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<PrPoint> points;   // one operating point per pooled prediction
    double ap = 0.0;               // area under the precision envelope
};

struct MetricCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

struct ApResult {
    double value = 0.0;
    MetricCounts counts;
    PRCurve curve;
};

struct PcpResult {
    double value = 0.0;
    MetricCounts counts;           // tp/fn = matched/unmatched persons, fp = surplus predictions
};

// Predictions and ground truths are given per image; matching never crosses
// image boundaries.
using ResultSet = std::vector<std::vector<ParsingResult>>;
using GtSet = std::vector<std::vector<GtHuman>>;

// Mean per-category pixel IoU between a parsed person and a ground-truth
// person, averaged over the union of categories present on either side; a
// category absent from one side contributes an empty mask.
double mean_part_iou(const ParsingResult& pred, const GtHuman& gt);

// Part-based average precision: predictions pool across images sorted by
// parsing score, greedily match the best unmatched same-image person by
// mean_part_iou, count a true positive when that value exceeds t.
ApResult ap_p(const ResultSet& results, const GtSet& gts, double t);

// Mean of ap_p over IoU thresholds 0.1 .. 0.9 (step 0.1).
double ap_p_vol(const ResultSet& results, const GtSet& gts);

// Percentage of correctly parsed categories: persons are matched as in ap_p
// at t = 0.5; each ground-truth person scores the fraction of its categories
// parsed with IoU above 0.5 (zero when unmatched), averaged over persons.
PcpResult pcp50(const ResultSet& results, const GtSet& gts);

// Region-based average precision: same machinery with whole-person mask IoU
// as the matching criterion.
ApResult ap_r(const ResultSet& results, const GtSet& gts, double t);

// Mean of ap_r over IoU thresholds 0.1 .. 0.9 (step 0.1).
double ap_r_vol(const ResultSet& results, const GtSet& gts);

// One row of the evaluation report.
struct MetricRecord {
    std::string metric;
    double threshold = 0.0;
    bool has_threshold = false;
    double value = 0.0;
    MetricCounts counts;
    bool has_counts = false;
};

// The standard report: AP^p at 0.5, AP^p_vol, PCP_50, AP^r at 0.5/0.6/0.7
// and AP^r_vol.
std::vector<MetricRecord> standard_report(const ResultSet& results, const GtSet& gts);

} // namespace nthp

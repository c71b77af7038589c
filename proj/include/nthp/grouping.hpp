#pragma once

#include <vector>

#include "nthp/synthesis.hpp"

namespace nthp {

enum class NmsMethod { Gaussian, Linear };

// Inference-time grouping parameters; defaults follow the method constants
// n_part=200, s_part=1/3, s_human=0.1, r_human=2/3, gaussian sigma 2.
struct GroupingConfig {
    int part_limit = 200;
    double part_score_threshold = 1.0 / 3.0;
    double human_score_threshold = 0.1;
    double overlap_threshold = 2.0 / 3.0;
    NmsMethod nms_method = NmsMethod::Gaussian;
    double nms_sigma = 2.0;
    int human_limit = 100;
};

// One grouped human: the assembled instance mask (human mask AND-ed with the
// union of its selected parts), a per-pixel category map storing category+1
// (0 = unassigned) and the final parsing score.
struct ParsingResult {
    BinaryMask human_mask;
    std::vector<int> category_map;
    double parsing_score = 0.0;
};

// Keep part candidates scoring above the threshold, best first, at most
// part_limit of them. Ties keep input order.
std::vector<ScoredInstance> select_parts(std::vector<ScoredInstance> candidates,
                                         const GroupingConfig& cfg);

// Matrix NMS over human candidates: scores are decayed in parallel through
// the pairwise IoU matrix instead of being removed sequentially. Candidates
// at or below the score threshold are dropped first; the survivors are
// re-ranked by decayed score and truncated to human_limit.
std::vector<ScoredInstance> matrix_nms(std::vector<ScoredInstance> humans,
                                       const GroupingConfig& cfg);

// ratio[h][p] = |part_p AND human_h| / |part_p|, computed as one flattened
// mask matrix product.
std::vector<std::vector<double>> overlap_ratios(const std::vector<ScoredInstance>& parts,
                                                const std::vector<ScoredInstance>& humans);

// For every human, selects the parts whose overlap ratio exceeds the
// threshold, lets the highest-scoring part claim each contested pixel and
// emits the assembled result. Humans with no qualifying part emit nothing.
std::vector<ParsingResult> assemble(const std::vector<ScoredInstance>& humans,
                                    const std::vector<ScoredInstance>& parts,
                                    const std::vector<std::vector<double>>& ratios,
                                    const GroupingConfig& cfg);

// select_parts -> matrix_nms -> overlap_ratios -> assemble.
std::vector<ParsingResult> run_pipeline(const std::vector<ScoredInstance>& part_candidates,
                                        const std::vector<ScoredInstance>& human_candidates,
                                        const GroupingConfig& cfg);

} // namespace nthp

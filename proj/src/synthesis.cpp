#include "nthp/synthesis.hpp"

#include <algorithm>
#include <stdexcept>

namespace nthp {

DenseMap combine_masks(const PrototypeBank& prototypes, const CoefficientGrid& coefficients) {
    if (prototypes.rank() != 3) {
        throw std::invalid_argument("combine_masks: prototype bank must be K x H x W");
    }
    if (coefficients.rank() != 3) {
        throw std::invalid_argument("combine_masks: coefficients must be K x S x S");
    }
    if (prototypes.dims[0] != coefficients.dims[0]) {
        throw std::invalid_argument("combine_masks: prototype/coefficient K mismatch");
    }
    const std::size_t k_count = prototypes.dims[0];
    const std::size_t h = prototypes.dims[1];
    const std::size_t w = prototypes.dims[2];
    const std::size_t cells = coefficients.dims[1] * coefficients.dims[2];
    const std::size_t plane = h * w;

    DenseMap out = DenseMap::zeros({cells, h, w});
    std::vector<double> logits(plane);

    for (std::size_t cell = 0; cell < cells; ++cell) {
        bool all_zero = true;
        for (std::size_t k = 0; k < k_count; ++k) {
            if (coefficients.data[k * cells + cell] != 0.0) {
                all_zero = false;
                break;
            }
        }
        double* dst = out.data.data() + cell * plane;
        if (all_zero) {
            std::fill(dst, dst + plane, 0.5);     // sigmoid of an all-zero dot product
            continue;
        }
        std::fill(logits.begin(), logits.end(), 0.0);
        for (std::size_t k = 0; k < k_count; ++k) {
            const double coef = coefficients.data[k * cells + cell];
            if (coef == 0.0) continue;            // adding a zero term never changes the sum
            const double* proto = prototypes.data.data() + k * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                logits[p] += coef * proto[p];
            }
        }
        for (std::size_t p = 0; p < plane; ++p) {
            dst[p] = sigmoid(logits[p]);
        }
    }
    return out;
}

double segmentation_score(const DenseMap& soft, double threshold) {
    if (soft.rank() != 2) {
        throw std::invalid_argument("segmentation_score: expected a rank-2 map");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("segmentation_score: threshold must lie in (0,1)");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : soft.data) {
        if (v > threshold) {
            sum += v;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<ScoredInstance> extract_candidates(const CategoryGrid& category_scores,
                                               const DenseMap& masks, double binarize_threshold) {
    if (category_scores.rank() != 3) {
        throw std::invalid_argument("extract_candidates: category grid must be C x S x S");
    }
    if (masks.rank() != 3) {
        throw std::invalid_argument("extract_candidates: masks must be (S*S) x H x W");
    }
    const std::size_t classes = category_scores.dims[0];
    const std::size_t cells = category_scores.dims[1] * category_scores.dims[2];
    if (masks.dims[0] != cells) {
        throw std::invalid_argument("extract_candidates: grid extents disagree with mask channels");
    }
    if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
        throw std::invalid_argument("extract_candidates: threshold must lie in (0,1)");
    }
    const std::size_t h = masks.dims[1];
    const std::size_t w = masks.dims[2];
    const std::size_t plane = h * w;

    std::vector<ScoredInstance> out;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const double* soft = masks.data.data() + cell * plane;

        BinaryMask mask = BinaryMask::zeros(h, w);
        double fg_sum = 0.0;
        std::size_t fg_count = 0;
        for (std::size_t p = 0; p < plane; ++p) {
            if (soft[p] > binarize_threshold) {
                mask.data[p] = 1;
                fg_sum += soft[p];
                ++fg_count;
            }
        }
        if (fg_count == 0) continue;

        std::size_t best_class = 0;
        double best_score = category_scores.data[cell];
        for (std::size_t c = 1; c < classes; ++c) {
            const double v = category_scores.data[c * cells + cell];
            if (v > best_score) {    // strict: argmax ties keep the lowest class
                best_score = v;
                best_class = c;
            }
        }

        ScoredInstance cand;
        cand.mask = std::move(mask);
        cand.category = static_cast<int>(best_class);
        cand.score = best_score * (fg_sum / static_cast<double>(fg_count));
        out.push_back(std::move(cand));
    }
    return out;
}

} // namespace nthp

#pragma once

#include <string>
#include <vector>

#include "nthp/assignment.hpp"
#include "nthp/mask.hpp"

namespace nthp {

// Scalar loss value together with its gradient w.r.t. the prediction tensor.
struct LossGrad {
    double value = 0.0;
    DenseMap grad;
};

struct FocalParams {
    double gamma = 2.0;
    double alpha = 0.25;
};

// Per-grid binary focal loss over a C x S x S probability grid against an
// S*S category target (0 = background, c+1 = positive for class c). Each
// (cell, class) pair contributes -alpha_t * (1-p_t)^gamma * log(p_t); the sum
// is normalized by (number of positive cells + 1) so empty grids stay finite.
LossGrad focal_loss(const DenseMap& pred, const std::vector<int>& target, double gamma,
                    double alpha);

// Dice loss 1 - 2*sum(p*g) / (sum(p^2) + sum(g^2) + delta) with the squared
// denominator and smoothing delta = 1e-6.
LossGrad dice_loss(const DenseMap& pred, const BinaryMask& gt);

inline constexpr double kDiceSmoothing = 1e-6;
inline constexpr double kDefaultLossWeight = 3.0;   // lambda of the combined objective

// Predicted grids for one level: category probabilities (C x S x S) and the
// synthesized soft masks ((S*S) x H x W).
struct LevelPrediction {
    std::string level_id;
    DenseMap category_scores;
    DenseMap masks;
};

struct LossReport {
    double total = 0.0;
    double category_part = 0.0;    // focal, part levels
    double mask_part = 0.0;        // dice, part levels
    double category_human = 0.0;   // focal, human levels
    double mask_human = 0.0;       // dice, human levels
    double lambda = kDefaultLossWeight;
};

// Combined objective: focal terms summed per level, dice terms averaged over
// the positive cells of each branch (parts vs humans). Predictions and
// targets are matched by level id, so input order does not matter.
LossReport total_loss(const std::vector<LevelPrediction>& predictions,
                      const std::vector<GridTargets>& targets,
                      const std::vector<LevelSpec>& specs, double lambda = kDefaultLossWeight,
                      const FocalParams& focal = {});

} // namespace nthp

#include "nthp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nthp {

LossGrad focal_loss(const DenseMap& pred, const std::vector<int>& target, double gamma,
                    double alpha) {
    if (pred.rank() != 3) {
        throw std::invalid_argument("focal_loss: prediction must be C x S x S");
    }
    if (!(gamma >= 0.0)) throw std::invalid_argument("focal_loss: gamma must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("focal_loss: alpha must lie in (0,1)");
    }
    const std::size_t classes = pred.dims[0];
    const std::size_t cells = pred.dims[1] * pred.dims[2];
    if (target.size() != cells) {
        throw std::invalid_argument("focal_loss: target size does not match the grid");
    }
    for (double p : pred.data) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument("focal_loss: probabilities must lie strictly in (0,1)");
        }
    }

    std::size_t positives = 0;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const int t = target[cell];
        if (t < 0 || static_cast<std::size_t>(t) > classes) {
            throw std::invalid_argument("focal_loss: target class out of range");
        }
        if (t != 0) ++positives;
    }
    const double norm = static_cast<double>(positives) + 1.0;

    LossGrad out;
    out.grad = DenseMap::zeros(pred.dims);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const std::size_t at = c * cells + cell;
            const double p = pred.data[at];
            const bool positive = target[cell] == static_cast<int>(c) + 1;
            if (positive) {
                const double q = 1.0 - p;
                sum += -alpha * std::pow(q, gamma) * std::log(p);
                double d = -alpha * std::pow(q, gamma) / p;
                if (gamma > 0.0) d += alpha * gamma * std::pow(q, gamma - 1.0) * std::log(p);
                out.grad.data[at] = d / norm;
            } else {
                const double a = 1.0 - alpha;
                sum += -a * std::pow(p, gamma) * std::log(1.0 - p);
                double d = a * std::pow(p, gamma) / (1.0 - p);
                if (gamma > 0.0) d += -a * gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
                out.grad.data[at] = d / norm;
            }
        }
    }
    out.value = sum / norm;
    return out;
}

LossGrad dice_loss(const DenseMap& pred, const BinaryMask& gt) {
    if (pred.rank() != 2 || pred.dims[0] != gt.height || pred.dims[1] != gt.width) {
        throw std::invalid_argument("dice_loss: prediction/ground-truth dimensions differ");
    }
    double inter = 0.0, pred_sq = 0.0, gt_sq = 0.0;
    for (std::size_t p = 0; p < pred.data.size(); ++p) {
        const double v = pred.data[p];
        const double g = static_cast<double>(gt.data[p]);
        inter += v * g;
        pred_sq += v * v;
        gt_sq += g;            // g in {0,1}, so g^2 == g
    }
    const double denom = pred_sq + gt_sq + kDiceSmoothing;

    LossGrad out;
    out.value = 1.0 - 2.0 * inter / denom;
    out.grad = DenseMap::zeros(pred.dims);
    for (std::size_t p = 0; p < pred.data.size(); ++p) {
        const double g = static_cast<double>(gt.data[p]);
        out.grad.data[p] = -2.0 * (g * denom - 2.0 * inter * pred.data[p]) / (denom * denom);
    }
    return out;
}

LossReport total_loss(const std::vector<LevelPrediction>& predictions,
                      const std::vector<GridTargets>& targets,
                      const std::vector<LevelSpec>& specs, double lambda,
                      const FocalParams& focal) {
    validate(specs);

    std::map<std::string, const LevelPrediction*> preds;
    for (const auto& p : predictions) preds[p.level_id] = &p;
    std::map<std::string, const GridTargets*> targs;
    for (const auto& t : targets) targs[t.level_id] = &t;
    if (preds.size() != predictions.size() || targs.size() != targets.size() ||
        preds.size() != targs.size()) {
        throw std::invalid_argument("total_loss: predictions and targets do not pair up");
    }

    for (const auto& [id, t] : targs) {
        (void)t;
        bool known = false;
        for (const auto& spec : specs) known = known || spec.id == id;
        if (!known) throw std::invalid_argument("total_loss: unknown level " + id);
    }

    LossReport report;
    report.lambda = lambda;

    double dice_part_sum = 0.0, dice_human_sum = 0.0;
    std::size_t dice_part_count = 0, dice_human_count = 0;

    // Levels iterate in table order, so the result is independent of the
    // order predictions and targets arrive in.
    for (const auto& spec : specs) {
        const auto t_it = targs.find(spec.id);
        if (t_it == targs.end()) continue;
        const auto p_it = preds.find(spec.id);
        if (p_it == preds.end()) {
            throw std::invalid_argument("total_loss: no prediction for level " + spec.id);
        }
        const GridTargets& target = *t_it->second;
        const LevelPrediction& pred = *p_it->second;
        if (target.grid_count != spec.grid_count ||
            pred.category_scores.rank() != 3 ||
            pred.category_scores.dims[1] != static_cast<std::size_t>(spec.grid_count) ||
            pred.category_scores.dims[2] != static_cast<std::size_t>(spec.grid_count)) {
            throw std::invalid_argument("total_loss: level " + spec.id + " grid mismatch");
        }

        const double focal_value =
            focal_loss(pred.category_scores, target.category_target, focal.gamma, focal.alpha)
                .value;
        const bool human = spec.kind == InstanceKind::Human;
        (human ? report.category_human : report.category_part) += focal_value;

        const std::size_t plane = pred.masks.dims[1] * pred.masks.dims[2];
        for (const auto& [cell, gt_mask] : target.mask_targets) {
            if (static_cast<std::size_t>(cell) >= pred.masks.dims[0]) {
                throw std::invalid_argument("total_loss: mask target outside predicted channels");
            }
            DenseMap soft;
            soft.dims = {pred.masks.dims[1], pred.masks.dims[2]};
            const auto begin = pred.masks.data.begin() + static_cast<std::ptrdiff_t>(cell * plane);
            soft.data.assign(begin, begin + static_cast<std::ptrdiff_t>(plane));
            const double d = dice_loss(soft, gt_mask).value;
            if (human) {
                dice_human_sum += d;
                ++dice_human_count;
            } else {
                dice_part_sum += d;
                ++dice_part_count;
            }
        }
    }

    report.mask_part =
        dice_part_count == 0 ? 0.0 : dice_part_sum / static_cast<double>(dice_part_count);
    report.mask_human =
        dice_human_count == 0 ? 0.0 : dice_human_sum / static_cast<double>(dice_human_count);
    report.total = report.category_part + lambda * report.mask_part + report.category_human +
                   lambda * report.mask_human;
    return report;
}

} // namespace nthp

#include "nthp/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nthp {

std::vector<LevelSpec> default_levels() {
    const double inf = std::numeric_limits<double>::infinity();
    return {
        {"F1", InstanceKind::Part, 40, 0.0, 96.0},
        {"F2", InstanceKind::Part, 36, 48.0, 192.0},
        {"F3", InstanceKind::Part, 24, 96.0, 384.0},
        {"F4", InstanceKind::Part, 16, 192.0, inf},
        {"F5", InstanceKind::Human, 20, 0.0, inf},
    };
}

void validate(const std::vector<LevelSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("LevelSpec: empty level table");
    for (const auto& s : specs) {
        if (s.id.empty()) throw std::invalid_argument("LevelSpec: empty level id");
        if (s.grid_count < 1) throw std::invalid_argument("LevelSpec: grid count must be >= 1");
        if (!(s.scale_min >= 0.0) || !(s.scale_max > s.scale_min)) {
            throw std::invalid_argument("LevelSpec: bad scale range for level " + s.id);
        }
    }
    for (std::size_t a = 0; a < specs.size(); ++a) {
        for (std::size_t b = a + 1; b < specs.size(); ++b) {
            if (specs[a].id == specs[b].id) {
                throw std::invalid_argument("LevelSpec: duplicate level id " + specs[a].id);
            }
        }
    }
}

void validate(const GroundTruthScene& scene) {
    if (scene.height < 1 || scene.width < 1) {
        throw std::invalid_argument("GroundTruthScene: empty image");
    }
    for (std::size_t idx = 0; idx < scene.instances.size(); ++idx) {
        const auto& inst = scene.instances[idx];
        validate(inst.mask);
        if (inst.mask.height != scene.height || inst.mask.width != scene.width) {
            throw std::invalid_argument("GroundTruthScene: instance mask shape differs from image");
        }
        if (!inst.mask.any()) {
            throw std::invalid_argument("GroundTruthScene: instance with empty mask");
        }
        if (inst.category < 0) {
            throw std::invalid_argument("GroundTruthScene: negative category");
        }
        if (inst.kind == InstanceKind::Human) {
            if (inst.parent != -1) {
                throw std::invalid_argument("GroundTruthScene: human with a parent link");
            }
        } else {
            if (inst.parent < 0 || static_cast<std::size_t>(inst.parent) >= scene.instances.size()) {
                throw std::invalid_argument("GroundTruthScene: part parent out of range");
            }
            const auto& parent = scene.instances[static_cast<std::size_t>(inst.parent)];
            if (parent.kind != InstanceKind::Human) {
                throw std::invalid_argument("GroundTruthScene: part parent is not a human");
            }
            for (std::size_t p = 0; p < inst.mask.data.size(); ++p) {
                if (inst.mask.data[p] > parent.mask.data[p]) {
                    throw std::invalid_argument("GroundTruthScene: part escapes its parent mask");
                }
            }
        }
    }
}

double instance_scale(const BinaryMask& m) {
    const CenterExtent ce = mass_center_extent(m);
    return std::sqrt(static_cast<double>(ce.width) * static_cast<double>(ce.height));
}

std::vector<std::string> route_levels(double scale, InstanceKind kind,
                                      const std::vector<LevelSpec>& specs) {
    if (!(scale > 0.0)) throw std::invalid_argument("route_levels: scale must be positive");
    std::vector<std::string> out;
    for (const auto& s : specs) {
        if (s.kind != kind) continue;
        if (kind == InstanceKind::Human) {
            out.push_back(s.id);       // humans route by kind alone
        } else if (scale >= s.scale_min && scale < s.scale_max) {
            out.push_back(s.id);
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("route_levels: no level accepts this instance");
    }
    return out;
}

std::vector<GridCell> activated_grids(const BinaryMask& m, int grid_count, double epsilon,
                                      std::size_t image_height, std::size_t image_width) {
    if (grid_count < 1) throw std::invalid_argument("activated_grids: grid count must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("activated_grids: epsilon must lie in (0,1]");
    }
    const CenterExtent ce = mass_center_extent(m);

    const double half_w = 0.5 * epsilon * static_cast<double>(ce.width);
    const double half_h = 0.5 * epsilon * static_cast<double>(ce.height);
    const double rx0 = ce.cx - half_w, rx1 = ce.cx + half_w;
    const double ry0 = ce.cy - half_h, ry1 = ce.cy + half_h;

    const int s = grid_count;
    const double cell_w = static_cast<double>(image_width) / static_cast<double>(s);
    const double cell_h = static_cast<double>(image_height) / static_cast<double>(s);

    // Candidate index window around the region, verified with the exact
    // closed-rectangle intersection test.
    const auto clamp_idx = [s](double v) {
        return std::min(std::max(static_cast<int>(std::floor(v)), 0), s - 1);
    };
    const int j_lo = clamp_idx(rx0 / cell_w - 1.0), j_hi = clamp_idx(rx1 / cell_w + 1.0);
    const int i_lo = clamp_idx(ry0 / cell_h - 1.0), i_hi = clamp_idx(ry1 / cell_h + 1.0);

    std::vector<GridCell> cells;
    for (int i = i_lo; i <= i_hi; ++i) {
        const double cy0 = static_cast<double>(i) * cell_h;
        const double cy1 = static_cast<double>(i + 1) * cell_h;
        if (ry0 > cy1 || ry1 < cy0) continue;
        for (int j = j_lo; j <= j_hi; ++j) {
            const double cx0 = static_cast<double>(j) * cell_w;
            const double cx1 = static_cast<double>(j + 1) * cell_w;
            if (rx0 > cx1 || rx1 < cx0) continue;
            cells.push_back({i, j});
        }
    }

    constexpr std::size_t kMaxCells = 9;
    if (cells.size() > kMaxCells) {
        const auto dist2 = [&](const GridCell& c) {
            const double dx = (static_cast<double>(c.j) + 0.5) * cell_w - ce.cx;
            const double dy = (static_cast<double>(c.i) + 0.5) * cell_h - ce.cy;
            return dx * dx + dy * dy;
        };
        // stable: equal distances keep row-major order
        std::stable_sort(cells.begin(), cells.end(),
                         [&](const GridCell& a, const GridCell& b) { return dist2(a) < dist2(b); });
        cells.resize(kMaxCells);
        std::sort(cells.begin(), cells.end());
    }
    return cells;
}

std::vector<LevelAssignment> assign_cells(const GroundTruthScene& scene,
                                          const std::vector<LevelSpec>& specs, double epsilon) {
    validate(specs);

    std::vector<LevelAssignment> out;
    out.reserve(specs.size());
    for (const auto& s : specs) {
        out.push_back({s.id, s.grid_count, {}});
    }

    // Claim order: smaller scale first, then earlier scene index, so the
    // first writer of a cell is the collision winner.
    std::vector<std::size_t> order(scene.instances.size());
    std::vector<double> scales(scene.instances.size());
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        order[idx] = idx;
        scales[idx] = instance_scale(scene.instances[idx].mask);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scales[a] != scales[b]) return scales[a] < scales[b];
        return a < b;
    });

    for (std::size_t idx : order) {
        const auto& inst = scene.instances[idx];
        const auto routed = route_levels(scales[idx], inst.kind, specs);
        for (std::size_t lv = 0; lv < specs.size(); ++lv) {
            if (std::find(routed.begin(), routed.end(), specs[lv].id) == routed.end()) continue;
            const auto cells =
                activated_grids(inst.mask, specs[lv].grid_count, epsilon, scene.height, scene.width);
            for (const GridCell& c : cells) {
                out[lv].cell_to_instance.emplace(c.i * specs[lv].grid_count + c.j, idx);
            }
        }
    }
    return out;
}

std::vector<GridTargets> build_targets(const GroundTruthScene& scene,
                                       const std::vector<LevelSpec>& specs, double epsilon) {
    const auto assignments = assign_cells(scene, specs, epsilon);

    std::vector<GridTargets> out;
    out.reserve(assignments.size());
    for (const auto& a : assignments) {
        GridTargets t;
        t.level_id = a.level_id;
        t.grid_count = a.grid_count;
        t.category_target.assign(static_cast<std::size_t>(a.grid_count) * a.grid_count, 0);
        for (const auto& [cell, inst_idx] : a.cell_to_instance) {
            const auto& inst = scene.instances[inst_idx];
            t.category_target[static_cast<std::size_t>(cell)] = inst.category + 1;
            t.mask_targets.emplace(cell, inst.mask);
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace nthp

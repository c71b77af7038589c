#include "nthp/scenes.hpp"

#include <algorithm>
#include <stdexcept>

#include "nthp/rng.hpp"

namespace nthp {

namespace {

constexpr std::size_t kSlotMinWidth = 32;
constexpr std::size_t kSlotMinHeight = 48;
constexpr int kSubCols = 2;    // part sub-slots per human slot
constexpr int kSubRows = 3;
constexpr int kPartJitter = 2;
constexpr int kPartMinExtent = 7;
constexpr double kOracleLogit = 10.0;

struct Rect {
    std::size_t x0 = 0, y0 = 0, w = 0, h = 0;
};

void shuffle(std::vector<std::size_t>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.next_below(i)]);
    }
}

BinaryMask rasterize_part(bool ellipse, std::size_t image_h, std::size_t image_w, long cx, long cy,
                          long w, long h) {
    BinaryMask m = BinaryMask::zeros(image_h, image_w);
    const long x0 = cx - w / 2;
    const long y0 = cy - h / 2;
    if (!ellipse) {
        for (long y = y0; y < y0 + h; ++y) {
            for (long x = x0; x < x0 + w; ++x) {
                m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1;
            }
        }
        return m;
    }
    const double a = static_cast<double>(w) / 2.0;
    const double b = static_cast<double>(h) / 2.0;
    const double ex = static_cast<double>(x0) + (static_cast<double>(w) - 1.0) / 2.0;
    const double ey = static_cast<double>(y0) + (static_cast<double>(h) - 1.0) / 2.0;
    for (long y = y0; y < y0 + h; ++y) {
        for (long x = x0; x < x0 + w; ++x) {
            const double dx = (static_cast<double>(x) - ex) / a;
            const double dy = (static_cast<double>(y) - ey) / b;
            if (dx * dx + dy * dy <= 1.0) {
                m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1;
            }
        }
    }
    return m;
}

BinaryMask translate(const BinaryMask& m, long dx, long dy) {
    BinaryMask out = BinaryMask::zeros(m.height, m.width);
    for (std::size_t y = 0; y < m.height; ++y) {
        for (std::size_t x = 0; x < m.width; ++x) {
            if (!m.at(y, x)) continue;
            const long nx = static_cast<long>(x) + dx;
            const long ny = static_cast<long>(y) + dy;
            out.at(static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)) = 1;
        }
    }
    return out;
}

} // namespace

void validate(const SceneConfig& cfg) {
    if (cfg.height % 4 != 0 || cfg.width % 4 != 0 || cfg.height == 0 || cfg.width == 0) {
        throw std::invalid_argument("SceneConfig: image sides must be positive multiples of 4");
    }
    if (cfg.min_humans < 0 || cfg.max_humans < cfg.min_humans) {
        throw std::invalid_argument("SceneConfig: bad human count range");
    }
    if (cfg.min_parts < 1 || cfg.max_parts < cfg.min_parts) {
        throw std::invalid_argument("SceneConfig: bad parts-per-human range");
    }
    if (cfg.category_count < 1 || cfg.category_count > 254) {
        // category maps serialize as bytes holding category+1
        throw std::invalid_argument("SceneConfig: category count must lie in [1,254]");
    }
    if (!cfg.rectangles && !cfg.ellipses) {
        throw std::invalid_argument("SceneConfig: at least one part shape must be enabled");
    }
    if (!(cfg.occlusion_probability >= 0.0 && cfg.occlusion_probability <= 1.0)) {
        throw std::invalid_argument("SceneConfig: occlusion probability must lie in [0,1]");
    }
    if (cfg.max_parts > kSubCols * kSubRows) {
        throw std::invalid_argument("SceneConfig: at most 6 parts per human are supported");
    }
}

GroundTruthScene generate_scene(const SceneConfig& cfg) {
    validate(cfg);

    const std::size_t slot_cols = cfg.width / kSlotMinWidth;
    const std::size_t slot_rows = cfg.height / kSlotMinHeight;
    const std::size_t capacity = slot_cols * slot_rows;
    if (capacity < static_cast<std::size_t>(cfg.max_humans)) {
        throw std::invalid_argument("generate_scene: image too small for the requested humans");
    }
    const std::size_t slot_w = cfg.width / slot_cols;
    const std::size_t slot_h = cfg.height / slot_rows;
    const std::size_t sub_w = slot_w / kSubCols;
    const std::size_t sub_h = slot_h / kSubRows;

    // Part extents are kept small against the image so that, under the
    // default grid table, every part stays on the finest level and activates
    // at most a 2x2 block of cells.
    const long part_max = std::min<long>(
        static_cast<long>(std::min(sub_w, sub_h)) - 5,
        static_cast<long>((std::min(cfg.width, cfg.height) + 7) / 8) - 1);
    const long part_min = std::min<long>(kPartMinExtent, part_max);
    if (part_max < 5) {
        throw std::invalid_argument("generate_scene: image too small for part placement");
    }

    SplitMix64 rng(split_seed(cfg.seed, 1));

    const int n_humans = static_cast<int>(rng.next_in(cfg.min_humans, cfg.max_humans));
    std::vector<std::size_t> slots(capacity);
    for (std::size_t i = 0; i < capacity; ++i) slots[i] = i;
    shuffle(slots, rng);

    GroundTruthScene scene;
    scene.height = cfg.height;
    scene.width = cfg.width;

    std::vector<Rect> taken_slots;
    for (int h = 0; h < n_humans; ++h) {
        const std::size_t slot = slots[static_cast<std::size_t>(h)];
        const Rect slot_rect{(slot % slot_cols) * slot_w, (slot / slot_cols) * slot_h, slot_w,
                             slot_h};

        const int n_parts = static_cast<int>(rng.next_in(cfg.min_parts, cfg.max_parts));
        std::vector<std::size_t> subs(static_cast<std::size_t>(kSubCols * kSubRows));
        for (std::size_t i = 0; i < subs.size(); ++i) subs[i] = i;
        shuffle(subs, rng);

        const std::size_t human_index = scene.instances.size();
        scene.instances.push_back({InstanceKind::Human, 0, -1, BinaryMask()});

        std::vector<BinaryMask> part_masks;
        std::vector<int> part_categories;
        for (int p = 0; p < n_parts; ++p) {
            const std::size_t sub = subs[static_cast<std::size_t>(p)];
            const long sub_cx =
                static_cast<long>(slot_rect.x0 + (sub % kSubCols) * sub_w + sub_w / 2);
            const long sub_cy =
                static_cast<long>(slot_rect.y0 + (sub / kSubCols) * sub_h + sub_h / 2);

            bool ellipse = cfg.ellipses;
            if (cfg.rectangles && cfg.ellipses) ellipse = rng.next_below(2) == 1;
            const long w = rng.next_in(part_min, part_max);
            const long ph = rng.next_in(part_min, part_max);
            const long cx = sub_cx + rng.next_in(-kPartJitter, kPartJitter);
            const long cy = sub_cy + rng.next_in(-kPartJitter, kPartJitter);

            part_masks.push_back(rasterize_part(ellipse, cfg.height, cfg.width, cx, cy, w, ph));
            part_categories.push_back(static_cast<int>(rng.next_below(
                static_cast<std::uint64_t>(cfg.category_count))));
        }

        // Occlusion pulls this human 30% of the way toward the previous one.
        long shift_x = 0, shift_y = 0;
        if (h > 0 && rng.next_unit() < cfg.occlusion_probability) {
            const Rect& prev = taken_slots.back();
            shift_x = (static_cast<long>(prev.x0 + prev.w / 2) -
                       static_cast<long>(slot_rect.x0 + slot_rect.w / 2)) * 3 / 10;
            shift_y = (static_cast<long>(prev.y0 + prev.h / 2) -
                       static_cast<long>(slot_rect.y0 + slot_rect.h / 2)) * 3 / 10;
            // Clamp so every part stays inside the image.
            std::size_t min_x = cfg.width, max_x = 0, min_y = cfg.height, max_y = 0;
            for (const auto& pm : part_masks) {
                for (std::size_t y = 0; y < pm.height; ++y) {
                    for (std::size_t x = 0; x < pm.width; ++x) {
                        if (!pm.at(y, x)) continue;
                        min_x = std::min(min_x, x);
                        max_x = std::max(max_x, x);
                        min_y = std::min(min_y, y);
                        max_y = std::max(max_y, y);
                    }
                }
            }
            shift_x = std::max(shift_x, -static_cast<long>(min_x));
            shift_x = std::min(shift_x, static_cast<long>(cfg.width - 1 - max_x));
            shift_y = std::max(shift_y, -static_cast<long>(min_y));
            shift_y = std::min(shift_y, static_cast<long>(cfg.height - 1 - max_y));
        }

        BinaryMask human_mask = BinaryMask::zeros(cfg.height, cfg.width);
        for (std::size_t p = 0; p < part_masks.size(); ++p) {
            BinaryMask pm = (shift_x != 0 || shift_y != 0)
                                ? translate(part_masks[p], shift_x, shift_y)
                                : std::move(part_masks[p]);
            for (std::size_t px = 0; px < pm.data.size(); ++px) {
                human_mask.data[px] |= pm.data[px];
            }
            scene.instances.push_back({InstanceKind::Part, part_categories[p],
                                       static_cast<int>(human_index), std::move(pm)});
        }
        scene.instances[human_index].mask = std::move(human_mask);
        taken_slots.push_back(slot_rect);
    }

    validate(scene);
    return scene;
}

OracleOutputs oracle_outputs(const GroundTruthScene& scene, const std::vector<LevelSpec>& specs,
                             double epsilon, std::size_t prototype_count, int category_count) {
    validate(scene);
    const std::size_t n = scene.instances.size();
    const std::size_t k_count = prototype_count == 0 ? std::max<std::size_t>(n, 1)
                                                     : prototype_count;
    if (n > k_count) {
        throw std::invalid_argument("oracle_outputs: more instances than prototypes");
    }

    int part_classes = category_count;
    if (part_classes == 0) {
        part_classes = 1;
        for (const auto& inst : scene.instances) {
            if (inst.kind == InstanceKind::Part) {
                part_classes = std::max(part_classes, inst.category + 1);
            }
        }
    }
    for (const auto& inst : scene.instances) {
        const int limit = inst.kind == InstanceKind::Human ? 1 : part_classes;
        if (inst.category >= limit) {
            throw std::invalid_argument("oracle_outputs: instance category exceeds class count");
        }
    }

    OracleOutputs out;
    out.prototypes = DenseMap::zeros({k_count, scene.height, scene.width});
    for (std::size_t k = 0; k < n; ++k) {
        const auto& mask = scene.instances[k].mask;
        double* plane = out.prototypes.data.data() + k * mask.size();
        for (std::size_t px = 0; px < mask.size(); ++px) {
            plane[px] = mask.data[px] ? kOracleLogit : -kOracleLogit;
        }
    }

    const auto assignments = assign_cells(scene, specs, epsilon);
    for (std::size_t lv = 0; lv < specs.size(); ++lv) {
        const std::size_t s = static_cast<std::size_t>(specs[lv].grid_count);
        const std::size_t cells = s * s;
        const std::size_t classes =
            specs[lv].kind == InstanceKind::Human ? 1 : static_cast<std::size_t>(part_classes);

        LevelOracle level;
        level.level_id = specs[lv].id;
        level.coefficients = DenseMap::zeros({k_count, s, s});
        level.category_scores = DenseMap::zeros({classes, s, s});
        for (const auto& [cell, inst_idx] : assignments[lv].cell_to_instance) {
            const auto& inst = scene.instances[inst_idx];
            level.coefficients.data[inst_idx * cells + static_cast<std::size_t>(cell)] = 1.0;
            level.category_scores.data[static_cast<std::size_t>(inst.category) * cells +
                                       static_cast<std::size_t>(cell)] = 1.0;
        }
        out.levels.push_back(std::move(level));
    }
    return out;
}

OracleOutputs perturb(const OracleOutputs& outputs, double noise_scale, std::uint64_t seed) {
    if (!(noise_scale >= 0.0)) {
        throw std::invalid_argument("perturb: noise scale must be >= 0");
    }
    OracleOutputs out = outputs;
    SplitMix64 rng(split_seed(seed, 2));
    for (auto& level : out.levels) {
        for (double& v : level.coefficients.data) {
            v += (2.0 * rng.next_unit() - 1.0) * noise_scale;
        }
        for (double& v : level.category_scores.data) {
            v = std::clamp(v + (2.0 * rng.next_unit() - 1.0) * noise_scale, 0.0, 1.0);
        }
    }
    return out;
}

} // namespace nthp

#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nthp/mask.hpp"

namespace nthp {

enum class InstanceKind { Human, Part };

// One routing slot of the pyramid. Scale ranges are half-open [min, max),
// unbounded ranges use +infinity.
struct LevelSpec {
    std::string id;
    InstanceKind kind = InstanceKind::Part;
    int grid_count = 1;        // S: the level predicts on an S x S grid
    double scale_min = 0.0;
    double scale_max = std::numeric_limits<double>::infinity();
};

// Default five-level table: F1..F4 carry parts at S = 40/36/24/16 with
// overlapping scale ranges <96, 48-192, 96-384, >=192; F5 carries humans
// at S = 20 for every scale.
std::vector<LevelSpec> default_levels();

void validate(const std::vector<LevelSpec>& specs);

struct GroundTruthInstance {
    InstanceKind kind = InstanceKind::Human;
    int category = 0;
    int parent = -1;           // index of the owning human; -1 for humans
    BinaryMask mask;
};

struct GroundTruthScene {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<GroundTruthInstance> instances;
};

// Checks parent links, mask shapes, part-inside-parent containment and
// category ranges. Throws std::invalid_argument on the first violation.
void validate(const GroundTruthScene& scene);

struct GridCell {
    int i = 0;                 // row
    int j = 0;                 // column
    auto operator<=>(const GridCell&) const = default;
};

// Per-level training targets. category_target holds 0 for background and
// category+1 for assigned cells; mask_targets is keyed by i*S+j and mirrors
// exactly the nonzero cells of category_target.
struct GridTargets {
    std::string level_id;
    int grid_count = 0;
    std::vector<int> category_target;
    std::map<int, BinaryMask> mask_targets;
};

// Object scale: sqrt(w*h) of the minimal bounding box of the foreground.
double instance_scale(const BinaryMask& m);

// Levels an instance is assigned to. Humans go to every human level
// regardless of scale; parts go to the part levels whose range contains
// the scale (ranges overlap, so one or two). Throws if nothing matches.
std::vector<std::string> route_levels(double scale, InstanceKind kind,
                                      const std::vector<LevelSpec>& specs);

// Grid cells activated by an instance on an S x S grid: every cell whose
// rectangle intersects the center region (the epsilon-scaled box around the
// mass center), capped to the 9 cells whose centers are nearest the mass
// center. Distance ties break in row-major order.
std::vector<GridCell> activated_grids(const BinaryMask& m, int grid_count, double epsilon,
                                      std::size_t image_height, std::size_t image_width);

// Cell ownership on one level before target materialization; key is the
// flattened cell index i*S+j, value the owning instance index.
struct LevelAssignment {
    std::string level_id;
    int grid_count = 0;
    std::map<int, std::size_t> cell_to_instance;
};

// Resolves which instance owns which grid cell on every level. When two
// instances claim the same cell the smaller-scale one wins, ties by earlier
// scene index; the 9-cell cap is applied per instance before collisions.
std::vector<LevelAssignment> assign_cells(const GroundTruthScene& scene,
                                          const std::vector<LevelSpec>& specs, double epsilon);

// Full label assignment: category and mask targets for every level.
std::vector<GridTargets> build_targets(const GroundTruthScene& scene,
                                       const std::vector<LevelSpec>& specs, double epsilon);

} // namespace nthp

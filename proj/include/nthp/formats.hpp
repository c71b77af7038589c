#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nthp/assignment.hpp"
#include "nthp/grouping.hpp"
#include "nthp/metrics.hpp"
#include "nthp/synthesis.hpp"

namespace nthp {

// Scene manifest: a JSON document next to one tensor file per instance mask.
// Layout: {"image_size": [H, W], "instances": [{"kind", "category",
// "parent", "mask_file"}, ...]}; mask paths are relative to the manifest.
void write_scene(const std::filesystem::path& dir, const GroundTruthScene& scene);
GroundTruthScene read_scene(const std::filesystem::path& manifest_path);

// Level table config: {"levels": [{"id", "kind", "grids", "scale_min",
// "scale_max"}]}; a missing or null scale_max means unbounded.
std::vector<LevelSpec> read_levels(const std::filesystem::path& path);

// Candidate lists for the grouping pipeline:
// {"candidates": [{"mask_file", "category", "score"}, ...]}.
void write_candidates(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<ScoredInstance>& candidates);
std::vector<ScoredInstance> read_candidates(const std::filesystem::path& path);

// Parsing results: {"results": [{"mask_file", "category_map_file",
// "parsing_score"}, ...]}. Category maps are byte tensors holding
// category+1 (0 = unassigned), which caps usable categories at 254.
void write_results(const std::filesystem::path& dir, const std::vector<ParsingResult>& results);
std::vector<ParsingResult> read_results(const std::filesystem::path& path);

// Metric report: {"records": [{"metric", "threshold"?, "value", "tp"?,
// "fp"?, "fn"?}, ...]}.
std::string report_to_json(const std::vector<MetricRecord>& records);
void write_report(const std::filesystem::path& path, const std::vector<MetricRecord>& records);

// Shared atomic text write (temp file + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace nthp

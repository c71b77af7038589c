#include "nthp/formats.hpp"

#include <fstream>
#include <limits>

#include <json.hpp>

#include "nthp/tensor_io.hpp"

namespace nthp {

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoStatus::OpenFailed, "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError(IoStatus::TruncatedPayload,
                      "malformed JSON in " + path.string() + ": " + e.what());
    }
    return doc;
}

std::string mask_file_name(const std::string& stem, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03zu.nthp", index);
    return stem + buf;
}

std::filesystem::path sibling(const std::filesystem::path& anchor, const std::string& rel) {
    return anchor.parent_path() / rel;
}

} // namespace

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(IoStatus::OpenFailed, "cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError(IoStatus::WriteFailed, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(IoStatus::WriteFailed, "rename failed for " + path.string());
}

void write_scene(const std::filesystem::path& dir, const GroundTruthScene& scene) {
    validate(scene);
    std::filesystem::create_directories(dir);

    json instances = json::array();
    for (std::size_t idx = 0; idx < scene.instances.size(); ++idx) {
        const auto& inst = scene.instances[idx];
        const std::string file = mask_file_name("mask", idx);
        write_tensor(dir / file, inst.mask);
        json rec;
        rec["kind"] = inst.kind == InstanceKind::Human ? "human" : "part";
        rec["category"] = inst.category;
        if (inst.kind == InstanceKind::Human) {
            rec["parent"] = nullptr;
        } else {
            rec["parent"] = inst.parent;
        }
        rec["mask_file"] = file;
        instances.push_back(rec);
    }
    json doc;
    doc["image_size"] = {scene.height, scene.width};
    doc["instances"] = instances;
    write_text_atomic(dir / "manifest.json", doc.dump(2) + "\n");
}

GroundTruthScene read_scene(const std::filesystem::path& manifest_path) {
    const json doc = load_json(manifest_path);
    GroundTruthScene scene;
    try {
        scene.height = doc.at("image_size").at(0).get<std::size_t>();
        scene.width = doc.at("image_size").at(1).get<std::size_t>();
        for (const auto& rec : doc.at("instances")) {
            GroundTruthInstance inst;
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "human") {
                inst.kind = InstanceKind::Human;
            } else if (kind == "part") {
                inst.kind = InstanceKind::Part;
            } else {
                throw std::invalid_argument("scene manifest: unknown kind " + kind);
            }
            inst.category = rec.at("category").get<int>();
            inst.parent = rec.at("parent").is_null() ? -1 : rec.at("parent").get<int>();
            inst.mask = read_mask(sibling(manifest_path, rec.at("mask_file").get<std::string>()));
            scene.instances.push_back(std::move(inst));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scene manifest: ") + e.what());
    }
    validate(scene);
    return scene;
}

std::vector<LevelSpec> read_levels(const std::filesystem::path& path) {
    const json doc = load_json(path);
    std::vector<LevelSpec> specs;
    try {
        for (const auto& rec : doc.at("levels")) {
            LevelSpec s;
            s.id = rec.at("id").get<std::string>();
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "human") {
                s.kind = InstanceKind::Human;
            } else if (kind == "part") {
                s.kind = InstanceKind::Part;
            } else {
                throw std::invalid_argument("level config: unknown kind " + kind);
            }
            s.grid_count = rec.at("grids").get<int>();
            s.scale_min = rec.value("scale_min", 0.0);
            if (rec.contains("scale_max") && !rec.at("scale_max").is_null()) {
                s.scale_max = rec.at("scale_max").get<double>();
            } else {
                s.scale_max = std::numeric_limits<double>::infinity();
            }
            specs.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("level config: ") + e.what());
    }
    validate(specs);
    return specs;
}

void write_candidates(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<ScoredInstance>& candidates) {
    std::filesystem::create_directories(dir);
    json list = json::array();
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
        const std::string file = mask_file_name(name, idx);
        write_tensor(dir / file, candidates[idx].mask);
        list.push_back({{"mask_file", file},
                        {"category", candidates[idx].category},
                        {"score", candidates[idx].score}});
    }
    json doc;
    doc["candidates"] = list;
    write_text_atomic(dir / (name + ".json"), doc.dump(2) + "\n");
}

std::vector<ScoredInstance> read_candidates(const std::filesystem::path& path) {
    const json doc = load_json(path);
    std::vector<ScoredInstance> out;
    try {
        for (const auto& rec : doc.at("candidates")) {
            ScoredInstance c;
            c.mask = read_mask(sibling(path, rec.at("mask_file").get<std::string>()));
            c.category = rec.at("category").get<int>();
            c.score = rec.at("score").get<double>();
            if (c.category < 0) throw std::invalid_argument("candidates: negative category");
            if (!(c.score >= 0.0 && c.score <= 1.0)) {
                throw std::invalid_argument("candidates: score outside [0,1]");
            }
            if (!c.mask.any()) throw std::invalid_argument("candidates: empty mask");
            out.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("candidates: ") + e.what());
    }
    return out;
}

void write_results(const std::filesystem::path& dir, const std::vector<ParsingResult>& results) {
    std::filesystem::create_directories(dir);
    json list = json::array();
    for (std::size_t idx = 0; idx < results.size(); ++idx) {
        const auto& r = results[idx];
        const std::string mask_file = mask_file_name("result_mask", idx);
        const std::string cat_file = mask_file_name("result_categories", idx);
        write_tensor(dir / mask_file, r.human_mask);

        Tensor cats;
        cats.dtype = TensorDtype::Uint8;
        cats.dims = {r.human_mask.height, r.human_mask.width};
        cats.bytes.reserve(r.category_map.size());
        for (int v : r.category_map) {
            if (v < 0 || v > 255) {
                throw std::invalid_argument("results: category id too large for the byte format");
            }
            cats.bytes.push_back(static_cast<std::uint8_t>(v));
        }
        write_tensor(dir / cat_file, cats);

        list.push_back({{"mask_file", mask_file},
                        {"category_map_file", cat_file},
                        {"parsing_score", r.parsing_score}});
    }
    json doc;
    doc["results"] = list;
    write_text_atomic(dir / "results.json", doc.dump(2) + "\n");
}

std::vector<ParsingResult> read_results(const std::filesystem::path& path) {
    const json doc = load_json(path);
    std::vector<ParsingResult> out;
    try {
        for (const auto& rec : doc.at("results")) {
            ParsingResult r;
            r.human_mask = read_mask(sibling(path, rec.at("mask_file").get<std::string>()));
            const Tensor cats =
                read_tensor(sibling(path, rec.at("category_map_file").get<std::string>()));
            if (cats.dtype != TensorDtype::Uint8 || cats.dims.size() != 2 ||
                cats.dims[0] != r.human_mask.height || cats.dims[1] != r.human_mask.width) {
                throw std::invalid_argument("results: category map does not match the mask");
            }
            r.category_map.assign(cats.bytes.begin(), cats.bytes.end());
            r.parsing_score = rec.at("parsing_score").get<double>();
            for (std::size_t px = 0; px < r.category_map.size(); ++px) {
                if (r.category_map[px] != 0 && !r.human_mask.data[px]) {
                    throw std::invalid_argument("results: category outside the instance mask");
                }
            }
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("results: ") + e.what());
    }
    return out;
}

std::string report_to_json(const std::vector<MetricRecord>& records) {
    json list = json::array();
    for (const auto& r : records) {
        json rec;
        rec["metric"] = r.metric;
        if (r.has_threshold) rec["threshold"] = r.threshold;
        rec["value"] = r.value;
        if (r.has_counts) {
            rec["tp"] = r.counts.tp;
            rec["fp"] = r.counts.fp;
            rec["fn"] = r.counts.fn;
        }
        list.push_back(rec);
    }
    json doc;
    doc["records"] = list;
    return doc.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const std::vector<MetricRecord>& records) {
    write_text_atomic(path, report_to_json(records));
}

} // namespace nthp

#pragma once

// Detection exchange files:
//   { "image": str, "width": int, "height": int, "branch": "COLOR"|"GRAY",
//     "detections": [ { "bbox": [x,y,w,h], "labels": [str...], "confidence": num } ] }

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "detect.hpp"

namespace ricescope {

using json = nlohmann::json;

struct ParseOptions {
    bool strict = false;
    std::vector<std::string>* warnings = nullptr;  // lenient-mode notices
};

namespace detail {

inline void check_fields(const json& obj, std::initializer_list<const char*> known, const std::string& where,
                         const ParseOptions& opt) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (ok) continue;
        if (opt.strict) fail(ErrorCode::PARSE_ERROR, "unknown field '" + it.key() + "' in " + where);
        if (opt.warnings) opt.warnings->push_back("ignoring unknown field '" + it.key() + "' in " + where);
    }
}

/// Integral values are written as JSON integers so that files round-trip.
inline json number(double v) {
    if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
    return v;
}

template <typename T>
T get_required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) fail(ErrorCode::PARSE_ERROR, std::string("missing field '") + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::PARSE_ERROR, std::string("field '") + key + "' in " + where + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IO_ERROR, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::PARSE_ERROR, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IO_ERROR, "cannot write " + path);
    out << text;
    if (!out) fail(ErrorCode::IO_ERROR, "write failed for " + path);
}

inline BoundingBox parse_bbox(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4)
        fail(ErrorCode::PARSE_ERROR, where + ": bbox must be [x, y, w, h]");
    for (const auto& v : j)
        if (!v.is_number()) fail(ErrorCode::PARSE_ERROR, where + ": bbox entries must be numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json bbox_json(const BoundingBox& b) {
    return json::array({number(b.x), number(b.y), number(b.w), number(b.h)});
}

} // namespace detail

inline Branch parse_branch(const std::string& s) {
    if (s == "COLOR") return Branch::COLOR;
    if (s == "GRAY") return Branch::GRAY;
    fail(ErrorCode::PARSE_ERROR, "unknown branch '" + s + "'");
}

inline DetectionSet parse_detections(const json& j, std::optional<Branch> expected = std::nullopt,
                                     const ParseOptions& opt = {}) {
    if (!j.is_object()) fail(ErrorCode::PARSE_ERROR, "detection file must hold a JSON object");
    detail::check_fields(j, {"image", "width", "height", "branch", "detections"}, "detection file", opt);

    DetectionSet set;
    set.image = j.contains("image") ? detail::get_required<std::string>(j, "image", "detection file") : "";
    set.width = detail::get_required<int>(j, "width", "detection file");
    set.height = detail::get_required<int>(j, "height", "detection file");
    if (set.width <= 0 || set.height <= 0) fail(ErrorCode::PARSE_ERROR, "image dimensions must be positive");
    set.branch = parse_branch(detail::get_required<std::string>(j, "branch", "detection file"));
    if (expected && *expected != set.branch)
        fail(ErrorCode::BRANCH_MISMATCH, std::string("expected a ") + to_cstr(*expected) +
                                             " detection file, got " + to_cstr(set.branch));

    const auto& dets = j.contains("detections") ? j.at("detections") : json::array();
    if (!dets.is_array()) fail(ErrorCode::PARSE_ERROR, "'detections' must be an array");
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto& e = dets[i];
        const std::string where = "detection #" + std::to_string(i);
        if (!e.is_object()) fail(ErrorCode::PARSE_ERROR, where + " must be an object");
        detail::check_fields(e, {"bbox", "labels", "confidence"}, where, opt);

        Detection d;
        d.branch = set.branch;
        if (!e.contains("bbox")) fail(ErrorCode::PARSE_ERROR, where + ": missing bbox");
        d.box = detail::parse_bbox(e.at("bbox"), where);
        if (!d.box.within(set.width, set.height))
            fail(ErrorCode::OUT_OF_BOUNDS_BOX, where + " lies outside the image or is empty");

        const auto labels = detail::get_required<std::vector<std::string>>(e, "labels", where);
        if (labels.empty()) fail(ErrorCode::PARSE_ERROR, where + ": labels must not be empty");
        for (const auto& name : labels) {
            const auto l = parse_raw_label(name);
            if (!l) fail(ErrorCode::PARSE_ERROR, where + ": unknown label '" + name + "'");
            if (!label_allowed_on(set.branch, *l))
                fail(ErrorCode::BRANCH_MISMATCH,
                     where + ": label " + name + " is not produced by the " + to_cstr(set.branch) + " branch");
            d.labels.push_back(*l);
        }
        normalize_labels(d.labels);

        if (e.contains("confidence") && !e.at("confidence").is_null()) {
            if (!e.at("confidence").is_number()) fail(ErrorCode::PARSE_ERROR, where + ": confidence must be a number");
            d.confidence = e.at("confidence").get<double>();
            if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
                fail(ErrorCode::PARSE_ERROR, where + ": confidence outside [0, 1]");
        }
        set.detections.push_back(std::move(d));
    }
    return set;
}

inline json detections_to_json(const DetectionSet& set) {
    json dets = json::array();
    for (const auto& d : set.detections) {
        json labels = json::array();
        for (auto l : d.labels) labels.push_back(to_cstr(l));
        dets.push_back({{"bbox", detail::bbox_json(d.box)}, {"labels", labels}, {"confidence", detail::number(d.confidence)}});
    }
    return {{"image", set.image},
            {"width", set.width},
            {"height", set.height},
            {"branch", to_cstr(set.branch)},
            {"detections", dets}};
}

inline DetectionSet load_detections(const std::string& path, std::optional<Branch> expected = std::nullopt,
                                    const ParseOptions& opt = {}) {
    return parse_detections(detail::read_json_file(path), expected, opt);
}

inline void save_detections(const DetectionSet& set, const std::string& path) {
    detail::write_text_file(path, detections_to_json(set).dump(2) + "\n");
}

} // namespace ricescope

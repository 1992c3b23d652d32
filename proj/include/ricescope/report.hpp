#pragma once

// Report file, schema version 1. Keys are written in a fixed order:
//
// {
//   "schemaVersion": 1,
//   "image": str, "width": int, "height": int,
//   "kernels": [ { "bbox": [x,y,w,h], "label": "PC&YC", "properties": ["PC","YC"],
//                  "area": int, "centroid": [x,y], "weight": g, "confidence": num } ],
//   "typeWeights": { "SO": g, "PC": g, "MC": g, "YC": g, "SP": g, "BR": g },
//   "totalWeight": g,
//   "ratios": { "SO": r, ... },
//   "unresolved": [ { "bbox", "labels", "confidence", "branch", "reason", "area" } ],
//   "unresolvedArea": int,
//   "calibration": { "scaleTag": str, "densities": { ... } },
//   "config": { ... effective pipeline configuration ... }
// }

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "detection_io.hpp"
#include "weigh.hpp"

namespace ricescope {

inline constexpr int kReportSchemaVersion = 1;

using ordered_json = nlohmann::ordered_json;

/// Types in the order the report lists them.
inline constexpr std::array<KernelProperty, kPropertyCount> kReportOrder{
    KernelProperty::SO, KernelProperty::PC, KernelProperty::MC,
    KernelProperty::YC, KernelProperty::SP, KernelProperty::BR};

struct ReportFile {
    AnalysisReport report;
    ordered_json config = ordered_json::object();
};

namespace detail {

inline ordered_json box_array(const BoundingBox& b) {
    return ordered_json::array({number(b.x), number(b.y), number(b.w), number(b.h)});
}

inline ordered_json per_type(const std::array<double, kPropertyCount>& v) {
    ordered_json o = ordered_json::object();
    for (auto p : kReportOrder) o[to_cstr(p)] = v[index_of(p)];
    return o;
}

inline std::array<double, kPropertyCount> read_per_type(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_object()) fail(ErrorCode::PARSE_ERROR, std::string("report needs '") + key + "'");
    std::array<double, kPropertyCount> out{};
    for (auto p : kAllProperties) out[index_of(p)] = get_required<double>(j.at(key), to_cstr(p), key);
    return out;
}

} // namespace detail

inline ordered_json report_to_json(const AnalysisReport& r, const ordered_json& config = ordered_json::object()) {
    ordered_json out;
    out["schemaVersion"] = kReportSchemaVersion;
    out["image"] = r.image;
    out["width"] = r.width;
    out["height"] = r.height;

    ordered_json kernels = ordered_json::array();
    for (const auto& k : r.kernels) {
        ordered_json props = ordered_json::array();
        for (auto p : k.properties.values()) props.push_back(to_cstr(p));
        ordered_json e;
        e["bbox"] = detail::box_array(k.box);
        e["label"] = k.properties.label();
        e["properties"] = props;
        e["area"] = k.area;
        e["centroid"] = {k.centroid_x, k.centroid_y};
        e["weight"] = k.weight;
        e["confidence"] = k.confidence;
        kernels.push_back(std::move(e));
    }
    out["kernels"] = std::move(kernels);
    out["typeWeights"] = detail::per_type(r.type_weight);
    out["totalWeight"] = r.total_weight;
    out["ratios"] = detail::per_type(r.ratio);

    ordered_json unresolved = ordered_json::array();
    for (const auto& u : r.unresolved) {
        ordered_json labels = ordered_json::array();
        for (auto l : u.detection.labels) labels.push_back(to_cstr(l));
        ordered_json e;
        e["bbox"] = detail::box_array(u.detection.box);
        e["labels"] = labels;
        e["confidence"] = detail::number(u.detection.confidence);
        e["branch"] = to_cstr(u.detection.branch);
        e["reason"] = to_cstr(u.reason);
        e["area"] = u.area;
        unresolved.push_back(std::move(e));
    }
    out["unresolved"] = std::move(unresolved);
    out["unresolvedArea"] = r.unresolved_area;

    ordered_json cal;
    cal["scaleTag"] = r.densities.scale_tag;
    cal["densities"] = detail::per_type(r.densities.rho);
    out["calibration"] = std::move(cal);
    out["config"] = config;
    return out;
}

inline ReportFile parse_report(const json& j, const ParseOptions& opt = {}) {
    if (!j.is_object()) fail(ErrorCode::PARSE_ERROR, "report must be a JSON object");
    detail::check_fields(j,
                         {"schemaVersion", "image", "width", "height", "kernels", "typeWeights", "totalWeight",
                          "ratios", "unresolved", "unresolvedArea", "calibration", "config"},
                         "report", opt);
    const int version = detail::get_required<int>(j, "schemaVersion", "report");
    if (version != kReportSchemaVersion)
        fail(ErrorCode::PARSE_ERROR, "unsupported report schema version " + std::to_string(version));

    ReportFile file;
    auto& r = file.report;
    r.image = detail::get_required<std::string>(j, "image", "report");
    r.width = detail::get_required<int>(j, "width", "report");
    r.height = detail::get_required<int>(j, "height", "report");

    const auto kernels = detail::get_required<json>(j, "kernels", "report");
    if (!kernels.is_array()) fail(ErrorCode::PARSE_ERROR, "'kernels' must be an array");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const auto& e = kernels[i];
        const std::string where = "kernel #" + std::to_string(i);
        detail::check_fields(e, {"bbox", "label", "properties", "area", "centroid", "weight", "confidence"}, where, opt);
        KernelRecord k;
        k.box = detail::parse_bbox(detail::get_required<json>(e, "bbox", where), where);
        std::vector<KernelProperty> props;
        for (const auto& name : detail::get_required<std::vector<std::string>>(e, "properties", where)) {
            const auto p = parse_property(name);
            if (!p) fail(ErrorCode::PARSE_ERROR, where + ": unknown property '" + name + "'");
            props.push_back(*p);
        }
        k.properties = make_property_set(props);
        k.area = detail::get_required<std::int64_t>(e, "area", where);
        const auto c = detail::get_required<std::vector<double>>(e, "centroid", where);
        if (c.size() != 2) fail(ErrorCode::PARSE_ERROR, where + ": centroid must be [x, y]");
        k.centroid_x = c[0];
        k.centroid_y = c[1];
        k.weight = detail::get_required<double>(e, "weight", where);
        k.confidence = detail::get_required<double>(e, "confidence", where);
        r.kernels.push_back(k);
    }
    r.type_weight = detail::read_per_type(j, "typeWeights");
    r.total_weight = detail::get_required<double>(j, "totalWeight", "report");
    r.ratio = detail::read_per_type(j, "ratios");

    const auto unresolved = detail::get_required<json>(j, "unresolved", "report");
    if (!unresolved.is_array()) fail(ErrorCode::PARSE_ERROR, "'unresolved' must be an array");
    for (std::size_t i = 0; i < unresolved.size(); ++i) {
        const auto& e = unresolved[i];
        const std::string where = "unresolved #" + std::to_string(i);
        detail::check_fields(e, {"bbox", "labels", "confidence", "branch", "reason", "area"}, where, opt);
        UnresolvedDetection u;
        u.detection.box = detail::parse_bbox(detail::get_required<json>(e, "bbox", where), where);
        for (const auto& name : detail::get_required<std::vector<std::string>>(e, "labels", where)) {
            const auto l = parse_raw_label(name);
            if (!l) fail(ErrorCode::PARSE_ERROR, where + ": unknown label '" + name + "'");
            u.detection.labels.push_back(*l);
        }
        normalize_labels(u.detection.labels);
        u.detection.confidence = detail::get_required<double>(e, "confidence", where);
        u.detection.branch = parse_branch(detail::get_required<std::string>(e, "branch", where));
        const auto reason = parse_unresolved_reason(detail::get_required<std::string>(e, "reason", where));
        if (!reason) fail(ErrorCode::PARSE_ERROR, where + ": unknown reason");
        u.reason = *reason;
        u.area = detail::get_required<std::int64_t>(e, "area", where);
        r.unresolved.push_back(std::move(u));
    }
    r.unresolved_area = detail::get_required<std::int64_t>(j, "unresolvedArea", "report");

    const auto cal = detail::get_required<json>(j, "calibration", "report");
    r.densities.scale_tag = detail::get_required<std::string>(cal, "scaleTag", "calibration");
    r.densities.rho = detail::read_per_type(cal, "densities");
    if (j.contains("config")) file.config = ordered_json::parse(j.at("config").dump());
    return file;
}

inline void write_report(const AnalysisReport& r, const std::string& path,
                         const ordered_json& config = ordered_json::object()) {
    detail::write_text_file(path, report_to_json(r, config).dump(2) + "\n");
}

inline ReportFile read_report(const std::string& path, const ParseOptions& opt = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IO_ERROR, "cannot open " + path);
    std::stringstream text;
    text << in.rdbuf();
    ordered_json ordered;
    try {
        ordered = ordered_json::parse(text.str());
    } catch (const ordered_json::exception& e) {
        fail(ErrorCode::PARSE_ERROR, path + ": " + e.what());
    }
    auto file = parse_report(json::parse(text.str()), opt);
    if (ordered.contains("config")) file.config = ordered.at("config");
    return file;
}

} // namespace ricescope

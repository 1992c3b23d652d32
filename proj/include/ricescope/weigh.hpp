#pragma once

// Weight-per-pixel calibration and weight-ratio estimation.
//
// A kernel of single type t weighs rho_t * area. A dual kernel (a, b) is priced
// twice: rho_a * area counts toward W_a and rho_b * area toward W_b, while its
// contribution to the grand total is the mean of the two. Ratios are W_t / total,
// so they sum to more than one whenever duals are present.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "detection_io.hpp"

namespace ricescope {

struct CalibrationSample {
    KernelProperty type = KernelProperty::SO;
    double weight = 0;  // grams
    double area = 0;    // pixels
    std::int64_t count = 0;
};

inline DensityTable calibrate(const std::vector<CalibrationSample>& samples, std::string scale_tag = "") {
    std::array<std::optional<CalibrationSample>, kPropertyCount> by_type;
    for (const auto& s : samples) {
        if (!(s.weight > 0) || !(s.area > 0) || s.count <= 0)
            fail(ErrorCode::NONPOSITIVE_INPUT,
                 std::string("calibration sample for ") + to_cstr(s.type) + " needs positive weight, area and count");
        auto& slot = by_type[index_of(s.type)];
        if (slot) fail(ErrorCode::DUPLICATE_TYPE, std::string("two calibration samples for ") + to_cstr(s.type));
        slot = s;
    }
    DensityTable d;
    d.scale_tag = std::move(scale_tag);
    for (auto p : kAllProperties) {
        const auto& slot = by_type[index_of(p)];
        if (!slot) fail(ErrorCode::MISSING_TYPE, std::string("no calibration sample for ") + to_cstr(p));
        d.rho[index_of(p)] = slot->weight / slot->area;
    }
    return d;
}

/// Refuses to combine a density table with measurements taken at another scale.
inline void check_scale(const DensityTable& d, const std::string& scale_tag) {
    if (!scale_tag.empty() && !d.scale_tag.empty() && scale_tag != d.scale_tag)
        fail(ErrorCode::SCALE_MISMATCH, "densities calibrated for scale '" + d.scale_tag + "' used at scale '" +
                                            scale_tag + "'");
}

struct KernelWeight {
    double total = 0;                           // contribution to the grand total
    std::array<double, kPropertyCount> by_type{};  // rho_t * area for each member type
};

inline KernelWeight kernel_weight(PropertySet props, std::int64_t area, const DensityTable& d) {
    if (area <= 0) fail(ErrorCode::NONPOSITIVE_AREA, "kernel area must be positive");
    KernelWeight w;
    const auto members = props.values();
    for (auto p : members) {
        w.by_type[index_of(p)] = d[p] * static_cast<double>(area);
        w.total += w.by_type[index_of(p)];
    }
    if (members.size() == 2) w.total /= 2.0;
    return w;
}

inline KernelWeight kernel_weight(const KernelInstance& k, const DensityTable& d) {
    return kernel_weight(k.properties, k.area(), d);
}

struct WeightEstimate {
    std::vector<double> kernel_weights;  // per input kernel, contribution to the total
    std::array<double, kPropertyCount> type_weight{};
    double total_weight = 0;
    std::array<double, kPropertyCount> ratio{};
};

/// The twelve defined classes in a fixed order: singles, then the pairs.
inline std::vector<PropertySet> defined_classes() {
    std::vector<PropertySet> out;
    for (auto p : kAllProperties) out.push_back(PropertySet::single(p));
    for (const auto& [a, b] : kAllowedPairs) out.push_back(PropertySet::make({a, b}));
    return out;
}

namespace detail {

struct Weighed {
    PropertySet properties;
    std::int64_t area;
};

// Areas are summed per class as integers before any density is applied, so the
// result does not depend on kernel order.
inline WeightEstimate weigh_items(const std::vector<Weighed>& items, const DensityTable& d) {
    if (items.empty()) fail(ErrorCode::EMPTY_INPUT, "no kernels to weigh");
    const auto classes = defined_classes();
    std::array<std::int64_t, 12> class_area{};
    WeightEstimate est;
    est.kernel_weights.reserve(items.size());
    for (const auto& it : items) {
        est.kernel_weights.push_back(kernel_weight(it.properties, it.area, d).total);
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (classes[c] == it.properties) class_area[c] += it.area;
    }

    std::array<std::int64_t, kPropertyCount> type_area{};
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (auto p : classes[c].values()) type_area[index_of(p)] += class_area[c];
    for (auto p : kAllProperties)
        est.type_weight[index_of(p)] = d[p] * static_cast<double>(type_area[index_of(p)]);

    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (!class_area[c]) continue;
        const auto v = classes[c].values();
        double rho = 0;
        for (auto p : v) rho += d[p];
        est.total_weight += rho / static_cast<double>(v.size()) * static_cast<double>(class_area[c]);
    }
    for (auto p : kAllProperties) est.ratio[index_of(p)] = est.type_weight[index_of(p)] / est.total_weight;
    return est;
}

} // namespace detail

inline WeightEstimate weight_ratios(const std::vector<KernelInstance>& kernels, const DensityTable& d) {
    std::vector<detail::Weighed> items;
    items.reserve(kernels.size());
    for (const auto& k : kernels) items.push_back({k.properties, k.area()});
    return detail::weigh_items(items, d);
}

inline WeightEstimate weight_ratios(const std::vector<KernelRecord>& kernels, const DensityTable& d) {
    std::vector<detail::Weighed> items;
    items.reserve(kernels.size());
    for (const auto& k : kernels) items.push_back({k.properties, k.area});
    return detail::weigh_items(items, d);
}

inline double estimate_group_weight(double total_area, KernelProperty type, const DensityTable& d) {
    if (total_area < 0) fail(ErrorCode::NONPOSITIVE_INPUT, "group area must not be negative");
    return total_area * d[type];
}

struct DensityGroup {
    std::string name;
    KernelProperty type = KernelProperty::SO;
    double accurate_weight = 0;
    double area = 0;
};

struct DensityComparison {
    std::string name;
    KernelProperty type = KernelProperty::SO;
    double accurate_percent = 0;   // accurate weight relative to the sound reference
    double area_percent = 0;       // single-density estimate
    double estimated_percent = 0;  // per-type density estimate
    double area_error = 0;         // |area% - accurate%| / accurate%
    double estimated_error = 0;    // |estimated% - accurate%| / accurate%
};

/// Percentages of each group relative to the pooled SO groups, under a single
/// shared density (area ratio) and under per-type densities.
inline std::vector<DensityComparison> compare_density_modes(const std::vector<DensityGroup>& groups,
                                                            const DensityTable& d) {
    double so_weight = 0, so_area = 0;
    for (const auto& g : groups) {
        if (!(g.accurate_weight > 0) || !(g.area > 0))
            fail(ErrorCode::NONPOSITIVE_INPUT, "group " + g.name + " needs positive weight and area");
        if (g.type == KernelProperty::SO) { so_weight += g.accurate_weight; so_area += g.area; }
    }
    if (so_area == 0) fail(ErrorCode::MISSING_TYPE, "density comparison needs at least one SO group");
    const double so_estimate = estimate_group_weight(so_area, KernelProperty::SO, d);

    std::vector<DensityComparison> out;
    for (const auto& g : groups) {
        DensityComparison c;
        c.name = g.name;
        c.type = g.type;
        c.accurate_percent = 100.0 * g.accurate_weight / so_weight;
        c.area_percent = 100.0 * g.area / so_area;
        c.estimated_percent = 100.0 * estimate_group_weight(g.area, g.type, d) / so_estimate;
        c.area_error = std::fabs(c.area_percent - c.accurate_percent) / c.accurate_percent;
        c.estimated_error = std::fabs(c.estimated_percent - c.accurate_percent) / c.accurate_percent;
        out.push_back(std::move(c));
    }
    return out;
}

/// Assembles the report for one image. An image without kernels gives zero totals.
inline AnalysisReport build_report(std::string image, int width, int height,
                                   const std::vector<KernelInstance>& kernels,
                                   std::vector<UnresolvedDetection> unresolved, const DensityTable& d) {
    d.validate();
    AnalysisReport r;
    r.image = std::move(image);
    r.width = width;
    r.height = height;
    r.densities = d;
    for (const auto& u : unresolved) r.unresolved_area += u.area;
    r.unresolved = std::move(unresolved);
    if (kernels.empty()) return r;

    const auto est = weight_ratios(kernels, d);
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const auto& k = kernels[i];
        const auto [cx, cy] = k.contour->centroid();
        r.kernels.push_back({to_box(k.contour->rect()), k.properties, k.area(), cx, cy, est.kernel_weights[i],
                             k.confidence});
    }
    r.type_weight = est.type_weight;
    r.total_weight = est.total_weight;
    r.ratio = est.ratio;
    return r;
}

// Calibration file: { "scaleTag": str, "densities": { "SO": num, ... } }

inline json density_table_to_json(const DensityTable& d) {
    json dens = json::object();
    for (auto p : {KernelProperty::SO, KernelProperty::PC, KernelProperty::MC, KernelProperty::YC, KernelProperty::SP,
                   KernelProperty::BR})
        dens[to_cstr(p)] = d[p];
    return {{"scaleTag", d.scale_tag}, {"densities", dens}};
}

inline DensityTable parse_density_table(const json& j, const ParseOptions& opt = {}) {
    if (!j.is_object()) fail(ErrorCode::PARSE_ERROR, "calibration file must hold a JSON object");
    detail::check_fields(j, {"scaleTag", "densities"}, "calibration file", opt);
    DensityTable d;
    d.scale_tag = j.contains("scaleTag") ? detail::get_required<std::string>(j, "scaleTag", "calibration file") : "";
    if (!j.contains("densities") || !j.at("densities").is_object())
        fail(ErrorCode::PARSE_ERROR, "calibration file needs a 'densities' object");
    const auto& dens = j.at("densities");
    for (auto it = dens.begin(); it != dens.end(); ++it) {
        const auto p = parse_property(it.key());
        if (!p) {
            if (opt.strict) fail(ErrorCode::PARSE_ERROR, "unknown density type '" + it.key() + "'");
            if (opt.warnings) opt.warnings->push_back("ignoring density for unknown type '" + it.key() + "'");
            continue;
        }
        if (!it.value().is_number()) fail(ErrorCode::PARSE_ERROR, "density for " + it.key() + " must be a number");
        d.rho[index_of(*p)] = it.value().get<double>();
    }
    for (auto p : kAllProperties)
        if (!dens.contains(to_cstr(p))) fail(ErrorCode::MISSING_TYPE, std::string("no density for ") + to_cstr(p));
    d.validate();
    return d;
}

inline DensityTable load_density_table(const std::string& path, const ParseOptions& opt = {}) {
    return parse_density_table(detail::read_json_file(path), opt);
}

inline void save_density_table(const DensityTable& d, const std::string& path) {
    detail::write_text_file(path, density_table_to_json(d).dump(2) + "\n");
}

} // namespace ricescope

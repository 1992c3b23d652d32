#pragma once

// Merges colour- and gray-branch detections onto extracted kernel contours and
// resolves each kernel to a legal PropertySet.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "detect.hpp"

namespace ricescope {

struct FusionConfig {
    double iou_threshold = 0.5;
    // A contour matches a box when its centroid lies inside the box and within
    // this fraction of the box diagonal from the box centre.
    double centroid_diagonal_fraction = 0.5;

    void validate() const {
        if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
            fail(ErrorCode::CONFIG_ERROR, "iouThreshold must lie in (0, 1]");
        if (!(centroid_diagonal_fraction > 0.0))
            fail(ErrorCode::CONFIG_ERROR, "centroidDiagonalFraction must be positive");
    }
};

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

/// Index of the contour a box refers to: centroid inside the box and close to
/// its centre; nearest wins, lower index on exact ties.
inline std::optional<std::size_t> match_contour(const BoundingBox& box, const std::vector<Contour>& contours,
                                                const FusionConfig& cfg = {}) {
    const double reach = cfg.centroid_diagonal_fraction * std::hypot(box.w, box.h);
    std::optional<std::size_t> best;
    double best_d = 0;
    for (std::size_t i = 0; i < contours.size(); ++i) {
        const auto [cx, cy] = contours[i].centroid();
        if (!box.contains(cx, cy)) continue;
        const double d = std::hypot(cx - box.center_x(), cy - box.center_y());
        if (d > reach) continue;
        if (!best || d < best_d) { best = i; best_d = d; }
    }
    return best;
}

/// PC/MC decision per gray-detection index, used to resolve CHALKY labels.
using ChalkClasses = std::map<std::size_t, KernelProperty>;

struct FusionResult {
    std::vector<KernelInstance> kernels;
    std::vector<UnresolvedDetection> unresolved;
};

namespace detail {

struct Entry {
    Detection det;
    std::vector<KernelProperty> props;  // resolved, sorted by enum
    bool other = false;
    bool unclassified_chalky = false;
};

// Rank order: higher confidence first, then box coordinates, then label name.
inline bool ranks_before(double conf_a, const BoundingBox& box_a, const char* name_a,
                         double conf_b, const BoundingBox& box_b, const char* name_b) {
    if (conf_a != conf_b) return conf_a > conf_b;
    const auto ta = std::tie(box_a.x, box_a.y, box_a.w, box_a.h);
    const auto tb = std::tie(box_b.x, box_b.y, box_b.w, box_b.h);
    if (ta != tb) return ta < tb;
    return std::string_view(name_a) < std::string_view(name_b);
}

struct Proposal {
    std::size_t entry;
    KernelProperty prop;
};

/// Resolves a group of proposals to at most two mutually compatible properties.
inline std::vector<KernelProperty> resolve_properties(const std::vector<Entry>& entries,
                                                      std::vector<Proposal> proposals) {
    std::vector<KernelProperty> distinct;
    for (const auto& p : proposals)
        if (std::find(distinct.begin(), distinct.end(), p.prop) == distinct.end()) distinct.push_back(p.prop);
    if (distinct.size() == 1) return distinct;
    if (distinct.size() == 2 && is_allowed_pair(distinct[0], distinct[1])) return distinct;

    std::stable_sort(proposals.begin(), proposals.end(), [&](const Proposal& a, const Proposal& b) {
        const auto& ea = entries[a.entry].det;
        const auto& eb = entries[b.entry].det;
        return ranks_before(ea.confidence, ea.box, to_cstr(a.prop), eb.confidence, eb.box, to_cstr(b.prop));
    });
    std::vector<KernelProperty> kept;
    for (const auto& p : proposals) {
        if (kept.size() == 2) break;
        if (std::find(kept.begin(), kept.end(), p.prop) != kept.end()) continue;
        bool compatible = true;
        for (auto k : kept) compatible = compatible && !is_mutually_exclusive(k, p.prop);
        if (compatible) kept.push_back(p.prop);
    }
    return kept;
}

inline FusionResult fuse_entries(std::vector<Entry> entries, const std::vector<Contour>& contours,
                                 const FusionConfig& cfg) {
    cfg.validate();
    FusionResult out;
    std::vector<std::vector<std::size_t>> per_contour(contours.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto m = match_contour(entries[i].det.box, contours, cfg);
        if (!m) {
            out.unresolved.push_back({entries[i].det, UnresolvedReason::NO_CONTOUR, 0});
            continue;
        }
        per_contour[*m].push_back(i);
    }

    for (std::size_t c = 0; c < contours.size(); ++c) {
        const std::int64_t area = contours[c].area();
        std::vector<std::size_t> live;
        for (auto i : per_contour[c]) {
            if (entries[i].unclassified_chalky && entries[i].props.empty())
                out.unresolved.push_back({entries[i].det, UnresolvedReason::UNCLASSIFIED_CHALKY, area});
            else
                live.push_back(i);
        }
        if (live.empty()) continue;

        // Leading entry: best-ranked detection carrying at least one property.
        std::optional<std::size_t> lead;
        auto lead_name = [&](std::size_t i) {
            const char* best = to_cstr(entries[i].props.front());
            for (auto p : entries[i].props)
                if (std::string_view(to_cstr(p)) < best) best = to_cstr(p);
            return best;
        };
        for (auto i : live) {
            if (entries[i].props.empty()) continue;
            if (!lead || ranks_before(entries[i].det.confidence, entries[i].det.box, lead_name(i),
                                      entries[*lead].det.confidence, entries[*lead].det.box, lead_name(*lead)))
                lead = i;
        }
        if (!lead) {
            for (auto i : live) out.unresolved.push_back({entries[i].det, UnresolvedReason::UNMATCHED_OTHER, area});
            continue;
        }

        // Connected component of the IOU-overlap graph containing the lead.
        std::vector<char> in_group(live.size(), 0);
        std::vector<std::size_t> frontier;
        for (std::size_t k = 0; k < live.size(); ++k)
            if (live[k] == *lead) { in_group[k] = 1; frontier.push_back(k); }
        while (!frontier.empty()) {
            const auto k = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < live.size(); ++j) {
                if (in_group[j]) continue;
                if (iou(entries[live[k]].det.box, entries[live[j]].det.box) >= cfg.iou_threshold) {
                    in_group[j] = 1;
                    frontier.push_back(j);
                }
            }
        }

        std::vector<Proposal> proposals;
        for (std::size_t k = 0; k < live.size(); ++k) {
            if (!in_group[k]) continue;
            for (auto p : entries[live[k]].props) proposals.push_back({live[k], p});
        }
        const auto props = resolve_properties(entries, proposals);
        const auto set = make_property_set(props);
        const bool chalky = set.contains(KernelProperty::PC) || set.contains(KernelProperty::MC);

        KernelInstance kernel;
        kernel.contour = std::make_shared<const Contour>(contours[c]);
        kernel.properties = set;
        kernel.confidence = entries[*lead].det.confidence;
        for (std::size_t k = 0; k < live.size(); ++k) {
            const auto& e = entries[live[k]];
            if (!in_group[k])
                out.unresolved.push_back({e.det, UnresolvedReason::DISJOINT_PROPOSAL, area});
            else if (e.props.empty() && !chalky)
                out.unresolved.push_back({e.det, UnresolvedReason::UNMATCHED_OTHER, area});
            else
                kernel.source_detections.push_back(e.det);
        }
        out.kernels.push_back(std::move(kernel));
    }
    return out;
}

inline Entry make_entry(const Detection& d, std::optional<KernelProperty> chalk_class) {
    Entry e;
    e.det = d;
    for (auto l : d.labels) {
        if (l == RawLabel::OTHER) {
            e.other = true;
        } else if (l == RawLabel::CHALKY) {
            if (chalk_class) e.props.push_back(*chalk_class);
            else e.unclassified_chalky = true;
        } else {
            e.props.push_back(*as_property(l));
        }
    }
    std::sort(e.props.begin(), e.props.end());
    e.props.erase(std::unique(e.props.begin(), e.props.end()), e.props.end());
    return e;
}

} // namespace detail

/// Fuses both branches. Every input detection ends up either in exactly one
/// kernel's source_detections or in the unresolved list.
inline FusionResult fuse(const DetectionSet& color, const DetectionSet& gray, const std::vector<Contour>& contours,
                         const ChalkClasses& chalk_classes, const FusionConfig& cfg = {}) {
    if (color.width && gray.width && (color.width != gray.width || color.height != gray.height))
        fail(ErrorCode::DIMENSION_MISMATCH, "colour and gray detections refer to different image sizes");
    std::vector<detail::Entry> entries;
    entries.reserve(color.detections.size() + gray.detections.size());
    for (const auto& d : color.detections) entries.push_back(detail::make_entry(d, std::nullopt));
    for (std::size_t i = 0; i < gray.detections.size(); ++i) {
        const auto it = chalk_classes.find(i);
        entries.push_back(detail::make_entry(gray.detections[i],
                                             it == chalk_classes.end() ? std::nullopt
                                                                       : std::optional<KernelProperty>(it->second)));
    }
    return detail::fuse_entries(std::move(entries), contours, cfg);
}

/// Single-branch baseline: one detection list carrying any of the six labels,
/// filtered to legal combinations with the same rules as fuse().
inline FusionResult naive_postprocess(const std::vector<Detection>& detections, const std::vector<Contour>& contours,
                                      const FusionConfig& cfg = {}) {
    std::vector<detail::Entry> entries;
    entries.reserve(detections.size());
    for (const auto& d : detections) entries.push_back(detail::make_entry(d, std::nullopt));
    return detail::fuse_entries(std::move(entries), contours, cfg);
}

/// Measures and classifies the chalk fraction of every gray CHALKY detection
/// that matches a contour.
inline ChalkClasses classify_gray_detections(const DetectionSet& gray, const GrayImage& gray_image,
                                             const std::vector<Contour>& contours, int chalk_bright_threshold,
                                             const FusionConfig& cfg = {}) {
    ChalkClasses out;
    for (std::size_t i = 0; i < gray.detections.size(); ++i) {
        const auto& d = gray.detections[i];
        if (std::find(d.labels.begin(), d.labels.end(), RawLabel::CHALKY) == d.labels.end()) continue;
        const auto m = match_contour(d.box, contours, cfg);
        if (!m) continue;
        out[i] = classify_chalk(measure_chalk_fraction(gray_image, contours[*m], chalk_bright_threshold));
    }
    return out;
}

} // namespace ricescope

#pragma once

// Shared domain types and the kernel class taxonomy.

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "contour.hpp"
#include "error.hpp"

namespace ricescope {

/// The six single kernel properties. Values index per-type arrays.
enum class KernelProperty : std::uint8_t { PC = 0, MC = 1, YC = 2, SP = 3, BR = 4, SO = 5 };

inline constexpr std::size_t kPropertyCount = 6;

inline constexpr std::array<KernelProperty, kPropertyCount> kAllProperties{
    KernelProperty::PC, KernelProperty::MC, KernelProperty::YC,
    KernelProperty::SP, KernelProperty::BR, KernelProperty::SO};

constexpr std::size_t index_of(KernelProperty p) noexcept { return static_cast<std::size_t>(p); }

inline const char* to_cstr(KernelProperty p) {
    switch (p) {
    case KernelProperty::PC: return "PC";
    case KernelProperty::MC: return "MC";
    case KernelProperty::YC: return "YC";
    case KernelProperty::SP: return "SP";
    case KernelProperty::BR: return "BR";
    case KernelProperty::SO: return "SO";
    }
    return "?";
}

inline std::optional<KernelProperty> parse_property(std::string_view s) {
    for (auto p : kAllProperties)
        if (s == to_cstr(p)) return p;
    return std::nullopt;
}

inline constexpr bool is_chalk(KernelProperty p) noexcept {
    return p == KernelProperty::PC || p == KernelProperty::MC;
}

// Display order for dual labels: chalk first, then BR, then the colour defects.
inline constexpr int display_rank(KernelProperty p) noexcept {
    switch (p) {
    case KernelProperty::PC: return 0;
    case KernelProperty::MC: return 1;
    case KernelProperty::BR: return 2;
    case KernelProperty::YC: return 3;
    case KernelProperty::SP: return 4;
    case KernelProperty::SO: return 5;
    }
    return 6;
}

/// The six dual combinations that can occur on one kernel.
inline constexpr std::array<std::pair<KernelProperty, KernelProperty>, 6> kAllowedPairs{{
    {KernelProperty::PC, KernelProperty::YC},
    {KernelProperty::MC, KernelProperty::YC},
    {KernelProperty::BR, KernelProperty::YC},
    {KernelProperty::PC, KernelProperty::SP},
    {KernelProperty::MC, KernelProperty::SP},
    {KernelProperty::BR, KernelProperty::SP},
}};

inline constexpr bool is_allowed_pair(KernelProperty a, KernelProperty b) noexcept {
    for (const auto& [p, q] : kAllowedPairs)
        if ((p == a && q == b) || (p == b && q == a)) return true;
    return false;
}

/// True iff a and b cannot co-occur on one kernel. Requires a != b.
inline constexpr bool is_mutually_exclusive(KernelProperty a, KernelProperty b) noexcept {
    return !is_allowed_pair(a, b);
}

/// A kernel's classification: one property, or one of the allowed pairs.
class PropertySet {
public:
    static PropertySet single(KernelProperty p) noexcept { return PropertySet(bit(p)); }

    static PropertySet make(std::span<const KernelProperty> props) {
        std::uint8_t bits = 0;
        for (auto p : props) bits |= bit(p);
        const int n = popcount(bits);
        if (n < 1 || n > 2)
            fail(ErrorCode::REJECTED_COMBINATION, "a property set holds one or two properties");
        PropertySet s(bits);
        if (n == 2) {
            const auto v = s.values();
            if (!is_allowed_pair(v[0], v[1]))
                fail(ErrorCode::REJECTED_COMBINATION,
                     std::string(to_cstr(v[0])) + "&" + to_cstr(v[1]) + " is not a defined combination");
        }
        return s;
    }

    static PropertySet make(std::initializer_list<KernelProperty> props) {
        return make(std::span<const KernelProperty>(props.begin(), props.size()));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(popcount(bits_)); }
    bool is_dual() const noexcept { return size() == 2; }
    bool contains(KernelProperty p) const noexcept { return (bits_ & bit(p)) != 0; }
    std::uint8_t bits() const noexcept { return bits_; }

    /// Members in display order (chalk, BR, YC, SP, SO).
    std::vector<KernelProperty> values() const {
        std::vector<KernelProperty> out;
        for (auto p : kAllProperties)
            if (contains(p)) out.push_back(p);
        std::sort(out.begin(), out.end(),
                  [](auto a, auto b) { return display_rank(a) < display_rank(b); });
        return out;
    }

    /// "PC", "PC&YC", ...
    std::string label() const {
        std::string s;
        for (auto p : values()) {
            if (!s.empty()) s += '&';
            s += to_cstr(p);
        }
        return s;
    }

    bool operator==(const PropertySet&) const = default;

private:
    explicit PropertySet(std::uint8_t bits) noexcept : bits_(bits) {}
    static constexpr std::uint8_t bit(KernelProperty p) noexcept {
        return static_cast<std::uint8_t>(1u << index_of(p));
    }
    static constexpr int popcount(std::uint8_t b) noexcept {
        int n = 0;
        for (; b; b &= static_cast<std::uint8_t>(b - 1)) ++n;
        return n;
    }

    std::uint8_t bits_ = 0;
};

inline PropertySet make_property_set(std::span<const KernelProperty> props) {
    return PropertySet::make(props);
}

/// Labels a detector may emit. CHALKY and OTHER never reach a PropertySet.
enum class RawLabel : std::uint8_t { PC, MC, YC, SP, BR, SO, CHALKY, OTHER };

inline const char* to_cstr(RawLabel l) {
    switch (l) {
    case RawLabel::PC: return "PC";
    case RawLabel::MC: return "MC";
    case RawLabel::YC: return "YC";
    case RawLabel::SP: return "SP";
    case RawLabel::BR: return "BR";
    case RawLabel::SO: return "SO";
    case RawLabel::CHALKY: return "CHALKY";
    case RawLabel::OTHER: return "OTHER";
    }
    return "?";
}

inline std::optional<RawLabel> parse_raw_label(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(RawLabel::OTHER); ++i) {
        const auto l = static_cast<RawLabel>(i);
        if (s == to_cstr(l)) return l;
    }
    return std::nullopt;
}

inline std::optional<KernelProperty> as_property(RawLabel l) noexcept {
    if (l == RawLabel::CHALKY || l == RawLabel::OTHER) return std::nullopt;
    return static_cast<KernelProperty>(static_cast<std::uint8_t>(l));
}

inline RawLabel as_raw_label(KernelProperty p) noexcept {
    return static_cast<RawLabel>(static_cast<std::uint8_t>(p));
}

enum class Branch : std::uint8_t { COLOR, GRAY };

inline const char* to_cstr(Branch b) { return b == Branch::COLOR ? "COLOR" : "GRAY"; }

inline bool label_allowed_on(Branch b, RawLabel l) noexcept {
    switch (l) {
    case RawLabel::YC:
    case RawLabel::SP:
    case RawLabel::BR:
    case RawLabel::SO:
    case RawLabel::OTHER: return b == Branch::COLOR;
    case RawLabel::CHALKY:
    case RawLabel::PC:
    case RawLabel::MC: return b == Branch::GRAY;
    }
    return false;
}

/// Axis-aligned box in pixels; (x, y) is the top-left corner.
struct BoundingBox {
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;

    double area() const noexcept { return w * h; }
    double center_x() const noexcept { return x + 0.5 * w; }
    double center_y() const noexcept { return y + 0.5 * h; }
    bool valid() const noexcept { return w > 0 && h > 0; }
    bool within(int width, int height) const noexcept {
        return valid() && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
    }
    bool contains(double px, double py) const noexcept {
        return px >= x && py >= y && px <= x + w && py <= y + h;
    }
    auto operator<=>(const BoundingBox&) const = default;
};

inline BoundingBox to_box(const PixelRect& r) {
    return {static_cast<double>(r.x), static_cast<double>(r.y),
            static_cast<double>(r.w), static_cast<double>(r.h)};
}

struct Detection {
    BoundingBox box;
    std::vector<RawLabel> labels;  // sorted, unique, non-empty
    double confidence = 1.0;
    Branch branch = Branch::COLOR;

    bool operator==(const Detection&) const = default;
};

inline void normalize_labels(std::vector<RawLabel>& labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

struct KernelInstance {
    std::shared_ptr<const Contour> contour;
    PropertySet properties = PropertySet::single(KernelProperty::SO);
    std::vector<Detection> source_detections;
    double confidence = 1.0;

    std::int64_t area() const noexcept { return contour ? contour->area() : 0; }
};

/// Weight-per-pixel for each single property, in grams per pixel.
struct DensityTable {
    std::array<double, kPropertyCount> rho{};
    std::string scale_tag;

    double operator[](KernelProperty p) const noexcept { return rho[index_of(p)]; }

    void validate() const {
        for (auto p : kAllProperties)
            if (!(rho[index_of(p)] > 0))
                fail(ErrorCode::NONPOSITIVE_INPUT,
                     std::string("density for ") + to_cstr(p) + " must be positive");
    }

    bool operator==(const DensityTable&) const = default;
};

enum class UnresolvedReason : std::uint8_t {
    NO_CONTOUR,            // no extracted contour matches the box
    UNMATCHED_OTHER,       // OTHER placeholder whose kernel gained no chalk property
    UNCLASSIFIED_CHALKY,   // CHALKY detection without a PC/MC decision
    DISJOINT_PROPOSAL,     // matched the kernel but does not overlap its leading proposal
};

inline const char* to_cstr(UnresolvedReason r) {
    switch (r) {
    case UnresolvedReason::NO_CONTOUR: return "NO_CONTOUR";
    case UnresolvedReason::UNMATCHED_OTHER: return "UNMATCHED_OTHER";
    case UnresolvedReason::UNCLASSIFIED_CHALKY: return "UNCLASSIFIED_CHALKY";
    case UnresolvedReason::DISJOINT_PROPOSAL: return "DISJOINT_PROPOSAL";
    }
    return "?";
}

inline std::optional<UnresolvedReason> parse_unresolved_reason(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(UnresolvedReason::DISJOINT_PROPOSAL); ++i) {
        const auto r = static_cast<UnresolvedReason>(i);
        if (s == to_cstr(r)) return r;
    }
    return std::nullopt;
}

struct UnresolvedDetection {
    Detection detection;
    UnresolvedReason reason = UnresolvedReason::NO_CONTOUR;
    std::int64_t area = 0;  // area of the matched contour, 0 when none

    bool operator==(const UnresolvedDetection&) const = default;
};

struct KernelRecord {
    BoundingBox box;
    PropertySet properties = PropertySet::single(KernelProperty::SO);
    std::int64_t area = 0;
    double centroid_x = 0;
    double centroid_y = 0;
    double weight = 0;  // contribution to the grand total
    double confidence = 1.0;

    bool operator==(const KernelRecord&) const = default;
};

struct AnalysisReport {
    std::string image;
    int width = 0;
    int height = 0;
    std::vector<KernelRecord> kernels;
    std::array<double, kPropertyCount> type_weight{};  // W_t including dual terms
    double total_weight = 0;
    std::array<double, kPropertyCount> ratio{};
    std::vector<UnresolvedDetection> unresolved;
    std::int64_t unresolved_area = 0;
    DensityTable densities;

    bool operator==(const AnalysisReport&) const = default;
};

} // namespace ricescope

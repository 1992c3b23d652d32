#pragma once

// Synthetic rice scenes with exact ground truth.
//
// Kernels are rotated ellipses (optionally truncated across the major axis for
// broken kernels) on a dark noisy mat. Each mask is opened with the same 3x3
// element the pipeline uses, so the extracted contour of a kernel is its mask.
// Cues: chalk is an opaque patch rendered at reduced intensity so that it is
// bright in the inverted gray image; yellow kernels get a tinted body; spotted
// kernels get small dark discs away from the rim.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "detect.hpp"
#include "detection_io.hpp"
#include "imaging.hpp"
#include "weigh.hpp"

namespace ricescope {

struct Range {
    double lo = 0, hi = 0;
    bool operator==(const Range&) const = default;
};

struct SceneSpec {
    int width = kDefaultImageWidth;
    int height = kDefaultImageHeight;
    int min_kernels = 40;
    int max_kernels = 80;
    // Relative frequency per type, indexed like KernelProperty.
    std::array<double, kPropertyCount> frequency{1, 1, 1, 1, 1, 3};
    double dual_probability = 0.1;
    std::uint64_t seed = 1;

    Range semi_major{45, 55};
    Range aspect{2.5, 4.0};
    Range pc_fraction{0.15, 0.42};
    Range mc_fraction{0.6, 0.9};
    Range broken_keep{0.35, 0.5};  // kept share of the major axis
    int min_spots = 1, max_spots = 3;
    int min_spot_radius = 2, max_spot_radius = 3;
    double max_spot_share = 0.03;  // spot pixels per kernel area
    int gap = 4;                   // minimum free pixels between kernels
    int max_attempts = 1000;

    Rgb body_color{205, 200, 185};
    Rgb yellow_color{220, 170, 90};
    Rgb spot_color{40, 30, 25};
    double chalk_shade = 0.45;
    int background_level = 25;
    int background_noise = 10;
    int body_noise = 6;

    void validate() const {
        auto bad = [](const std::string& msg) { fail(ErrorCode::INVALID_ARGUMENT, "scene spec: " + msg); };
        auto ordered = [&](Range r, const char* name) {
            if (!(r.lo <= r.hi)) bad(std::string(name) + " range is inverted");
        };
        if (min_kernels < 0 || max_kernels < min_kernels) bad("kernel count range");
        double sum = 0;
        for (double f : frequency) {
            if (!(f >= 0)) bad("frequencies must be non-negative");
            sum += f;
        }
        if (!(sum > 0)) bad("frequencies are all zero");
        if (!(dual_probability >= 0 && dual_probability <= 1)) bad("dual probability outside [0, 1]");
        ordered(semi_major, "semi-major");
        ordered(aspect, "aspect");
        ordered(pc_fraction, "PC fraction");
        ordered(mc_fraction, "MC fraction");
        ordered(broken_keep, "broken keep");
        if (semi_major.lo < 8) bad("kernels too small");
        if (aspect.lo < 1) bad("aspect ratio below 1");
        if (!(pc_fraction.lo > 0 && pc_fraction.hi <= 0.5)) bad("PC fraction must lie in (0, 0.5]");
        if (!(mc_fraction.lo > 0.5 && mc_fraction.hi <= 1)) bad("MC fraction must lie in (0.5, 1]");
        if (!(broken_keep.lo > 0 && broken_keep.hi < 2.0 / 3.0)) bad("broken keep must lie in (0, 2/3)");
        if (min_spots < 1 || max_spots < min_spots) bad("spot count range");
        if (min_spot_radius < 2 || max_spot_radius < min_spot_radius) bad("spot radius range");
        if (gap < 2) bad("gap below 2 pixels");
        if (max_attempts < 1) bad("max attempts");
        if (width < 2 * (semi_major.hi + gap + 4) || height < 2 * (semi_major.hi + gap + 4)) bad("image too small");
        if (!(chalk_shade > 0 && chalk_shade < 1)) bad("chalk shade outside (0, 1)");
    }
};

struct KernelTruth {
    double cx = 0, cy = 0, a = 0, b = 0, theta = 0;
    double keep = 1.0;  // 1 for whole kernels
    PropertySet properties = PropertySet::single(KernelProperty::SO);
    std::int64_t area = 0;
    double chalky_fraction = 0;

    bool operator==(const KernelTruth&) const = default;
};

struct GroundTruth {
    int width = 0;
    int height = 0;
    std::vector<KernelTruth> kernels;

    bool operator==(const GroundTruth&) const = default;
};

struct SyntheticScene {
    RgbImage image;
    GroundTruth truth;
};

/// Mask of a kernel from its parameters. Pixel (x, y) is inside when its
/// centre lies in the (truncated) ellipse; the result is then opened.
inline Contour rasterize_kernel(const KernelTruth& k) {
    const int r = static_cast<int>(std::ceil(std::max(k.a, k.b))) + 3;
    const int ox = static_cast<int>(std::floor(k.cx)) - r, oy = static_cast<int>(std::floor(k.cy)) - r;
    const int n = 2 * r + 2;
    const double c = std::cos(k.theta), s = std::sin(k.theta);
    const double cut = -k.a + 2.0 * k.a * k.keep;
    Plane m(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double dx = ox + x - k.cx, dy = oy + y - k.cy;
            const double u = dx * c + dy * s, v = -dx * s + dy * c;
            if ((u / k.a) * (u / k.a) + (v / k.b) * (v / k.b) <= 1.0 && u <= cut) m(x, y) = 255;
        }
    m = morph_open(std::move(m), 1);
    return Contour::from_mask(ox, oy, n, n, std::move(m.pixels));
}

namespace detail {

inline std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

inline Rgb shifted(Rgb c, int d) { return {clamp_u8(c.r + d), clamp_u8(c.g + d), clamp_u8(c.b + d)}; }

inline Rgb shaded(Rgb c, double f) {
    return {clamp_u8(static_cast<int>(std::lround(c.r * f))), clamp_u8(static_cast<int>(std::lround(c.g * f))),
            clamp_u8(static_cast<int>(std::lround(c.b * f)))};
}

class SceneBuilder {
public:
    explicit SceneBuilder(const SceneSpec& spec)
        : spec_(spec), rng_(spec.seed), blocked_(spec.width, spec.height) {}

    SyntheticScene build() {
        SyntheticScene scene;
        scene.image = RgbImage(spec_.width, spec_.height);
        scene.truth.width = spec_.width;
        scene.truth.height = spec_.height;
        std::uniform_int_distribution<int> noise(-spec_.background_noise, spec_.background_noise);
        for (int y = 0; y < spec_.height; ++y)
            for (int x = 0; x < spec_.width; ++x) {
                const auto g = clamp_u8(spec_.background_level + noise(rng_));
                scene.image.set(x, y, {g, g, g});
            }

        const int count = std::uniform_int_distribution<int>(spec_.min_kernels, spec_.max_kernels)(rng_);
        for (int i = 0; i < count; ++i) place_kernel(scene, draw_properties());
        return scene;
    }

private:
    double uniform(Range r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    PropertySet draw_properties() {
        if (std::bernoulli_distribution(spec_.dual_probability)(rng_)) {
            std::vector<double> w;
            for (const auto& [p, q] : kAllowedPairs) w.push_back(spec_.frequency[index_of(p)] * spec_.frequency[index_of(q)]);
            if (std::any_of(w.begin(), w.end(), [](double v) { return v > 0; })) {
                const auto& [p, q] = kAllowedPairs[std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng_)];
                return PropertySet::make({p, q});
            }
        }
        const auto& f = spec_.frequency;
        return PropertySet::single(kAllProperties[std::discrete_distribution<std::size_t>(f.begin(), f.end())(rng_)]);
    }

    bool fits(const Contour& c) const {
        const auto& r = c.rect();
        const int margin = 3;
        if (r.x < margin || r.y < margin || r.x + r.w > spec_.width - margin || r.y + r.h > spec_.height - margin)
            return false;
        bool ok = true;
        c.for_each_pixel([&](int x, int y) { ok = ok && !blocked_(x, y); });
        return ok;
    }

    void block(const Contour& c) {
        const int g = spec_.gap;
        c.for_each_pixel([&](int x, int y) {
            for (int yy = std::max(0, y - g); yy <= std::min(spec_.height - 1, y + g); ++yy)
                for (int xx = std::max(0, x - g); xx <= std::min(spec_.width - 1, x + g); ++xx) blocked_(xx, yy) = 1;
        });
    }

    void place_kernel(SyntheticScene& scene, PropertySet props) {
        for (int attempt = 0; attempt < spec_.max_attempts; ++attempt) {
            KernelTruth k;
            k.properties = props;
            k.a = uniform(spec_.semi_major);
            k.b = k.a / uniform(spec_.aspect);
            k.theta = uniform({0.0, std::numbers::pi});
            if (props.contains(KernelProperty::BR)) k.keep = uniform(spec_.broken_keep);
            const double reach = k.a + spec_.gap + 4;
            k.cx = uniform({reach, spec_.width - reach});
            k.cy = uniform({reach, spec_.height - reach});

            std::optional<Contour> mask;
            try {
                mask = rasterize_kernel(k);
            } catch (const Error&) {
                continue;
            }
            if (!fits(*mask)) continue;
            if (!render(scene.image, k, *mask)) continue;
            k.area = mask->area();
            block(*mask);
            scene.truth.kernels.push_back(k);
            return;
        }
        fail(ErrorCode::PLACEMENT_FAILURE, "could not place kernel " + std::to_string(scene.truth.kernels.size() + 1) +
                                               " after " + std::to_string(spec_.max_attempts) + " attempts");
    }

    // Paints the kernel; false when the shape cannot host its cues (no room
    // for spots). Nothing is drawn in that case.
    bool render(RgbImage& img, KernelTruth& k, const Contour& mask) {
        const auto& r = mask.rect();
        auto inside = [&](int x, int y) {
            return x >= r.x && y >= r.y && x < r.x + r.w && y < r.y + r.h &&
                   mask.mask()[static_cast<std::size_t>(y - r.y) * r.w + (x - r.x)];
        };

        std::vector<std::pair<Point, int>> spots;
        if (k.properties.contains(KernelProperty::SP)) {
            int count = uniform_int(spec_.min_spots, spec_.max_spots);
            int radius = uniform_int(spec_.min_spot_radius, spec_.max_spot_radius);
            auto disc = [](int rad) {
                int n = 0;
                for (int dy = -rad; dy <= rad; ++dy)
                    for (int dx = -rad; dx <= rad; ++dx) n += dx * dx + dy * dy <= rad * rad;
                return n;
            };
            while (count * disc(radius) > spec_.max_spot_share * static_cast<double>(mask.area())) {
                if (count > 1) --count;
                else if (radius > spec_.min_spot_radius) --radius;
                else return false;
            }
            std::vector<Point> centres;
            const int clear = radius + 4;
            mask.for_each_pixel([&](int x, int y) {
                for (int dy = -clear; dy <= clear; ++dy)
                    for (int dx = -clear; dx <= clear; ++dx)
                        if (!inside(x + dx, y + dy)) return;
                centres.push_back({x, y});
            });
            if (centres.empty()) return false;
            for (int i = 0; i < count; ++i)
                spots.push_back({centres[std::uniform_int_distribution<std::size_t>(0, centres.size() - 1)(rng_)], radius});
        }

        // Chalk patch: the pixels with the smallest projection on a random direction.
        std::vector<std::uint8_t> chalk(static_cast<std::size_t>(r.w) * r.h, 0);
        if (k.properties.contains(KernelProperty::PC) || k.properties.contains(KernelProperty::MC)) {
            const double f = uniform(k.properties.contains(KernelProperty::PC) ? spec_.pc_fraction : spec_.mc_fraction);
            const double phi = uniform({0.0, 2.0 * std::numbers::pi});
            std::vector<std::pair<double, Point>> order;
            mask.for_each_pixel([&](int x, int y) {
                order.push_back({(x - k.cx) * std::cos(phi) + (y - k.cy) * std::sin(phi), {x, y}});
            });
            std::sort(order.begin(), order.end());
            const auto n = std::clamp<std::int64_t>(std::llround(f * static_cast<double>(mask.area())), 1, mask.area());
            for (std::int64_t i = 0; i < n; ++i)
                chalk[static_cast<std::size_t>(order[i].second.y - r.y) * r.w + (order[i].second.x - r.x)] = 1;
            k.chalky_fraction = static_cast<double>(n) / static_cast<double>(mask.area());
        }

        const Rgb body = k.properties.contains(KernelProperty::YC) ? spec_.yellow_color : spec_.body_color;
        const Rgb patch = shaded(body, spec_.chalk_shade);
        std::uniform_int_distribution<int> noise(-spec_.body_noise, spec_.body_noise);
        mask.for_each_pixel([&](int x, int y) {
            const bool c = chalk[static_cast<std::size_t>(y - r.y) * r.w + (x - r.x)];
            img.set(x, y, shifted(c ? patch : body, noise(rng_)));
        });
        std::uniform_int_distribution<int> spot_noise(-4, 4);
        for (const auto& [centre, rad] : spots)
            for (int dy = -rad; dy <= rad; ++dy)
                for (int dx = -rad; dx <= rad; ++dx)
                    if (dx * dx + dy * dy <= rad * rad)
                        img.set(centre.x + dx, centre.y + dy, shifted(spec_.spot_color, spot_noise(rng_)));
        return true;
    }

    const SceneSpec& spec_;
    std::mt19937_64 rng_;
    Plane blocked_;
};

} // namespace detail

inline SyntheticScene generate_scene(const SceneSpec& spec) {
    spec.validate();
    return detail::SceneBuilder(spec).build();
}

/// Kernel masks ordered like extracted contours (raster order of the first pixel).
inline std::vector<std::pair<const KernelTruth*, Contour>> truth_contours(const GroundTruth& gt) {
    std::vector<std::pair<const KernelTruth*, Contour>> out;
    for (const auto& k : gt.kernels) out.emplace_back(&k, rasterize_kernel(k));
    auto first_pixel = [](const Contour& c) {
        const auto& r = c.rect();
        for (int x = 0; x < r.w; ++x)
            if (c.mask()[static_cast<std::size_t>(x)]) return std::pair{r.y, r.x + x};
        return std::pair{r.y, r.x};
    };
    std::stable_sort(out.begin(), out.end(),
                     [&](const auto& a, const auto& b) { return first_pixel(a.second) < first_pixel(b.second); });
    return out;
}

/// The report a perfect detector would yield.
inline AnalysisReport ground_truth_report(const GroundTruth& gt, const DensityTable& d, std::string image = "") {
    if (gt.kernels.empty()) fail(ErrorCode::EMPTY_INPUT, "ground truth holds no kernels");
    std::vector<KernelInstance> kernels;
    for (auto& [k, c] : truth_contours(gt)) {
        KernelInstance inst;
        inst.contour = std::make_shared<const Contour>(std::move(c));
        inst.properties = k->properties;
        kernels.push_back(std::move(inst));
    }
    return build_report(std::move(image), gt.width, gt.height, kernels, {}, d);
}

/// Detection files a perfect detector pair would emit: colour labels for the
/// non-chalk properties (OTHER for chalk-only kernels) and a CHALKY box for
/// every chalky kernel.
inline std::pair<DetectionSet, DetectionSet> oracle_detections(const GroundTruth& gt, std::string image = "") {
    DetectionSet color, gray;
    color.branch = Branch::COLOR;
    gray.branch = Branch::GRAY;
    for (auto* s : {&color, &gray}) {
        s->image = image;
        s->width = gt.width;
        s->height = gt.height;
    }
    for (const auto& [k, c] : truth_contours(gt)) {
        const auto box = to_box(c.rect());
        Detection cd{box, {}, 1.0, Branch::COLOR};
        bool chalky = false;
        for (auto p : k->properties.values()) {
            if (is_chalk(p)) chalky = true;
            else cd.labels.push_back(as_raw_label(p));
        }
        if (cd.labels.empty()) cd.labels.push_back(RawLabel::OTHER);
        normalize_labels(cd.labels);
        color.detections.push_back(std::move(cd));
        if (chalky) gray.detections.push_back({box, {RawLabel::CHALKY}, 1.0, Branch::GRAY});
    }
    return {color, gray};
}

// Sidecar: [ { "ellipse": [cx, cy, a, b, theta], "keep": num, "properties": [..],
//              "area": int, "chalkyFraction": num }, ... ]

inline json ground_truth_to_json(const GroundTruth& gt) {
    json arr = json::array();
    for (const auto& k : gt.kernels) {
        json props = json::array();
        for (auto p : k.properties.values()) props.push_back(to_cstr(p));
        arr.push_back({{"ellipse", {k.cx, k.cy, k.a, k.b, k.theta}},
                       {"keep", k.keep},
                       {"properties", props},
                       {"area", k.area},
                       {"chalkyFraction", k.chalky_fraction}});
    }
    return arr;
}

/// Parses a sidecar and checks every stored area against the re-rasterized mask.
inline GroundTruth parse_ground_truth(const json& j, const ParseOptions& opt = {}) {
    if (!j.is_array()) fail(ErrorCode::PARSE_ERROR, "ground-truth sidecar must be a JSON array");
    GroundTruth gt;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        const std::string where = "ground-truth kernel #" + std::to_string(i);
        if (!e.is_object()) fail(ErrorCode::PARSE_ERROR, where + " must be an object");
        detail::check_fields(e, {"ellipse", "keep", "properties", "area", "chalkyFraction"}, where, opt);
        const auto ell = detail::get_required<std::vector<double>>(e, "ellipse", where);
        if (ell.size() != 5) fail(ErrorCode::PARSE_ERROR, where + ": ellipse must be [cx, cy, a, b, theta]");
        KernelTruth k;
        k.cx = ell[0];
        k.cy = ell[1];
        k.a = ell[2];
        k.b = ell[3];
        k.theta = ell[4];
        if (!(k.a > 0 && k.b > 0)) fail(ErrorCode::PARSE_ERROR, where + ": ellipse axes must be positive");
        k.keep = e.contains("keep") ? detail::get_required<double>(e, "keep", where) : 1.0;
        if (!(k.keep > 0 && k.keep <= 1)) fail(ErrorCode::PARSE_ERROR, where + ": keep outside (0, 1]");
        std::vector<KernelProperty> props;
        for (const auto& name : detail::get_required<std::vector<std::string>>(e, "properties", where)) {
            const auto p = parse_property(name);
            if (!p) fail(ErrorCode::PARSE_ERROR, where + ": unknown property '" + name + "'");
            props.push_back(*p);
        }
        k.properties = make_property_set(props);
        k.area = detail::get_required<std::int64_t>(e, "area", where);
        k.chalky_fraction = e.contains("chalkyFraction") ? detail::get_required<double>(e, "chalkyFraction", where) : 0.0;
        if (rasterize_kernel(k).area() != k.area)
            fail(ErrorCode::PARSE_ERROR, where + ": area does not match the ellipse parameters");
        gt.kernels.push_back(k);
    }
    return gt;
}

inline GroundTruth load_ground_truth(const std::string& path, const ParseOptions& opt = {}) {
    return parse_ground_truth(detail::read_json_file(path), opt);
}

inline void save_ground_truth(const GroundTruth& gt, const std::string& path) {
    detail::write_text_file(path, ground_truth_to_json(gt).dump(2) + "\n");
}

} // namespace ricescope

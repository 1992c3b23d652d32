#pragma once

// Built-in classical detectors for the two branches: a colour-cue detector for
// YC/SP/BR/SO and a brightness-fraction chalk detector on the inverted gray image.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "imaging.hpp"

namespace ricescope {

struct ImagingConfig {
    int binarize_threshold = 60;
    int kernel_radius = 1;
    std::int64_t min_area = 50;
};

struct DetectorConfig {
    int spot_threshold = 50;          // V below this is a dark-spot pixel
    std::int64_t spot_min_area = 8;
    double yellow_hue_min = 20.0;     // degrees
    double yellow_hue_max = 45.0;
    double yellow_sat_threshold = 70.0;
    int chalk_bright_threshold = 140; // inverted gray Y above this is chalky
    double chalk_min_fraction = 0.08;
};

struct DetectionSet {
    Branch branch = Branch::COLOR;
    std::string image;
    int width = 0;
    int height = 0;
    std::vector<Detection> detections;

    bool operator==(const DetectionSet&) const = default;
};

/// Kernel outlines: contours of the opened VS image (max of eroded S and V).
inline std::vector<Contour> kernel_contours(const RgbImage& img, const ImagingConfig& cfg = {}) {
    const auto hsv = split_hsv(img);
    return extract_contours(vs_image(hsv.s, hsv.v, cfg.kernel_radius), cfg.binarize_threshold,
                            cfg.kernel_radius, cfg.min_area);
}

/// Two-pass broken-kernel rule. A kernel is broken when its length is below
/// 2/3 of the mean length of the whole kernels; the whole-kernel mean is first
/// estimated from all lengths, then recomputed without the provisional breaks.
inline std::vector<bool> broken_rule(const std::vector<double>& lengths) {
    if (lengths.empty()) fail(ErrorCode::EMPTY_INPUT, "broken rule needs at least one length");
    double sum = 0;
    for (double l : lengths) sum += l;
    const double first_mean = sum / static_cast<double>(lengths.size());

    double whole_sum = 0;
    std::size_t whole = 0;
    for (double l : lengths)
        if (!(3.0 * l < 2.0 * first_mean)) { whole_sum += l; ++whole; }
    const double mean = whole ? whole_sum / static_cast<double>(whole) : first_mean;

    std::vector<bool> out(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) out[i] = 3.0 * lengths[i] < 2.0 * mean;
    return out;
}

struct ChalkMeasurement {
    std::int64_t bright_pixels = 0;
    std::int64_t area = 0;
    double chalky_fraction = 0;
};

/// Fraction of the kernel's pixels whose inverted-gray value exceeds the threshold.
inline ChalkMeasurement measure_chalk_fraction(const GrayImage& gray, const Contour& mask,
                                               int chalk_bright_threshold) {
    ChalkMeasurement m;
    mask.for_each_pixel([&](int x, int y) {
        ++m.area;
        if (x < gray.width && y < gray.height && gray(x, y) > chalk_bright_threshold) ++m.bright_pixels;
    });
    m.chalky_fraction = m.area ? static_cast<double>(m.bright_pixels) / static_cast<double>(m.area) : 0.0;
    return m;
}

/// Partial-chalky up to and including half the kernel, mass-chalky above.
inline KernelProperty classify_chalk(const ChalkMeasurement& m) noexcept {
    return m.chalky_fraction <= 0.5 ? KernelProperty::PC : KernelProperty::MC;
}

struct ColorCues {
    bool spotted = false;
    bool yellow = false;
    double mean_hue = 0;
    double mean_saturation = 0;
    std::int64_t largest_spot = 0;
};

inline ColorCues measure_color_cues(const RgbImage& img, const Contour& c, const DetectorConfig& cfg) {
    ColorCues cues;
    const PixelRect& r = c.rect();
    std::vector<std::uint8_t> dark(static_cast<std::size_t>(r.w) * r.h, 0);
    double sin_sum = 0, cos_sum = 0, sat_sum = 0;
    std::int64_t n = 0;
    c.for_each_pixel([&](int x, int y) {
        const Rgb p = img.at(x, y);
        const double h = hue_degrees(p) * std::numbers::pi / 180.0;
        sin_sum += std::sin(h);
        cos_sum += std::cos(h);
        sat_sum += saturation(p);
        ++n;
        if (value(p) < cfg.spot_threshold) dark[static_cast<std::size_t>(y - r.y) * r.w + (x - r.x)] = 1;
    });

    double hue = std::atan2(sin_sum, cos_sum) * 180.0 / std::numbers::pi;
    if (hue < 0) hue += 360.0;
    cues.mean_hue = hue;
    cues.mean_saturation = n ? sat_sum / static_cast<double>(n) : 0.0;
    cues.yellow = hue >= cfg.yellow_hue_min && hue <= cfg.yellow_hue_max &&
                  cues.mean_saturation > cfg.yellow_sat_threshold;

    // 8-connected dark blobs inside the kernel
    std::vector<Point> stack;
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) {
            if (!dark[static_cast<std::size_t>(y) * r.w + x]) continue;
            std::int64_t size = 0;
            dark[static_cast<std::size_t>(y) * r.w + x] = 0;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                ++size;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= r.w || ny >= r.h) continue;
                        auto& d = dark[static_cast<std::size_t>(ny) * r.w + nx];
                        if (!d) continue;
                        d = 0;
                        stack.push_back({nx, ny});
                    }
            }
            cues.largest_spot = std::max(cues.largest_spot, size);
        }
    cues.spotted = cues.largest_spot >= cfg.spot_min_area;
    return cues;
}

/// Colour branch: one detection per contour. SP outranks YC (the pair is not
/// a defined combination). BR is listed alongside; fusion keeps the legal part.
inline DetectionSet classical_detect_color(const RgbImage& img, const std::vector<Contour>& contours,
                                           const DetectorConfig& cfg = {}) {
    DetectionSet out;
    out.branch = Branch::COLOR;
    out.width = img.width();
    out.height = img.height();
    if (contours.empty()) return out;

    std::vector<double> lengths;
    lengths.reserve(contours.size());
    for (const auto& c : contours) lengths.push_back(major_axis_length(c));
    const auto broken = broken_rule(lengths);

    for (std::size_t i = 0; i < contours.size(); ++i) {
        const auto cues = measure_color_cues(img, contours[i], cfg);
        Detection d;
        d.box = to_box(contours[i].rect());
        d.branch = Branch::COLOR;
        d.confidence = 1.0;
        if (cues.spotted)
            d.labels.push_back(RawLabel::SP);
        else if (cues.yellow)
            d.labels.push_back(RawLabel::YC);
        if (broken[i]) d.labels.push_back(RawLabel::BR);
        if (d.labels.empty()) d.labels.push_back(RawLabel::SO);
        normalize_labels(d.labels);
        out.detections.push_back(std::move(d));
    }
    return out;
}

inline DetectionSet classical_detect_color(const RgbImage& img, const ImagingConfig& icfg = {},
                                           const DetectorConfig& dcfg = {}) {
    return classical_detect_color(img, kernel_contours(img, icfg), dcfg);
}

/// Gray branch: a CHALKY detection for every kernel whose bright fraction
/// exceeds chalk_min_fraction.
inline DetectionSet classical_detect_chalky(const GrayImage& gray, const std::vector<Contour>& kernel_masks,
                                            const DetectorConfig& cfg = {}) {
    DetectionSet out;
    out.branch = Branch::GRAY;
    out.width = gray.width;
    out.height = gray.height;
    for (const auto& c : kernel_masks) {
        const auto m = measure_chalk_fraction(gray, c, cfg.chalk_bright_threshold);
        if (m.chalky_fraction > cfg.chalk_min_fraction)
            out.detections.push_back({to_box(c.rect()), {RawLabel::CHALKY}, 1.0, Branch::GRAY});
    }
    return out;
}

} // namespace ricescope

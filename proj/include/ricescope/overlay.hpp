#pragma once

// Annotated overlay: a one-pixel box per kernel, its label on a filled tag
// above the box, and the weight ratios in the upper right corner.

#include <cstdio>
#include <string>
#include <vector>

#include <opencv2/imgproc.hpp>

#include "core.hpp"
#include "png_io.hpp"
#include "report.hpp"

namespace ricescope {

inline Rgb type_color(KernelProperty p) noexcept {
    switch (p) {
    case KernelProperty::SO: return {0, 200, 0};
    case KernelProperty::BR: return {220, 0, 0};
    case KernelProperty::PC:
    case KernelProperty::MC: return {255, 140, 0};
    case KernelProperty::YC: return {255, 220, 0};
    case KernelProperty::SP: return {160, 32, 240};
    }
    return {255, 255, 255};
}

/// Colour of a kernel's annotation: its first property in display order.
inline Rgb kernel_color(PropertySet s) { return type_color(s.values().front()); }

struct OverlayLayout {
    std::vector<cv::Rect> boxes;   // kernel outlines
    std::vector<cv::Rect> tags;    // label backgrounds
    cv::Rect ratio_block;          // empty when there are no kernels
};

namespace detail {

inline constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;
inline constexpr double kTagScale = 0.4;
inline constexpr double kBlockScale = 0.5;

inline std::vector<std::string> ratio_lines(const AnalysisReport& r) {
    std::vector<std::string> out;
    char buf[64];
    for (auto p : kReportOrder) {
        std::snprintf(buf, sizeof buf, "%s %6.2f%%", to_cstr(p), 100.0 * r.ratio[index_of(p)]);
        out.emplace_back(buf);
    }
    return out;
}

inline cv::Scalar scalar(Rgb c) { return cv::Scalar(c.r, c.g, c.b); }

} // namespace detail

/// Regions render_overlay may touch, clipped to the image.
inline OverlayLayout overlay_layout(const AnalysisReport& r, int width, int height) {
    OverlayLayout lay;
    const cv::Rect frame(0, 0, width, height);
    for (const auto& k : r.kernels) {
        const cv::Rect box(static_cast<int>(k.box.x), static_cast<int>(k.box.y), static_cast<int>(k.box.w),
                           static_cast<int>(k.box.h));
        lay.boxes.push_back(box & frame);
        int base = 0;
        const auto size = cv::getTextSize(k.properties.label(), detail::kFont, detail::kTagScale, 1, &base);
        const int tw = size.width + 4, th = size.height + base + 4;
        int ty = box.y - th;
        if (ty < 0) ty = box.y;  // no room above: tag sits inside the box top
        lay.tags.push_back(cv::Rect(box.x, ty, tw, th) & frame);
    }
    if (!r.kernels.empty()) {
        int tw = 0, th = 0;
        for (const auto& line : detail::ratio_lines(r)) {
            int base = 0;
            const auto size = cv::getTextSize(line, detail::kFont, detail::kBlockScale, 1, &base);
            tw = std::max(tw, size.width);
            th = std::max(th, size.height + base);
        }
        const int rows = static_cast<int>(kReportOrder.size());
        const int bw = tw + 12, bh = rows * (th + 4) + 8;
        lay.ratio_block = cv::Rect(width - bw - 4, 4, bw, bh) & frame;
    }
    return lay;
}

inline RgbImage render_overlay(const RgbImage& img, const AnalysisReport& r) {
    if (r.kernels.empty()) return img;
    cv::Mat canvas = to_mat(img);
    const auto lay = overlay_layout(r, img.width(), img.height());

    for (std::size_t i = 0; i < r.kernels.size(); ++i) {
        const auto color = detail::scalar(kernel_color(r.kernels[i].properties));
        const cv::Rect& box = lay.boxes[i];
        if (box.area() > 0) cv::rectangle(canvas, box.tl(), box.br() - cv::Point(1, 1), color, 1, cv::LINE_8);
        const cv::Rect& tag = lay.tags[i];
        if (tag.area() == 0) continue;
        cv::Mat roi = canvas(tag);
        roi.setTo(color);
        int base = 0;
        const auto label = r.kernels[i].properties.label();
        const auto size = cv::getTextSize(label, detail::kFont, detail::kTagScale, 1, &base);
        cv::putText(roi, label, {2, 2 + size.height}, detail::kFont, detail::kTagScale, cv::Scalar(0, 0, 0), 1,
                    cv::LINE_8);
    }

    if (lay.ratio_block.area() > 0) {
        cv::Mat block = canvas(lay.ratio_block);
        block.setTo(cv::Scalar(0, 0, 0));
        const auto lines = detail::ratio_lines(r);
        int base = 0;
        const int th = cv::getTextSize("SO", detail::kFont, detail::kBlockScale, 1, &base).height + base;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const int y = 4 + static_cast<int>(i) * (th + 4) + th;
            cv::putText(block, lines[i], {6, y}, detail::kFont, detail::kBlockScale,
                        detail::scalar(type_color(kReportOrder[i])), 1, cv::LINE_8);
        }
    }
    return from_mat_rgb(canvas);
}

} // namespace ricescope

#pragma once

// One image in, one report out: contours from the VS image, detections from
// the files supplied or from the classical detectors, fusion, weighing.

#include <optional>
#include <string>

#include "config.hpp"
#include "detect.hpp"
#include "fusion.hpp"
#include "weigh.hpp"

namespace ricescope {

struct AnalysisResult {
    AnalysisReport report;
    DetectionSet color;
    DetectionSet gray;
    std::vector<Contour> contours;
};

inline void check_detection_size(const DetectionSet& s, const RgbImage& img) {
    if (s.width != img.width() || s.height != img.height())
        fail(ErrorCode::DIMENSION_MISMATCH, std::string(to_cstr(s.branch)) + " detections are for a " +
                                                std::to_string(s.width) + "x" + std::to_string(s.height) +
                                                " image, got " + std::to_string(img.width()) + "x" +
                                                std::to_string(img.height()));
}

inline AnalysisResult analyze(const RgbImage& img, const std::string& image_name, const PipelineConfig& cfg,
                              const DensityTable& densities, std::optional<DetectionSet> color = std::nullopt,
                              std::optional<DetectionSet> gray = std::nullopt) {
    cfg.validate();
    check_scale(densities, cfg.scale_tag);
    if (cfg.backend == Backend::EXTERNAL && (!color || !gray))
        fail(ErrorCode::CONFIG_ERROR, "the external backend needs both colour and gray detection files");
    if (color && color->branch != Branch::COLOR) fail(ErrorCode::BRANCH_MISMATCH, "colour detections expected");
    if (gray && gray->branch != Branch::GRAY) fail(ErrorCode::BRANCH_MISMATCH, "gray detections expected");

    AnalysisResult out;
    out.contours = kernel_contours(img, cfg.imaging);
    const GrayImage gray_image = to_inverted_gray(img);

    if (color) {
        check_detection_size(*color, img);
        out.color = std::move(*color);
    } else {
        out.color = classical_detect_color(img, out.contours, cfg.detector);
    }
    if (gray) {
        check_detection_size(*gray, img);
        out.gray = std::move(*gray);
    } else {
        out.gray = classical_detect_chalky(gray_image, out.contours, cfg.detector);
    }
    out.color.image = out.gray.image = image_name;

    const auto chalk = classify_gray_detections(out.gray, gray_image, out.contours,
                                                cfg.detector.chalk_bright_threshold, cfg.fusion);
    auto fused = fuse(out.color, out.gray, out.contours, chalk, cfg.fusion);
    out.report = build_report(image_name, img.width(), img.height(), fused.kernels, std::move(fused.unresolved),
                              densities);
    return out;
}

} // namespace ricescope

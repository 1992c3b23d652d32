#pragma once

// Random detection/contour scenes for fusion property tests.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ricescope/detect.hpp"
#include "ricescope/fusion.hpp"

namespace fuzz {

using namespace ricescope;

struct Scene {
    DetectionSet color;
    DetectionSet gray;
    std::vector<Contour> contours;
    ChalkClasses chalk;
};

inline Detection jittered_detection(std::mt19937& rng, const PixelRect& r, Branch branch, int width, int height) {
    std::uniform_int_distribution<int> jitter(-4, 4);
    std::uniform_real_distribution<double> conf(0.05, 1.0);
    std::uniform_int_distribution<int> nlab(1, 3);
    static const RawLabel color_labels[] = {RawLabel::YC, RawLabel::SP, RawLabel::BR, RawLabel::SO, RawLabel::OTHER};
    static const RawLabel gray_labels[] = {RawLabel::CHALKY, RawLabel::CHALKY, RawLabel::PC, RawLabel::MC};
    Detection d;
    d.branch = branch;
    double x = std::clamp(r.x + jitter(rng), 0, width - 2);
    double y = std::clamp(r.y + jitter(rng), 0, height - 2);
    double w = std::clamp(r.w + jitter(rng), 1, width - static_cast<int>(x));
    double h = std::clamp(r.h + jitter(rng), 1, height - static_cast<int>(y));
    d.box = {x, y, w, h};
    const int n = branch == Branch::COLOR ? nlab(rng) : 1;
    for (int k = 0; k < n; ++k) {
        if (branch == Branch::COLOR)
            d.labels.push_back(color_labels[std::uniform_int_distribution<int>(0, 4)(rng)]);
        else
            d.labels.push_back(gray_labels[std::uniform_int_distribution<int>(0, 3)(rng)]);
    }
    normalize_labels(d.labels);
    d.confidence = std::round(conf(rng) * 20.0) / 20.0;  // coarse, so ties happen
    return d;
}

/// Rectangular kernels on a grid plus 0..3 detections per kernel on each
/// branch and a few stray boxes that hit nothing.
inline Scene random_scene(std::mt19937& rng) {
    constexpr int cell = 40, cols = 6, rows = 4;
    Scene s;
    s.color.branch = Branch::COLOR;
    s.gray.branch = Branch::GRAY;
    s.color.width = s.gray.width = cell * cols;
    s.color.height = s.gray.height = cell * rows;
    std::uniform_int_distribution<int> ext(6, 30), off(0, 8), count(0, 3), stray(0, 2);
    std::bernoulli_distribution present(0.7), classified(0.8), pc(0.5);
    for (int gy = 0; gy < rows; ++gy)
        for (int gx = 0; gx < cols; ++gx) {
            if (!present(rng)) continue;
            const int w = ext(rng), h = ext(rng);
            const int x = gx * cell + off(rng), y = gy * cell + off(rng);
            s.contours.push_back(Contour::from_mask(x, y, w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 1)));
        }
    for (const auto& c : s.contours) {
        for (int k = count(rng); k > 0; --k)
            s.color.detections.push_back(jittered_detection(rng, c.rect(), Branch::COLOR, s.color.width, s.color.height));
        for (int k = count(rng) / 2; k > 0; --k)
            s.gray.detections.push_back(jittered_detection(rng, c.rect(), Branch::GRAY, s.gray.width, s.gray.height));
    }
    for (int k = stray(rng); k > 0; --k) {
        const PixelRect r{std::uniform_int_distribution<int>(0, s.color.width - 12)(rng),
                          std::uniform_int_distribution<int>(0, s.color.height - 12)(rng), 10, 10};
        s.color.detections.push_back(jittered_detection(rng, r, Branch::COLOR, s.color.width, s.color.height));
    }
    for (std::size_t i = 0; i < s.gray.detections.size(); ++i)
        if (classified(rng)) s.chalk[i] = pc(rng) ? KernelProperty::PC : KernelProperty::MC;
    return s;
}

/// Canonical text form of a fusion result, for rerun comparisons.
inline std::string digest(const FusionResult& r) {
    std::ostringstream os;
    os.precision(17);
    auto det = [&](const Detection& d) {
        os << '[' << d.box.x << ',' << d.box.y << ',' << d.box.w << ',' << d.box.h << ' ' << to_cstr(d.branch);
        for (auto l : d.labels) os << ' ' << to_cstr(l);
        os << ' ' << d.confidence << ']';
    };
    for (const auto& k : r.kernels) {
        os << "K " << k.contour->rect().x << ',' << k.contour->rect().y << ' ' << k.properties.label() << ' '
           << k.confidence << ' ';
        for (const auto& d : k.source_detections) det(d);
        os << '\n';
    }
    for (const auto& u : r.unresolved) {
        os << "U " << to_cstr(u.reason) << ' ' << u.area << ' ';
        det(u.detection);
        os << '\n';
    }
    return os.str();
}

} // namespace fuzz

#pragma once

// Pixel operations: inverted gray conversion, HSV channels, square-element
// morphology and external contour extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "contour.hpp"
#include "error.hpp"

namespace ricescope {

inline constexpr int kDefaultImageWidth = 1280;
inline constexpr int kDefaultImageHeight = 960;

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {}) : width_(width), height_(height) {
        if (width <= 0 || height <= 0) fail(ErrorCode::INVALID_ARGUMENT, "image must be non-empty");
        data_.resize(static_cast<std::size_t>(width) * height * 3);
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = fill.r; data_[i + 1] = fill.g; data_[i + 2] = fill.b;
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    Rgb at(int x, int y) const noexcept {
        const auto i = offset(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        const auto i = offset(x, y);
        data_[i] = c.r; data_[i + 1] = c.g; data_[i + 2] = c.b;
    }

    /// Interleaved RGB, row-major.
    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel 8-bit plane.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Plane() = default;
    Plane(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) fail(ErrorCode::INVALID_ARGUMENT, "image must be non-empty");
    }

    std::uint8_t operator()(int x, int y) const noexcept {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& operator()(int x, int y) noexcept {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    bool same_size(const Plane& o) const noexcept { return width == o.width && height == o.height; }

    bool operator==(const Plane&) const = default;
};

/// Inverted luma image.
struct GrayImage : Plane {
    using Plane::Plane;
};

enum class Channel : std::uint8_t { SATURATION, VALUE, VS, BINARY };

struct ChannelImage : Plane {
    Channel channel = Channel::VALUE;

    ChannelImage() = default;
    ChannelImage(int w, int h, Channel c, std::uint8_t fill = 0) : Plane(w, h, fill), channel(c) {}

    bool operator==(const ChannelImage&) const = default;
};

/// Y = 255 - (0.299 R + 0.587 G + 0.114 B), rounded half up.
inline std::uint8_t inverted_luma(Rgb p) noexcept {
    const int milli = 255000 - (299 * p.r + 587 * p.g + 114 * p.b);
    return static_cast<std::uint8_t>(std::clamp((milli + 500) / 1000, 0, 255));
}

inline GrayImage to_inverted_gray(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out(x, y) = inverted_luma(img.at(x, y));
    return out;
}

/// HSV saturation on 0..255; 0 for black.
inline std::uint8_t saturation(Rgb p) noexcept {
    const int mx = std::max({p.r, p.g, p.b});
    const int mn = std::min({p.r, p.g, p.b});
    if (mx == 0) return 0;
    return static_cast<std::uint8_t>((2 * 255 * (mx - mn) + mx) / (2 * mx));
}

inline std::uint8_t value(Rgb p) noexcept { return std::max({p.r, p.g, p.b}); }

/// HSV hue in degrees [0, 360); 0 for grays.
inline double hue_degrees(Rgb p) noexcept {
    const double r = p.r, g = p.g, b = p.b;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    if (d <= 0) return 0.0;
    double h;
    if (mx == r)
        h = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
    else if (mx == g)
        h = 60.0 * ((b - r) / d + 2.0);
    else
        h = 60.0 * ((r - g) / d + 4.0);
    return h >= 360.0 ? h - 360.0 : h;
}

struct HsvPlanes {
    ChannelImage s;
    ChannelImage v;
};

inline HsvPlanes split_hsv(const RgbImage& img) {
    HsvPlanes out{ChannelImage(img.width(), img.height(), Channel::SATURATION),
                  ChannelImage(img.width(), img.height(), Channel::VALUE)};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const Rgb p = img.at(x, y);
            out.s(x, y) = saturation(p);
            out.v(x, y) = value(p);
        }
    return out;
}

namespace detail {

// Min/max over a (2r+1)^2 square clipped to the image. For a square element
// this equals the edge-replicated filter, and keeps erosion/dilation an
// adjoint pair (so opening is idempotent).
template <typename Pick>
void square_filter(Plane& img, int radius, Pick pick) {
    if (radius < 1) fail(ErrorCode::INVALID_ARGUMENT, "kernel radius must be >= 1");
    const int w = img.width, h = img.height;
    std::vector<std::uint8_t> tmp(img.pixels.size());
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = &img.pixels[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            const int lo = std::max(0, x - radius), hi = std::min(w - 1, x + radius);
            std::uint8_t best = row[lo];
            for (int k = lo + 1; k <= hi; ++k) best = pick(best, row[k]);
            tmp[static_cast<std::size_t>(y) * w + x] = best;
        }
    }
    for (int y = 0; y < h; ++y) {
        const int lo = std::max(0, y - radius), hi = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            std::uint8_t best = tmp[static_cast<std::size_t>(lo) * w + x];
            for (int k = lo + 1; k <= hi; ++k) best = pick(best, tmp[static_cast<std::size_t>(k) * w + x]);
            img.pixels[static_cast<std::size_t>(y) * w + x] = best;
        }
    }
}

} // namespace detail

template <typename Image>
Image erode(Image img, int radius) {
    detail::square_filter(img, radius, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
    return img;
}

template <typename Image>
Image dilate(Image img, int radius) {
    detail::square_filter(img, radius, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
    return img;
}

template <typename Image>
Image morph_open(Image img, int radius) {
    return dilate(erode(std::move(img), radius), radius);
}

/// Per-pixel max(erode(S), V).
inline ChannelImage vs_image(const ChannelImage& s, const ChannelImage& v, int radius) {
    if (!s.same_size(v)) fail(ErrorCode::DIMENSION_MISMATCH, "S and V planes differ in size");
    ChannelImage out = erode(s, radius);
    out.channel = Channel::VS;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = std::max(out.pixels[i], v.pixels[i]);
    return out;
}

inline ChannelImage binarize(const Plane& img, int threshold) {
    ChannelImage out(img.width, img.height, Channel::BINARY);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = img.pixels[i] > threshold ? 255 : 0;
    return out;
}

/// External contours of the 8-connected foreground of an already binary
/// plane (nonzero = foreground), in raster order of each region's first
/// pixel. Regions nested inside another region's holes are not reported.
inline std::vector<Contour> trace_external_contours(const Plane& binary, std::int64_t min_area) {
    const int w = binary.width, h = binary.height;
    std::vector<std::int32_t> label(binary.pixels.size(), 0);
    std::vector<std::uint8_t> owned(binary.pixels.size(), 0);
    std::vector<Contour> out;
    std::vector<Point> stack, members;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto idx = static_cast<std::size_t>(y) * w + x;
            if (!binary.pixels[idx] || label[idx]) continue;

            members.clear();
            label[idx] = 1;
            stack.push_back({x, y});
            int x0 = x, x1 = x, y0 = y, y1 = y;
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                members.push_back(p);
                x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
                y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const auto n = static_cast<std::size_t>(ny) * w + nx;
                        if (!binary.pixels[n] || label[n]) continue;
                        label[n] = 1;
                        stack.push_back({nx, ny});
                    }
            }
            if (owned[idx]) continue;  // nested in an earlier region's hole

            const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
            std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
            for (const auto& p : members) mask[static_cast<std::size_t>(p.y - y0) * bw + (p.x - x0)] = 1;
            Contour c = Contour::from_mask(x0, y0, bw, bh, std::move(mask));
            c.for_each_pixel([&](int px, int py) { owned[static_cast<std::size_t>(py) * w + px] = 1; });
            if (c.area() >= min_area) out.push_back(std::move(c));
        }
    return out;
}

/// Binarize (pixel > threshold), open with a square element of the given
/// radius, then trace external contours and drop those below min_area.
inline std::vector<Contour> extract_contours(const ChannelImage& img, int binarize_threshold,
                                             int kernel_radius, std::int64_t min_area) {
    if (binarize_threshold <= 0 || binarize_threshold >= 255)
        fail(ErrorCode::INVALID_ARGUMENT, "binarize threshold must lie in (0, 255)");
    return trace_external_contours(morph_open(binarize(img, binarize_threshold), kernel_radius),
                                   min_area);
}

inline std::int64_t contour_area(const Contour& c) noexcept { return c.area(); }

/// 4 * sqrt(largest eigenvalue of the filled mask's normalized second
/// central moments), i.e. the major axis of the equivalent ellipse.
inline double major_axis_length(const Contour& c) noexcept { return c.major_axis_length(); }

} // namespace ricescope

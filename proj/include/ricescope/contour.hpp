#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"

namespace ricescope {

struct Point {
    int x = 0;
    int y = 0;
    auto operator<=>(const Point&) const = default;
};

struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    bool operator==(const PixelRect&) const = default;
};

/// Outer boundary of one filled 8-connected region together with the filled
/// region itself (bbox-local mask) and its moment statistics.
///
/// The mask follows the fill convention of an external contour: enclosed
/// holes belong to the region, so area() counts every pixel inside or on the
/// boundary polyline.
class Contour {
public:
    Contour() = default;

    /// Builds a contour from a bbox-local mask (row-major, nonzero = inside).
    /// Holes are filled. The nonzero pixels must form one 8-connected region.
    static Contour from_mask(int origin_x, int origin_y, int width, int height,
                             std::vector<std::uint8_t> mask) {
        if (width <= 0 || height <= 0 ||
            mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            fail(ErrorCode::INVALID_ARGUMENT, "contour mask has inconsistent dimensions");
        for (auto& m : mask) m = m ? 1 : 0;

        // Tighten to the occupied bounding box.
        int x0 = width, y0 = height, x1 = -1, y1 = -1;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (mask[static_cast<std::size_t>(y) * width + x]) {
                    x0 = std::min(x0, x); x1 = std::max(x1, x);
                    y0 = std::min(y0, y); y1 = std::max(y1, y);
                }
        if (x1 < 0) fail(ErrorCode::NONPOSITIVE_AREA, "contour mask is empty");

        Contour c;
        c.rect_ = {origin_x + x0, origin_y + y0, x1 - x0 + 1, y1 - y0 + 1};
        c.mask_.assign(static_cast<std::size_t>(c.rect_.w) * c.rect_.h, 0);
        for (int y = 0; y < c.rect_.h; ++y)
            for (int x = 0; x < c.rect_.w; ++x)
                c.mask_[static_cast<std::size_t>(y) * c.rect_.w + x] =
                    mask[static_cast<std::size_t>(y + y0) * width + (x + x0)];

        if (c.count_components() != 1)
            fail(ErrorCode::INVALID_ARGUMENT, "contour mask is not a single 8-connected region");
        c.fill_holes();
        c.compute_moments();
        c.trace_boundary();
        return c;
    }

    const PixelRect& rect() const noexcept { return rect_; }
    const std::vector<Point>& polyline() const noexcept { return polyline_; }
    std::int64_t area() const noexcept { return area_; }
    std::pair<double, double> centroid() const noexcept { return {cx_, cy_}; }
    double major_axis_length() const noexcept { return major_axis_; }

    /// Global-coordinate membership test.
    bool contains(int x, int y) const noexcept {
        const int lx = x - rect_.x, ly = y - rect_.y;
        if (lx < 0 || ly < 0 || lx >= rect_.w || ly >= rect_.h) return false;
        return mask_[static_cast<std::size_t>(ly) * rect_.w + lx] != 0;
    }

    /// Calls fn(x, y) for every pixel of the filled region, in raster order.
    template <typename Fn>
    void for_each_pixel(Fn&& fn) const {
        for (int y = 0; y < rect_.h; ++y)
            for (int x = 0; x < rect_.w; ++x)
                if (mask_[static_cast<std::size_t>(y) * rect_.w + x]) fn(rect_.x + x, rect_.y + y);
    }

    const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

    bool operator==(const Contour& o) const {
        return rect_ == o.rect_ && mask_ == o.mask_;
    }

private:
    bool at(int x, int y) const noexcept {
        if (x < 0 || y < 0 || x >= rect_.w || y >= rect_.h) return false;
        return mask_[static_cast<std::size_t>(y) * rect_.w + x] != 0;
    }

    int count_components() const {
        std::vector<std::uint8_t> seen(mask_.size(), 0);
        std::vector<Point> stack;
        int components = 0;
        for (int y = 0; y < rect_.h; ++y)
            for (int x = 0; x < rect_.w; ++x) {
                const auto idx = static_cast<std::size_t>(y) * rect_.w + x;
                if (!mask_[idx] || seen[idx]) continue;
                ++components;
                seen[idx] = 1;
                stack.push_back({x, y});
                while (!stack.empty()) {
                    const Point p = stack.back();
                    stack.pop_back();
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nx = p.x + dx, ny = p.y + dy;
                            if (!at(nx, ny)) continue;
                            const auto n = static_cast<std::size_t>(ny) * rect_.w + nx;
                            if (seen[n]) continue;
                            seen[n] = 1;
                            stack.push_back({nx, ny});
                        }
                }
            }
        return components;
    }

    // Background reachable (4-connected) from outside the box stays background;
    // everything else is inside the outer boundary.
    void fill_holes() {
        const int pw = rect_.w + 2, ph = rect_.h + 2;
        std::vector<std::uint8_t> outside(static_cast<std::size_t>(pw) * ph, 0);
        std::vector<Point> stack{{0, 0}};
        outside[0] = 1;
        while (!stack.empty()) {
            const Point p = stack.back();
            stack.pop_back();
            constexpr std::array<Point, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
            for (const auto& s : steps) {
                const int nx = p.x + s.x, ny = p.y + s.y;
                if (nx < 0 || ny < 0 || nx >= pw || ny >= ph) continue;
                const auto n = static_cast<std::size_t>(ny) * pw + nx;
                if (outside[n] || at(nx - 1, ny - 1)) continue;
                outside[n] = 1;
                stack.push_back({nx, ny});
            }
        }
        for (int y = 0; y < rect_.h; ++y)
            for (int x = 0; x < rect_.w; ++x)
                if (!outside[static_cast<std::size_t>(y + 1) * pw + (x + 1)])
                    mask_[static_cast<std::size_t>(y) * rect_.w + x] = 1;
    }

    void compute_moments() {
        double sx = 0, sy = 0;
        std::int64_t n = 0;
        for (int y = 0; y < rect_.h; ++y)
            for (int x = 0; x < rect_.w; ++x)
                if (at(x, y)) { sx += x; sy += y; ++n; }
        area_ = n;
        const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
        double sxx = 0, syy = 0, sxy = 0;
        for (int y = 0; y < rect_.h; ++y)
            for (int x = 0; x < rect_.w; ++x)
                if (at(x, y)) {
                    const double dx = x - mx, dy = y - my;
                    sxx += dx * dx; syy += dy * dy; sxy += dx * dy;
                }
        sxx /= static_cast<double>(n); syy /= static_cast<double>(n); sxy /= static_cast<double>(n);
        const double half_trace = 0.5 * (sxx + syy);
        const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
        major_axis_ = 4.0 * std::sqrt(std::max(0.0, half_trace + disc));
        cx_ = rect_.x + mx;
        cy_ = rect_.y + my;
    }

    // Moore-neighbour tracing, clockwise in image coordinates (y down).
    void trace_boundary() {
        static constexpr std::array<Point, 8> ring{{
            {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
        auto dir_of = [](Point from, Point to) {
            for (int i = 0; i < 8; ++i)
                if (from.x + ring[i].x == to.x && from.y + ring[i].y == to.y) return i;
            return 0;
        };

        Point start{};
        for (int y = 0, found = 0; y < rect_.h && !found; ++y)
            for (int x = 0; x < rect_.w; ++x)
                if (at(x, y)) { start = {x, y}; found = 1; break; }

        polyline_.clear();
        polyline_.push_back({start.x + rect_.x, start.y + rect_.y});

        auto next_of = [&](Point cur, Point back, Point& out, Point& out_back) {
            const int b = dir_of(cur, back);
            Point prev = back;
            for (int k = 1; k <= 8; ++k) {
                const Point cand{cur.x + ring[(b + k) % 8].x, cur.y + ring[(b + k) % 8].y};
                if (at(cand.x, cand.y)) { out = cand; out_back = prev; return true; }
                prev = cand;
            }
            return false;
        };

        Point first{}, first_back{};
        if (!next_of(start, {start.x - 1, start.y}, first, first_back)) return;

        Point cur = first, back = first_back;
        const std::size_t guard = 4 * static_cast<std::size_t>(area_) + 16;
        for (std::size_t step = 0; step < guard; ++step) {
            Point nxt{}, nback{};
            next_of(cur, back, nxt, nback);
            if (cur == start && nxt == first) break;
            polyline_.push_back({cur.x + rect_.x, cur.y + rect_.y});
            back = nback;
            cur = nxt;
        }
    }

    PixelRect rect_{};
    std::vector<std::uint8_t> mask_;
    std::vector<Point> polyline_;
    std::int64_t area_ = 0;
    double cx_ = 0, cy_ = 0;
    double major_axis_ = 0;
};

} // namespace ricescope

#pragma once

// Slow, obviously-correct reference computations used only by tests.

#include <algorithm>
#include <deque>
#include <random>
#include <vector>

#include "ricescope/imaging.hpp"

namespace oracle {

using ricescope::ChannelImage;
using ricescope::Plane;

template <typename Pick>
ChannelImage brute_filter(const ChannelImage& img, int r, Pick pick) {
    ChannelImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int best = img(x, y);
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    best = pick(best, static_cast<int>(img(std::clamp(x + dx, 0, img.width - 1),
                                                           std::clamp(y + dy, 0, img.height - 1))));
            out(x, y) = static_cast<std::uint8_t>(best);
        }
    return out;
}

inline ChannelImage brute_erode(const ChannelImage& img, int r) {
    return brute_filter(img, r, [](int a, int b) { return std::min(a, b); });
}

inline ChannelImage brute_dilate(const ChannelImage& img, int r) {
    return brute_filter(img, r, [](int a, int b) { return std::max(a, b); });
}

inline int count_pixels(const Plane& img) {
    int n = 0;
    for (auto p : img.pixels) n += p != 0;
    return n;
}

/// Pixels not reachable from outside the image through 4-connected
/// background: the region plus its enclosed holes.
inline int flood_fill_area(const Plane& img) {
    const int w = img.width + 2, h = img.height + 2;
    auto fg = [&](int x, int y) {
        return x >= 1 && y >= 1 && x <= img.width && y <= img.height && img(x - 1, y - 1) != 0;
    };
    std::vector<char> reached(static_cast<std::size_t>(w) * h, 0);
    std::deque<std::pair<int, int>> queue{{0, 0}};
    reached[0] = 1;
    int outside = 1;
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (auto& n : nbr) {
            if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h) continue;
            auto& r = reached[static_cast<std::size_t>(n[1]) * w + n[0]];
            if (r || fg(n[0], n[1])) continue;
            r = 1;
            ++outside;
            queue.push_back({n[0], n[1]});
        }
    }
    return w * h - outside;
}

/// One random 8-connected blob (possibly with holes) built from a random walk
/// of small squares; only the component containing the walk start is kept.
inline ChannelImage random_blob(std::mt19937& rng, int w, int h) {
    ChannelImage img(w, h, ricescope::Channel::BINARY);
    std::uniform_int_distribution<int> step(-2, 2), size(0, 2), len(3, 25);
    int x = w / 2, y = h / 2;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        const int s = size(rng);
        for (int dy = -s; dy <= s; ++dy)
            for (int dx = -s; dx <= s; ++dx) {
                const int px = x + dx, py = y + dy;
                if (px >= 0 && py >= 0 && px < w && py < h) img(px, py) = 255;
            }
        x = std::clamp(x + step(rng), 0, w - 1);
        y = std::clamp(y + step(rng), 0, h - 1);
    }
    // keep the component containing the centre
    std::vector<char> keep(img.pixels.size(), 0);
    std::deque<std::pair<int, int>> queue{{w / 2, h / 2}};
    keep[static_cast<std::size_t>(h / 2) * w + w / 2] = 1;
    while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int px = cx + dx, py = cy + dy;
                if (px < 0 || py < 0 || px >= w || py >= h) continue;
                const auto i = static_cast<std::size_t>(py) * w + px;
                if (keep[i] || !img.pixels[i]) continue;
                keep[i] = 1;
                queue.push_back({px, py});
            }
    }
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = keep[i] ? 255 : 0;
    return img;
}

} // namespace oracle

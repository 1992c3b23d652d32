#pragma once

// Random kernel lists for the weight-ratio laws.

#include <random>
#include <vector>

#include "ricescope/weigh.hpp"

namespace kset {

using namespace ricescope;

inline PropertySet random_class(std::mt19937& rng, bool allow_dual) {
    const auto classes = defined_classes();
    std::uniform_int_distribution<std::size_t> pick(0, allow_dual ? classes.size() - 1 : kPropertyCount - 1);
    return classes[pick(rng)];
}

inline std::vector<KernelRecord> random_kernels(std::mt19937& rng, bool allow_dual) {
    std::uniform_int_distribution<int> count(1, 60);
    std::uniform_int_distribution<std::int64_t> area(80, 6000);
    std::vector<KernelRecord> out(static_cast<std::size_t>(count(rng)));
    for (auto& k : out) {
        k.properties = random_class(rng, allow_dual);
        k.area = area(rng);
    }
    return out;
}

inline DensityTable random_densities(std::mt19937& rng) {
    std::uniform_real_distribution<double> rho(4.0e-6, 6.0e-6);
    DensityTable d;
    for (auto& r : d.rho) r = rho(rng);
    return d;
}

/// Straight per-kernel accumulation in long double, sharing no code with weigh_items.
struct NaiveRatios {
    std::array<long double, kPropertyCount> ratio{};
    long double total = 0;
};

inline NaiveRatios naive_ratios(const std::vector<KernelRecord>& ks, const DensityTable& d) {
    std::array<long double, kPropertyCount> w{};
    NaiveRatios out;
    for (const auto& k : ks) {
        long double contribution = 0;
        int members = 0;
        for (std::size_t t = 0; t < kPropertyCount; ++t) {
            if (!k.properties.contains(static_cast<KernelProperty>(t))) continue;
            const long double wt = static_cast<long double>(d.rho[t]) * k.area;
            w[t] += wt;
            contribution += wt;
            ++members;
        }
        out.total += contribution / members;
    }
    for (std::size_t t = 0; t < kPropertyCount; ++t) out.ratio[t] = w[t] / out.total;
    return out;
}

} // namespace kset

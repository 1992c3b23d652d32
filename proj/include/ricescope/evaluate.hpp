#pragma once

// Scores reports against generator ground truth. A predicted kernel matches
// the ground-truth kernel whose mask contains its (rounded) centroid; dual
// kernels count toward each of their two types. Ratio errors are absolute
// differences in percentage points.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "synthgen.hpp"

namespace ricescope {

struct TypeCounts {
    std::int64_t tp = 0, fp = 0, fn = 0;

    TypeCounts& operator+=(const TypeCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    bool operator==(const TypeCounts&) const = default;

    // NaN when undefined (no predictions / no ground truth of the type).
    double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : NAN; }
    double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : NAN; }
    double f1() const {
        return 2 * tp + fp + fn ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn) : NAN;
    }
};

struct FileEvaluation {
    std::array<TypeCounts, kPropertyCount> counts{};
    std::array<double, kPropertyCount> ratio_error_pp{};
    std::int64_t unmatched_predictions = 0;
    std::int64_t missed_kernels = 0;
};

inline FileEvaluation evaluate_report(const AnalysisReport& report, const GroundTruth& truth) {
    FileEvaluation ev;
    const auto masks = truth_contours(truth);
    std::vector<char> taken(masks.size(), 0);

    auto count = [&](PropertySet predicted, const PropertySet* actual) {
        for (auto p : kAllProperties) {
            const bool pr = predicted.contains(p), gt = actual && actual->contains(p);
            auto& c = ev.counts[index_of(p)];
            if (pr && gt) ++c.tp;
            else if (pr) ++c.fp;
            else if (gt) ++c.fn;
        }
    };

    for (const auto& k : report.kernels) {
        const int x = static_cast<int>(std::lround(k.centroid_x)), y = static_cast<int>(std::lround(k.centroid_y));
        std::optional<std::size_t> hit;
        for (std::size_t i = 0; i < masks.size() && !hit; ++i)
            if (!taken[i] && masks[i].second.contains(x, y)) hit = i;
        if (hit) {
            taken[*hit] = 1;
            count(k.properties, &masks[*hit].first->properties);
        } else {
            ++ev.unmatched_predictions;
            count(k.properties, nullptr);
        }
    }
    for (std::size_t i = 0; i < masks.size(); ++i) {
        if (taken[i]) continue;
        ++ev.missed_kernels;
        for (auto p : masks[i].first->properties.values()) ++ev.counts[index_of(p)].fn;
    }

    std::array<double, kPropertyCount> truth_ratio{};
    if (!truth.kernels.empty()) truth_ratio = ground_truth_report(truth, report.densities).ratio;
    for (std::size_t t = 0; t < kPropertyCount; ++t)
        ev.ratio_error_pp[t] = 100.0 * std::fabs(report.ratio[t] - truth_ratio[t]);
    return ev;
}

struct TypeSummary {
    TypeCounts counts;
    double mean_error_pp = 0;
    double max_error_pp = 0;
};

struct EvaluationSummary {
    std::array<TypeSummary, kPropertyCount> types{};
    std::size_t files = 0;
};

inline EvaluationSummary summarize(const std::vector<FileEvaluation>& files) {
    EvaluationSummary s;
    s.files = files.size();
    for (const auto& f : files)
        for (std::size_t t = 0; t < kPropertyCount; ++t) {
            s.types[t].counts += f.counts[t];
            s.types[t].mean_error_pp += f.ratio_error_pp[t];
            s.types[t].max_error_pp = std::max(s.types[t].max_error_pp, f.ratio_error_pp[t]);
        }
    if (!files.empty())
        for (auto& t : s.types) t.mean_error_pp /= static_cast<double>(files.size());
    return s;
}

/// CSV: type,tp,fp,fn,precision,recall,f1,mean_error_pp,max_error_pp
inline std::string summary_csv(const EvaluationSummary& s) {
    std::string out = "type,tp,fp,fn,precision,recall,f1,mean_error_pp,max_error_pp\n";
    char buf[256];
    auto num = [](double v) {
        if (std::isnan(v)) return std::string("");
        char b[32];
        std::snprintf(b, sizeof b, "%.4f", v);
        return std::string(b);
    };
    for (auto p : kReportOrder) {
        const auto& t = s.types[index_of(p)];
        std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%lld,%s,%s,%s,%s,%s\n", to_cstr(p),
                      static_cast<long long>(t.counts.tp), static_cast<long long>(t.counts.fp),
                      static_cast<long long>(t.counts.fn), num(t.counts.precision()).c_str(),
                      num(t.counts.recall()).c_str(), num(t.counts.f1()).c_str(), num(t.mean_error_pp).c_str(),
                      num(t.max_error_pp).c_str());
        out += buf;
    }
    return out;
}

} // namespace ricescope

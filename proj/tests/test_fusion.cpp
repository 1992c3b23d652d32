#include <gtest/gtest.h>

#include <random>

#include "fuzz_scenes.hpp"
#include "ricescope/fusion.hpp"

using namespace ricescope;
using KP = KernelProperty;

namespace {

Contour rect_contour(int x, int y, int w, int h) {
    return Contour::from_mask(x, y, w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 1));
}

DetectionSet set_of(Branch b, std::vector<Detection> dets) {
    DetectionSet s;
    s.branch = b;
    s.width = 200;
    s.height = 200;
    s.detections = std::move(dets);
    return s;
}

Detection det(BoundingBox box, std::vector<RawLabel> labels, double conf, Branch b) {
    normalize_labels(labels);
    return {box, std::move(labels), conf, b};
}

std::size_t detection_count(const fuzz::Scene& s) { return s.color.detections.size() + s.gray.detections.size(); }

std::size_t accounted(const FusionResult& r) {
    std::size_t n = r.unresolved.size();
    for (const auto& k : r.kernels) n += k.source_detections.size();
    return n;
}

} // namespace

TEST(Iou, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 0, 10, 10}), 0.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);  // touching edges
}

TEST(Iou, SymmetricBoundedAndOneOnlyForIdentical) {
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> c(0, 20), e(1, 15);
    for (int i = 0; i < 20000; ++i) {
        const BoundingBox a{double(c(rng)), double(c(rng)), double(e(rng)), double(e(rng))};
        const BoundingBox b{double(c(rng)), double(c(rng)), double(e(rng)), double(e(rng))};
        const double v = iou(a, b);
        EXPECT_EQ(v, iou(b, a));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_EQ(v == 1.0, a == b);
    }
}

TEST(Fuse, SingleColorDetection) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::SO}, 0.9, Branch::COLOR)});
    const auto r = fuse(color, set_of(Branch::GRAY, {}), cs, {});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::SO));
    EXPECT_EQ(r.kernels[0].area(), 480);
    EXPECT_TRUE(r.unresolved.empty());
}

TEST(Fuse, YellowPlusChalkyBecomesDual) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const BoundingBox a{10, 10, 40, 12}, b{10, 10, 40, 13};
    ASSERT_NEAR(iou(a, b), 480.0 / 520.0, 1e-12);  // ~0.92
    const auto color = set_of(Branch::COLOR, {det(a, {RawLabel::YC}, 0.9, Branch::COLOR)});
    const auto gray = set_of(Branch::GRAY, {det(b, {RawLabel::CHALKY}, 0.7, Branch::GRAY)});
    const auto r = fuse(color, gray, cs, {{0, KP::PC}});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties.label(), "PC&YC");
    EXPECT_EQ(r.kernels[0].source_detections.size(), 2u);
}

TEST(Fuse, MutuallyExclusiveLowerConfidenceLoses) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::BR}, 0.8, Branch::COLOR)});
    const auto gray = set_of(Branch::GRAY, {det({10, 10, 40, 12}, {RawLabel::CHALKY}, 0.6, Branch::GRAY)});
    const auto r = fuse(color, gray, cs, {{0, KP::PC}});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::BR));
    // The discarded PC proposal is still accounted for by the kernel.
    EXPECT_EQ(r.kernels[0].source_detections.size(), 2u);
    EXPECT_TRUE(r.unresolved.empty());
}

TEST(Fuse, OtherConsumedByChalk) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::OTHER}, 0.95, Branch::COLOR)});
    const auto gray = set_of(Branch::GRAY, {det({10, 10, 40, 12}, {RawLabel::CHALKY}, 0.6, Branch::GRAY)});
    const auto r = fuse(color, gray, cs, {{0, KP::MC}});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::MC));
    EXPECT_EQ(r.kernels[0].source_detections.size(), 2u);
    EXPECT_TRUE(r.unresolved.empty());
}

TEST(Fuse, OtherWithoutChalkIsUnresolved) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::OTHER}, 0.95, Branch::COLOR)});
    const auto r = fuse(color, set_of(Branch::GRAY, {}), cs, {});
    EXPECT_TRUE(r.kernels.empty());
    ASSERT_EQ(r.unresolved.size(), 1u);
    EXPECT_EQ(r.unresolved[0].reason, UnresolvedReason::UNMATCHED_OTHER);
    EXPECT_EQ(r.unresolved[0].area, 480);
}

TEST(Fuse, UnclassifiedChalkyAndStrayBoxes) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::SO}, 0.9, Branch::COLOR),
                                              det({120, 120, 20, 20}, {RawLabel::YC}, 0.9, Branch::COLOR)});
    const auto gray = set_of(Branch::GRAY, {det({10, 10, 40, 12}, {RawLabel::CHALKY}, 0.6, Branch::GRAY)});
    const auto r = fuse(color, gray, cs, {});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::SO));
    ASSERT_EQ(r.unresolved.size(), 2u);
    EXPECT_EQ(r.unresolved[0].reason, UnresolvedReason::NO_CONTOUR);
    EXPECT_EQ(r.unresolved[1].reason, UnresolvedReason::UNCLASSIFIED_CHALKY);
}

TEST(Fuse, ConfidenceTieBrokenByLabelName) {
    // Classical backends report 1.0 everywhere: SO vs PC on the same box keeps PC.
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 40, 12}, {RawLabel::SO}, 1.0, Branch::COLOR)});
    const auto gray = set_of(Branch::GRAY, {det({10, 10, 40, 12}, {RawLabel::CHALKY}, 1.0, Branch::GRAY)});
    const auto r = fuse(color, gray, cs, {{0, KP::PC}});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::PC));
}

TEST(Fuse, NonOverlappingProposalIsReported) {
    const std::vector<Contour> cs{rect_contour(10, 10, 60, 20)};
    const auto color = set_of(Branch::COLOR, {det({10, 10, 60, 20}, {RawLabel::YC}, 0.9, Branch::COLOR),
                                              det({30, 15, 22, 10}, {RawLabel::SP}, 0.5, Branch::COLOR)});
    const auto r = fuse(color, set_of(Branch::GRAY, {}), cs, {});
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties, PropertySet::single(KP::YC));
    ASSERT_EQ(r.unresolved.size(), 1u);
    EXPECT_EQ(r.unresolved[0].reason, UnresolvedReason::DISJOINT_PROPOSAL);
}

TEST(Fuse, CentroidMatchPicksNearestBox) {
    const std::vector<Contour> cs{rect_contour(0, 0, 10, 10), rect_contour(12, 0, 10, 10)};
    EXPECT_EQ(match_contour({0, 0, 21, 10}, cs), std::optional<std::size_t>(0));  // equidistant: lower index
    EXPECT_EQ(match_contour({8, 0, 14, 10}, cs), std::optional<std::size_t>(1));
    EXPECT_EQ(match_contour({100, 100, 5, 5}, cs), std::nullopt);
}

TEST(Fuse, DimensionMismatch) {
    auto gray = set_of(Branch::GRAY, {});
    gray.width = 50;
    EXPECT_THROW(fuse(set_of(Branch::COLOR, {}), gray, {}, {}), Error);
}

TEST(Fuse, InvalidThreshold) {
    FusionConfig cfg;
    cfg.iou_threshold = 0.0;
    EXPECT_THROW(fuse(set_of(Branch::COLOR, {}), set_of(Branch::GRAY, {}), {}, {}, cfg), Error);
}

TEST(NaivePostprocess, MatchesFuseWithoutGray) {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = fuzz::random_scene(rng);
        auto empty_gray = s.gray;
        empty_gray.detections.clear();
        EXPECT_EQ(fuzz::digest(naive_postprocess(s.color.detections, s.contours)),
                  fuzz::digest(fuse(s.color, empty_gray, s.contours, {})));
    }
}

TEST(NaivePostprocess, LegalMultiLabelPairKept) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto r = naive_postprocess({det({10, 10, 40, 12}, {RawLabel::MC, RawLabel::SP}, 0.7, Branch::COLOR)}, cs);
    ASSERT_EQ(r.kernels.size(), 1u);
    EXPECT_EQ(r.kernels[0].properties.label(), "MC&SP");
}

TEST(NaivePostprocess, IllegalTripleReducedToBestLegalPair) {
    const std::vector<Contour> cs{rect_contour(10, 10, 40, 12)};
    const auto r = naive_postprocess({det({10, 10, 40, 12}, {RawLabel::YC}, 0.9, Branch::COLOR),
                                      det({10, 10, 40, 12}, {RawLabel::SP}, 0.8, Branch::COLOR),
                                      det({10, 10, 40, 12}, {RawLabel::PC}, 0.7, Branch::COLOR)},
                                     cs);
    ASSERT_EQ(r.kernels.size(), 1u);
    // YC kept; SP excluded by YC; PC pairs with YC.
    EXPECT_EQ(r.kernels[0].properties.label(), "PC&YC");
}

TEST(FuseProperties, LegalConservedDeterministic) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 1500; ++trial) {
        const auto s = fuzz::random_scene(rng);
        const auto r = fuse(s.color, s.gray, s.contours, s.chalk);
        for (const auto& k : r.kernels) {
            EXPECT_NO_THROW(make_property_set(k.properties.values()));
            EXPECT_EQ(k.area(), k.contour->area());
        }
        EXPECT_EQ(accounted(r), detection_count(s));
        EXPECT_EQ(fuzz::digest(r), fuzz::digest(fuse(s.color, s.gray, s.contours, s.chalk)));
    }
}

TEST(FuseProperties, RaisingIouThresholdNeverAddsDuals) {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 800; ++trial) {
        const auto s = fuzz::random_scene(rng);
        std::size_t previous = SIZE_MAX;
        for (double t : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95, 1.0}) {
            FusionConfig cfg;
            cfg.iou_threshold = t;
            std::size_t duals = 0;
            for (const auto& k : fuse(s.color, s.gray, s.contours, s.chalk, cfg).kernels) duals += k.properties.is_dual();
            EXPECT_LE(duals, previous) << "threshold " << t;
            previous = duals;
        }
    }
}

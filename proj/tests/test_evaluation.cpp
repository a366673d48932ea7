#include "doctest.h"
#include "oracles.hpp"

#include "aerofuse/evaluation.hpp"

#include <random>

using namespace aerofuse;

namespace {

const Taxonomy& tax() { return Taxonomy::default_taxonomy(); }

GroundTruthObject object(int id, int x, int y, int w, int h, std::string label = "F-16") {
    std::vector<Pixel> px;
    for (int j = y; j < y + h; ++j) {
        for (int i = x; i < x + w; ++i) px.push_back({i, j});
    }
    GroundTruthObject o;
    o.id = id;
    o.box = Box{double(x), double(y), double(x + w), double(y + h)};
    o.label = std::move(label);
    o.footprint = Region::from_pixels(std::move(px));
    return o;
}

Detection det(Box b, double s, std::string label = "F-16") {
    const int level = tax().level_of(label);
    return {b, s, {std::move(label), level}};
}

// ten exact hits: eight right, one right function wrong type, one wrong function
void ten_pairs(std::vector<GroundTruthObject>& gt, std::vector<Detection>& d) {
    for (int i = 0; i < 10; ++i) {
        gt.push_back(object(i + 1, 50 * i, 0, 30, 20));
        std::string label = "F-16";
        if (i == 3) label = "F-15";
        if (i == 7) label = "Tu-95";
        d.push_back(det(gt.back().box, 0.9, label));
    }
}

Scoreboard board(std::size_t gt, std::size_t dets, std::size_t pairs) {
    Scoreboard s;
    s.n_gt = gt;
    s.n_det = dets;
    s.n_pairs = pairs;
    return s;
}

}  // namespace

TEST_CASE("over-target overlap decides a match") {
    const std::vector<GroundTruthObject> gt{object(1, 0, 0, 10, 10)};
    auto r = match(gt, {det({0, 0, 6, 10}, 0.9)});
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].overlap == doctest::Approx(0.6));
    r = match(gt, {det({0, 0, 4, 10}, 0.9)});
    CHECK(r.pairs.empty());
    CHECK(r.false_negatives == std::vector<std::size_t>{0});
    CHECK(r.false_positives == std::vector<std::size_t>{0});
    r = match(gt, {});
    CHECK(r.false_negatives.size() == 1);
    const auto s = score(r, gt, {}, tax());
    CHECK(*s.recall() == 0.0);
    CHECK(!s.precision());
}

TEST_CASE("iou criterion uses the boxes") {
    const std::vector<GroundTruthObject> gt{object(1, 0, 0, 10, 10)};
    // covers all of the target but is four times larger: iou 0.25
    CHECK(match(gt, {det({0, 0, 20, 20}, 0.9)}).pairs.size() == 1);
    CHECK(match(gt, {det({0, 0, 20, 20}, 0.9)}, OverlapCriterion::IoU).pairs.empty());
    CHECK(match_overlap(det({0, 0, 20, 20}, 0.9), gt[0], OverlapCriterion::IoU) == doctest::Approx(0.25));
}

TEST_CASE("higher score claims the target first") {
    const std::vector<GroundTruthObject> gt{object(1, 0, 0, 10, 10)};
    const auto r = match(gt, {det({0, 0, 10, 10}, 0.5), det({0, 0, 9, 10}, 0.8)});
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].det == 1);
    CHECK(r.false_positives == std::vector<std::size_t>{0});
}

TEST_CASE("ten pair identification fixture") {
    std::vector<GroundTruthObject> gt;
    std::vector<Detection> d;
    ten_pairs(gt, d);
    const auto s = score(match(gt, d), gt, d, tax());
    CHECK(s.n_pairs == 10);
    CHECK(s.n_identified == 10);
    CHECK(*s.identification_rate_l3() == doctest::Approx(0.8));
    CHECK(*s.identification_rate_l2() == doctest::Approx(0.9));
    CHECK(s.confusion_l3.at({"F-16", "F-15"}) == 1);
    CHECK(s.confusion_l2.at({"combat", "bomber"}) == 1);
    CHECK(s.confusion_l2.at({"combat", "combat"}) == 9);
}

TEST_CASE("coarse labels count for detection but not identification") {
    std::vector<GroundTruthObject> gt{object(1, 0, 0, 10, 10)};
    const std::vector<Detection> d{det({0, 0, 10, 10}, 0.9, "aircraft")};
    const auto s = score(match(gt, d), gt, d, tax());
    CHECK(*s.recall() == 1.0);
    CHECK(s.n_identified == 0);
    CHECK(!s.identification_rate_l3());
    CHECK(!s.identification_rate_l2());
}

TEST_CASE("matching agrees with the greedy oracle and keeps the count algebra") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> pos(0, 80), size(4, 20), n(0, 12);
    std::uniform_int_distribution<std::size_t> lab(0, tax().level3().size() - 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<GroundTruthObject> gt;
        const int ng = n(rng);
        for (int i = 0; i < ng; ++i) gt.push_back(object(i + 1, pos(rng), pos(rng), size(rng), size(rng), tax().level3()[lab(rng)]));
        auto raw = oracle::random_detections(rng, static_cast<std::size_t>(n(rng)), 100.0);
        std::vector<Detection> d;
        for (auto& x : raw) d.push_back(det(x.box, x.score, tax().level3()[lab(rng)]));

        for (auto crit : {OverlapCriterion::OverTarget, OverlapCriterion::IoU}) {
            const auto r = match(gt, d, crit);
            std::vector<std::vector<double>> ov(d.size(), std::vector<double>(gt.size()));
            std::vector<double> scores;
            for (std::size_t i = 0; i < d.size(); ++i) {
                scores.push_back(d[i].score);
                for (std::size_t g = 0; g < gt.size(); ++g) {
                    ov[i][g] = crit == OverlapCriterion::IoU ? oracle::box_iou(d[i].box, gt[g].box)
                                                             : overlap_over_target(d[i].box, gt[g].footprint.pixels);
                }
            }
            const auto expected = oracle::greedy_match(scores, ov, gt.size(), 0.5);
            REQUIRE(r.pairs.size() == expected.size());
            for (std::size_t k = 0; k < expected.size(); ++k) {
                CHECK(r.pairs[k].gt == expected[k].gt);
                CHECK(r.pairs[k].det == expected[k].det);
            }
            CHECK(r.pairs.size() + r.false_negatives.size() == gt.size());
            CHECK(r.pairs.size() + r.false_positives.size() == d.size());

            const auto s = score(r, gt, d, tax());
            if (s.recall()) CHECK(*s.recall() * static_cast<double>(s.n_gt) == doctest::Approx(static_cast<double>(s.n_pairs)));
            if (s.identification_rate_l3()) CHECK(*s.identification_rate_l2() >= *s.identification_rate_l3());
            std::size_t l3 = 0;
            for (const auto& p : r.pairs) l3 += d[p.det].label.name == gt[p.gt].label ? 1 : 0;
            CHECK(s.l3_agree == l3);
        }
    }
}

TEST_CASE("merging boards adds counts") {
    std::vector<GroundTruthObject> gt;
    std::vector<Detection> d;
    ten_pairs(gt, d);
    const auto s = score(match(gt, d), gt, d, tax());
    auto twice = s;
    twice += s;
    CHECK(twice.n_pairs == 20);
    CHECK(twice.confusion_l2.at({"combat", "combat"}) == 18);
    CHECK(*twice.identification_rate_l3() == *s.identification_rate_l3());
}

TEST_CASE("dominance") {
    // recall 0.75, precision 0.6 / recall 0.8, precision 0.5 / recall 0.9, precision 0.7
    std::vector<NamedBoard> boards{{"segmentation", board(100, 125, 75)},
                                   {"detection", board(100, 160, 80)},
                                   {"fused", board(100, 128, 90)}};
    auto c = compare(boards);
    REQUIRE(c.dominance.size() == 2);
    CHECK(c.dominance[0].winner == "fused");
    CHECK(format_comparison(c).find("fused dominates segmentation") != std::string::npos);
    CHECK(format_comparison(c).find("fused dominates detection") != std::string::npos);

    c = compare({{"a", board(10, 10, 5)}, {"b", board(10, 10, 5)}});
    CHECK(c.dominance.empty());
    CHECK(format_comparison(c).find("no system dominates another") != std::string::npos);
    // equal recall, better precision is enough
    c = compare({{"a", board(10, 8, 5)}, {"b", board(10, 10, 5)}});
    REQUIRE(c.dominance.size() == 1);
    CHECK(c.dominance[0].winner == "a");
    CHECK_THROWS(compare({{"a", board(1, 1, 1)}}));
}

TEST_CASE("report documents round trip") {
    std::vector<GroundTruthObject> gt;
    std::vector<Detection> d;
    ten_pairs(gt, d);
    const std::vector<NamedBoard> boards{{"fused", score(match(gt, d), gt, d, tax())}, {"empty", Scoreboard{}}};
    const auto back = parse_report_document(report_document(boards));
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "fused");
    CHECK(back[0].board == boards[0].board);
    CHECK(back[1].board == Scoreboard{});
    const auto text = format_report(boards, 2);
    CHECK(text.find("fused") != std::string::npos);
    CHECK_THROWS(parse_report_document("{not json"));
}

TEST_CASE("criterion names") {
    CHECK(parse_criterion("iou") == OverlapCriterion::IoU);
    CHECK(parse_criterion(criterion_name(OverlapCriterion::OverTarget)) == OverlapCriterion::OverTarget);
    CHECK_THROWS(parse_criterion("dice"));
}

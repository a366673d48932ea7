#include "aerofuse/evaluation.hpp"

#include "aerofuse/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aerofuse {

double match_overlap(const Detection& det, const GroundTruthObject& gt, OverlapCriterion criterion) {
    if (criterion == OverlapCriterion::IoU) return iou(det.box, gt.box);
    if (intersection_area(det.box, gt.box) <= 0.0) return 0.0;
    if (gt.footprint.pixels.empty()) return intersection_area(det.box, gt.box) / gt.box.area();
    return overlap_over_target(det.box, gt.footprint.pixels);
}

MatchResult match(const std::vector<GroundTruthObject>& gt, const std::vector<Detection>& detections,
                  OverlapCriterion criterion, double threshold) {
    const std::size_t n = gt.size();
    const std::size_t m = detections.size();
    std::vector<std::vector<double>> ov(m, std::vector<double>(n, 0.0));
    std::vector<double> best(m, 0.0);
    for (std::size_t d = 0; d < m; ++d) {
        for (std::size_t g = 0; g < n; ++g) {
            ov[d][g] = match_overlap(detections[d], gt[g], criterion);
            best[d] = std::max(best[d], ov[d][g]);
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (detections[a].score != detections[b].score) return detections[a].score > detections[b].score;
        return best[a] > best[b];
    });

    MatchResult r;
    r.n_gt = n;
    r.n_det = m;
    std::vector<bool> gt_taken(n, false), det_taken(m, false);
    for (std::size_t d : order) {
        std::size_t pick = n;
        double top = -1.0;
        for (std::size_t g = 0; g < n; ++g) {
            if (gt_taken[g] || ov[d][g] < threshold) continue;
            if (ov[d][g] > top) {
                top = ov[d][g];
                pick = g;
            }
        }
        if (pick == n) continue;
        gt_taken[pick] = true;
        det_taken[d] = true;
        r.pairs.push_back({pick, d, top});
    }
    for (std::size_t g = 0; g < n; ++g) {
        if (!gt_taken[g]) r.false_negatives.push_back(g);
    }
    for (std::size_t d = 0; d < m; ++d) {
        if (!det_taken[d]) r.false_positives.push_back(d);
    }
    return r;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> Scoreboard::recall() const { return ratio(n_pairs, n_gt); }
std::optional<double> Scoreboard::precision() const { return ratio(n_pairs, n_det); }
std::optional<double> Scoreboard::identification_rate_l3() const { return ratio(l3_agree, n_identified); }
std::optional<double> Scoreboard::identification_rate_l2() const { return ratio(l2_agree, n_identified); }

Scoreboard& Scoreboard::operator+=(const Scoreboard& o) {
    n_gt += o.n_gt;
    n_det += o.n_det;
    n_pairs += o.n_pairs;
    n_identified += o.n_identified;
    l3_agree += o.l3_agree;
    l2_agree += o.l2_agree;
    for (const auto& [k, v] : o.confusion_l3) confusion_l3[k] += v;
    for (const auto& [k, v] : o.confusion_l2) confusion_l2[k] += v;
    return *this;
}

Scoreboard score(const MatchResult& result, const std::vector<GroundTruthObject>& gt,
                 const std::vector<Detection>& detections, const Taxonomy& taxonomy) {
    Scoreboard s;
    s.n_gt = result.n_gt;
    s.n_det = result.n_det;
    s.n_pairs = result.pairs.size();
    for (const auto& p : result.pairs) {
        const Label& pred = detections.at(p.det).label;
        if (pred.level != 3) continue;
        const Label truth = taxonomy.label(gt.at(p.gt).label);
        ++s.n_identified;
        const auto pred2 = taxonomy.ancestor(pred, 2).name;
        const auto truth2 = taxonomy.ancestor(truth, 2).name;
        if (pred.name == truth.name) ++s.l3_agree;
        if (pred2 == truth2) ++s.l2_agree;
        ++s.confusion_l3[{truth.name, pred.name}];
        ++s.confusion_l2[{truth2, pred2}];
    }
    return s;
}

Comparison compare(std::vector<NamedBoard> boards) {
    if (boards.size() < 2) throw std::invalid_argument("compare needs at least two boards");
    Comparison c;
    for (const auto& a : boards) {
        for (const auto& b : boards) {
            if (&a == &b) continue;
            const auto ra = a.board.recall(), pa = a.board.precision();
            const auto rb = b.board.recall(), pb = b.board.precision();
            if (!ra || !pa || !rb || !pb) continue;
            if (*ra >= *rb && *pa >= *pb && (*ra > *rb || *pa > *pb)) {
                c.dominance.push_back({a.name, b.name});
            }
        }
    }
    c.boards = std::move(boards);
    return c;
}

namespace {

std::string cell(const std::optional<double>& v) {
    return v ? text::format_fixed(*v, 4) : std::string("n/a");
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string format_report(const std::vector<NamedBoard>& boards, int level) {
    std::size_t w = 6;
    for (const auto& b : boards) w = std::max(w, b.name.size());
    std::string out = pad("system", w) + "  recall  precision  id_l2   id_l3   gt    det   pairs\n";
    for (const auto& b : boards) {
        const auto& s = b.board;
        out += pad(b.name, w) + "  " + pad(cell(s.recall()), 6) + "  " + pad(cell(s.precision()), 9) +
               "  " + pad(cell(s.identification_rate_l2()), 6) + "  " +
               pad(cell(s.identification_rate_l3()), 6) + "  " + pad(std::to_string(s.n_gt), 5) +
               " " + pad(std::to_string(s.n_det), 5) + " " + std::to_string(s.n_pairs) + "\n";
    }
    for (const auto& b : boards) {
        const auto& conf = level == 2 ? b.board.confusion_l2 : b.board.confusion_l3;
        if (conf.empty()) continue;
        out += "\nconfusion (level " + std::to_string(level) + ") " + b.name + ": truth -> predicted\n";
        for (const auto& [k, v] : conf) out += "  " + k.first + " -> " + k.second + ": " + std::to_string(v) + "\n";
    }
    return out;
}

std::string format_comparison(const Comparison& c) {
    std::string out = format_report(c.boards, 3);
    // keep only the table part
    out = out.substr(0, out.find("\nconfusion"));
    if (!out.empty() && out.back() != '\n') out += '\n';
    if (c.dominance.empty()) {
        out += "no system dominates another\n";
    } else {
        for (const auto& d : c.dominance) out += d.winner + " dominates " + d.loser + "\n";
    }
    return out;
}

namespace {

nlohmann::json confusion_json(const Confusion& c) {
    auto a = nlohmann::json::array();
    for (const auto& [k, v] : c) a.push_back({{"truth", k.first}, {"predicted", k.second}, {"count", v}});
    return a;
}

Confusion confusion_from(const nlohmann::json& a) {
    Confusion c;
    for (const auto& e : a) {
        c[{e.at("truth").get<std::string>(), e.at("predicted").get<std::string>()}] =
            e.at("count").get<std::size_t>();
    }
    return c;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json board_json(const NamedBoard& b) {
    const auto& s = b.board;
    return {{"name", b.name},
            {"recall", optional_json(s.recall())},
            {"precision", optional_json(s.precision())},
            {"identification_rate_l2", optional_json(s.identification_rate_l2())},
            {"identification_rate_l3", optional_json(s.identification_rate_l3())},
            {"counts",
             {{"gt", s.n_gt},
              {"detections", s.n_det},
              {"pairs", s.n_pairs},
              {"identified", s.n_identified},
              {"l2_agree", s.l2_agree},
              {"l3_agree", s.l3_agree}}},
            {"confusion_l3", confusion_json(s.confusion_l3)},
            {"confusion_l2", confusion_json(s.confusion_l2)}};
}

}  // namespace

std::string report_document(const std::vector<NamedBoard>& boards) {
    nlohmann::json j;
    j["systems"] = nlohmann::json::array();
    for (const auto& b : boards) j["systems"].push_back(board_json(b));
    return j.dump(2) + "\n";
}

std::vector<NamedBoard> parse_report_document(const std::string& document) {
    std::vector<NamedBoard> out;
    try {
        const auto j = nlohmann::json::parse(document);
        for (const auto& e : j.at("systems")) {
            NamedBoard b;
            b.name = e.at("name").get<std::string>();
            const auto& c = e.at("counts");
            b.board.n_gt = c.at("gt").get<std::size_t>();
            b.board.n_det = c.at("detections").get<std::size_t>();
            b.board.n_pairs = c.at("pairs").get<std::size_t>();
            b.board.n_identified = c.at("identified").get<std::size_t>();
            b.board.l2_agree = c.at("l2_agree").get<std::size_t>();
            b.board.l3_agree = c.at("l3_agree").get<std::size_t>();
            b.board.confusion_l3 = confusion_from(e.at("confusion_l3"));
            b.board.confusion_l2 = confusion_from(e.at("confusion_l2"));
            out.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed report document: ") + e.what());
    }
    return out;
}

std::string comparison_document(const Comparison& c) {
    nlohmann::json j;
    j["systems"] = nlohmann::json::array();
    for (const auto& b : c.boards) j["systems"].push_back(board_json(b));
    j["dominance"] = nlohmann::json::array();
    for (const auto& d : c.dominance) j["dominance"].push_back({{"winner", d.winner}, {"loser", d.loser}});
    return j.dump(2) + "\n";
}

std::string criterion_name(OverlapCriterion c) {
    return c == OverlapCriterion::IoU ? "iou" : "over-target";
}

OverlapCriterion parse_criterion(const std::string& name) {
    if (name == "over-target") return OverlapCriterion::OverTarget;
    if (name == "iou") return OverlapCriterion::IoU;
    throw std::invalid_argument("unknown criterion '" + name + "' (expected over-target or iou)");
}

}  // namespace aerofuse

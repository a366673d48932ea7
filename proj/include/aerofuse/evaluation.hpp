#pragma once

/// @file evaluation.hpp
/// @brief Matching detections to ground truth, recall/precision,
/// hierarchical identification rates and system comparison.

#include "aerofuse/geometry.hpp"
#include "aerofuse/scene.hpp"
#include "aerofuse/taxonomy.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aerofuse {

inline constexpr double kDefaultMatchThreshold = 0.5;

struct MatchPair {
    std::size_t gt = 0;   // index into the ground-truth list
    std::size_t det = 0;  // index into the detection list
    double overlap = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<std::size_t> false_negatives;  // gt indices, ascending
    std::vector<std::size_t> false_positives;  // detection indices, ascending
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
};

/// Overlap between a detection and a ground-truth object under a criterion:
/// share of the footprint covered by the box, or box IoU.
double match_overlap(const Detection& det, const GroundTruthObject& gt, OverlapCriterion criterion);

/// Greedy matching in descending score (ties: larger best overlap, then
/// input order). Each detection takes the unmatched object with the highest
/// overlap >= threshold (ties: lower index).
MatchResult match(const std::vector<GroundTruthObject>& gt, const std::vector<Detection>& detections,
                  OverlapCriterion criterion = OverlapCriterion::OverTarget,
                  double threshold = kDefaultMatchThreshold);

/// Sparse confusion counts keyed by (ground truth, predicted).
using Confusion = std::map<std::pair<std::string, std::string>, std::size_t>;

/// Raw counts; ratios are derived so boards from several scenes can be
/// merged by addition.
struct Scoreboard {
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
    std::size_t n_pairs = 0;
    /// Pairs whose detection carries a level-3 label (the identification
    /// denominator). Root- and function-level detections are excluded.
    std::size_t n_identified = 0;
    std::size_t l3_agree = 0;
    std::size_t l2_agree = 0;
    Confusion confusion_l3;
    Confusion confusion_l2;

    /// Undefined on an empty denominator.
    std::optional<double> recall() const;
    std::optional<double> precision() const;
    std::optional<double> identification_rate_l3() const;
    std::optional<double> identification_rate_l2() const;

    Scoreboard& operator+=(const Scoreboard& other);
    friend bool operator==(const Scoreboard&, const Scoreboard&) = default;
};

Scoreboard score(const MatchResult& result, const std::vector<GroundTruthObject>& gt,
                 const std::vector<Detection>& detections, const Taxonomy& taxonomy);

struct NamedBoard {
    std::string name;
    Scoreboard board;
};

struct Dominance {
    std::string winner;
    std::string loser;
};

struct Comparison {
    std::vector<NamedBoard> boards;
    /// Pairs where the winner is at least as good on recall and precision
    /// and strictly better on one of them.
    std::vector<Dominance> dominance;
};

/// Needs at least two boards (std::invalid_argument otherwise).
Comparison compare(std::vector<NamedBoard> boards);

/// Plain text table. `level` (2 or 3) selects which confusion matrix to list.
std::string format_report(const std::vector<NamedBoard>& boards, int level = 3);
std::string format_comparison(const Comparison& comparison);

/// JSON documents. Boards round-trip through their counts.
std::string report_document(const std::vector<NamedBoard>& boards);
std::vector<NamedBoard> parse_report_document(const std::string& document);
std::string comparison_document(const Comparison& comparison);

std::string criterion_name(OverlapCriterion c);
/// "over-target" or "iou"; throws std::invalid_argument otherwise.
OverlapCriterion parse_criterion(const std::string& name);

}  // namespace aerofuse

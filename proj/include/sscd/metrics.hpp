#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sscd/reporter.hpp"
#include "sscd/timing.hpp"

namespace sscd {

enum class CloneType { T1, T2, VST3, ST3, MT3, WT3T4 };

CloneType parse_clone_type(std::string_view name);
std::string_view to_string(CloneType type);

using LineRange = FragmentCoords;

struct DetectedPair {
    LineRange a;
    LineRange b;
};

struct GroundTruthPair {
    LineRange a;
    LineRange b;
    CloneType type = CloneType::T1;
};

/// Fraction of `truth`'s lines that `detected` covers; 0 for different files.
double coverage(const LineRange& truth, const LineRange& detected);

/// True when the detected pair covers both truth fragments (in either
/// pairing) to at least `threshold` of each truth fragment's length.
bool match_overlap(const DetectedPair& detected, const GroundTruthPair& truth, double threshold = 0.7);

/// For each truth pair, whether some detected pair matches it.
std::vector<bool> matched_truth(std::span<const DetectedPair> detected, std::span<const GroundTruthPair> truth,
                                double threshold = 0.7);

/// Indexes truth pairs by file pair for repeated overlap queries.
class TruthMatcher {
public:
    TruthMatcher(std::span<const GroundTruthPair> truth, double threshold = 0.7);

    /// True when `detected` matches at least one truth pair.
    [[nodiscard]] bool matches(const DetectedPair& detected) const;

    /// True when `fragment` covers either side of some truth pair.
    [[nodiscard]] bool has_known_clone(const LineRange& fragment) const;

private:
    std::span<const GroundTruthPair> truth_;
    double threshold_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_files_;
    std::unordered_map<std::string, std::vector<const LineRange*>> by_file_;
};

/// Fraction of truth pairs matched. Throws std::invalid_argument on empty truth.
double recall(std::span<const DetectedPair> detected, std::span<const GroundTruthPair> truth,
              double threshold = 0.7);

/// Recall per clone type; types without truth pairs are absent from the map.
std::map<CloneType, double> recall_by_type(std::span<const DetectedPair> detected,
                                           std::span<const GroundTruthPair> truth, double threshold = 0.7);

/// Band for a syntactic similarity in [0, 1]; lower bounds are inclusive.
CloneType classify_type_band(double syntactic_similarity);

/// Two reviewers' verdicts on a sample of clone candidates.
struct ReviewTable {
    std::size_t both_clone = 0;
    std::size_t r1_clone_r2_non = 0;
    std::size_t r1_non_r2_clone = 0;
    std::size_t both_non = 0;

    [[nodiscard]] std::size_t total() const { return both_clone + r1_clone_r2_non + r1_non_r2_clone + both_non; }
    [[nodiscard]] std::size_t agreed() const { return both_clone + both_non; }
    [[nodiscard]] std::size_t disagreed() const { return r1_clone_r2_non + r1_non_r2_clone; }
};

struct SampledPrecision {
    double strict = 0.0;       // agreed clones / agreed cases
    double optimistic = 0.0;   // disagreements counted as clones
    double pessimistic = 0.0;  // disagreements counted as non-clones
};

/// Percentages. Throws std::invalid_argument when no case was agreed on.
SampledPrecision precision_from_sample(const ReviewTable& review);

/// Harmonic mean of two percentages; 0 when both are 0.
double f_score(double precision, double recall);

/// Mean reciprocal rank of the first relevant hit; queries without one
/// contribute 0. Throws std::invalid_argument when there are no queries.
double mrr(std::span<const std::vector<bool>> relevance_per_query);

double observed_agreement(const ReviewTable& review);

/// Chance-corrected agreement. Throws std::invalid_argument for an empty
/// table or degenerate marginals (chance agreement of 1).
double cohen_kappa(const ReviewTable& review);

/// Ground-truth CSV: file_a,start_a,end_a,file_b,start_b,end_b,type
/// (header optional).
std::vector<GroundTruthPair> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthPair> truth);

struct EvalReport {
    std::size_t truth_pairs = 0;
    std::size_t detected_pairs = 0;
    double recall_overall = 0.0;                 // percent
    std::map<CloneType, double> recall_by_type;  // percent
    std::optional<SampledPrecision> precision;   // percent
    std::optional<double> f_score;               // percent, from strict precision
    std::optional<double> mrr;
    std::optional<double> kappa;
    std::optional<TimingBreakdown> timing;
};

std::string to_json(const EvalReport& report);
std::string to_table(const EvalReport& report);

}  // namespace sscd

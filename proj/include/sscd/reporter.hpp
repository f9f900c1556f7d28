#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sscd/fragment.hpp"
#include "sscd/search.hpp"

namespace sscd {

/// Which query direction(s) produced a pair.
enum Provenance : std::uint8_t { from_a = 1, from_b = 2, both_directions = 3 };

/// Unordered clone pair, canonicalized so that a_id < b_id.
struct ClonePair {
    FragmentId a_id = 0;
    FragmentId b_id = 0;
    double similarity = 0.0;
    std::uint8_t provenance = 0;

    friend bool operator==(const ClonePair&, const ClonePair&) = default;
};

/// Folds directed candidates into unordered pairs. Only candidates with
/// rank <= top_n and similarity >= floor count; the pair keeps the larger of
/// its directed similarities. Returned in (a_id, b_id) order.
std::vector<ClonePair> collect_pairs(std::span<const std::vector<CloneCandidate>> per_query_lists,
                                     std::size_t top_n, double floor);

/// Descending similarity, ties by (a_id, b_id).
std::vector<ClonePair> merge_rank(std::vector<ClonePair> pairs);

enum class ReportFormat { csv, jsonl };

struct FragmentCoords {
    std::string file;
    std::size_t start_line = 0;
    std::size_t end_line = 0;

    friend bool operator==(const FragmentCoords&, const FragmentCoords&) = default;
};

struct ReportRow {
    ClonePair pair;
    FragmentCoords a;
    FragmentCoords b;
};

/// Writes pairs with fragment coordinates looked up in `fragments` (by id).
void write_report(const std::filesystem::path& path, std::span<const ClonePair> pairs,
                  std::span<const CodeFragment> fragments, ReportFormat format);

/// CSV rows carry coordinates and similarity only; ids are left at 0.
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);
std::vector<ReportRow> read_report_jsonl(const std::filesystem::path& path);
/// Dispatches on extension: .jsonl / .json -> JSONL, anything else -> CSV.
std::vector<ReportRow> read_report(const std::filesystem::path& path);

struct QueryResult {
    FragmentId query = 0;
    std::vector<CloneCandidate> hits;
};

/// Per-query ranked lists, one JSON object per line (empty lists included):
///   {"query": id, "hits": [{"id": .., "similarity": .., "rank": ..}, ...]}
/// `query_ids[i]` names the query of `lists[i]`.
void write_candidates(const std::filesystem::path& path, std::span<const FragmentId> query_ids,
                      std::span<const std::vector<CloneCandidate>> lists);
std::vector<QueryResult> read_candidates(const std::filesystem::path& path);

std::string format_similarity(double similarity);

}  // namespace sscd

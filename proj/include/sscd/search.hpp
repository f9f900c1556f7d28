#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sscd/embedding.hpp"
#include "sscd/fragment.hpp"

namespace sscd {

enum class SearchType { exact, hnsw };

SearchType parse_search_type(std::string_view name);
std::string_view to_string(SearchType type);

struct SearchParams {
    SearchType search_type = SearchType::exact;
    std::size_t k = 10;              // topN per query
    std::size_t ef_search = 120;     // HNSW query beam width
    double similarity_floor = 0.0;   // cosine floor, applied before the topN cut
};

void validate(const SearchParams& params);

struct CloneCandidate {
    FragmentId query_id = 0;
    FragmentId hit_id = 0;
    double similarity = 0.0;
    std::size_t rank = 0;  // 1-based

    friend bool operator==(const CloneCandidate&, const CloneCandidate&) = default;
};

struct ScoredHit {
    FragmentId id;
    double similarity;
};

/// Drops `exclude` and hits below `floor`, orders by descending similarity
/// (ascending id on ties), keeps the first k and numbers them from 1.
std::vector<CloneCandidate> rank_hits(FragmentId query_id, std::vector<ScoredHit> hits, std::size_t k,
                                      double floor, std::optional<FragmentId> exclude);

/// Common read-only surface of the exact and approximate indexes. Safe for
/// concurrent queries once built.
class SearchIndex {
public:
    virtual ~SearchIndex() = default;

    [[nodiscard]] virtual std::size_t size() const = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    [[nodiscard]] virtual FragmentId id_at(std::size_t row) const = 0;
    [[nodiscard]] virtual std::span<const float> vector_at(std::size_t row) const = 0;
    [[nodiscard]] std::optional<std::size_t> row_of(FragmentId id) const;

    /// Up to params.k hits for an arbitrary unit query vector. When
    /// `exclude` is set, that fragment never appears in the result.
    [[nodiscard]] virtual std::vector<CloneCandidate> search(std::span<const float> query, FragmentId query_id,
                                                             const SearchParams& params,
                                                             std::optional<FragmentId> exclude) const = 0;

    /// Neighbours of an indexed fragment, itself excluded. Throws
    /// std::out_of_range for an unknown id.
    [[nodiscard]] std::vector<CloneCandidate> search_by_id(FragmentId id, const SearchParams& params) const;

protected:
    void register_id(FragmentId id, std::size_t row);
    void clear_ids() { rows_.clear(); }

private:
    std::unordered_map<FragmentId, std::size_t> rows_;
};

/// Brute-force index: every query scans all rows.
class ExactIndex final : public SearchIndex {
public:
    ExactIndex() = default;
    explicit ExactIndex(std::span<const EmbeddingVector> vectors);

    [[nodiscard]] std::size_t size() const override { return ids_.size(); }
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    [[nodiscard]] FragmentId id_at(std::size_t row) const override { return ids_[row]; }
    [[nodiscard]] std::span<const float> vector_at(std::size_t row) const override;

    [[nodiscard]] std::vector<CloneCandidate> search(std::span<const float> query, FragmentId query_id,
                                                     const SearchParams& params,
                                                     std::optional<FragmentId> exclude) const override;

private:
    std::size_t dimension_ = 0;
    std::vector<FragmentId> ids_;
    std::vector<float> matrix_;
};

std::vector<CloneCandidate> exact_search(const ExactIndex& index, FragmentId query_id, const SearchParams& params);

struct SearchOutcome {
    std::vector<std::vector<CloneCandidate>> lists;  // one per indexed row, in row order
    double search_ms = 0.0;
};

/// Queries every indexed fragment against the index.
SearchOutcome search_all(const SearchIndex& index, const SearchParams& params, unsigned threads = 1);

/// Throws InputError unless all vectors share one dimension and are unit-norm
/// within `tolerance`.
void check_unit_vectors(std::span<const EmbeddingVector> vectors, double tolerance = 1e-4);

}  // namespace sscd

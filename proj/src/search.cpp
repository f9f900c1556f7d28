#include "sscd/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sscd/error.hpp"
#include "sscd/parallel.hpp"
#include "sscd/timing.hpp"
#include "sscd/vector_math.hpp"

namespace sscd {

SearchType parse_search_type(std::string_view name) {
    if (name == "exact") return SearchType::exact;
    if (name == "hnsw") return SearchType::hnsw;
    throw InputError("unknown search type: " + std::string(name));
}

std::string_view to_string(SearchType type) { return type == SearchType::exact ? "exact" : "hnsw"; }

void validate(const SearchParams& params) {
    if (params.k < 1) throw InputError("topN must be at least 1");
    if (params.ef_search < params.k) throw InputError("ef_search must be >= topN");
    if (!(params.similarity_floor >= -1.0 && params.similarity_floor <= 1.0)) {
        throw InputError("similarity threshold must lie in [-1, 1]");
    }
}

std::vector<CloneCandidate> rank_hits(FragmentId query_id, std::vector<ScoredHit> hits, std::size_t k,
                                      double floor, std::optional<FragmentId> exclude) {
    std::erase_if(hits, [&](const ScoredHit& h) {
        return (exclude && h.id == *exclude) || h.similarity < floor;
    });
    auto better = [](const ScoredHit& a, const ScoredHit& b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    };
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
    std::vector<CloneCandidate> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back({query_id, hits[i].id, std::clamp(hits[i].similarity, -1.0, 1.0), i + 1});
    }
    return out;
}

std::optional<std::size_t> SearchIndex::row_of(FragmentId id) const {
    auto it = rows_.find(id);
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

void SearchIndex::register_id(FragmentId id, std::size_t row) {
    if (!rows_.emplace(id, row).second) {
        throw InputError("duplicate fragment id " + std::to_string(id) + " in index");
    }
}

std::vector<CloneCandidate> SearchIndex::search_by_id(FragmentId id, const SearchParams& params) const {
    auto row = row_of(id);
    if (!row) throw std::out_of_range("fragment id " + std::to_string(id) + " is not indexed");
    return search(vector_at(*row), id, params, id);
}

void check_unit_vectors(std::span<const EmbeddingVector> vectors, double tolerance) {
    if (vectors.empty()) return;
    const std::size_t d = vectors.front().values.size();
    if (d == 0) throw InputError("zero-dimension embedding");
    for (const auto& v : vectors) {
        if (v.values.size() != d) {
            throw InputError("embedding " + std::to_string(v.fragment_id) + " has dimension " +
                             std::to_string(v.values.size()) + ", expected " + std::to_string(d));
        }
        double n = l2_norm(v.values);
        if (!std::isfinite(n) || std::abs(n - 1.0) > tolerance) {
            throw InputError("embedding " + std::to_string(v.fragment_id) + " is not unit-norm");
        }
    }
}

ExactIndex::ExactIndex(std::span<const EmbeddingVector> vectors) {
    check_unit_vectors(vectors);
    dimension_ = vectors.empty() ? 0 : vectors.front().values.size();
    ids_.reserve(vectors.size());
    matrix_.reserve(vectors.size() * dimension_);
    for (std::size_t row = 0; row < vectors.size(); ++row) {
        register_id(vectors[row].fragment_id, row);
        ids_.push_back(vectors[row].fragment_id);
        matrix_.insert(matrix_.end(), vectors[row].values.begin(), vectors[row].values.end());
    }
}

std::span<const float> ExactIndex::vector_at(std::size_t row) const {
    return {matrix_.data() + row * dimension_, dimension_};
}

std::vector<CloneCandidate> ExactIndex::search(std::span<const float> query, FragmentId query_id,
                                               const SearchParams& params,
                                               std::optional<FragmentId> exclude) const {
    if (ids_.empty()) return {};
    if (query.size() != dimension_) throw std::invalid_argument("query dimension mismatch");
    std::vector<ScoredHit> hits;
    hits.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        double sim = dot(query, vector_at(row));
        if (sim >= params.similarity_floor) hits.push_back({ids_[row], sim});
    }
    return rank_hits(query_id, std::move(hits), params.k, params.similarity_floor, exclude);
}

std::vector<CloneCandidate> exact_search(const ExactIndex& index, FragmentId query_id, const SearchParams& params) {
    return index.search_by_id(query_id, params);
}

SearchOutcome search_all(const SearchIndex& index, const SearchParams& params, unsigned threads) {
    validate(params);
    Stopwatch clock;
    SearchOutcome outcome;
    outcome.lists.resize(index.size());
    parallel_for(index.size(), threads, [&](std::size_t row) {
        FragmentId id = index.id_at(row);
        outcome.lists[row] = index.search(index.vector_at(row), id, params, id);
    });
    outcome.search_ms = clock.elapsed_ms();
    return outcome;
}

}  // namespace sscd

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sscd/search.hpp"

namespace sscd {

struct HnswParams {
    std::size_t m = 32;                 // neighbours per node on layers > 0; 2m on layer 0
    std::size_t ef_construction = 200;  // build-time beam width
    std::uint64_t seed = 42;            // level draws
};

void validate(const HnswParams& params);

/// Level for a new node: floor(-ln(u) / ln(M)), u in (0, 1].
std::size_t assign_level(std::size_t m, double u);

/// Result of a structural audit of a built graph.
struct HnswAudit {
    bool ok = true;
    std::vector<std::string> problems;
    std::size_t unreachable_layer0 = 0;  // informational; not an invariant
};

/// Hierarchical navigable small-world graph over unit vectors. Internally
/// distances are 1 - cosine. Edges are kept symmetric: when a neighbour list
/// overflows and is pruned, the dropped edges are removed in both directions.
///
/// Inserts are sequential and happen in call order, so a fixed seed and a
/// fixed insertion order reproduce the same graph. Searches are const and
/// may run concurrently.
class HnswIndex final : public SearchIndex {
public:
    HnswIndex(std::size_t dimension, HnswParams params);

    static HnswIndex build(std::span<const EmbeddingVector> vectors, HnswParams params);

    void insert(FragmentId id, std::span<const float> values);

    [[nodiscard]] std::size_t size() const override { return ids_.size(); }
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    [[nodiscard]] FragmentId id_at(std::size_t row) const override { return ids_[row]; }
    [[nodiscard]] std::span<const float> vector_at(std::size_t row) const override;

    [[nodiscard]] std::vector<CloneCandidate> search(std::span<const float> query, FragmentId query_id,
                                                     const SearchParams& params,
                                                     std::optional<FragmentId> exclude) const override;

    [[nodiscard]] const HnswParams& params() const { return params_; }
    [[nodiscard]] int max_level() const { return max_level_; }
    [[nodiscard]] std::size_t entry_point() const { return entry_point_; }
    [[nodiscard]] std::size_t level_of(std::size_t row) const { return links_[row].size() - 1; }
    [[nodiscard]] const std::vector<std::uint32_t>& neighbors(std::size_t row, std::size_t level) const {
        return links_[row][level];
    }
    [[nodiscard]] std::size_t max_degree(std::size_t level) const { return level == 0 ? 2 * params_.m : params_.m; }

    [[nodiscard]] HnswAudit audit() const;

    void save(const std::filesystem::path& path) const;
    static HnswIndex load(const std::filesystem::path& path);

private:
    struct Candidate {
        double distance;
        std::uint32_t row;
    };

    [[nodiscard]] double distance(std::span<const float> query, std::uint32_t row) const;
    [[nodiscard]] double distance(std::uint32_t a, std::uint32_t b) const;
    void prefetch_vector(std::uint32_t row) const;
    [[nodiscard]] std::uint32_t greedy_closest(std::span<const float> query, std::uint32_t entry,
                                               std::size_t from_level, std::size_t to_level) const;
    [[nodiscard]] std::vector<Candidate> search_layer(std::span<const float> query,
                                                      const std::vector<Candidate>& entries, std::size_t ef,
                                                      std::size_t level) const;
    [[nodiscard]] std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates,
                                                              std::size_t limit) const;
    void link(std::uint32_t a, std::uint32_t b, std::size_t level);
    void unlink(std::uint32_t a, std::uint32_t b, std::size_t level);

    std::size_t dimension_;
    HnswParams params_;
    std::mt19937_64 rng_;
    std::vector<FragmentId> ids_;
    std::vector<float> vectors_;
    // links_[row][level] holds neighbour rows; links_[row].size() == level + 1
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::size_t entry_point_ = 0;
    int max_level_ = -1;
};

}  // namespace sscd

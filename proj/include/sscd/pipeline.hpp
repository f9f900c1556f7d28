#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sscd/embedding.hpp"
#include "sscd/extractor.hpp"
#include "sscd/hnsw_index.hpp"
#include "sscd/metrics.hpp"
#include "sscd/reporter.hpp"
#include "sscd/search.hpp"
#include "sscd/timing.hpp"

namespace sscd {

struct RunConfig {
    ExtractionConfig extraction;
    EmbedderConfig embedder;
    SearchParams search;
    HnswParams hnsw;
    std::filesystem::path source;  // source tree, or manifest file
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> embeddings_in;   // reuse a cache, skipping inference
    std::optional<std::filesystem::path> embeddings_out;  // write the cache after inference
    std::optional<std::filesystem::path> index_out;       // serialized HNSW index
    bool instrument = true;
    unsigned threads = 1;
};

void validate(const RunConfig& cfg);

struct DetectResult {
    std::vector<CodeFragment> fragments;
    std::vector<std::vector<CloneCandidate>> candidates;
    std::vector<ClonePair> pairs;  // globally ranked
    TimingBreakdown timing;
    std::vector<std::filesystem::path> written;
};

// Files produced in RunConfig::output_dir.
inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kReportJsonl = "report.jsonl";
inline constexpr const char* kCandidatesJsonl = "candidates.jsonl";
inline constexpr const char* kFragmentsJsonl = "fragments.jsonl";
inline constexpr const char* kTimingJson = "timing.json";

/// extract -> embed -> index -> search -> merge -> write. Outputs are staged
/// and renamed into place only when every stage succeeded.
DetectResult run_detect(const RunConfig& cfg, const WarningSink& warn = {});

/// Builds fragments and their embedding cache without searching.
std::size_t run_embed_cache(const RunConfig& cfg, const std::filesystem::path& cache_path,
                            const WarningSink& warn = {});

struct EvalOptions {
    std::filesystem::path report;
    std::filesystem::path truth;
    double overlap_threshold = 0.7;
    std::optional<std::filesystem::path> candidates;  // with fragments: enables MRR
    std::optional<std::filesystem::path> fragments;
    std::optional<ReviewTable> review;                // enables precision, F-score, kappa
    std::optional<std::filesystem::path> timing;
};

EvalReport run_eval(const EvalOptions& options);

struct BenchOptions {
    std::size_t count = 10'000;
    std::size_t dimension = 768;
    std::uint64_t seed = 7;
    std::size_t k = 10;
    std::size_t queries = 1'000;  // evaluated against the exact oracle
    std::size_t ef_search = 120;
    HnswParams hnsw;
};

struct BenchResult {
    std::size_t count = 0;
    std::size_t queries = 0;
    double recall_at_k = 0.0;
    double exact_build_ms = 0.0;
    double exact_search_ms = 0.0;
    double hnsw_build_ms = 0.0;
    double hnsw_search_ms = 0.0;
    bool audit_ok = false;
};

BenchResult run_bench(const BenchOptions& options);
std::string format_bench_table(const BenchOptions& options, const BenchResult& result);

/// Deterministic Gaussian-direction unit vectors with ids 0..count-1.
std::vector<EmbeddingVector> random_unit_vectors(std::size_t count, std::size_t dimension, std::uint64_t seed);

/// Mean over queries of |approx top-k ∩ exact top-k| / |exact top-k|.
double recall_at_k(std::span<const std::vector<CloneCandidate>> approx,
                   std::span<const std::vector<CloneCandidate>> exact);

}  // namespace sscd

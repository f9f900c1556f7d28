#include "sscd/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sscd/embedding_io.hpp"
#include "sscd/error.hpp"
#include "sscd/vector_math.hpp"

namespace sscd {
namespace {

namespace fs = std::filesystem;

// Files are written under a ".partial" name and renamed on commit; anything
// still staged when the object dies is deleted.
class StagedOutputs {
public:
    StagedOutputs() = default;
    StagedOutputs(const StagedOutputs&) = delete;
    StagedOutputs& operator=(const StagedOutputs&) = delete;

    ~StagedOutputs() {
        for (const auto& [partial, final_path] : staged_) {
            std::error_code ec;
            fs::remove(partial, ec);
        }
    }

    fs::path stage(const fs::path& final_path) {
        fs::path partial = final_path;
        partial += ".partial";
        staged_.emplace_back(partial, final_path);
        return partial;
    }

    std::vector<fs::path> commit() {
        std::vector<fs::path> done;
        for (const auto& [partial, final_path] : staged_) {
            fs::rename(partial, final_path);
            done.push_back(final_path);
        }
        staged_.clear();
        return done;
    }

private:
    std::vector<std::pair<fs::path, fs::path>> staged_;
};

std::vector<EmbeddingVector> vectors_from_cache(const fs::path& path, const std::vector<CodeFragment>& fragments,
                                                const WarningSink& warn) {
    auto cached = load_embeddings(path);
    std::unordered_map<FragmentId, std::size_t> by_id;
    for (std::size_t i = 0; i < cached.size(); ++i) by_id.emplace(cached[i].fragment_id, i);
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(fragments.size());
    for (const CodeFragment& f : fragments) {
        auto it = by_id.find(f.id);
        if (it == by_id.end()) {
            if (f.tokens.empty()) continue;
            throw InputError("embedding cache " + path.string() + " has no vector for fragment " +
                             std::to_string(f.id) + " (" + f.file + ":" + std::to_string(f.start_line) + ")");
        }
        vectors.push_back(std::move(cached[it->second]));
    }
    if (vectors.size() < cached.size() && warn) {
        warn("embedding cache holds " + std::to_string(cached.size() - vectors.size()) + " vectors for unknown fragments");
    }
    check_unit_vectors(vectors);
    return vectors;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text << '\n';
    if (!out) throw InputError("write failure on " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

void validate(const RunConfig& cfg) {
    validate(cfg.embedder);
    validate(cfg.search);
    if (cfg.search.search_type == SearchType::hnsw) validate(cfg.hnsw);
    if (cfg.source.empty()) throw InputError("no source directory or manifest given");
    if (cfg.output_dir.empty()) throw InputError("no output directory given");
    std::error_code ec;
    if (!fs::exists(cfg.source, ec)) throw InputError("source does not exist: " + cfg.source.string());
}

DetectResult run_detect(const RunConfig& cfg, const WarningSink& warn) {
    validate(cfg);
    Stopwatch total;
    DetectResult result;

    Stopwatch parse_clock;
    result.fragments = extract_fragments(cfg.source, cfg.extraction, warn, cfg.threads);
    result.timing.parse_ms = parse_clock.elapsed_ms();
    if (result.fragments.empty() && warn) warn("no fragments extracted from " + cfg.source.string());

    std::vector<EmbeddingVector> vectors;
    if (cfg.embeddings_in) {
        vectors = vectors_from_cache(*cfg.embeddings_in, result.fragments, warn);
        result.timing.inference_ms = 0.0;
    } else {
        EmbedderConfig embedder = cfg.embedder;
        embedder.threads = cfg.threads;
        EmbedOutcome outcome = embed_batch(result.fragments, embedder, warn);
        vectors = std::move(outcome.vectors);
        result.timing.inference_ms = outcome.inference_ms;
    }

    Stopwatch build_clock;
    std::unique_ptr<SearchIndex> index;
    if (cfg.search.search_type == SearchType::exact) {
        index = std::make_unique<ExactIndex>(vectors);
    } else {
        index = std::make_unique<HnswIndex>(HnswIndex::build(vectors, cfg.hnsw));
    }
    result.timing.index_build_ms = build_clock.elapsed_ms();

    SearchOutcome searched = search_all(*index, cfg.search, cfg.threads);
    result.timing.search_ms = searched.search_ms;
    result.candidates = std::move(searched.lists);
    result.pairs = merge_rank(collect_pairs(result.candidates, cfg.search.k, cfg.search.similarity_floor));

    fs::create_directories(cfg.output_dir);
    StagedOutputs staged;
    const fs::path& out = cfg.output_dir;
    write_report(staged.stage(out / kReportCsv), result.pairs, result.fragments, ReportFormat::csv);
    write_report(staged.stage(out / kReportJsonl), result.pairs, result.fragments, ReportFormat::jsonl);
    std::vector<FragmentId> query_ids(index->size());
    for (std::size_t row = 0; row < query_ids.size(); ++row) query_ids[row] = index->id_at(row);
    write_candidates(staged.stage(out / kCandidatesJsonl), query_ids, result.candidates);
    save_fragments(staged.stage(out / kFragmentsJsonl), result.fragments);
    if (cfg.embeddings_out) save_embeddings(staged.stage(*cfg.embeddings_out), vectors);
    if (cfg.index_out) {
        auto* hnsw = dynamic_cast<HnswIndex*>(index.get());
        if (hnsw == nullptr) throw InputError("--save-index requires the hnsw search type");
        hnsw->save(staged.stage(*cfg.index_out));
    }
    result.timing.total_ms = total.elapsed_ms();
    if (cfg.instrument) write_text(staged.stage(out / kTimingJson), timing_to_json(result.timing));
    result.written = staged.commit();
    return result;
}

std::size_t run_embed_cache(const RunConfig& cfg, const fs::path& cache_path, const WarningSink& warn) {
    validate(cfg.embedder);
    auto fragments = extract_fragments(cfg.source, cfg.extraction, warn, cfg.threads);
    EmbedderConfig embedder = cfg.embedder;
    embedder.threads = cfg.threads;
    auto outcome = embed_batch(fragments, embedder, warn);
    StagedOutputs staged;
    save_embeddings(staged.stage(cache_path), outcome.vectors);
    staged.commit();
    return outcome.vectors.size();
}

EvalReport run_eval(const EvalOptions& options) {
    if (!(options.overlap_threshold > 0.0 && options.overlap_threshold <= 1.0)) {
        throw InputError("overlap threshold must lie in (0, 1]");
    }
    auto rows = read_report(options.report);
    auto truth = load_ground_truth(options.truth);
    if (truth.empty()) throw InputError("ground truth " + options.truth.string() + " is empty");

    std::vector<DetectedPair> detected;
    detected.reserve(rows.size());
    for (const auto& row : rows) detected.push_back({row.a, row.b});

    EvalReport report;
    report.truth_pairs = truth.size();
    report.detected_pairs = detected.size();
    report.recall_overall = 100.0 * recall(detected, truth, options.overlap_threshold);
    for (const auto& [type, value] : recall_by_type(detected, truth, options.overlap_threshold)) {
        report.recall_by_type[type] = 100.0 * value;
    }

    if (options.candidates.has_value() != options.fragments.has_value()) {
        throw InputError("MRR needs both the candidates file and the fragments dump");
    }
    if (options.candidates) {
        ExtractionConfig plain;
        plain.min_loc = 0;
        plain.strip_comments = false;
        plain.language = Language::manifest;
        std::unordered_map<FragmentId, LineRange> coords;
        for (const auto& f : load_manifest(*options.fragments, plain)) {
            coords.emplace(f.id, LineRange{f.file, f.start_line, f.end_line});
        }
        auto where = [&](FragmentId id) -> const LineRange& {
            auto it = coords.find(id);
            if (it == coords.end()) throw InputError("candidates reference unknown fragment " + std::to_string(id));
            return it->second;
        };
        TruthMatcher matcher(truth, options.overlap_threshold);
        std::vector<std::vector<bool>> relevance;
        for (const QueryResult& q : read_candidates(*options.candidates)) {
            const LineRange& query = where(q.query);
            if (!matcher.has_known_clone(query)) continue;
            std::vector<bool> marks;
            marks.reserve(q.hits.size());
            for (const CloneCandidate& hit : q.hits) marks.push_back(matcher.matches({query, where(hit.hit_id)}));
            relevance.push_back(std::move(marks));
        }
        if (!relevance.empty()) report.mrr = mrr(relevance);
    }

    if (options.review) {
        report.precision = precision_from_sample(*options.review);
        report.f_score = f_score(report.precision->strict, report.recall_overall);
        report.kappa = cohen_kappa(*options.review);
    }
    if (options.timing) report.timing = timing_from_json(read_text(*options.timing));
    return report;
}

std::vector<EmbeddingVector> random_unit_vectors(std::size_t count, std::size_t dimension, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Box-Muller on raw 53-bit draws so results do not depend on the
    // standard library's distribution implementations.
    auto uniform = [&] { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; };
    std::vector<EmbeddingVector> vectors(count);
    for (std::size_t i = 0; i < count; ++i) {
        vectors[i].fragment_id = i;
        vectors[i].values.resize(dimension);
        for (std::size_t d = 0; d < dimension; d += 2) {
            const double r = std::sqrt(-2.0 * std::log(uniform()));
            const double theta = 2.0 * std::numbers::pi * uniform();
            vectors[i].values[d] = static_cast<float>(r * std::cos(theta));
            if (d + 1 < dimension) vectors[i].values[d + 1] = static_cast<float>(r * std::sin(theta));
        }
        normalize(vectors[i].values);
    }
    return vectors;
}

double recall_at_k(std::span<const std::vector<CloneCandidate>> approx,
                   std::span<const std::vector<CloneCandidate>> exact) {
    if (approx.size() != exact.size()) throw std::invalid_argument("recall_at_k: list counts differ");
    if (exact.empty()) return 1.0;
    double sum = 0.0;
    for (std::size_t q = 0; q < exact.size(); ++q) {
        if (exact[q].empty()) {
            sum += 1.0;
            continue;
        }
        std::unordered_set<FragmentId> truth;
        for (const auto& c : exact[q]) truth.insert(c.hit_id);
        std::size_t found = 0;
        for (const auto& c : approx[q]) found += truth.contains(c.hit_id) ? 1 : 0;
        sum += static_cast<double>(found) / static_cast<double>(truth.size());
    }
    return sum / static_cast<double>(exact.size());
}

BenchResult run_bench(const BenchOptions& options) {
    if (options.count < 2) throw InputError("bench needs at least two vectors");
    SearchParams params;
    params.k = options.k;
    params.ef_search = options.ef_search;
    params.similarity_floor = -1.0;
    validate(params);
    validate(options.hnsw);

    auto vectors = random_unit_vectors(options.count, options.dimension, options.seed);
    BenchResult result;
    result.count = options.count;
    result.queries = std::min(options.queries, options.count);

    Stopwatch exact_build;
    ExactIndex exact(vectors);
    result.exact_build_ms = exact_build.elapsed_ms();

    std::vector<std::vector<CloneCandidate>> exact_lists(result.queries);
    Stopwatch exact_search;
    for (std::size_t q = 0; q < result.queries; ++q) exact_lists[q] = exact.search_by_id(q, params);
    result.exact_search_ms = exact_search.elapsed_ms();

    Stopwatch hnsw_build;
    HnswIndex hnsw = HnswIndex::build(vectors, options.hnsw);
    result.hnsw_build_ms = hnsw_build.elapsed_ms();

    std::vector<std::vector<CloneCandidate>> hnsw_lists(result.queries);
    Stopwatch hnsw_search;
    for (std::size_t q = 0; q < result.queries; ++q) hnsw_lists[q] = hnsw.search_by_id(q, params);
    result.hnsw_search_ms = hnsw_search.elapsed_ms();

    result.recall_at_k = recall_at_k(hnsw_lists, exact_lists);
    result.audit_ok = hnsw.audit().ok;
    return result;
}

std::string format_bench_table(const BenchOptions& options, const BenchResult& r) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "N=%zu D=%zu k=%zu queries=%zu seed=%llu M=%zu efC=%zu efS=%zu\n", r.count,
                  options.dimension, options.k, r.queries, static_cast<unsigned long long>(options.seed),
                  options.hnsw.m, options.hnsw.ef_construction, options.ef_search);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-14s %12s %14s %14s\n", "search type", "recall@k", "build (ms)", "search (ms)");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-14s %11.2f%% %14.1f %14.1f\n", "exact (CPU)", 100.0, r.exact_build_ms,
                  r.exact_search_ms);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-14s %11.2f%% %14.1f %14.1f\n", "hnsw (CPU)", 100.0 * r.recall_at_k,
                  r.hnsw_build_ms, r.hnsw_search_ms);
    out << buf;
    std::snprintf(buf, sizeof buf, "graph audit: %s\n", r.audit_ok ? "ok" : "FAILED");
    out << buf;
    return out.str();
}

}  // namespace sscd

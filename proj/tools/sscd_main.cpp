// sscd: embedding-based code clone detection.
//
//   sscd detect      --source DIR --out DIR [...]
//   sscd eval        --report report.csv --truth truth.csv [...]
//   sscd bench       --n 10000 [...]
//   sscd embed-cache --source DIR --out cache.bin | --inspect cache.bin
//
// Exit codes: 0 success, 1 user error, 2 internal error.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sscd/embedding_io.hpp"
#include "sscd/error.hpp"
#include "sscd/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

// Every option can also come from the environment as SSCD_<NAME>.
std::string env_name(const std::string& flag) {
    std::string name = "SSCD_";
    for (char c : flag.substr(flag.find_first_not_of('-'))) {
        name.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return name;
}

template <typename T>
CLI::Option* add(CLI::App& app, const std::string& flag, T& target, const std::string& help) {
    return app.add_option(flag, target, help)->envname(env_name(flag))->capture_default_str();
}

struct DetectFlags {
    std::string source;
    std::string out = "sscd-out";
    std::string language = "c";
    std::size_t min_loc = 6;
    bool keep_comments = false;
    std::string tokenizer = "normalized";
    std::string provider = "hash";
    std::string model = "hash-v1";
    std::string endpoint;
    std::size_t dimension = 768;
    std::size_t code_length = 128;
    std::size_t batch_size = 32;
    std::string search_type = "exact";
    std::size_t top_n = 10;
    double similarity = 0.0;
    std::size_t hnsw_m = 32;
    std::size_t hnsw_efc = 200;
    std::size_t hnsw_efs = 120;
    std::uint64_t seed = 42;
    std::string embeddings_in;
    std::string embeddings_out;
    std::string index_out;
    bool no_timing = false;
    unsigned threads = 1;
};

void add_pipeline_options(CLI::App& app, DetectFlags& f) {
    add(app, "--source", f.source, "Source directory, or manifest file with --language manifest");
    add(app, "--language", f.language, "c | cpp | java | manifest")
        ->check(CLI::IsMember({"c", "cpp", "java", "manifest"}));
    add(app, "--min-loc", f.min_loc, "Minimum lines of code per fragment (alpha)");
    app.add_flag("--keep-comments", f.keep_comments, "Do not strip comments from fragment text")
        ->envname(env_name("--keep-comments"));
    add(app, "--tokenizer", f.tokenizer, "raw | normalized")->check(CLI::IsMember({"raw", "normalized"}));
    add(app, "--provider", f.provider, "Embedding provider: hash | remote")->check(CLI::IsMember({"hash", "remote"}));
    add(app, "--model", f.model, "Model label sent to the service and reported (beta)");
    add(app, "--endpoint", f.endpoint, "Embedding service base URL (remote provider)");
    add(app, "--dimension", f.dimension, "Embedding dimension")->check(CLI::PositiveNumber);
    add(app, "--code-length", f.code_length, "Maximum tokens consumed per fragment (gamma)")->check(CLI::PositiveNumber);
    add(app, "--batch-size", f.batch_size, "Fragments per embedding request")->check(CLI::PositiveNumber);
    add(app, "--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

sscd::RunConfig to_run_config(const DetectFlags& f) {
    sscd::RunConfig cfg;
    cfg.source = f.source;
    cfg.output_dir = f.out;
    cfg.extraction.language = sscd::parse_language(f.language);
    cfg.extraction.min_loc = f.min_loc;
    cfg.extraction.strip_comments = !f.keep_comments;
    cfg.extraction.tokenizer_mode = sscd::parse_tokenizer_mode(f.tokenizer);
    cfg.embedder.provider = sscd::parse_provider(f.provider);
    cfg.embedder.model_name = f.model;
    cfg.embedder.service_endpoint = f.endpoint;
    cfg.embedder.dimension = f.dimension;
    cfg.embedder.code_length = f.code_length;
    cfg.embedder.batch_size = f.batch_size;
    cfg.search.search_type = sscd::parse_search_type(f.search_type);
    cfg.search.k = f.top_n;
    cfg.search.ef_search = std::max(f.hnsw_efs, f.top_n);
    cfg.search.similarity_floor = f.similarity;
    cfg.hnsw.m = f.hnsw_m;
    cfg.hnsw.ef_construction = f.hnsw_efc;
    cfg.hnsw.seed = f.seed;
    if (!f.embeddings_in.empty()) cfg.embeddings_in = f.embeddings_in;
    if (!f.embeddings_out.empty()) cfg.embeddings_out = f.embeddings_out;
    if (!f.index_out.empty()) cfg.index_out = f.index_out;
    cfg.instrument = !f.no_timing;
    cfg.threads = f.threads;
    return cfg;
}

// Config files are one flat "key = value" document; keys are long flag names
// without dashes ("min-loc" or "min_loc") and bind to the active subcommand.
class FlatConfig : public CLI::ConfigTOML {
public:
    explicit FlatConfig(std::string section) : section_(std::move(section)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigTOML::from_config(input);
        for (auto& item : items) {
            std::replace(item.name.begin(), item.name.end(), '_', '-');
            if (item.parents.empty() && !section_.empty()) item.parents = {section_};
        }
        return items;
    }

private:
    std::string section_;
};

std::string active_subcommand(int argc, char** argv, const CLI::App& app) {
    for (int i = 1; i < argc; ++i) {
        for (const CLI::App* sub : app.get_subcommands({})) {
            if (sub->get_name() == argv[i]) return argv[i];
        }
    }
    return {};
}

void warn(std::string_view msg) { std::cerr << "warning: " << msg << '\n'; }

sscd::ReviewTable parse_review(const std::string& text) {
    std::vector<std::size_t> counts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string field = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            long long v = std::stoll(field, &used);
            if (used != field.size() || v < 0) throw std::invalid_argument(field);
            counts.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw sscd::InputError("--review expects four non-negative counts, got \"" + text + "\"");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (counts.size() != 4) throw sscd::InputError("--review expects exactly four counts");
    return {counts[0], counts[1], counts[2], counts[3]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedding-based code clone detection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Flat key = value configuration file (flags override it, it overrides SSCD_* env)");

    DetectFlags detect_flags;
    auto* detect = app.add_subcommand("detect", "Extract, embed, index and search a code base for clones");
    add_pipeline_options(*detect, detect_flags);
    add(*detect, "--out", detect_flags.out, "Output directory");
    add(*detect, "--search-type", detect_flags.search_type, "exact | hnsw (delta)")
        ->check(CLI::IsMember({"exact", "hnsw"}));
    add(*detect, "--top-n", detect_flags.top_n, "Candidates per fragment (epsilon)")->check(CLI::PositiveNumber);
    add(*detect, "--similarity", detect_flags.similarity, "Cosine similarity threshold (sigma)")
        ->check(CLI::Range(-1.0, 1.0));
    add(*detect, "--hnsw-m", detect_flags.hnsw_m, "HNSW neighbours per node")->check(CLI::Range(2, 1 << 16));
    add(*detect, "--hnsw-efc", detect_flags.hnsw_efc, "HNSW construction beam width")->check(CLI::PositiveNumber);
    add(*detect, "--hnsw-efs", detect_flags.hnsw_efs, "HNSW search beam width")->check(CLI::PositiveNumber);
    add(*detect, "--seed", detect_flags.seed, "HNSW level-draw seed");
    add(*detect, "--embeddings", detect_flags.embeddings_in, "Reuse an embedding cache instead of running inference");
    add(*detect, "--save-embeddings", detect_flags.embeddings_out, "Write the embedding cache");
    add(*detect, "--save-index", detect_flags.index_out, "Write the HNSW index (hnsw search type)");
    detect->add_flag("--no-timing", detect_flags.no_timing, "Skip timing.json")->envname(env_name("--no-timing"));

    sscd::EvalOptions eval_options;
    std::string eval_report, eval_truth, eval_candidates, eval_fragments, eval_review, eval_timing, eval_out;
    double overlap = 0.7;
    auto* eval = app.add_subcommand("eval", "Score a clone report against ground truth");
    add(*eval, "--report", eval_report, "Clone report (CSV, or JSONL by extension)")->required();
    add(*eval, "--truth", eval_truth, "Ground truth CSV")->required();
    add(*eval, "--overlap", overlap, "Line-overlap acceptance threshold")->check(CLI::Range(0.0, 1.0));
    add(*eval, "--candidates", eval_candidates, "candidates.jsonl from detect (MRR)");
    add(*eval, "--fragments", eval_fragments, "fragments.jsonl from detect (MRR)");
    add(*eval, "--review", eval_review,
        "Manual review counts: both_clone,r1_clone_r2_non,r1_non_r2_clone,both_non");
    add(*eval, "--timing", eval_timing, "timing.json to fold into the report");
    add(*eval, "--out", eval_out, "Write the report JSON here as well");

    sscd::BenchOptions bench_options;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Compare exact and HNSW search on random unit vectors");
    add(*bench, "--n", bench_options.count, "Number of vectors")->check(CLI::Range(std::size_t{100}, std::size_t{1} << 31));
    add(*bench, "--dimension", bench_options.dimension, "Vector dimension")->check(CLI::PositiveNumber);
    add(*bench, "--seed", bench_options.seed, "Seed for vectors and level draws");
    add(*bench, "--top-n", bench_options.k, "k for recall@k")->check(CLI::PositiveNumber);
    add(*bench, "--queries", bench_options.queries, "Queries evaluated against exact search")->check(CLI::PositiveNumber);
    add(*bench, "--hnsw-m", bench_options.hnsw.m, "HNSW neighbours per node")->check(CLI::Range(2, 1 << 16));
    add(*bench, "--hnsw-efc", bench_options.hnsw.ef_construction, "HNSW construction beam width")
        ->check(CLI::PositiveNumber);
    add(*bench, "--hnsw-efs", bench_options.ef_search, "HNSW search beam width")->check(CLI::PositiveNumber);
    add(*bench, "--out", bench_out, "Write results as JSON");

    DetectFlags cache_flags;
    std::string cache_out, cache_inspect;
    auto* cache = app.add_subcommand("embed-cache", "Build or inspect an embedding cache");
    add_pipeline_options(*cache, cache_flags);
    add(*cache, "--out", cache_out, "Cache file to write");
    add(*cache, "--inspect", cache_inspect, "Print the header of an existing cache");

    app.config_formatter(std::make_shared<FlatConfig>(active_subcommand(argc, argv, app)));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUser;
    }

    try {
        if (*detect) {
            if (detect_flags.source.empty()) throw sscd::InputError("detect: --source is required");
            auto cfg = to_run_config(detect_flags);
            auto result = sscd::run_detect(cfg, warn);
            std::cout << result.fragments.size() << " fragments, " << result.pairs.size() << " clone pairs -> "
                      << cfg.output_dir.string() << '\n';
            std::cout << sscd::timing_to_json(result.timing) << '\n';
        } else if (*eval) {
            eval_options.report = eval_report;
            eval_options.truth = eval_truth;
            eval_options.overlap_threshold = overlap;
            if (!eval_candidates.empty()) eval_options.candidates = eval_candidates;
            if (!eval_fragments.empty()) eval_options.fragments = eval_fragments;
            if (!eval_review.empty()) eval_options.review = parse_review(eval_review);
            if (!eval_timing.empty()) eval_options.timing = eval_timing;
            auto report = sscd::run_eval(eval_options);
            std::cout << sscd::to_table(report);
            if (!eval_out.empty()) {
                std::ofstream out(eval_out, std::ios::trunc);
                out << sscd::to_json(report) << '\n';
                if (!out) throw sscd::InputError("cannot write " + eval_out);
            }
        } else if (*bench) {
            bench_options.ef_search = std::max(bench_options.ef_search, bench_options.k);
            bench_options.hnsw.seed = bench_options.seed;
            auto result = sscd::run_bench(bench_options);
            std::cout << sscd::format_bench_table(bench_options, result);
            if (!bench_out.empty()) {
                nlohmann::ordered_json j = {{"n", result.count},
                                            {"queries", result.queries},
                                            {"recall_at_k", result.recall_at_k},
                                            {"exact_build_ms", result.exact_build_ms},
                                            {"exact_search_ms", result.exact_search_ms},
                                            {"hnsw_build_ms", result.hnsw_build_ms},
                                            {"hnsw_search_ms", result.hnsw_search_ms},
                                            {"audit_ok", result.audit_ok}};
                std::ofstream out(bench_out, std::ios::trunc);
                out << j.dump(2) << '\n';
                if (!out) throw sscd::InputError("cannot write " + bench_out);
            }
        } else if (*cache) {
            if (!cache_inspect.empty()) {
                auto vectors = sscd::load_embeddings(cache_inspect);
                std::cout << "count " << vectors.size() << "\ndimension "
                          << (vectors.empty() ? 0 : vectors.front().values.size()) << '\n';
            } else {
                if (cache_flags.source.empty() || cache_out.empty()) {
                    throw sscd::InputError("embed-cache: --source and --out are required (or --inspect)");
                }
                auto cfg = to_run_config(cache_flags);
                std::size_t n = sscd::run_embed_cache(cfg, cache_out, warn);
                std::cout << n << " embeddings -> " << cache_out << '\n';
            }
        }
    } catch (const sscd::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

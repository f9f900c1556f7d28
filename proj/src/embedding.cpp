#include "sscd/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "sscd/error.hpp"
#include "sscd/parallel.hpp"
#include "sscd/remote_embedder.hpp"
#include "sscd/timing.hpp"
#include "sscd/vector_math.hpp"

namespace sscd {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a over the bytes, seeded, then a splitmix finalizer so that both the
// bucket (low bits) and the sign (top bit) are well mixed.
std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(h);
}

}  // namespace

void validate(const EmbedderConfig& cfg) {
    if (cfg.dimension == 0) throw InputError("embedding dimension must be positive");
    if (cfg.code_length == 0) throw InputError("code length must be positive");
    if (cfg.batch_size == 0) throw InputError("batch size must be positive");
    if (cfg.provider == ProviderKind::remote && cfg.service_endpoint.empty()) {
        throw InputError("remote provider requires a service endpoint");
    }
}

ProviderKind parse_provider(std::string_view name) {
    if (name == "hash") return ProviderKind::hash;
    if (name == "remote") return ProviderKind::remote;
    throw InputError("unknown embedding provider: " + std::string(name));
}

std::vector<std::string> truncate_tokens(std::span<const std::string> tokens, std::size_t max_tokens) {
    auto n = std::min(tokens.size(), max_tokens);
    return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<float> hash_embed(std::span<const std::string> tokens, std::size_t dimension, std::uint64_t seed) {
    if (tokens.empty()) throw std::invalid_argument("hash_embed: empty token list");
    if (dimension == 0) throw std::invalid_argument("hash_embed: zero dimension");

    std::unordered_map<std::string_view, std::size_t> counts;
    for (const std::string& t : tokens) ++counts[t];

    std::vector<double> acc(dimension, 0.0);
    for (const auto& [token, tf] : counts) {
        std::uint64_t h = token_hash(token, seed);
        double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        acc[h % dimension] += sign * static_cast<double>(tf);
    }
    double sq = 0.0;
    for (double x : acc) sq += x * x;
    std::vector<float> out(dimension, 0.0f);
    if (sq == 0.0) {
        // Every bucket cancelled out; fall back to the unsigned histogram.
        for (const auto& [token, tf] : counts) acc[token_hash(token, seed) % dimension] += static_cast<double>(tf);
        sq = 0.0;
        for (double x : acc) sq += x * x;
    }
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < dimension; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

std::vector<float> mean_pool(std::span<const std::vector<float>> token_vectors) {
    if (token_vectors.empty()) throw std::invalid_argument("mean_pool: no vectors");
    const std::size_t d = token_vectors.front().size();
    std::vector<double> sum(d, 0.0);
    for (const auto& v : token_vectors) {
        if (v.size() != d) throw std::invalid_argument("mean_pool: dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) sum[i] += v[i];
    }
    std::vector<float> out(d);
    const auto n = static_cast<double>(token_vectors.size());
    for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<float>(sum[i] / n);
    normalize(out);
    return out;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::size_t code_length, std::uint64_t seed)
    : dimension_(dimension), code_length_(code_length), seed_(seed) {
    if (dimension == 0 || code_length == 0) throw InputError("hash embedder: dimension and code length must be positive");
}

std::vector<std::vector<float>> HashEmbedder::embed(std::span<const CodeFragment> fragments) const {
    std::vector<std::vector<float>> out;
    out.reserve(fragments.size());
    for (const CodeFragment& f : fragments) {
        auto tokens = truncate_tokens(f.tokens, code_length_);
        out.push_back(hash_embed(tokens, dimension_, seed_));
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& cfg) {
    validate(cfg);
    if (cfg.provider == ProviderKind::remote) return std::make_unique<RemoteEmbedder>(cfg);
    return std::make_unique<HashEmbedder>(cfg.dimension, cfg.code_length);
}

EmbedOutcome embed_batch(std::span<const CodeFragment> fragments, const EmbedderConfig& cfg,
                         const WarningSink& warn) {
    auto provider = make_provider(cfg);
    return embed_batch(fragments, cfg, *provider, warn);
}

EmbedOutcome embed_batch(std::span<const CodeFragment> fragments, const EmbedderConfig& cfg,
                         const EmbeddingProvider& provider, const WarningSink& warn) {
    validate(cfg);
    Stopwatch clock;
    EmbedOutcome outcome;

    std::vector<CodeFragment> filtered;
    std::span<const CodeFragment> kept = fragments;
    if (std::any_of(fragments.begin(), fragments.end(), [](const CodeFragment& f) { return f.tokens.empty(); })) {
        for (const CodeFragment& f : fragments) {
            if (f.tokens.empty()) {
                outcome.dropped.push_back(f.id);
                if (warn) warn("dropping zero-token fragment " + std::to_string(f.id) + " (" + f.file + ")");
            } else {
                filtered.push_back(f);
            }
        }
        kept = filtered;
    }

    const std::size_t batches = (kept.size() + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<std::vector<std::vector<float>>> results(batches);
    parallel_for(batches, cfg.threads, [&](std::size_t b) {
        const std::size_t lo = b * cfg.batch_size;
        const std::size_t hi = std::min(kept.size(), lo + cfg.batch_size);
        std::span<const CodeFragment> batch(kept.data() + lo, hi - lo);
        auto vectors = provider.embed(batch);
        if (vectors.size() != batch.size()) {
            throw ServiceError("embedding batch " + std::to_string(b) + ": expected " +
                               std::to_string(batch.size()) + " vectors, got " + std::to_string(vectors.size()));
        }
        results[b] = std::move(vectors);
    });

    outcome.vectors.reserve(kept.size());
    std::size_t next = 0;
    for (auto& batch : results) {
        for (auto& values : batch) {
            if (values.size() != provider.dimension()) {
                throw ServiceError("embedding for fragment " + std::to_string(kept[next].id) + " has dimension " +
                                   std::to_string(values.size()) + ", expected " +
                                   std::to_string(provider.dimension()));
            }
            normalize(values);
            outcome.vectors.push_back({kept[next].id, std::move(values)});
            ++next;
        }
    }
    outcome.inference_ms = clock.elapsed_ms();
    return outcome;
}

}  // namespace sscd

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sscd/fragment.hpp"

namespace sscd {

inline constexpr std::uint64_t kHashEmbedSeed = 0x53434431;

struct EmbeddingVector {
    FragmentId fragment_id = 0;
    std::vector<float> values;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class ProviderKind { hash, remote };

struct EmbedderConfig {
    ProviderKind provider = ProviderKind::hash;
    std::size_t dimension = 768;
    std::size_t code_length = 128;
    std::string model_name = "hash-v1";
    std::string service_endpoint;
    std::size_t batch_size = 32;
    unsigned threads = 1;
    // Remote retry policy: attempts in total, first backoff doubled per retry.
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds request_timeout{60};
};

void validate(const EmbedderConfig& cfg);
ProviderKind parse_provider(std::string_view name);

std::vector<std::string> truncate_tokens(std::span<const std::string> tokens, std::size_t max_tokens);

/// Signed feature hashing over the token multiset, L2-normalized.
std::vector<float> hash_embed(std::span<const std::string> tokens, std::size_t dimension,
                              std::uint64_t seed = kHashEmbedSeed);

/// Component-wise mean of equal-length vectors, L2-normalized.
std::vector<float> mean_pool(std::span<const std::vector<float>> token_vectors);

/// Turns a batch of fragments into raw vectors, positionally aligned with the
/// input. Implementations must tolerate concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<std::vector<float>> embed(std::span<const CodeFragment> fragments) const = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
};

class HashEmbedder final : public EmbeddingProvider {
public:
    HashEmbedder(std::size_t dimension, std::size_t code_length, std::uint64_t seed = kHashEmbedSeed);

    std::vector<std::vector<float>> embed(std::span<const CodeFragment> fragments) const override;
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
    std::size_t code_length_;
    std::uint64_t seed_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& cfg);

struct EmbedOutcome {
    std::vector<EmbeddingVector> vectors;
    std::vector<FragmentId> dropped;  // zero-token fragments
    double inference_ms = 0.0;
};

/// Embeds every fragment with at least one token, in input order, batching at
/// cfg.batch_size. Output vectors are re-normalized regardless of provider.
EmbedOutcome embed_batch(std::span<const CodeFragment> fragments, const EmbedderConfig& cfg,
                         const WarningSink& warn = {});
EmbedOutcome embed_batch(std::span<const CodeFragment> fragments, const EmbedderConfig& cfg,
                         const EmbeddingProvider& provider, const WarningSink& warn = {});

}  // namespace sscd

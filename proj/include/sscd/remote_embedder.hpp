#pragma once

#include <string>
#include <vector>

#include "sscd/embedding.hpp"

namespace sscd {

/// Client for the HTTP embedding service:
///   POST <endpoint>/embed  {"model", "max_tokens", "texts": [...]}
///   -> {"dimension": D, "vectors": [[...], ...]}
/// Transport failures and 5xx answers are retried with exponential backoff;
/// anything else is fatal for the batch.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(const EmbedderConfig& cfg);

    std::vector<std::vector<float>> embed(std::span<const CodeFragment> fragments) const override;
    [[nodiscard]] std::size_t dimension() const override { return cfg_.dimension; }

    [[nodiscard]] const std::string& host() const { return host_; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    EmbedderConfig cfg_;
    std::string host_;  // scheme://host[:port]
    std::string path_;  // request path ending in /embed
};

/// Builds the request body sent for one batch.
std::string make_embed_request(const std::string& model, std::size_t max_tokens,
                               const std::vector<std::string>& texts);

/// Validates a service response against the protocol and the expected batch
/// shape. Throws ServiceError on any violation.
std::vector<std::vector<float>> parse_embed_response(const std::string& body, std::size_t expected_rows,
                                                     std::size_t expected_dimension);

}  // namespace sscd

#include "sscd/remote_embedder.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sscd/error.hpp"

namespace sscd {
namespace {

using json = nlohmann::json;

void split_endpoint(const std::string& endpoint, std::string& host, std::string& path) {
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw InputError("service endpoint needs a scheme: " + endpoint);
    auto slash = endpoint.find('/', scheme + 3);
    host = endpoint.substr(0, slash);
    std::string base = slash == std::string::npos ? std::string() : endpoint.substr(slash);
    while (!base.empty() && base.back() == '/') base.pop_back();
    path = base.ends_with("/embed") ? base : base + "/embed";
}

}  // namespace

std::string make_embed_request(const std::string& model, std::size_t max_tokens,
                               const std::vector<std::string>& texts) {
    json body = {{"model", model}, {"max_tokens", max_tokens}, {"texts", texts}};
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<std::vector<float>> parse_embed_response(const std::string& body, std::size_t expected_rows,
                                                     std::size_t expected_dimension) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ServiceError(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("vectors")) {
        throw ServiceError("response must be an object with \"dimension\" and \"vectors\"");
    }
    if (!doc["dimension"].is_number_integer()) throw ServiceError("\"dimension\" must be an integer");
    const auto dimension = doc["dimension"].get<long long>();
    if (dimension <= 0 || static_cast<std::size_t>(dimension) != expected_dimension) {
        throw ServiceError("dimension mismatch: service reports " + std::to_string(dimension) + ", expected " +
                           std::to_string(expected_dimension));
    }
    const json& rows = doc["vectors"];
    if (!rows.is_array() || rows.size() != expected_rows) {
        throw ServiceError("expected " + std::to_string(expected_rows) + " vectors in response");
    }
    std::vector<std::vector<float>> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const json& row = rows[r];
        if (!row.is_array() || row.size() != expected_dimension) {
            throw ServiceError("dimension mismatch in vector " + std::to_string(r));
        }
        std::vector<float> values;
        values.reserve(row.size());
        for (const json& x : row) {
            if (!x.is_number()) throw ServiceError("non-numeric component in vector " + std::to_string(r));
            double v = x.get<double>();
            if (!std::isfinite(v)) throw ServiceError("non-finite component in vector " + std::to_string(r));
            values.push_back(static_cast<float>(v));
        }
        out.push_back(std::move(values));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(const EmbedderConfig& cfg) : cfg_(cfg) {
    if (cfg_.max_attempts < 1) throw InputError("remote embedder needs at least one attempt");
    split_endpoint(cfg_.service_endpoint, host_, path_);
}

std::vector<std::vector<float>> RemoteEmbedder::embed(std::span<const CodeFragment> fragments) const {
    if (fragments.empty()) return {};
    std::vector<std::string> texts;
    texts.reserve(fragments.size());
    for (const CodeFragment& f : fragments) texts.push_back(f.text);
    const std::string body = make_embed_request(cfg_.model_name, cfg_.code_length, texts);
    const std::string batch_label = "batch [fragment " + std::to_string(fragments.front().id) + " .. " +
                                    std::to_string(fragments.back().id) + "]";

    httplib::Client client(host_);
    client.set_connection_timeout(cfg_.request_timeout);
    client.set_read_timeout(cfg_.request_timeout);
    client.set_write_timeout(cfg_.request_timeout);

    std::string last_failure;
    auto backoff = cfg_.initial_backoff;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw ServiceError("embedding service rejected " + batch_label + ": HTTP " + std::to_string(res->status) +
                               " " + res->body);
        } else {
            try {
                return parse_embed_response(res->body, fragments.size(), cfg_.dimension);
            } catch (const ServiceError& e) {
                throw ServiceError("embedding service " + batch_label + ": " + e.what());
            }
        }
        if (attempt < cfg_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw ServiceError("embedding service unreachable for " + batch_label + " after " +
                       std::to_string(cfg_.max_attempts) + " attempts (" + last_failure + ")");
}

}  // namespace sscd

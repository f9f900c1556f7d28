#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "sscd/embedding.hpp"

namespace sscd {

// Embedding cache layout (little-endian):
//   "SSCDEMB1" | u32 count | u32 dimension | count x { u64 fragment_id, dimension x f32 }

void save_embeddings(const std::filesystem::path& path, std::span<const EmbeddingVector> vectors);
std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& path);

}  // namespace sscd

#pragma once

#include <span>
#include <vector>

namespace sscd {

/// Dot product with 64-bit accumulation.
double dot(std::span<const float> a, std::span<const float> b);

/// Dot product with 32-bit accumulation. Only for ranking where a relative
/// error around 1e-6 is harmless, such as HNSW graph traversal.
float dot_f32(std::span<const float> a, std::span<const float> b);

double l2_norm(std::span<const float> v);

/// Scales `v` to unit length in place. Throws std::invalid_argument for zero
/// or non-finite vectors.
void normalize(std::span<float> v);

/// Cosine similarity, clamped to [-1, 1]. Throws std::invalid_argument on a
/// dimension mismatch or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace sscd

#include "sscd/vector_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sscd {

namespace {

// Independent partial sums per lane keep the FMA pipeline busy; a single
// running sum is bound by add latency.
constexpr std::size_t kLanes = 32;

// Pairwise fold of the partial sums; a serial fold would reintroduce the
// latency chain.
template <typename T, std::size_t N>
T fold(T (&part)[N]) {
    for (std::size_t width = N / 2; width > 0; width /= 2) {
        for (std::size_t j = 0; j < width; ++j) part[j] += part[j + width];
    }
    return part[0];
}

}  // namespace

double dot(std::span<const float> a, std::span<const float> b) {
    const float* pa = a.data();
    const float* pb = b.data();
    const std::size_t n = std::min(a.size(), b.size());
    const std::size_t blocked = n - n % kLanes;
    double part[kLanes] = {};
    for (std::size_t i = 0; i < blocked; i += kLanes) {
#pragma omp simd
        for (std::size_t j = 0; j < kLanes; ++j) {
            part[j] += static_cast<double>(pa[i + j]) * static_cast<double>(pb[i + j]);
        }
    }
    double tail = 0.0;
    for (std::size_t i = blocked; i < n; ++i) tail += static_cast<double>(pa[i]) * static_cast<double>(pb[i]);
    return fold(part) + tail;
}

float dot_f32(std::span<const float> a, std::span<const float> b) {
    const float* pa = a.data();
    const float* pb = b.data();
    const std::size_t n = std::min(a.size(), b.size());
    const std::size_t blocked = n - n % (2 * kLanes);
    float part[2 * kLanes] = {};
    for (std::size_t i = 0; i < blocked; i += 2 * kLanes) {
#pragma omp simd
        for (std::size_t j = 0; j < 2 * kLanes; ++j) part[j] += pa[i + j] * pb[i + j];
    }
    float tail = 0.0f;
    for (std::size_t i = blocked; i < n; ++i) tail += pa[i] * pb[i];
    return fold(part) + tail;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

void normalize(std::span<float> v) {
    const double n = l2_norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    for (float& x : v) x = static_cast<float>(static_cast<double>(x) / n);
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace sscd

#pragma once

#include <chrono>
#include <string>

namespace sscd {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    [[nodiscard]] double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Wall-clock milliseconds per pipeline stage. Stages may overlap, so
/// total_ms is measured independently rather than summed.
struct TimingBreakdown {
    double parse_ms = 0.0;
    double inference_ms = 0.0;
    double index_build_ms = 0.0;
    double search_ms = 0.0;
    double total_ms = 0.0;
};

std::string timing_to_json(const TimingBreakdown& t);
TimingBreakdown timing_from_json(const std::string& text);

}  // namespace sscd

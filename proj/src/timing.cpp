#include "sscd/timing.hpp"

#include <json.hpp>

#include "sscd/error.hpp"

namespace sscd {

std::string timing_to_json(const TimingBreakdown& t) {
    nlohmann::ordered_json j = {{"parse_ms", t.parse_ms},
                                {"inference_ms", t.inference_ms},
                                {"index_build_ms", t.index_build_ms},
                                {"search_ms", t.search_ms},
                                {"total_ms", t.total_ms}};
    return j.dump(2);
}

TimingBreakdown timing_from_json(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        TimingBreakdown t;
        t.parse_ms = j.at("parse_ms").get<double>();
        t.inference_ms = j.at("inference_ms").get<double>();
        t.index_build_ms = j.at("index_build_ms").get<double>();
        t.search_ms = j.at("search_ms").get<double>();
        t.total_ms = j.at("total_ms").get<double>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad timing document: ") + e.what());
    }
}

}  // namespace sscd

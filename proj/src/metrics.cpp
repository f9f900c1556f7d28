#include "sscd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "sscd/csv.hpp"
#include "sscd/error.hpp"

namespace sscd {

CloneType parse_clone_type(std::string_view name) {
    if (name == "T1") return CloneType::T1;
    if (name == "T2") return CloneType::T2;
    if (name == "VST3") return CloneType::VST3;
    if (name == "ST3") return CloneType::ST3;
    if (name == "MT3") return CloneType::MT3;
    if (name == "WT3T4" || name == "WT3/T4" || name == "WT3-T4") return CloneType::WT3T4;
    throw InputError("unknown clone type: " + std::string(name));
}

std::string_view to_string(CloneType type) {
    switch (type) {
        case CloneType::T1:
            return "T1";
        case CloneType::T2:
            return "T2";
        case CloneType::VST3:
            return "VST3";
        case CloneType::ST3:
            return "ST3";
        case CloneType::MT3:
            return "MT3";
        case CloneType::WT3T4:
            return "WT3T4";
    }
    return "?";
}

double coverage(const LineRange& truth, const LineRange& detected) {
    if (truth.file != detected.file || truth.end_line < truth.start_line) return 0.0;
    const std::size_t lo = std::max(truth.start_line, detected.start_line);
    const std::size_t hi = std::min(truth.end_line, detected.end_line);
    if (hi < lo) return 0.0;
    return static_cast<double>(hi - lo + 1) / static_cast<double>(truth.end_line - truth.start_line + 1);
}

bool match_overlap(const DetectedPair& detected, const GroundTruthPair& truth, double threshold) {
    // A tiny slack keeps ratios like 7/10 on the accepting side of 0.7.
    auto covers = [&](const LineRange& t, const LineRange& d) { return coverage(t, d) + 1e-9 >= threshold; };
    return (covers(truth.a, detected.a) && covers(truth.b, detected.b)) ||
           (covers(truth.a, detected.b) && covers(truth.b, detected.a));
}

namespace {
std::string file_pair_key(const std::string& x, const std::string& y) {
    return x < y ? x + '\0' + y : y + '\0' + x;
}
}  // namespace

TruthMatcher::TruthMatcher(std::span<const GroundTruthPair> truth, double threshold)
    : truth_(truth), threshold_(threshold) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
        by_files_[file_pair_key(truth[i].a.file, truth[i].b.file)].push_back(i);
        by_file_[truth[i].a.file].push_back(&truth[i].a);
        by_file_[truth[i].b.file].push_back(&truth[i].b);
    }
}

bool TruthMatcher::matches(const DetectedPair& detected) const {
    auto it = by_files_.find(file_pair_key(detected.a.file, detected.b.file));
    if (it == by_files_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](std::size_t t) { return match_overlap(detected, truth_[t], threshold_); });
}

bool TruthMatcher::has_known_clone(const LineRange& fragment) const {
    auto it = by_file_.find(fragment.file);
    if (it == by_file_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const LineRange* side) { return coverage(*side, fragment) + 1e-9 >= threshold_; });
}

std::vector<bool> matched_truth(std::span<const DetectedPair> detected, std::span<const GroundTruthPair> truth,
                                double threshold) {
    // Only pairs over the same (unordered) file pair can match.
    auto key = file_pair_key;
    std::unordered_map<std::string, std::vector<std::size_t>> by_files;
    for (std::size_t i = 0; i < detected.size(); ++i) by_files[key(detected[i].a.file, detected[i].b.file)].push_back(i);

    std::vector<bool> matched(truth.size(), false);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        auto it = by_files.find(key(truth[t].a.file, truth[t].b.file));
        if (it == by_files.end()) continue;
        for (std::size_t d : it->second) {
            if (match_overlap(detected[d], truth[t], threshold)) {
                matched[t] = true;
                break;
            }
        }
    }
    return matched;
}

double recall(std::span<const DetectedPair> detected, std::span<const GroundTruthPair> truth, double threshold) {
    if (truth.empty()) throw std::invalid_argument("recall is undefined without ground truth");
    auto matched = matched_truth(detected, truth, threshold);
    return static_cast<double>(std::count(matched.begin(), matched.end(), true)) / static_cast<double>(truth.size());
}

std::map<CloneType, double> recall_by_type(std::span<const DetectedPair> detected,
                                           std::span<const GroundTruthPair> truth, double threshold) {
    auto matched = matched_truth(detected, truth, threshold);
    std::map<CloneType, std::pair<std::size_t, std::size_t>> tally;  // found, total
    for (std::size_t t = 0; t < truth.size(); ++t) {
        auto& [found, total] = tally[truth[t].type];
        ++total;
        if (matched[t]) ++found;
    }
    std::map<CloneType, double> out;
    for (const auto& [type, counts] : tally) {
        out[type] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    return out;
}

CloneType classify_type_band(double s) {
    if (s >= 0.9) return CloneType::VST3;
    if (s >= 0.7) return CloneType::ST3;
    if (s >= 0.5) return CloneType::MT3;
    return CloneType::WT3T4;
}

SampledPrecision precision_from_sample(const ReviewTable& review) {
    if (review.agreed() == 0) throw std::invalid_argument("strict precision needs at least one agreed case");
    const auto total = static_cast<double>(review.total());
    const auto clones = static_cast<double>(review.both_clone);
    return {100.0 * clones / static_cast<double>(review.agreed()),
            100.0 * (clones + static_cast<double>(review.disagreed())) / total, 100.0 * clones / total};
}

double f_score(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double mrr(std::span<const std::vector<bool>> relevance_per_query) {
    if (relevance_per_query.empty()) throw std::invalid_argument("MRR needs at least one query");
    double sum = 0.0;
    for (const auto& marks : relevance_per_query) {
        auto first = std::find(marks.begin(), marks.end(), true);
        if (first != marks.end()) sum += 1.0 / static_cast<double>(first - marks.begin() + 1);
    }
    return sum / static_cast<double>(relevance_per_query.size());
}

double observed_agreement(const ReviewTable& review) {
    if (review.total() == 0) throw std::invalid_argument("empty review table");
    return static_cast<double>(review.agreed()) / static_cast<double>(review.total());
}

double cohen_kappa(const ReviewTable& review) {
    const double n = static_cast<double>(review.total());
    if (n == 0.0) throw std::invalid_argument("empty review table");
    const double po = observed_agreement(review);
    const double r1_clone = static_cast<double>(review.both_clone + review.r1_clone_r2_non) / n;
    const double r2_clone = static_cast<double>(review.both_clone + review.r1_non_r2_clone) / n;
    const double pe = r1_clone * r2_clone + (1.0 - r1_clone) * (1.0 - r2_clone);
    if (pe >= 1.0) throw std::invalid_argument("kappa undefined: chance agreement is 1");
    return (po - pe) / (1.0 - pe);
}

std::vector<GroundTruthPair> load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open ground truth " + path.string());
    const std::string source = path.string();
    std::vector<GroundTruthPair> truth;
    std::string line;
    std::size_t line_no = 0;
    auto number = [&](const std::string& field) {
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != field.size() || v < 1) throw ParseError(source, line_no, "bad line number \"" + field + "\"");
        return static_cast<std::size_t>(v);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (line_no == 1 && line.starts_with("file_a")) continue;
        std::vector<std::string> f;
        try {
            f = csv::split(line);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (f.size() != 7) throw ParseError(source, line_no, "expected 7 columns, got " + std::to_string(f.size()));
        GroundTruthPair pair;
        pair.a = {f[0], number(f[1]), number(f[2])};
        pair.b = {f[3], number(f[4]), number(f[5])};
        if (pair.a.start_line > pair.a.end_line || pair.b.start_line > pair.b.end_line) {
            throw ParseError(source, line_no, "start line after end line");
        }
        try {
            pair.type = parse_clone_type(f[6]);
        } catch (const InputError& e) {
            throw ParseError(source, line_no, e.what());
        }
        truth.push_back(std::move(pair));
    }
    return truth;
}

void save_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthPair> truth) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << "file_a,start_a,end_a,file_b,start_b,end_b,type\n";
    for (const auto& t : truth) {
        out << csv::escape(t.a.file) << ',' << t.a.start_line << ',' << t.a.end_line << ',' << csv::escape(t.b.file)
            << ',' << t.b.start_line << ',' << t.b.end_line << ',' << to_string(t.type) << '\n';
    }
    if (!out) throw InputError("write failure on " + path.string());
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["truth_pairs"] = report.truth_pairs;
    j["detected_pairs"] = report.detected_pairs;
    j["recall_overall"] = report.recall_overall;
    nlohmann::ordered_json by_type = nlohmann::ordered_json::object();
    for (const auto& [type, value] : report.recall_by_type) by_type[std::string(to_string(type))] = value;
    j["recall_by_type"] = by_type;
    if (report.precision) {
        j["precision_strict"] = report.precision->strict;
        j["precision_optimistic"] = report.precision->optimistic;
        j["precision_pessimistic"] = report.precision->pessimistic;
    }
    if (report.f_score) j["f_score"] = *report.f_score;
    if (report.mrr) j["mrr"] = *report.mrr;
    if (report.kappa) j["kappa"] = *report.kappa;
    if (report.timing) j["timing"] = nlohmann::ordered_json::parse(timing_to_json(*report.timing));
    return j.dump(2);
}

std::string to_table(const EvalReport& report) {
    std::ostringstream out;
    char buf[128];
    auto row = [&](const std::string& label, const std::string& value) {
        std::snprintf(buf, sizeof buf, "%-24s %s\n", label.c_str(), value.c_str());
        out << buf;
    };
    auto pct = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f%%", v);
        return std::string(b);
    };
    row("truth pairs", std::to_string(report.truth_pairs));
    row("detected pairs", std::to_string(report.detected_pairs));
    row("recall (overall)", pct(report.recall_overall));
    for (const auto& [type, value] : report.recall_by_type) row("recall " + std::string(to_string(type)), pct(value));
    if (report.precision) {
        row("precision (strict)", pct(report.precision->strict));
        row("precision (optimistic)", pct(report.precision->optimistic));
        row("precision (pessimistic)", pct(report.precision->pessimistic));
    }
    if (report.f_score) row("F-score", pct(*report.f_score));
    if (report.mrr) {
        std::snprintf(buf, sizeof buf, "%.4f", *report.mrr);
        row("MRR", buf);
    }
    if (report.kappa) {
        std::snprintf(buf, sizeof buf, "%.4f", *report.kappa);
        row("Cohen kappa", buf);
    }
    return out.str();
}

}  // namespace sscd

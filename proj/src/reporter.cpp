#include "sscd/reporter.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "sscd/csv.hpp"
#include "sscd/error.hpp"

namespace sscd {
namespace {

using json = nlohmann::json;

constexpr std::string_view kCsvHeader = "file_a,start_a,end_a,file_b,start_b,end_b,similarity";

std::size_t parse_line_number(const std::string& field, const std::string& source, std::size_t line_no) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(field, &used);
        if (used != field.size() || v < 0) throw std::invalid_argument(field);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ParseError(source, line_no, "expected a line number, got \"" + field + "\"");
    }
}

double parse_double(const std::string& field, const std::string& source, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, line_no, "expected a number, got \"" + field + "\"");
    }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<ClonePair> collect_pairs(std::span<const std::vector<CloneCandidate>> per_query_lists,
                                     std::size_t top_n, double floor) {
    std::map<std::pair<FragmentId, FragmentId>, ClonePair> pairs;
    for (const auto& list : per_query_lists) {
        for (const CloneCandidate& c : list) {
            if (c.rank > top_n || c.similarity < floor || c.query_id == c.hit_id) continue;
            const bool query_is_a = c.query_id < c.hit_id;
            const FragmentId a = query_is_a ? c.query_id : c.hit_id;
            const FragmentId b = query_is_a ? c.hit_id : c.query_id;
            auto [it, inserted] = pairs.try_emplace({a, b}, ClonePair{a, b, c.similarity, 0});
            if (!inserted) it->second.similarity = std::max(it->second.similarity, c.similarity);
            it->second.provenance |= query_is_a ? Provenance::from_a : Provenance::from_b;
        }
    }
    std::vector<ClonePair> out;
    out.reserve(pairs.size());
    for (auto& [key, pair] : pairs) out.push_back(pair);
    return out;
}

std::vector<ClonePair> merge_rank(std::vector<ClonePair> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const ClonePair& x, const ClonePair& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        if (x.a_id != y.a_id) return x.a_id < y.a_id;
        return x.b_id < y.b_id;
    });
    return pairs;
}

std::string format_similarity(double similarity) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", similarity);
    return buf;
}

void write_report(const std::filesystem::path& path, std::span<const ClonePair> pairs,
                  std::span<const CodeFragment> fragments, ReportFormat format) {
    std::unordered_map<FragmentId, const CodeFragment*> by_id;
    for (const CodeFragment& f : fragments) by_id.emplace(f.id, &f);
    auto lookup = [&](FragmentId id) -> const CodeFragment& {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::runtime_error("report references unknown fragment " + std::to_string(id));
        return *it->second;
    };

    std::ofstream out = open_for_write(path);
    if (format == ReportFormat::csv) {
        out << kCsvHeader << '\n';
        for (const ClonePair& p : pairs) {
            const CodeFragment& a = lookup(p.a_id);
            const CodeFragment& b = lookup(p.b_id);
            out << csv::escape(a.file) << ',' << a.start_line << ',' << a.end_line << ',' << csv::escape(b.file)
                << ',' << b.start_line << ',' << b.end_line << ',' << format_similarity(p.similarity) << '\n';
        }
    } else {
        for (const ClonePair& p : pairs) {
            const CodeFragment& a = lookup(p.a_id);
            const CodeFragment& b = lookup(p.b_id);
            json provenance = json::array();
            if (p.provenance & Provenance::from_a) provenance.push_back("a->b");
            if (p.provenance & Provenance::from_b) provenance.push_back("b->a");
            nlohmann::ordered_json row = {{"a_id", p.a_id},          {"b_id", p.b_id},
                                          {"similarity", p.similarity}, {"provenance", provenance},
                                          {"file_a", a.file},        {"start_a", a.start_line},
                                          {"end_a", a.end_line},     {"file_b", b.file},
                                          {"start_b", b.start_line}, {"end_b", b.end_line}};
            out << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        }
    }
    out.flush();
    if (!out) throw InputError("write failure on " + path.string());
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open report " + path.string());
    const std::string source = path.string();
    std::vector<ReportRow> rows;
    std::string line;
    std::size_t line_no = 0;
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
        ReportRow row;
        row.a = {f[0], parse_line_number(f[1], source, line_no), parse_line_number(f[2], source, line_no)};
        row.b = {f[3], parse_line_number(f[4], source, line_no), parse_line_number(f[5], source, line_no)};
        row.pair.similarity = parse_double(f[6], source, line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ReportRow> read_report_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open report " + path.string());
    const std::string source = path.string();
    std::vector<ReportRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            ReportRow row;
            row.pair.a_id = j.at("a_id").get<FragmentId>();
            row.pair.b_id = j.at("b_id").get<FragmentId>();
            row.pair.similarity = j.at("similarity").get<double>();
            for (const auto& p : j.at("provenance")) {
                auto s = p.get<std::string>();
                if (s == "a->b") row.pair.provenance |= Provenance::from_a;
                else if (s == "b->a") row.pair.provenance |= Provenance::from_b;
                else throw ParseError(source, line_no, "unknown provenance \"" + s + "\"");
            }
            row.a = {j.at("file_a").get<std::string>(), j.at("start_a").get<std::size_t>(), j.at("end_a").get<std::size_t>()};
            row.b = {j.at("file_b").get<std::string>(), j.at("start_b").get<std::size_t>(), j.at("end_b").get<std::size_t>()};
            rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    return rows;
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".json") ? read_report_jsonl(path) : read_report_csv(path);
}

void write_candidates(const std::filesystem::path& path, std::span<const FragmentId> query_ids,
                      std::span<const std::vector<CloneCandidate>> lists) {
    if (query_ids.size() != lists.size()) throw std::invalid_argument("write_candidates: ids and lists differ in length");
    std::ofstream out = open_for_write(path);
    for (std::size_t q = 0; q < lists.size(); ++q) {
        json hits = json::array();
        for (const CloneCandidate& c : lists[q]) {
            hits.push_back({{"id", c.hit_id}, {"similarity", c.similarity}, {"rank", c.rank}});
        }
        nlohmann::ordered_json row = {{"query", query_ids[q]}, {"hits", std::move(hits)}};
        out << row.dump() << '\n';
    }
    out.flush();
    if (!out) throw InputError("write failure on " + path.string());
}

std::vector<QueryResult> read_candidates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open candidates " + path.string());
    std::vector<QueryResult> lists;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            auto query = j.at("query").get<FragmentId>();
            std::vector<CloneCandidate> list;
            for (const auto& h : j.at("hits")) {
                list.push_back({query, h.at("id").get<FragmentId>(), h.at("similarity").get<double>(),
                                h.at("rank").get<std::size_t>()});
            }
            lists.push_back({query, std::move(list)});
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return lists;
}

}  // namespace sscd

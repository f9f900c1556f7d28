#include "sscd/extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sscd/error.hpp"
#include "sscd/lexer.hpp"
#include "sscd/parallel.hpp"

namespace sscd {
namespace {

using json = nlohmann::json;

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '_' || c == '$' || c == ':' || c == '~' || u >= 0x80;
}

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '_' || c == '$' || u >= 0x80;
}

bool is_blank(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
    return s;
}

bool is_control_word(std::string_view w) {
    static const std::set<std::string_view> kWords = {
        "if",     "for",    "while",    "switch",        "catch",  "return", "sizeof",
        "alignof", "decltype", "new",   "delete",        "do",     "else",   "typeid",
        "static_assert", "synchronized", "alignas", "__attribute__", "throw", "noexcept"};
    return kWords.contains(w);
}

struct ParenGroup {
    std::size_t open;
    std::size_t close;
};

enum class BlockKind { function, container, brace_member, other };

struct HeaderInfo {
    BlockKind kind = BlockKind::container;
    std::string name;
};

// Position of the first top-level '=' that is an assignment or initializer
// (not a comparison and not part of an operator=... name).
std::optional<std::size_t> top_level_assignment(std::string_view h) {
    int depth = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        char c = h[i];
        if (c == '(' || c == '[') {
            ++depth;
        } else if (c == ')' || c == ']') {
            --depth;
        } else if (c == '=' && depth == 0) {
            char prev = i > 0 ? h[i - 1] : ' ';
            char next = i + 1 < h.size() ? h[i + 1] : ' ';
            if (next == '=' || prev == '=' || prev == '!' || prev == '<' || prev == '>') continue;
            std::size_t j = i;
            while (j > 0 && std::string_view("=<>!+-*/%&|^").find(h[j - 1]) != std::string_view::npos) --j;
            while (j > 0 && is_blank(h[j - 1])) --j;
            if (j >= 8 && h.substr(j - 8, 8) == "operator") continue;
            return i;
        }
    }
    return std::nullopt;
}

std::vector<ParenGroup> top_level_groups(std::string_view h) {
    std::vector<ParenGroup> groups;
    int depth = 0;
    std::size_t open = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] == '(') {
            if (depth == 0) open = i;
            ++depth;
        } else if (h[i] == ')' && depth > 0) {
            --depth;
            if (depth == 0) groups.push_back({open, i});
        }
    }
    return groups;
}

std::string name_before(std::string_view h, std::size_t open) {
    std::size_t end = open;
    while (end > 0 && is_blank(h[end - 1])) --end;
    std::size_t begin = end;
    while (begin > 0 && is_name_char(h[begin - 1])) --begin;
    if (begin == end) {
        // operator(), operator+ and friends
        std::size_t sym = end;
        while (sym > 0 && std::string_view("=<>!+-*/%&|^[]()~,").find(h[sym - 1]) != std::string_view::npos) --sym;
        std::size_t kw = sym;
        while (kw > 0 && is_blank(h[kw - 1])) --kw;
        if (kw >= 8 && h.substr(kw - 8, 8) == "operator") {
            return std::string(h.substr(kw - 8, end - (kw - 8)));
        }
        return {};
    }
    return std::string(h.substr(begin, end - begin));
}

// Everything that may legally sit between a parameter list and the body.
enum class TrailerVerdict { accept, reject, brace_member };

TrailerVerdict classify_trailer(std::string_view trailer) {
    std::string_view t = trim(trailer);
    if (t.empty()) return TrailerVerdict::accept;
    if (t.front() == ':' && (t.size() == 1 || t[1] != ':')) {
        char last = t.back();
        return (last == ')' || last == '}') ? TrailerVerdict::accept : TrailerVerdict::brace_member;
    }
    if (t.starts_with("->")) return TrailerVerdict::accept;

    static const std::set<std::string_view> kQualifiers = {
        "const", "volatile", "noexcept", "override", "final", "mutable", "try", "throw",
        "__attribute__", "alignas", "transaction_safe"};
    std::string_view prev_word;
    std::size_t i = 0;
    while (i < t.size()) {
        char c = t[i];
        if (is_blank(c) || c == '&') {
            ++i;
            continue;
        }
        if (is_ident_char(c)) {
            std::size_t j = i;
            while (j < t.size() && is_ident_char(t[j])) ++j;
            std::string_view word = t.substr(i, j - i);
            if (word == "throws" || word == "requires") return TrailerVerdict::accept;
            if (!kQualifiers.contains(word)) return TrailerVerdict::reject;
            prev_word = word;
            i = j;
            continue;
        }
        if (c == '(' && (prev_word == "noexcept" || prev_word == "throw" ||
                         prev_word == "__attribute__" || prev_word == "alignas")) {
            int depth = 0;
            for (; i < t.size(); ++i) {
                if (t[i] == '(') ++depth;
                if (t[i] == ')' && --depth == 0) break;
            }
            ++i;
            prev_word = {};
            continue;
        }
        if (c == '[' && t.substr(i, 2) == "[[") {
            std::size_t close = t.find("]]", i);
            if (close == std::string_view::npos) return TrailerVerdict::reject;
            i = close + 2;
            continue;
        }
        return TrailerVerdict::reject;
    }
    return TrailerVerdict::accept;
}

HeaderInfo classify_header(std::string_view header) {
    std::string_view h = trim(header);
    if (h.empty()) return {BlockKind::container, {}};
    auto assignment = top_level_assignment(h);
    for (const ParenGroup& g : top_level_groups(h)) {
        std::string name = name_before(h, g.open);
        if (name.empty()) continue;
        std::string_view bare = name;
        if (auto colon = bare.rfind(':'); colon != std::string_view::npos) bare.remove_prefix(colon + 1);
        if (is_control_word(bare)) continue;
        if (assignment && *assignment < g.open) return {BlockKind::other, {}};
        switch (classify_trailer(h.substr(g.close + 1))) {
            case TrailerVerdict::accept:
                return {BlockKind::function, std::move(name)};
            case TrailerVerdict::brace_member:
                return {BlockKind::brace_member, {}};
            case TrailerVerdict::reject:
                break;
        }
    }
    if (assignment) return {BlockKind::other, {}};
    return {BlockKind::container, {}};
}

std::size_t matching_brace(std::string_view masked, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < masked.size(); ++i) {
        if (masked[i] == '{') {
            ++depth;
        } else if (masked[i] == '}' && --depth == 0) {
            return i;
        }
    }
    return std::string_view::npos;
}

// Skips leading whitespace and access-specifier labels ("public:").
std::size_t signature_start(std::string_view masked, std::size_t from, std::size_t to) {
    static constexpr std::array<std::string_view, 5> kLabels = {"public", "private", "protected",
                                                                "signals", "slots"};
    std::size_t pos = from;
    for (;;) {
        while (pos < to && is_blank(masked[pos])) ++pos;
        bool skipped = false;
        for (std::string_view label : kLabels) {
            if (masked.substr(pos, label.size()) != label) continue;
            std::size_t j = pos + label.size();
            while (j < to && is_blank(masked[j])) ++j;
            if (j < to && masked[j] == ':' && (j + 1 >= to || masked[j + 1] != ':')) {
                pos = j + 1;
                skipped = true;
                break;
            }
        }
        if (!skipped) return pos;
    }
}

Language lexing_language(Language lang) {
    return lang == Language::manifest ? Language::cpp : lang;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read failure on " + path.string());
    return buffer.str();
}

void finish_fragment(CodeFragment& f, const ExtractionConfig& cfg, const WarningSink& warn) {
    Language lex = lexing_language(cfg.language);
    f.loc = count_loc(f.text);
    if (cfg.strip_comments) f.text = strip_comments(f.text, lex, warn);
    f.tokens = tokenize(f.text, cfg.tokenizer_mode, lex);
}

}  // namespace

std::vector<FunctionSpan> find_functions(std::string_view text, Language lang) {
    const std::string masked = mask_non_code(text, lexing_language(lang));
    std::vector<FunctionSpan> spans;
    std::size_t boundary = 0;
    std::size_t i = 0;
    while (i < masked.size()) {
        char c = masked[i];
        if (c == ';' || c == '}') {
            boundary = i + 1;
            ++i;
            continue;
        }
        if (c != '{') {
            ++i;
            continue;
        }
        HeaderInfo info = classify_header(std::string_view(masked).substr(boundary, i - boundary));
        if (info.kind == BlockKind::container) {
            boundary = i + 1;
            ++i;
            continue;
        }
        std::size_t close = matching_brace(masked, i);
        if (close == std::string_view::npos) break;
        if (info.kind == BlockKind::function) {
            std::size_t start = signature_start(masked, boundary, i);
            spans.push_back({start, close + 1, std::move(info.name)});
        }
        i = close + 1;
        if (info.kind != BlockKind::brace_member) boundary = i;
    }
    return spans;
}

std::vector<CodeFragment> extract_from_source(std::string_view text, const std::string& file,
                                              const ExtractionConfig& cfg, const WarningSink& warn) {
    std::vector<std::size_t> line_starts = {0};
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') line_starts.push_back(i + 1);
    }
    auto line_of = [&](std::size_t offset) {
        auto it = std::upper_bound(line_starts.begin(), line_starts.end(), offset);
        return static_cast<std::size_t>(it - line_starts.begin());
    };

    std::vector<CodeFragment> fragments;
    for (FunctionSpan& span : find_functions(text, cfg.language)) {
        CodeFragment f;
        f.file = file;
        f.start_line = line_of(span.begin);
        f.end_line = line_of(span.end - 1);
        f.name = std::move(span.name);
        f.text = std::string(text.substr(span.begin, span.end - span.begin));
        finish_fragment(f, cfg, [&](std::string_view msg) {
            if (warn) warn(file + ":" + std::to_string(f.start_line) + ": " + std::string(msg));
        });
        fragments.push_back(std::move(f));
    }
    return fragments;
}

bool has_source_extension(const std::filesystem::path& path, Language lang) {
    static const std::set<std::string> kC = {".c", ".h"};
    static const std::set<std::string> kCpp = {".c",  ".h",   ".cc", ".cpp", ".cxx", ".c++",
                                               ".hh", ".hpp", ".hxx", ".h++", ".ipp", ".inl"};
    static const std::set<std::string> kJava = {".java"};
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    switch (lang) {
        case Language::c:
            return kC.contains(ext);
        case Language::cpp:
            return kCpp.contains(ext);
        case Language::java:
            return kJava.contains(ext);
        case Language::manifest:
            return false;
    }
    return false;
}

std::vector<CodeFragment> extract_fragments(const std::filesystem::path& root,
                                            const ExtractionConfig& cfg, const WarningSink& warn,
                                            unsigned threads) {
    if (cfg.language == Language::manifest) return load_manifest(root, cfg);

    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw InputError("source root is not a readable directory: " + root.string());
    }
    std::vector<fs::path> files;
    auto options = fs::directory_options::skip_permission_denied;
    for (auto it = fs::recursive_directory_iterator(root, options, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            if (warn) warn("directory walk: " + ec.message());
            ec.clear();
            continue;
        }
        if (it->is_regular_file(ec) && has_source_extension(it->path(), cfg.language)) {
            files.push_back(it->path());
        }
    }
    std::vector<std::string> relative(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        relative[i] = files[i].lexically_relative(root).generic_string();
    }
    std::vector<std::size_t> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return relative[a] < relative[b]; });

    std::vector<std::vector<CodeFragment>> per_file(files.size());
    std::vector<std::vector<std::string>> per_file_warnings(files.size());
    parallel_for(order.size(), threads, [&](std::size_t k) {
        std::size_t idx = order[k];
        auto& notes = per_file_warnings[k];
        try {
            std::string text = sanitize_utf8(read_file(files[idx]));
            per_file[k] = extract_from_source(text, relative[idx], cfg,
                                              [&](std::string_view msg) { notes.emplace_back(msg); });
        } catch (const std::exception& e) {
            notes.push_back(std::string("skipping file: ") + e.what());
        }
    });

    std::vector<CodeFragment> fragments;
    for (std::size_t k = 0; k < per_file.size(); ++k) {
        if (warn) {
            for (const auto& note : per_file_warnings[k]) warn(note);
        }
        for (CodeFragment& f : per_file[k]) {
            if (f.loc >= cfg.min_loc) fragments.push_back(std::move(f));
        }
    }
    std::stable_sort(fragments.begin(), fragments.end(), [](const CodeFragment& a, const CodeFragment& b) {
        return a.file != b.file ? a.file < b.file : a.start_line < b.start_line;
    });
    for (std::size_t i = 0; i < fragments.size(); ++i) fragments[i].id = i;
    return fragments;
}

std::vector<CodeFragment> load_manifest(const std::filesystem::path& path, const ExtractionConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    const std::string source = path.string();

    std::vector<CodeFragment> fragments;
    std::set<std::pair<std::string, std::size_t>> seen;
    std::set<FragmentId> seen_ids;
    bool explicit_ids = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) throw ParseError(source, line_no, "record is not an object");
        auto require = [&](const char* key, json::value_t type) -> const json& {
            auto it = record.find(key);
            if (it == record.end()) throw ParseError(source, line_no, std::string("missing \"") + key + "\"");
            bool ok = type == json::value_t::number_unsigned ? it->is_number_integer() && it->get<long long>() >= 0
                                                             : it->type() == type;
            if (!ok) throw ParseError(source, line_no, std::string("wrong type for \"") + key + "\"");
            return *it;
        };
        CodeFragment f;
        f.file = require("file", json::value_t::string).get<std::string>();
        f.start_line = require("start_line", json::value_t::number_unsigned).get<std::size_t>();
        f.end_line = require("end_line", json::value_t::number_unsigned).get<std::size_t>();
        f.text = require("text", json::value_t::string).get<std::string>();
        if (auto it = record.find("name"); it != record.end() && it->is_string()) f.name = it->get<std::string>();
        if (f.start_line == 0 || f.start_line > f.end_line) {
            throw ParseError(source, line_no, "invalid line range");
        }
        if (f.text.empty()) throw ParseError(source, line_no, "empty text");
        if (!seen.emplace(f.file, f.start_line).second) {
            throw ParseError(source, line_no, "duplicate fragment " + f.file + ":" + std::to_string(f.start_line));
        }
        if (auto it = record.find("id"); it != record.end()) {
            if (!it->is_number_unsigned()) throw ParseError(source, line_no, "wrong type for \"id\"");
            f.id = it->get<FragmentId>();
            if (!seen_ids.insert(f.id).second) throw ParseError(source, line_no, "duplicate id");
            explicit_ids = true;
        } else if (explicit_ids) {
            throw ParseError(source, line_no, "missing \"id\" (earlier records carry ids)");
        }
        f.text = sanitize_utf8(f.text);
        finish_fragment(f, cfg, {});
        if (f.loc >= cfg.min_loc) fragments.push_back(std::move(f));
    }
    if (!explicit_ids) {
        for (std::size_t i = 0; i < fragments.size(); ++i) fragments[i].id = i;
    }
    return fragments;
}

void save_fragments(const std::filesystem::path& path, const std::vector<CodeFragment>& fragments) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    for (const CodeFragment& f : fragments) {
        json record = {{"id", f.id},
                       {"file", f.file},
                       {"start_line", f.start_line},
                       {"end_line", f.end_line},
                       {"name", f.name.empty() ? json(nullptr) : json(f.name)},
                       {"text", f.text},
                       {"loc", f.loc}};
        out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    if (!out) throw InputError("write failure on " + path.string());
}

}  // namespace sscd

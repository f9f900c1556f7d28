#include "sscd/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_set>

namespace sscd {
namespace {

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '$' || c >= 0x80;
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of an encoding prefix (L, u, U, u8, R, LR, uR, UR, u8R) ending right
// before `quote`, or 0 when the quote is not prefixed.
std::size_t literal_prefix_length(std::string_view text, std::size_t quote, std::size_t floor) {
    static constexpr std::array<std::string_view, 9> kPrefixes = {"u8R", "LR", "uR", "UR", "u8",
                                                                  "L",   "u",  "U",  "R"};
    for (std::string_view p : kPrefixes) {
        if (quote < floor + p.size()) continue;
        std::size_t start = quote - p.size();
        if (text.substr(start, p.size()) != p) continue;
        if (start > floor && is_ident_char(static_cast<unsigned char>(text[start - 1]))) continue;
        return p.size();
    }
    return 0;
}

// End of a quoted literal starting at `open` (the quote character). Ordinary
// literals stop at an unescaped newline, matching the compilers' recovery.
std::size_t quoted_literal_end(std::string_view text, std::size_t open, char quote) {
    std::size_t j = open + 1;
    while (j < text.size()) {
        char c = text[j];
        if (c == '\\') {
            j += 2;
        } else if (c == quote) {
            return j + 1;
        } else if (c == '\n') {
            return j;
        } else {
            ++j;
        }
    }
    return text.size();
}

std::size_t raw_string_end(std::string_view text, std::size_t open) {
    std::size_t paren = open + 1;
    while (paren < text.size() && paren - open <= 17 && text[paren] != '(' &&
           !is_space(static_cast<unsigned char>(text[paren])) && text[paren] != '"') {
        ++paren;
    }
    if (paren >= text.size() || text[paren] != '(') {
        return quoted_literal_end(text, open, '"');
    }
    std::string closing = ")";
    closing.append(text.substr(open + 1, paren - open - 1));
    closing.push_back('"');
    std::size_t pos = text.find(closing, paren + 1);
    return pos == std::string_view::npos ? text.size() : pos + closing.size();
}

// True when the apostrophe at `pos` is a C++14 / C23 digit separator.
bool is_digit_separator(std::string_view text, std::size_t pos, std::size_t floor) {
    std::size_t j = pos;
    while (j > floor) {
        unsigned char c = static_cast<unsigned char>(text[j - 1]);
        if (std::isalnum(c) == 0 && c != '_' && c != '.' && c != '\'') break;
        --j;
    }
    if (j == pos) return false;
    return std::isdigit(static_cast<unsigned char>(text[j])) != 0 && pos + 1 < text.size() &&
           std::isxdigit(static_cast<unsigned char>(text[pos + 1])) != 0;
}

const std::unordered_set<std::string_view>& keyword_set() {
    static const std::unordered_set<std::string_view> kKeywords = {
        // C
        "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
        "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
        "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch",
        "typedef", "union", "unsigned", "void", "volatile", "while", "_Bool", "bool",
        // C++
        "alignas", "alignof", "catch", "class", "constexpr", "consteval", "constinit",
        "const_cast", "decltype", "delete", "dynamic_cast", "explicit", "export", "friend",
        "mutable", "namespace", "new", "noexcept", "nullptr", "operator", "private",
        "protected", "public", "reinterpret_cast", "static_assert", "static_cast", "template",
        "this", "throw", "try", "typeid", "typename", "using", "virtual", "wchar_t", "override",
        "final", "co_await", "co_return", "co_yield", "concept", "requires", "true", "false",
        // Java
        "abstract", "assert", "boolean", "byte", "extends", "finally", "implements", "import",
        "instanceof", "interface", "native", "package", "strictfp", "super", "synchronized",
        "throws", "transient", "var", "null", "String"};
    return kKeywords;
}

constexpr std::array<std::string_view, 38> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "->*", "...", "<=>", "::", "->", "++", "--", "<<", ">>",
    "<=",   ">=",  "==",  "!=",  "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",   ".*",  "##",  "+",   "-",   "*",   "/",   "%",  "<",  ">",  "=",  "!"};

void lex_code(std::string_view code, TokenizerMode mode, std::vector<std::string>& out) {
    std::size_t i = 0;
    const std::size_t n = code.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(code[i]);
        if (is_space(c)) {
            ++i;
            continue;
        }
        bool starts_number =
            std::isdigit(c) != 0 ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(code[i + 1])) != 0);
        if (starts_number) {
            std::size_t j = i + 1;
            while (j < n) {
                unsigned char d = static_cast<unsigned char>(code[j]);
                if (std::isalnum(d) != 0 || d == '_' || d == '.' || d == '\'') {
                    ++j;
                } else if ((d == '+' || d == '-') &&
                           (code[j - 1] == 'e' || code[j - 1] == 'E' || code[j - 1] == 'p' ||
                            code[j - 1] == 'P')) {
                    ++j;
                } else {
                    break;
                }
            }
            out.emplace_back(mode == TokenizerMode::normalized ? std::string("NUM")
                                                                 : std::string(code.substr(i, j - i)));
            i = j;
            continue;
        }
        if (is_ident_char(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_char(static_cast<unsigned char>(code[j]))) ++j;
            std::string_view word = code.substr(i, j - i);
            if (mode == TokenizerMode::normalized && !is_keyword(word)) {
                out.emplace_back("ID");
            } else {
                out.emplace_back(word);
            }
            i = j;
            continue;
        }
        std::size_t len = 1;
        for (std::string_view op : kOperators) {
            if (code.substr(i, op.size()) == op) {
                len = op.size();
                break;
            }
        }
        out.emplace_back(code.substr(i, len));
        i += len;
    }
}

}  // namespace

std::vector<Segment> scan_segments(std::string_view text, Language lang, bool* unterminated_comment) {
    std::vector<Segment> segments;
    std::size_t code_start = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto emit = [&](SegmentKind kind, std::size_t begin, std::size_t end) {
        if (begin > code_start) segments.push_back({SegmentKind::code, code_start, begin});
        segments.push_back({kind, begin, end});
        code_start = end;
        i = end;
    };
    if (unterminated_comment != nullptr) *unterminated_comment = false;

    while (i < n) {
        char c = text[i];
        char next = i + 1 < n ? text[i + 1] : '\0';
        if (c == '/' && next == '/') {
            std::size_t end = text.find('\n', i);
            emit(SegmentKind::line_comment, i, end == std::string_view::npos ? n : end);
        } else if (c == '/' && next == '*') {
            std::size_t close = text.find("*/", i + 2);
            if (close == std::string_view::npos) {
                if (unterminated_comment != nullptr) *unterminated_comment = true;
                emit(SegmentKind::block_comment, i, n);
            } else {
                emit(SegmentKind::block_comment, i, close + 2);
            }
        } else if (c == '"') {
            if (lang == Language::java && text.substr(i, 3) == "\"\"\"") {
                std::size_t close = text.find("\"\"\"", i + 3);
                emit(SegmentKind::string_literal, i, close == std::string_view::npos ? n : close + 3);
                continue;
            }
            std::size_t prefix = lang == Language::java ? 0 : literal_prefix_length(text, i, code_start);
            bool raw = lang == Language::cpp && prefix > 0 && text[i - 1] == 'R';
            std::size_t end = raw ? raw_string_end(text, i) : quoted_literal_end(text, i, '"');
            emit(SegmentKind::string_literal, i - prefix, end);
        } else if (c == '\'') {
            if (lang != Language::java && is_digit_separator(text, i, code_start)) {
                ++i;
                continue;
            }
            std::size_t prefix = lang == Language::java ? 0 : literal_prefix_length(text, i, code_start);
            if (prefix > 0 && text[i - 1] == 'R') prefix = 0;
            emit(SegmentKind::char_literal, i - prefix, quoted_literal_end(text, i, '\''));
        } else {
            ++i;
        }
    }
    if (code_start < n) segments.push_back({SegmentKind::code, code_start, n});
    return segments;
}

std::string strip_comments(std::string_view text, Language lang, const WarningSink& warn) {
    bool unterminated = false;
    auto segments = scan_segments(text, lang, &unterminated);
    if (unterminated && warn) warn("unterminated block comment; stripped to end of text");
    std::string out;
    out.reserve(text.size());
    for (const Segment& s : segments) {
        std::string_view piece = text.substr(s.begin, s.end - s.begin);
        switch (s.kind) {
            case SegmentKind::line_comment:
                break;
            case SegmentKind::block_comment: {
                auto newlines = static_cast<std::size_t>(std::count(piece.begin(), piece.end(), '\n'));
                if (newlines > 0) {
                    out.append(newlines, '\n');
                } else if (!out.empty() && !is_space(static_cast<unsigned char>(out.back())) && s.end < text.size() &&
                           !is_space(static_cast<unsigned char>(text[s.end]))) {
                    // keep "int/*x*/y" two tokens
                    out.push_back(' ');
                }
                break;
            }
            default:
                out.append(piece);
                break;
        }
    }
    return out;
}

std::string mask_non_code(std::string_view text, Language lang) {
    std::string masked(text);
    for (const Segment& s : scan_segments(text, lang)) {
        if (s.kind == SegmentKind::code) continue;
        for (std::size_t i = s.begin; i < s.end; ++i) {
            if (masked[i] != '\n') masked[i] = ' ';
        }
    }
    if (lang == Language::c || lang == Language::cpp) {
        std::size_t line_start = 0;
        bool continuation = false;
        while (line_start < masked.size()) {
            std::size_t line_end = masked.find('\n', line_start);
            if (line_end == std::string::npos) line_end = masked.size();
            std::size_t first = masked.find_first_not_of(" \t\r\f\v", line_start);
            bool directive = continuation || (first < line_end && masked[first] == '#');
            if (directive) {
                std::size_t last = line_end;
                while (last > line_start && is_space(static_cast<unsigned char>(text[last - 1]))) --last;
                continuation = last > line_start && text[last - 1] == '\\';
                std::fill(masked.begin() + static_cast<std::ptrdiff_t>(line_start),
                          masked.begin() + static_cast<std::ptrdiff_t>(line_end), ' ');
            }
            line_start = line_end + 1;
        }
    }
    return masked;
}

std::size_t count_loc(std::string_view text) {
    std::string code = strip_comments(text, Language::cpp);
    std::size_t loc = 0;
    bool has_code = false;
    for (char c : code) {
        if (c == '\n') {
            if (has_code) ++loc;
            has_code = false;
        } else if (!is_space(static_cast<unsigned char>(c))) {
            has_code = true;
        }
    }
    if (has_code) ++loc;
    return loc;
}

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode, Language lang) {
    std::vector<std::string> tokens;
    for (const Segment& s : scan_segments(text, lang)) {
        std::string_view piece = text.substr(s.begin, s.end - s.begin);
        switch (s.kind) {
            case SegmentKind::code:
                lex_code(piece, mode, tokens);
                break;
            case SegmentKind::string_literal:
            case SegmentKind::char_literal:
                tokens.emplace_back(mode == TokenizerMode::normalized ? std::string("STR")
                                                                      : std::string(piece));
                break;
            default:
                break;
        }
    }
    return tokens;
}

bool is_keyword(std::string_view word) { return keyword_set().contains(word); }

std::string sanitize_utf8(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        auto b0 = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        std::uint32_t min_cp = 0;
        if (b0 < 0x80) {
            out.push_back(static_cast<char>(b0));
            ++i;
            continue;
        }
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            min_cp = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            min_cp = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            min_cp = 0x10000;
        }
        bool valid = len > 0 && i + len <= bytes.size();
        std::uint32_t cp = valid ? (b0 & (0x7F >> len)) : 0;
        for (std::size_t k = 1; valid && k < len; ++k) {
            auto b = static_cast<unsigned char>(bytes[i + k]);
            if ((b & 0xC0) != 0x80) {
                valid = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        valid = valid && cp >= min_cp && cp <= 0x10FFFF && (cp < 0xD800 || cp > 0xDFFF);
        if (valid) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

}  // namespace sscd

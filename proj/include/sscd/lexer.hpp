#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sscd/fragment.hpp"

namespace sscd {

// Lexical layer shared by the extractor and the tokenizer. All supported
// languages use C-style comments and quoting; C++ additionally has raw
// string literals.

enum class SegmentKind { code, line_comment, block_comment, string_literal, char_literal };

struct Segment {
    SegmentKind kind;
    std::size_t begin;
    std::size_t end;  // one past the last byte
};

/// Splits `text` into maximal code / comment / literal runs covering every byte.
/// An unterminated block comment runs to the end of the text and sets
/// `*unterminated_comment` when provided.
std::vector<Segment> scan_segments(std::string_view text, Language lang,
                                   bool* unterminated_comment = nullptr);

/// Removes `//` and `/* */` comments. Newlines inside block comments are kept
/// so the line structure of surrounding code is unchanged; a single-line block
/// comment squeezed between two tokens leaves one space behind.
std::string strip_comments(std::string_view text, Language lang = Language::cpp,
                           const WarningSink& warn = {});

/// Replaces comments and literal contents with spaces (newlines kept), and for
/// C/C++ blanks preprocessor directives. The result has the same length and
/// line layout as `text` and contains braces/parentheses only where they are
/// real syntax.
std::string mask_non_code(std::string_view text, Language lang);

/// Number of lines holding at least one character that is neither whitespace
/// nor part of a comment.
std::size_t count_loc(std::string_view text);

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode,
                                  Language lang = Language::cpp);

bool is_keyword(std::string_view word);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

}  // namespace sscd

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sscd {

using FragmentId = std::uint64_t;

enum class Language { c, cpp, java, manifest };
enum class TokenizerMode { raw, normalized };

/// One extracted method-level code fragment.
struct CodeFragment {
    FragmentId id = 0;
    std::string file;
    std::size_t start_line = 0;  // 1-based, inclusive
    std::size_t end_line = 0;    // 1-based, inclusive
    std::string name;
    std::string text;
    std::size_t loc = 0;
    std::vector<std::string> tokens;

    friend bool operator==(const CodeFragment&, const CodeFragment&) = default;
};

struct ExtractionConfig {
    std::size_t min_loc = 6;
    bool strip_comments = true;
    Language language = Language::c;
    TokenizerMode tokenizer_mode = TokenizerMode::normalized;
};

// Receives non-fatal diagnostics (skipped files, unterminated comments, ...).
using WarningSink = std::function<void(std::string_view)>;

Language parse_language(std::string_view name);
std::string_view to_string(Language lang);
TokenizerMode parse_tokenizer_mode(std::string_view name);
std::string_view to_string(TokenizerMode mode);

}  // namespace sscd

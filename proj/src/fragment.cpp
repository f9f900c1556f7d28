#include "sscd/fragment.hpp"

#include "sscd/error.hpp"

namespace sscd {

Language parse_language(std::string_view name) {
    if (name == "c") return Language::c;
    if (name == "cpp" || name == "c++") return Language::cpp;
    if (name == "java") return Language::java;
    if (name == "manifest") return Language::manifest;
    throw InputError("unsupported language: " + std::string(name));
}

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::c:
            return "c";
        case Language::cpp:
            return "cpp";
        case Language::java:
            return "java";
        case Language::manifest:
            return "manifest";
    }
    return "?";
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
    if (name == "raw") return TokenizerMode::raw;
    if (name == "normalized") return TokenizerMode::normalized;
    throw InputError("unknown tokenizer mode: " + std::string(name));
}

std::string_view to_string(TokenizerMode mode) {
    return mode == TokenizerMode::raw ? "raw" : "normalized";
}

}  // namespace sscd

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sscd/fragment.hpp"

namespace sscd {

/// A function definition located in a single source file. Offsets index the
/// original text; `end` is one past the closing brace.
struct FunctionSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string name;
};

/// Brace-balance heuristic: finds every function definition that is not nested
/// inside another function body. Works on C, C++ and Java sources.
std::vector<FunctionSpan> find_functions(std::string_view text, Language lang);

/// Extracts, measures and tokenizes the functions of one in-memory source
/// file. Ids are left at 0 and no LOC filter is applied.
std::vector<CodeFragment> extract_from_source(std::string_view text, const std::string& file,
                                              const ExtractionConfig& cfg,
                                              const WarningSink& warn = {});

/// Walks `root` (or reads a manifest when cfg.language is manifest) and
/// returns the fragments with loc >= cfg.min_loc, ordered by (file,
/// start_line) and numbered densely from 0.
std::vector<CodeFragment> extract_fragments(const std::filesystem::path& root,
                                            const ExtractionConfig& cfg,
                                            const WarningSink& warn = {}, unsigned threads = 1);

/// Reads a JSON-lines fragment manifest. Records may carry "id" and "loc"
/// (the dump format); otherwise ids are assigned densely in record order
/// after the LOC filter.
std::vector<CodeFragment> load_manifest(const std::filesystem::path& path,
                                        const ExtractionConfig& cfg);

/// Writes the extracted-fragments dump (manifest fields plus "id" and "loc").
void save_fragments(const std::filesystem::path& path, const std::vector<CodeFragment>& fragments);

bool has_source_extension(const std::filesystem::path& path, Language lang);

}  // namespace sscd

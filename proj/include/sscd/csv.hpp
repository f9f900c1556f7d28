#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sscd::csv {

/// Splits one RFC 4180 record. Throws std::invalid_argument on an
/// unterminated quoted field.
std::vector<std::string> split(std::string_view line);

/// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace sscd::csv

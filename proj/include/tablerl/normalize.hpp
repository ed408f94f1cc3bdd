#pragma once

#include <string>
#include <string_view>

namespace tablerl {

/// Canonicalizes an answer string for exact-match comparison:
/// lowercase, trimmed, internal whitespace collapsed, one layer of surrounding
/// quotes stripped, numbers canonicalized (commas removed, trailing zeros after
/// the decimal point dropped, "-0" -> "0"), trailing percent sign preserved.
std::string normalize_answer(std::string_view raw);

}  // namespace tablerl

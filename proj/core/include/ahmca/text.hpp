#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ahmca {

/// Splits on Unicode whitespace, lowercases, strips punctuation at token
/// edges and drops tokens that end up empty. Internal punctuation stays
/// ("α-β" is one token). Invalid UTF-8 bytes pass through unchanged.
std::vector<std::string> tokenize(std::string_view text);

/// Tokens joined by single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace ahmca

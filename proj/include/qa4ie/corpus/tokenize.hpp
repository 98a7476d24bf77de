#pragma once

#include <string_view>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::corpus {

// Lowercases ASCII, splits on whitespace, and emits each ASCII punctuation
// character as its own token.
Tokens tokenize(std::string_view text);

// Re-tokenizes a token list so that externally supplied tokens obey the
// same rules as tokenize(). Idempotent.
Tokens normalize_tokens(const Tokens& tokens);

bool is_punctuation_token(std::string_view token);

}  // namespace qa4ie::corpus

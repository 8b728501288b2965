// SPDX-License-Identifier: Apache-2.0
#include "serval/tokenizer.hpp"

#include "serval/errors.hpp"

namespace serval {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::int64_t count_tokens(std::string_view tokenizer, std::string_view text) {
  std::int64_t count = 0;
  if (tokenizer == "whitespace") {
    bool in_token = false;
    for (unsigned char c : text) {
      if (is_space(c)) {
        in_token = false;
      } else if (!in_token) {
        in_token = true;
        ++count;
      }
    }
    return count;
  }
  if (tokenizer == "utf8-chars") {
    for (unsigned char c : text) {
      if ((c & 0xC0) != 0x80) ++count;
    }
    return count;
  }
  throw ConfigError("unknown tokenizer '" + std::string(tokenizer) + "'");
}

bool is_known_tokenizer(std::string_view tokenizer) {
  return tokenizer == "whitespace" || tokenizer == "utf8-chars";
}

std::vector<std::string> known_tokenizers() {
  return {"whitespace", "utf8-chars"};
}

}  // namespace serval

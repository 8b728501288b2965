// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace serval {

/// Local token counters used when an endpoint does not report usage.
///   "whitespace"  runs of non-whitespace bytes
///   "utf8-chars"  Unicode code points
std::int64_t count_tokens(std::string_view tokenizer, std::string_view text);

bool is_known_tokenizer(std::string_view tokenizer);
std::vector<std::string> known_tokenizers();

}  // namespace serval

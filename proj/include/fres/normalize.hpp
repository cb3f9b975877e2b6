#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fres {

// The one answer normalizer shared by scoring, the answer-containment rule,
// and the statement-conversion harness: lowercase, trim, collapse internal
// whitespace, strip enclosing quotes and terminal punctuation, and reduce
// number-like strings to a canonical decimal form (thousands separators
// removed, trailing fractional zeros dropped).
std::string normalize_answer(std::string_view text);

// True iff the normalized prediction equals any normalized gold answer.
bool exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers);

// True iff needle (already normalized) equals haystack or appears in it as a
// whitespace-bounded substring. Both arguments must be pre-normalized.
bool contains_normalized(std::string_view haystack, std::string_view needle);

}  // namespace fres

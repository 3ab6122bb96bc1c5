#pragma once

#include <string>
#include <string_view>

#include "logpot/typing.hpp"

namespace logpot {

// `.sig` text: one line per function,
// `fn f : B * T -> T | costed { ... } -> { ... } | costfree { ... } -> { ... }`.
// A function may list several costed and cost-free pairs; `--` starts a comment.
SignatureTable parse_signatures(std::string_view text);
std::string format_signatures(const SignatureTable& sigs);
std::string format_signature(const AnnotatedSignature& sig);

FunctionType parse_function_type(std::string_view text);

} // namespace logpot

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "logpot/syntax.hpp"
#include "logpot/value.hpp"

namespace logpot {

enum class CostMode { Costed, CostFree };

using Env = std::map<std::string, Value>;

struct EvalResult {
    Value value;
    std::uint64_t cost = 0;
};

struct EvalOptions {
    CostMode mode = CostMode::Costed;
    // Maximum number of function applications.
    std::uint64_t fuel = 1'000'000;
    // Optional JSON-lines trace, one object per rule application.
    std::ostream* trace = nullptr;
};

// Pattern or type mismatch at run time.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fuel or call-depth exhausted; the evaluation is presumed not to terminate.
class NonTermination : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Big-step, application-counting evaluator. Tail calls run in constant
// native stack; nested (non-tail) calls are limited to max_call_depth.
class Interpreter {
public:
    static constexpr std::size_t max_call_depth = 4000;

    explicit Interpreter(const Program& p);

    EvalResult evaluate(const Env& env, const Expr& e, const EvalOptions& opts) const;
    EvalResult run_function(std::string_view f, const std::vector<Value>& args, const EvalOptions& opts) const;

private:
    const Program& program_;
    std::unordered_map<std::string, const FunctionDef*> functions_;

    friend class Evaluation;
};

EvalResult evaluate(const Program& p, const Env& env, const Expr& e, const EvalOptions& opts = {});
EvalResult run_function(const Program& p, std::string_view f, const std::vector<Value>& args,
                        const EvalOptions& opts = {});

} // namespace logpot

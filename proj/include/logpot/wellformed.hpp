#pragma once

#include <map>
#include <string>
#include <vector>

#include "logpot/syntax.hpp"

namespace logpot {

struct Diagnostic {
    enum class Kind {
        UnboundVariable,
        UnknownFunction,
        ArityMismatch,
        ArgumentTypeMismatch,
        TypeMismatch,
        TreeComparison,
        DuplicateDefinition,
        ShadowedVariable,
    };
    Kind kind;
    std::string function;
    SourcePos pos;
    std::string message;
};

std::string_view to_string(Diagnostic::Kind k);

// Standard first-order checking: scoping, arities, simple types, no
// comparison of trees. Parameter types are inferred by unification where no
// type line is given; unconstrained parameters default to Base.
std::vector<Diagnostic> well_formed(const Program& p);

// Returns p with every FunctionDef::type filled. Throws std::invalid_argument
// carrying the first diagnostic if p is not well formed.
Program resolve_types(Program p);

using TypeEnv = std::map<std::string, SimpleType>;

// Type of e under env, assuming a resolved, well-formed program.
SimpleType type_of(const Program& p, const TypeEnv& env, const Expr& e);

} // namespace logpot

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace logpot {

struct SourcePos {
    int line = 0;
    int column = 0;
};

// Simple (resource-free) types. Products only appear in signatures.
enum class SimpleType { Bool, Base, Tree };

std::string_view to_string(SimpleType t);

struct FunctionType {
    std::vector<SimpleType> params;
    SimpleType result = SimpleType::Tree;
};

std::string to_string(const FunctionType& t);

enum class CmpOp { Lt, Gt, Eq };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct BoolLit {
    bool value;
};
struct VarRef {
    std::string name;
};
struct Compare {
    CmpOp op;
    std::string lhs;
    std::string rhs;
};
struct IfThenElse {
    std::string cond;
    ExprPtr then_branch;
    ExprPtr else_branch;
};
struct LetIn {
    std::string name;
    ExprPtr bound;
    ExprPtr body;
};
struct Apply {
    std::string function;
    std::vector<std::string> args;
};
struct LeafLit {};
struct NodeLit {
    std::string left;
    std::string label;
    std::string right;
};
struct MatchTree {
    std::string scrutinee;
    ExprPtr leaf_branch;
    std::string left;
    std::string label;
    std::string right;
    ExprPtr node_branch;
    // Only the node branch was written; the leaf branch is a default `leaf`.
    bool partial = false;
};

struct Expr {
    std::variant<BoolLit, VarRef, Compare, IfThenElse, LetIn, Apply, LeafLit, NodeLit, MatchTree> node;
    SourcePos pos;

    template <class T>
    const T* as() const { return std::get_if<T>(&node); }
};

template <class T>
ExprPtr make_expr(T node, SourcePos pos = {}) {
    return std::make_shared<const Expr>(Expr{std::move(node), pos});
}

// Structural equality, ignoring source positions.
bool same_ast(const Expr& a, const Expr& b);

struct FunctionDef {
    std::string name;
    std::vector<std::string> params;
    ExprPtr body;
    // Filled in by resolve_types(); a declared type line seeds it.
    std::optional<FunctionType> type;
    SourcePos pos;
};

struct Program {
    // Definition order is kept for reporting.
    std::vector<FunctionDef> functions;

    const FunctionDef* find(std::string_view name) const;
    FunctionDef* find(std::string_view name);
};

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, NotLetNormal };

    ParseError(Kind kind, SourcePos pos, const std::string& message);

    Kind kind() const { return kind_; }
    SourcePos pos() const { return pos_; }

private:
    Kind kind_;
    SourcePos pos_;
};

Program parse_program(std::string_view source);

// Pretty printer producing concrete syntax that parses back to the same AST.
std::string print_expr(const Expr& e, int indent = 0);
std::string print_program(const Program& p);

std::vector<std::string> free_variables(const Expr& e);

} // namespace logpot

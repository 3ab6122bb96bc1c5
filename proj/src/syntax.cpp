#include "logpot/syntax.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace logpot {

std::string_view to_string(SimpleType t) {
    switch (t) {
    case SimpleType::Bool: return "Bool";
    case SimpleType::Base: return "B";
    case SimpleType::Tree: return "T";
    }
    return "?";
}

std::string to_string(const FunctionType& t) {
    std::string out;
    for (std::size_t i = 0; i < t.params.size(); ++i) {
        if (i) out += " * ";
        out += to_string(t.params[i]);
    }
    if (t.params.empty()) out += "()";
    out += " -> ";
    out += to_string(t.result);
    return out;
}

ParseError::ParseError(Kind kind, SourcePos pos, const std::string& message)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      kind_(kind), pos_(pos) {}

const FunctionDef* Program::find(std::string_view name) const {
    for (const auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

FunctionDef* Program::find(std::string_view name) {
    for (auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

namespace {

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return same_ast(*a, *b);
}

struct SameVisitor {
    const Expr& other;

    bool operator()(const BoolLit& x) const { return x.value == other.as<BoolLit>()->value; }
    bool operator()(const VarRef& x) const { return x.name == other.as<VarRef>()->name; }
    bool operator()(const Compare& x) const {
        auto y = other.as<Compare>();
        return x.op == y->op && x.lhs == y->lhs && x.rhs == y->rhs;
    }
    bool operator()(const IfThenElse& x) const {
        auto y = other.as<IfThenElse>();
        return x.cond == y->cond && same_ptr(x.then_branch, y->then_branch) &&
               same_ptr(x.else_branch, y->else_branch);
    }
    bool operator()(const LetIn& x) const {
        auto y = other.as<LetIn>();
        return x.name == y->name && same_ptr(x.bound, y->bound) && same_ptr(x.body, y->body);
    }
    bool operator()(const Apply& x) const {
        auto y = other.as<Apply>();
        return x.function == y->function && x.args == y->args;
    }
    bool operator()(const LeafLit&) const { return true; }
    bool operator()(const NodeLit& x) const {
        auto y = other.as<NodeLit>();
        return x.left == y->left && x.label == y->label && x.right == y->right;
    }
    bool operator()(const MatchTree& x) const {
        auto y = other.as<MatchTree>();
        return x.scrutinee == y->scrutinee && x.left == y->left && x.label == y->label &&
               x.right == y->right && x.partial == y->partial &&
               same_ptr(x.leaf_branch, y->leaf_branch) && same_ptr(x.node_branch, y->node_branch);
    }
};

std::string_view cmp_symbol(CmpOp op) {
    switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "=";
    }
    return "?";
}

bool needs_parens(const Expr& e) {
    return e.as<LetIn>() || e.as<IfThenElse>() || e.as<MatchTree>();
}

void print_into(std::ostringstream& out, const Expr& e, int indent);

void newline(std::ostringstream& out, int indent) {
    out << '\n' << std::string(static_cast<std::size_t>(indent), ' ');
}

void print_wrapped(std::ostringstream& out, const Expr& e, int indent) {
    if (needs_parens(e)) {
        out << "(";
        print_into(out, e, indent + 1);
        out << ")";
    } else {
        print_into(out, e, indent);
    }
}

void print_into(std::ostringstream& out, const Expr& e, int indent) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolLit>) {
                out << (n.value ? "true" : "false");
            } else if constexpr (std::is_same_v<T, VarRef>) {
                out << n.name;
            } else if constexpr (std::is_same_v<T, Compare>) {
                out << n.lhs << ' ' << cmp_symbol(n.op) << ' ' << n.rhs;
            } else if constexpr (std::is_same_v<T, IfThenElse>) {
                out << "if " << n.cond << " then";
                newline(out, indent + 2);
                print_into(out, *n.then_branch, indent + 2);
                newline(out, indent);
                out << "else";
                newline(out, indent + 2);
                print_into(out, *n.else_branch, indent + 2);
            } else if constexpr (std::is_same_v<T, LetIn>) {
                out << "let " << n.name << " = ";
                print_wrapped(out, *n.bound, indent + 4);
                out << " in";
                newline(out, indent);
                print_into(out, *n.body, indent);
            } else if constexpr (std::is_same_v<T, Apply>) {
                out << n.function;
                for (const auto& a : n.args) out << ' ' << a;
            } else if constexpr (std::is_same_v<T, LeafLit>) {
                out << "leaf";
            } else if constexpr (std::is_same_v<T, NodeLit>) {
                out << '(' << n.left << ", " << n.label << ", " << n.right << ')';
            } else if constexpr (std::is_same_v<T, MatchTree>) {
                out << "match " << n.scrutinee << " with";
                if (!n.partial) {
                    newline(out, indent);
                    out << "| leaf -> ";
                    print_wrapped(out, *n.leaf_branch, indent + 4);
                }
                newline(out, indent);
                out << "| node " << n.left << ' ' << n.label << ' ' << n.right << " -> ";
                newline(out, indent + 2);
                print_into(out, *n.node_branch, indent + 2);
            }
        },
        e.node);
}

void collect_free(const Expr& e, std::set<std::string>& bound, std::vector<std::string>& out) {
    auto use = [&](const std::string& v) {
        if (!bound.count(v) && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    auto with_bound = [&](std::initializer_list<std::string> names, const Expr& body) {
        std::vector<std::string> added;
        for (const auto& n : names)
            if (bound.insert(n).second) added.push_back(n);
        collect_free(body, bound, out);
        for (const auto& n : added) bound.erase(n);
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                use(n.name);
            } else if constexpr (std::is_same_v<T, Compare>) {
                use(n.lhs);
                use(n.rhs);
            } else if constexpr (std::is_same_v<T, IfThenElse>) {
                use(n.cond);
                collect_free(*n.then_branch, bound, out);
                collect_free(*n.else_branch, bound, out);
            } else if constexpr (std::is_same_v<T, LetIn>) {
                collect_free(*n.bound, bound, out);
                with_bound({n.name}, *n.body);
            } else if constexpr (std::is_same_v<T, Apply>) {
                for (const auto& a : n.args) use(a);
            } else if constexpr (std::is_same_v<T, NodeLit>) {
                use(n.left);
                use(n.label);
                use(n.right);
            } else if constexpr (std::is_same_v<T, MatchTree>) {
                use(n.scrutinee);
                collect_free(*n.leaf_branch, bound, out);
                with_bound({n.left, n.label, n.right}, *n.node_branch);
            }
        },
        e.node);
}

} // namespace

bool same_ast(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(SameVisitor{b}, a.node);
}

std::string print_expr(const Expr& e, int indent) {
    std::ostringstream out;
    print_into(out, e, indent);
    return out.str();
}

std::string print_program(const Program& p) {
    std::ostringstream out;
    for (const auto& f : p.functions) {
        if (f.type) out << f.name << " : " << to_string(*f.type) << '\n';
        out << f.name;
        for (const auto& x : f.params) out << ' ' << x;
        out << " =\n  ";
        print_into(out, *f.body, 2);
        out << "\n\n";
    }
    return out.str();
}

std::vector<std::string> free_variables(const Expr& e) {
    std::set<std::string> bound;
    std::vector<std::string> out;
    collect_free(e, bound, out);
    return out;
}

} // namespace logpot

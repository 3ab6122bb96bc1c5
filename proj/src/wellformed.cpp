#include "logpot/wellformed.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace logpot {

std::string_view to_string(Diagnostic::Kind k) {
    switch (k) {
    case Diagnostic::Kind::UnboundVariable: return "unbound variable";
    case Diagnostic::Kind::UnknownFunction: return "unknown function";
    case Diagnostic::Kind::ArityMismatch: return "arity mismatch";
    case Diagnostic::Kind::ArgumentTypeMismatch: return "argument type mismatch";
    case Diagnostic::Kind::TypeMismatch: return "type mismatch";
    case Diagnostic::Kind::TreeComparison: return "tree comparison";
    case Diagnostic::Kind::DuplicateDefinition: return "duplicate definition";
    case Diagnostic::Kind::ShadowedVariable: return "shadowed variable";
    }
    return "?";
}

namespace {

// Union-find over type variables, each class optionally bound to a concrete type.
class Unifier {
public:
    int fresh() {
        parent_.push_back(static_cast<int>(parent_.size()));
        bound_.emplace_back();
        return parent_.back();
    }
    int concrete(SimpleType t) {
        int v = fresh();
        bound_[v] = t;
        return v;
    }
    int find(int v) {
        while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
        return v;
    }
    bool unify(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return true;
        if (bound_[a] && bound_[b] && *bound_[a] != *bound_[b]) return false;
        if (!bound_[b]) bound_[b] = bound_[a];
        parent_[a] = b;
        return true;
    }
    std::optional<SimpleType> resolved(int v) { return bound_[find(v)]; }

private:
    std::vector<int> parent_;
    std::vector<std::optional<SimpleType>> bound_;
};

struct FnVars {
    std::vector<int> params;
    int result;
};

class Checker {
public:
    explicit Checker(const Program& p) : program_(p) {
        for (const auto& f : p.functions) {
            if (fns_.count(f.name)) {
                report(Diagnostic::Kind::DuplicateDefinition, f.name, f.pos, "'" + f.name + "' defined twice");
                continue;
            }
            FnVars v;
            for (std::size_t i = 0; i < f.params.size(); ++i)
                v.params.push_back(f.type ? u_.concrete(f.type->params[i]) : u_.fresh());
            v.result = f.type ? u_.concrete(f.type->result) : u_.fresh();
            fns_[f.name] = v;
        }
    }

    void run() {
        for (const auto& f : program_.functions) {
            current_ = f.name;
            std::map<std::string, int> env;
            const FnVars& v = fns_.at(f.name);
            for (std::size_t i = 0; i < f.params.size(); ++i) {
                if (env.count(f.params[i]))
                    report(Diagnostic::Kind::ShadowedVariable, f.name, f.pos, "parameter '" + f.params[i] + "' repeated");
                env[f.params[i]] = v.params[i];
            }
            int body = infer(*f.body, env);
            if (!u_.unify(body, v.result))
                report(Diagnostic::Kind::TypeMismatch, f.name, f.body->pos, "body type differs from declared result type");
        }
        for (const auto& [fn, pos, a, b, op] : comparisons_) {
            auto ta = u_.resolved(a);
            if (ta == SimpleType::Tree) {
                report(Diagnostic::Kind::TreeComparison, fn, pos, "trees cannot be compared; match on the tree instead");
            } else if (ta == SimpleType::Bool && op != CmpOp::Eq) {
                report(Diagnostic::Kind::TypeMismatch, fn, pos, "ordering comparison on Bool");
            }
            (void)b;
        }
    }

    std::vector<Diagnostic> diagnostics() { return diags_; }

    FunctionType resolved_type(const std::string& name) {
        const FnVars& v = fns_.at(name);
        FunctionType t;
        for (int p : v.params) t.params.push_back(u_.resolved(p).value_or(SimpleType::Base));
        t.result = u_.resolved(v.result).value_or(SimpleType::Base);
        return t;
    }

private:
    const Program& program_;
    Unifier u_;
    std::map<std::string, FnVars> fns_;
    std::vector<Diagnostic> diags_;
    std::string current_;
    std::vector<std::tuple<std::string, SourcePos, int, int, CmpOp>> comparisons_;

    void report(Diagnostic::Kind k, const std::string& fn, SourcePos pos, std::string msg) {
        diags_.push_back({k, fn, pos, std::move(msg)});
    }

    int lookup(const std::map<std::string, int>& env, const std::string& x, SourcePos pos) {
        auto it = env.find(x);
        if (it == env.end()) {
            report(Diagnostic::Kind::UnboundVariable, current_, pos, "unbound variable '" + x + "'");
            return u_.fresh();
        }
        return it->second;
    }

    void expect(int v, SimpleType t, SourcePos pos, const std::string& what) {
        if (!u_.unify(v, u_.concrete(t)))
            report(Diagnostic::Kind::TypeMismatch, current_, pos, what + " must have type " + std::string(to_string(t)));
    }

    int infer(const Expr& e, std::map<std::string, int>& env) {
        return std::visit(
            [&](const auto& n) -> int {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, BoolLit>) {
                    return u_.concrete(SimpleType::Bool);
                } else if constexpr (std::is_same_v<T, VarRef>) {
                    return lookup(env, n.name, e.pos);
                } else if constexpr (std::is_same_v<T, Compare>) {
                    int a = lookup(env, n.lhs, e.pos);
                    int b = lookup(env, n.rhs, e.pos);
                    if (!u_.unify(a, b))
                        report(Diagnostic::Kind::TypeMismatch, current_, e.pos, "comparison operands differ in type");
                    comparisons_.emplace_back(current_, e.pos, a, b, n.op);
                    return u_.concrete(SimpleType::Bool);
                } else if constexpr (std::is_same_v<T, IfThenElse>) {
                    expect(lookup(env, n.cond, e.pos), SimpleType::Bool, e.pos, "if condition");
                    int t1 = infer(*n.then_branch, env);
                    int t2 = infer(*n.else_branch, env);
                    if (!u_.unify(t1, t2))
                        report(Diagnostic::Kind::TypeMismatch, current_, e.pos, "if branches differ in type");
                    return t1;
                } else if constexpr (std::is_same_v<T, LetIn>) {
                    int t = infer(*n.bound, env);
                    return with_binding(env, {{n.name, t}}, *n.body);
                } else if constexpr (std::is_same_v<T, Apply>) {
                    auto it = fns_.find(n.function);
                    if (it == fns_.end()) {
                        report(Diagnostic::Kind::UnknownFunction, current_, e.pos, "unknown function '" + n.function + "'");
                        for (const auto& a : n.args) lookup(env, a, e.pos);
                        return u_.fresh();
                    }
                    const FnVars& fv = it->second;
                    if (fv.params.size() != n.args.size()) {
                        report(Diagnostic::Kind::ArityMismatch, current_, e.pos,
                               "'" + n.function + "' expects " + std::to_string(fv.params.size()) + " arguments, got " +
                                   std::to_string(n.args.size()));
                        for (const auto& a : n.args) lookup(env, a, e.pos);
                        return fv.result;
                    }
                    for (std::size_t i = 0; i < n.args.size(); ++i) {
                        int at = lookup(env, n.args[i], e.pos);
                        if (!u_.unify(at, fv.params[i]))
                            report(Diagnostic::Kind::ArgumentTypeMismatch, current_, e.pos,
                                   "argument " + std::to_string(i + 1) + " of '" + n.function + "' has the wrong type");
                    }
                    return fv.result;
                } else if constexpr (std::is_same_v<T, LeafLit>) {
                    return u_.concrete(SimpleType::Tree);
                } else if constexpr (std::is_same_v<T, NodeLit>) {
                    expect(lookup(env, n.left, e.pos), SimpleType::Tree, e.pos, "left subtree");
                    expect(lookup(env, n.label, e.pos), SimpleType::Base, e.pos, "node label");
                    expect(lookup(env, n.right, e.pos), SimpleType::Tree, e.pos, "right subtree");
                    return u_.concrete(SimpleType::Tree);
                } else if constexpr (std::is_same_v<T, MatchTree>) {
                    expect(lookup(env, n.scrutinee, e.pos), SimpleType::Tree, e.pos, "match scrutinee");
                    int t1 = infer(*n.leaf_branch, env);
                    int t2 = with_binding(env,
                                          {{n.left, u_.concrete(SimpleType::Tree)},
                                           {n.label, u_.concrete(SimpleType::Base)},
                                           {n.right, u_.concrete(SimpleType::Tree)}},
                                          *n.node_branch);
                    if (!u_.unify(t1, t2))
                        report(Diagnostic::Kind::TypeMismatch, current_, e.pos, "match branches differ in type");
                    return t1;
                }
            },
            e.node);
    }

    int with_binding(std::map<std::string, int>& env, std::vector<std::pair<std::string, int>> binds, const Expr& body) {
        std::vector<std::pair<std::string, std::optional<int>>> saved;
        for (const auto& [name, t] : binds) {
            auto it = env.find(name);
            saved.emplace_back(name, it == env.end() ? std::nullopt : std::optional<int>(it->second));
            env[name] = t;
        }
        int r = infer(body, env);
        for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
            if (it->second)
                env[it->first] = *it->second;
            else
                env.erase(it->first);
        }
        return r;
    }
};

} // namespace

std::vector<Diagnostic> well_formed(const Program& p) {
    Checker c(p);
    c.run();
    return c.diagnostics();
}

Program resolve_types(Program p) {
    Checker c(p);
    c.run();
    auto diags = c.diagnostics();
    if (!diags.empty()) {
        const Diagnostic& d = diags.front();
        throw std::invalid_argument(d.function + ": " + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) +
                                    ": " + d.message);
    }
    for (auto& f : p.functions) f.type = c.resolved_type(f.name);
    return p;
}

SimpleType type_of(const Program& p, const TypeEnv& env, const Expr& e) {
    return std::visit(
        [&](const auto& n) -> SimpleType {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolLit> || std::is_same_v<T, Compare>) {
                return SimpleType::Bool;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return env.at(n.name);
            } else if constexpr (std::is_same_v<T, IfThenElse>) {
                return type_of(p, env, *n.then_branch);
            } else if constexpr (std::is_same_v<T, LetIn>) {
                TypeEnv inner = env;
                inner[n.name] = type_of(p, env, *n.bound);
                return type_of(p, inner, *n.body);
            } else if constexpr (std::is_same_v<T, Apply>) {
                const FunctionDef* f = p.find(n.function);
                if (!f || !f->type) throw std::logic_error("type_of: unresolved function " + n.function);
                return f->type->result;
            } else if constexpr (std::is_same_v<T, LeafLit> || std::is_same_v<T, NodeLit>) {
                return SimpleType::Tree;
            } else if constexpr (std::is_same_v<T, MatchTree>) {
                if (!n.partial) return type_of(p, env, *n.leaf_branch);
                TypeEnv inner = env;
                inner[n.left] = SimpleType::Tree;
                inner[n.label] = SimpleType::Base;
                inner[n.right] = SimpleType::Tree;
                return type_of(p, inner, *n.node_branch);
            }
        },
        e.node);
}

} // namespace logpot

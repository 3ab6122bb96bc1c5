#include "logpot/interp.hpp"

#include <ostream>

namespace logpot {

using Frame = std::vector<std::pair<const std::string*, Value>>;

class Evaluation {
public:
    Evaluation(const Interpreter& in, const EvalOptions& opts) : in_(in), opts_(opts) {}

    Value run(Frame& frame, const Expr& e) { return eval(frame, &e, false); }

    Value call(const FunctionDef& f, Frame frame) {
        if (++depth_ > Interpreter::max_call_depth)
            throw NonTermination("call depth exceeded " + std::to_string(Interpreter::max_call_depth) + " in '" + f.name + "'");
        Value v = eval(frame, f.body.get(), true);
        --depth_;
        return v;
    }

    std::uint64_t cost() const { return cost_; }

    void charge(const FunctionDef& f) {
        if (++applications_ > opts_.fuel)
            throw NonTermination("fuel of " + std::to_string(opts_.fuel) + " applications exhausted in '" + f.name + "'");
        if (opts_.mode == CostMode::Costed) ++cost_;
        trace("app", f.name.c_str());
    }

    const FunctionDef& function(const std::string& name) const {
        auto it = in_.functions_.find(name);
        if (it == in_.functions_.end()) throw EvalError("undefined function '" + name + "'");
        return *it->second;
    }

private:
    const Interpreter& in_;
    const EvalOptions& opts_;
    std::uint64_t cost_ = 0;
    std::uint64_t applications_ = 0;
    std::size_t depth_ = 0;

    void trace(const char* rule, const char* detail = nullptr) {
        if (!opts_.trace) return;
        *opts_.trace << "{\"rule\":\"" << rule << "\",\"depth\":" << depth_ << ",\"cost\":" << cost_;
        if (detail) *opts_.trace << ",\"function\":\"" << detail << "\"";
        *opts_.trace << "}\n";
    }

    static const Value& lookup(const Frame& frame, const std::string& name) {
        for (auto it = frame.rbegin(); it != frame.rend(); ++it)
            if (*it->first == name) return it->second;
        throw EvalError("unbound variable '" + name + "' at run time");
    }

    static bool compare(CmpOp op, const Value& a, const Value& b) {
        if (a.is_base() && b.is_base()) {
            int c = cmp(a.as_base(), b.as_base());
            switch (op) {
            case CmpOp::Lt: return c < 0;
            case CmpOp::Gt: return c > 0;
            case CmpOp::Eq: return c == 0;
            }
        }
        if (a.is_bool() && b.is_bool() && op == CmpOp::Eq) return a.as_bool() == b.as_bool();
        throw EvalError("comparison is defined on base values and Bool equality only");
    }

    // Evaluates e in frame. When tail is set, frame belongs to the current
    // call and tail applications reuse it.
    Value eval(Frame& frame, const Expr* e, bool tail) {
        std::size_t mark = frame.size();
        for (;;) {
            if (auto v = e->as<VarRef>()) {
                trace("var");
                Value out = lookup(frame, v->name);
                frame.resize(mark);
                return out;
            }
            if (auto b = e->as<BoolLit>()) {
                trace("bool");
                frame.resize(mark);
                return Value::boolean(b->value);
            }
            if (auto c = e->as<Compare>()) {
                trace("cmp");
                bool r = compare(c->op, lookup(frame, c->lhs), lookup(frame, c->rhs));
                frame.resize(mark);
                return Value::boolean(r);
            }
            if (auto ite = e->as<IfThenElse>()) {
                const Value& cv = lookup(frame, ite->cond);
                if (!cv.is_bool()) throw EvalError("if condition '" + ite->cond + "' is not a Bool");
                trace(cv.as_bool() ? "if-true" : "if-false");
                e = cv.as_bool() ? ite->then_branch.get() : ite->else_branch.get();
                continue;
            }
            if (auto let = e->as<LetIn>()) {
                trace("let");
                Value bound = eval(frame, let->bound.get(), false);
                frame.emplace_back(&let->name, std::move(bound));
                e = let->body.get();
                continue;
            }
            if (e->as<LeafLit>()) {
                trace("leaf");
                frame.resize(mark);
                return Value::tree(Tree::leaf());
            }
            if (auto n = e->as<NodeLit>()) {
                trace("node");
                const Value& l = lookup(frame, n->left);
                const Value& a = lookup(frame, n->label);
                const Value& r = lookup(frame, n->right);
                if (!l.is_tree() || !r.is_tree() || !a.is_base()) throw EvalError("ill-typed node construction");
                Value out = Value::tree(Tree::node(l.as_tree(), a.as_base(), r.as_tree()));
                frame.resize(mark);
                return out;
            }
            if (auto m = e->as<MatchTree>()) {
                const Value& sv = lookup(frame, m->scrutinee);
                if (!sv.is_tree()) throw EvalError("match scrutinee '" + m->scrutinee + "' is not a tree");
                Tree t = sv.as_tree();
                if (t.is_leaf()) {
                    trace("match-leaf");
                    e = m->leaf_branch.get();
                } else {
                    trace("match-node");
                    frame.emplace_back(&m->left, Value::tree(t.left()));
                    frame.emplace_back(&m->label, Value::base(t.label()));
                    frame.emplace_back(&m->right, Value::tree(t.right()));
                    e = m->node_branch.get();
                }
                continue;
            }
            if (auto app = e->as<Apply>()) {
                const FunctionDef& f = function(app->function);
                if (f.params.size() != app->args.size())
                    throw EvalError("'" + f.name + "' applied to " + std::to_string(app->args.size()) + " arguments");
                Frame callee;
                callee.reserve(f.params.size() + 8);
                for (std::size_t i = 0; i < f.params.size(); ++i)
                    callee.emplace_back(&f.params[i], lookup(frame, app->args[i]));
                charge(f);
                if (tail) {
                    frame = std::move(callee);
                    e = f.body.get();
                    mark = 0;
                    continue;
                }
                Value out = call(f, std::move(callee));
                frame.resize(mark);
                return out;
            }
            throw EvalError("unknown expression form");
        }
    }
};

Interpreter::Interpreter(const Program& p) : program_(p) {
    for (const auto& f : p.functions) functions_[f.name] = &f;
}

EvalResult Interpreter::evaluate(const Env& env, const Expr& e, const EvalOptions& opts) const {
    Evaluation ev(*this, opts);
    Frame frame;
    for (const auto& [k, v] : env) frame.emplace_back(&k, v);
    Value v = ev.run(frame, e);
    return {std::move(v), ev.cost()};
}

EvalResult Interpreter::run_function(std::string_view name, const std::vector<Value>& args, const EvalOptions& opts) const {
    Evaluation ev(*this, opts);
    const FunctionDef& f = ev.function(std::string(name));
    if (f.params.size() != args.size())
        throw EvalError("'" + f.name + "' expects " + std::to_string(f.params.size()) + " arguments, got " +
                        std::to_string(args.size()));
    Frame frame;
    for (std::size_t i = 0; i < args.size(); ++i) frame.emplace_back(&f.params[i], args[i]);
    ev.charge(f);
    Value v = ev.call(f, std::move(frame));
    return {std::move(v), ev.cost()};
}

EvalResult evaluate(const Program& p, const Env& env, const Expr& e, const EvalOptions& opts) {
    return Interpreter(p).evaluate(env, e, opts);
}

EvalResult run_function(const Program& p, std::string_view f, const std::vector<Value>& args, const EvalOptions& opts) {
    return Interpreter(p).run_function(f, args, opts);
}

} // namespace logpot

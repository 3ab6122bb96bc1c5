#include "logpot/typing.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>

#include "logpot/wellformed.hpp"

namespace logpot {

namespace {

LogIndex zero_index(std::size_t arity, unsigned b) { return LogIndex{std::vector<unsigned>(arity, 0), b}; }

// log'(0) = log'(1) = 0: such indices carry no potential.
bool vanishing(const LogIndex& i) { return i.is_constant() && i.b <= 1; }

void add_to(SymAnnotation& q, const LogIndex& i, const LinExpr& e) {
    if (e.is_zero()) return;
    LinExpr& slot = q.log[i];
    slot += e;
    if (slot.is_zero()) q.log.erase(i);
}

SymAnnotation plus(SymAnnotation a, const SymAnnotation& b) {
    for (std::size_t i = 0; i < a.arity; ++i) a.rank[i] += b.rank[i];
    for (const auto& [idx, e] : b.log) add_to(a, idx, e);
    return a;
}

SymAnnotation scaled(const SymAnnotation& q, VarId lambda) {
    SymAnnotation out(q.arity);
    auto mul = [&](const LinExpr& e) {
        if (!e.is_constant()) throw TypingError("nonlinear combination of unknown signatures");
        return LinExpr::var(lambda, e.constant);
    };
    for (std::size_t i = 0; i < q.arity; ++i) out.rank[i] = mul(q.rank[i]);
    for (const auto& [idx, e] : q.log) add_to(out, idx, mul(e));
    return out;
}

bool trivially_nonneg(const LinExpr& e) { return e.is_constant() && sgn(e.constant) >= 0; }

// Equalities a == b over all coefficients of either side that carry potential.
void equate(ConstraintSet& cs, const SymAnnotation& a, const SymAnnotation& b, const std::string& tag) {
    if (a.arity != b.arity) throw TypingError(tag + ": annotation arity mismatch");
    for (std::size_t i = 0; i < a.arity; ++i) {
        LinExpr d = a.rank[i] - b.rank[i];
        if (!d.is_zero()) cs.constraints.push_back({d, Relation::Eq, tag + ".rank" + std::to_string(i + 1)});
    }
    std::set<LogIndex> keys;
    for (const auto& [idx, e] : a.log) keys.insert(idx);
    for (const auto& [idx, e] : b.log) keys.insert(idx);
    for (const auto& idx : keys) {
        if (vanishing(idx)) continue;
        LinExpr d = a.get(idx) - b.get(idx);
        if (!d.is_zero()) cs.constraints.push_back({d, Relation::Eq, tag + ".log" + to_string(idx)});
    }
}

// Pointwise a >= b.
void dominate(std::vector<Constraint>& out, const SymAnnotation& a, const SymAnnotation& b, const std::string& tag) {
    for (std::size_t i = 0; i < a.arity; ++i) {
        LinExpr d = a.rank[i] - b.rank[i];
        if (!trivially_nonneg(d)) out.push_back({d, Relation::Ge, tag + ".rank" + std::to_string(i + 1)});
    }
    for (const auto& [idx, e] : b.log) {
        if (vanishing(idx)) continue;
        LinExpr d = a.get(idx) - e;
        if (!trivially_nonneg(d)) out.push_back({d, Relation::Ge, tag + ".log" + to_string(idx)});
    }
}

std::vector<unsigned> without(const std::vector<unsigned>& a, std::size_t k) {
    std::vector<unsigned> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (i != k) out.push_back(a[i]);
    return out;
}

// Supports of both sides plus the pairwise sums that stay inside the template.
std::vector<LogIndex> obligation_atoms(const IndexTemplate& t, std::size_t arity, const SymAnnotation& hi,
                                       const SymAnnotation& lo) {
    std::vector<LogIndex> support;
    std::set<LogIndex> s;
    for (const auto* side : {&hi, &lo})
        for (const auto& [idx, e] : side->log)
            if (!e.is_zero() && !vanishing(idx) && s.insert(idx).second) support.push_back(idx);
    auto in_template = t.indices(arity);
    std::set<LogIndex> allowed(in_template.begin(), in_template.end());
    for (const auto& idx : closure_of(support))
        if (allowed.count(idx)) s.insert(idx);
    return {s.begin(), s.end()};
}

bool all_zero(const SymAnnotation& q) {
    for (const auto& r : q.rank)
        if (!r.is_zero()) return false;
    for (const auto& [idx, e] : q.log)
        if (!e.is_zero()) return false;
    return true;
}

} // namespace

SymAnnotation lift(const Annotation& q) {
    SymAnnotation s(q.arity);
    for (std::size_t i = 0; i < q.arity; ++i) s.rank[i] = LinExpr(q.rank[i]);
    for (const auto& [idx, c] : q.log)
        if (sgn(c) != 0) s.log[idx] = LinExpr(c);
    return s;
}

Annotation evaluate(const SymAnnotation& q, const std::vector<Rational>& values) {
    Annotation a(q.arity);
    for (std::size_t i = 0; i < q.arity; ++i) a.rank[i] = q.rank[i].evaluate(values);
    for (const auto& [idx, e] : q.log) {
        Rational v = e.evaluate(values);
        if (sgn(v) != 0) a.log[idx] = v;
    }
    return a;
}

SymAnnotation fresh_annotation(LinearProgram& lp, std::size_t arity, const IndexTemplate& t, const std::string& name,
                               bool with_rank) {
    SymAnnotation q(arity);
    if (with_rank)
        for (std::size_t i = 0; i < arity; ++i) q.rank[i] = LinExpr::var(lp.add_var(name + ".rank" + std::to_string(i + 1)));
    for (const auto& idx : t.indices(arity)) {
        if (vanishing(idx)) continue;
        q.log[idx] = LinExpr::var(lp.add_var(name + ".log" + to_string(idx)));
    }
    return q;
}

std::vector<std::string> TypingContext::trees() const {
    std::vector<std::string> out;
    for (const auto& [x, t] : vars)
        if (t == SimpleType::Tree) out.push_back(x);
    return out;
}

bool TypingContext::contains(const std::string& x) const { return type_of(x).has_value(); }

std::optional<SimpleType> TypingContext::type_of(const std::string& x) const {
    for (const auto& [y, t] : vars)
        if (y == x) return t;
    return std::nullopt;
}

void ConstraintSet::append(ConstraintSet other) {
    for (auto& c : other.constraints) constraints.push_back(std::move(c));
    for (auto& o : other.obligations) obligations.push_back(std::move(o));
    for (auto& p : other.premises) premises.push_back(std::move(p));
}

void ConstraintSet::add_to(LinearProgram& lp, const IndexTemplate& t, const std::string& tag) const {
    for (const auto& c : constraints) lp.add_row(c.expr, c.rel, LinExpr(), c.label);
    for (std::size_t i = 0; i < obligations.size(); ++i) {
        const auto& ob = obligations[i];
        FactSystem facts = expert_facts(ob.arity, obligation_atoms(t, ob.arity, ob.hi, ob.lo));
        encode_obligation(lp, ob, facts, tag + ".w" + std::to_string(i));
    }
}

SymAnnotation match_leaf_image(const SymAnnotation& q, std::size_t k) {
    if (k >= q.arity) throw TypingError("match: scrutinee slot out of range");
    SymAnnotation p(q.arity - 1);
    for (std::size_t i = 0, j = 0; i < q.arity; ++i)
        if (i != k) p.rank[j++] = q.rank[i];
    for (const auto& [idx, e] : q.log) add_to(p, LogIndex{without(idx.a, k), idx.b + idx.a[k]}, e);
    return p;
}

SymAnnotation match_node_image(const SymAnnotation& q, std::size_t k) {
    if (k >= q.arity) throw TypingError("match: scrutinee slot out of range");
    const std::size_t m = q.arity - 1;
    SymAnnotation r(m + 2);
    for (std::size_t i = 0, j = 0; i < q.arity; ++i)
        if (i != k) r.rank[j++] = q.rank[i];
    r.rank[m] = q.rank[k];
    r.rank[m + 1] = q.rank[k];
    for (const auto& [idx, e] : q.log) {
        auto a = without(idx.a, k);
        a.push_back(idx.a[k]);
        a.push_back(idx.a[k]);
        add_to(r, LogIndex{a, idx.b}, e);
    }
    LogIndex left = zero_index(m + 2, 0), right = zero_index(m + 2, 0);
    left.a[m] = 1;
    right.a[m + 1] = 1;
    add_to(r, left, q.rank[k]);
    add_to(r, right, q.rank[k]);
    return r;
}

SymAnnotation node_image(const SymAnnotation& qp) {
    if (qp.arity != 1) throw TypingError("node: result annotation must have arity 1");
    SymAnnotation n(2);
    n.rank[0] = qp.rank[0];
    n.rank[1] = qp.rank[0];
    add_to(n, LogIndex{{1, 0}, 0}, qp.rank[0]);
    add_to(n, LogIndex{{0, 1}, 0}, qp.rank[0]);
    for (const auto& [idx, e] : qp.log) add_to(n, LogIndex{{idx.a[0], idx.a[0]}, idx.b}, e);
    return n;
}

SymAnnotation leaf_image(const SymAnnotation& qp) {
    if (qp.arity != 1) throw TypingError("leaf: result annotation must have arity 1");
    SymAnnotation n(0);
    for (const auto& [idx, e] : qp.log) add_to(n, LogIndex{{}, idx.a[0] + idx.b}, e);
    return n;
}

SymAnnotation drop_slot(const SymAnnotation& q, std::size_t k) {
    if (k >= q.arity) throw TypingError("drop: slot out of range");
    SymAnnotation r(q.arity - 1);
    for (std::size_t i = 0, j = 0; i < q.arity; ++i)
        if (i != k) r.rank[j++] = q.rank[i];
    for (const auto& [idx, e] : q.log)
        if (idx.a[k] == 0) add_to(r, LogIndex{without(idx.a, k), idx.b}, e);
    return r;
}

std::vector<std::vector<unsigned>> default_family(std::size_t k) {
    std::vector<std::vector<unsigned>> out;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<unsigned> b(k, 0);
        b[i] = 1;
        out.push_back(b);
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            std::vector<unsigned> b(k, 0);
            b[i] = b[j] = 1;
            out.push_back(b);
        }
    return out;
}

namespace {

struct LetImages {
    SymAnnotation p;
    std::vector<SymAnnotation> pb;
    SymAnnotation r;
    std::vector<Constraint> side;
};

// Distributes Q over (Γ: m slots, Δ: k slots) into the premises of the let
// rule. pp is the costed result annotation of e1 and ppb[i] the cost-free
// result for family[i]. Constants reaching two premises go to both, or are
// split with a fresh unknown when split_constants is set.
LetImages let_images(LinearProgram& lp, const SymAnnotation& q, std::size_t m, std::size_t k, const SymAnnotation& pp,
                     const std::vector<std::vector<unsigned>>& family, const std::vector<SymAnnotation>& ppb,
                     bool split_constants, const std::string& tag) {
    if (q.arity != m + k) throw TypingError(tag + ": let split does not match annotation arity");
    const std::size_t ra = pp.arity;
    if (ra == 0 && !family.empty()) throw TypingError(tag + ": cost-free family needs a tree-valued binding");
    LetImages out;
    out.p = SymAnnotation(m);
    out.r = SymAnnotation(k + ra);
    for (std::size_t i = 0; i < m; ++i) out.p.rank[i] = q.rank[i];
    for (std::size_t j = 0; j < k; ++j) out.r.rank[j] = q.rank[m + j];
    if (ra) out.r.rank[k] = pp.rank[0];
    for (std::size_t f = 0; f < family.size(); ++f) out.pb.emplace_back(m);

    auto family_of = [&](const std::vector<unsigned>& b) -> std::optional<std::size_t> {
        auto it = std::find(family.begin(), family.end(), b);
        if (it == family.end()) return std::nullopt;
        return std::size_t(it - family.begin());
    };
    auto r_index = [&](const std::vector<unsigned>& b, unsigned a, unsigned c) {
        std::vector<unsigned> v = b;
        if (ra) v.push_back(a);
        return LogIndex{v, c};
    };
    auto split = [&](const LinExpr& e, const std::string& name) {
        if (!split_constants) return std::pair<LinExpr, LinExpr>{e, e};
        VarId u = lp.add_var(tag + ".split" + name);
        LinExpr rest = e - LinExpr::var(u);
        out.side.push_back({rest, Relation::Ge, tag + ".split" + name});
        return std::pair<LinExpr, LinExpr>{LinExpr::var(u), rest};
    };

    for (const auto& [idx, e] : q.log) {
        if (e.is_zero()) continue;
        std::vector<unsigned> ag(idx.a.begin(), idx.a.begin() + std::ptrdiff_t(m));
        std::vector<unsigned> ad(idx.a.begin() + std::ptrdiff_t(m), idx.a.end());
        bool g0 = std::all_of(ag.begin(), ag.end(), [](unsigned x) { return x == 0; });
        bool d0 = std::all_of(ad.begin(), ad.end(), [](unsigned x) { return x == 0; });
        if (!g0 && d0) {
            add_to(out.p, LogIndex{ag, idx.b}, e);
        } else if (g0 && d0) {
            if (vanishing(idx)) continue;
            auto [to_p, to_r] = split(e, to_string(idx));
            add_to(out.p, LogIndex{ag, idx.b}, to_p);
            add_to(out.r, r_index(ad, 0, idx.b), to_r);
        } else if (g0) {
            auto f = family_of(ad);
            if (f && !vanishing(LogIndex{ag, idx.b})) {
                auto [to_p, to_r] = split(e, to_string(idx));
                add_to(out.pb[*f], LogIndex{ag, idx.b}, to_p);
                add_to(out.r, r_index(ad, 0, idx.b), to_r);
            } else {
                add_to(out.r, r_index(ad, 0, idx.b), e);
            }
        } else if (auto f = family_of(ad)) {
            add_to(out.pb[*f], LogIndex{ag, idx.b}, e);
        }
        // Otherwise the potential is discarded.
    }
    if (ra)
        for (const auto& [idx, e] : pp.log) add_to(out.r, r_index(std::vector<unsigned>(k, 0), idx.a[0], idx.b), e);
    else
        for (const auto& [idx, e] : pp.log) add_to(out.r, LogIndex{std::vector<unsigned>(k, 0), idx.b}, e);
    for (std::size_t f = 0; f < family.size(); ++f)
        for (const auto& [idx, e] : ppb[f].log) add_to(out.r, r_index(family[f], idx.a[0], idx.b), e);
    return out;
}

std::size_t slot_of(const TypingContext& ctx, const std::string& x) {
    std::size_t s = 0;
    for (const auto& [y, t] : ctx.vars) {
        if (y == x) {
            if (t != SimpleType::Tree) throw TypingError("'" + x + "' is not a tree");
            return s;
        }
        if (t == SimpleType::Tree) ++s;
    }
    throw TypingError("'" + x + "' not in context");
}

TypingContext erase(TypingContext ctx, const std::string& x) {
    ctx.vars.erase(std::remove_if(ctx.vars.begin(), ctx.vars.end(), [&](const auto& v) { return v.first == x; }),
                   ctx.vars.end());
    return ctx;
}

} // namespace

ConstraintSet emit_var(const Judgement& j) {
    auto x = j.expr ? j.expr->as<VarRef>() : nullptr;
    if (!x) throw TypingError("var: expression is not a variable");
    if (j.ctx.vars.size() != 1 || j.ctx.vars[0].first != x->name) throw TypingError("var: context must be exactly the variable");
    ConstraintSet cs;
    equate(cs, j.q, j.qp, "var");
    return cs;
}

ConstraintSet emit_leaf(const Judgement& j) {
    if (!j.expr || !j.expr->as<LeafLit>()) throw TypingError("leaf: expression is not a leaf");
    if (j.ctx.arity() != 0) throw TypingError("leaf: context must not contain trees");
    ConstraintSet cs;
    equate(cs, j.q, leaf_image(j.qp), "leaf");
    return cs;
}

ConstraintSet emit_node(const Judgement& j) {
    auto n = j.expr ? j.expr->as<NodeLit>() : nullptr;
    if (!n) throw TypingError("node: expression is not a node");
    const auto& v = j.ctx.vars;
    if (v.size() != 3 || v[0].first != n->left || v[1].first != n->label || v[2].first != n->right ||
        v[0].second != SimpleType::Tree || v[1].second != SimpleType::Base || v[2].second != SimpleType::Tree)
        throw TypingError("node: context must be x1:T, x2:B, x3:T");
    ConstraintSet cs;
    equate(cs, j.q, node_image(j.qp), "node");
    return cs;
}

ConstraintSet emit_cmp(const Judgement& j) {
    if (!j.expr || !j.expr->as<Compare>()) throw TypingError("cmp: expression is not a comparison");
    if (j.ctx.arity() != 0) throw TypingError("cmp: context must not contain trees");
    ConstraintSet cs;
    equate(cs, j.q, j.qp, "cmp");
    return cs;
}

ConstraintSet emit_ite(LinearProgram&, const Judgement& j, const IndexTemplate&, const std::string&) {
    auto ite = j.expr ? j.expr->as<IfThenElse>() : nullptr;
    if (!ite) throw TypingError("ite: expression is not a conditional");
    if (j.ctx.type_of(ite->cond) != SimpleType::Bool) throw TypingError("ite: condition must be a Bool in context");
    ConstraintSet cs;
    TypingContext rest = erase(j.ctx, ite->cond);
    cs.premises.push_back({rest, j.q, ite->then_branch, j.type, j.qp, j.mode});
    cs.premises.push_back({rest, j.q, ite->else_branch, j.type, j.qp, j.mode});
    return cs;
}

ConstraintSet emit_match(LinearProgram& lp, const Judgement& j, const IndexTemplate& t, const std::string& tag) {
    auto m = j.expr ? j.expr->as<MatchTree>() : nullptr;
    if (!m) throw TypingError("match: expression is not a match");
    std::size_t k = slot_of(j.ctx, m->scrutinee);
    ConstraintSet cs;
    TypingContext gamma = erase(j.ctx, m->scrutinee);
    SymAnnotation p = fresh_annotation(lp, j.q.arity - 1, t, tag + ".P");
    SymAnnotation r = fresh_annotation(lp, j.q.arity + 1, t, tag + ".R");
    equate(cs, p, match_leaf_image(j.q, k), tag + ".leaf");
    equate(cs, r, match_node_image(j.q, k), tag + ".node");
    cs.premises.push_back({gamma, p, m->leaf_branch, j.type, j.qp, j.mode});
    TypingContext node_ctx = gamma;
    node_ctx.vars.push_back({m->left, SimpleType::Tree});
    node_ctx.vars.push_back({m->label, SimpleType::Base});
    node_ctx.vars.push_back({m->right, SimpleType::Tree});
    cs.premises.push_back({node_ctx, r, m->node_branch, j.type, j.qp, j.mode});
    return cs;
}

ConstraintSet emit_let(LinearProgram& lp, const Judgement& j, const LetShape& shape, const IndexTemplate& t,
                       const std::string& tag) {
    auto let = j.expr ? j.expr->as<LetIn>() : nullptr;
    if (!let) throw TypingError("let: expression is not a let");
    if (j.q.arity != shape.m + shape.k) throw TypingError("let: split does not cover the context");
    const std::size_t ra = result_arity(shape.bound_type);
    auto family = ra ? (shape.family.empty() ? default_family(shape.k) : shape.family) : std::vector<std::vector<unsigned>>{};
    SymAnnotation pp = fresh_annotation(lp, ra, t, tag + ".P'");
    std::vector<SymAnnotation> ppb;
    for (std::size_t f = 0; f < family.size(); ++f) {
        std::string b;
        for (unsigned x : family[f]) b += std::to_string(x);
        ppb.push_back(fresh_annotation(lp, 1, t, tag + ".P'" + b, false));
    }
    LetImages img = let_images(lp, j.q, shape.m, shape.k, pp, family, ppb, shape.split_constants, tag);
    ConstraintSet cs;
    cs.constraints = img.side;

    // Split the context by tree slots: the first m trees belong to e1.
    TypingContext gamma, delta;
    std::size_t seen = 0;
    for (const auto& v : j.ctx.vars) {
        bool tree = v.second == SimpleType::Tree;
        bool first = tree ? seen++ < shape.m : true;
        if (tree) (first ? gamma : delta).vars.push_back(v);
        else {
            gamma.vars.push_back(v);
            delta.vars.push_back(v);
        }
    }
    SymAnnotation p = fresh_annotation(lp, shape.m, t, tag + ".P");
    equate(cs, p, img.p, tag + ".P");
    cs.premises.push_back({gamma, p, let->bound, shape.bound_type, pp, j.mode});
    for (std::size_t f = 0; f < family.size(); ++f) {
        std::string b;
        for (unsigned x : family[f]) b += std::to_string(x);
        SymAnnotation pb = fresh_annotation(lp, shape.m, t, tag + ".P" + b, false);
        equate(cs, pb, img.pb[f], tag + ".P" + b);
        cs.premises.push_back({gamma, pb, let->bound, shape.bound_type, ppb[f], TypingMode::CostFree});
    }
    SymAnnotation r = fresh_annotation(lp, shape.k + ra, t, tag + ".R");
    equate(cs, r, img.r, tag + ".R");
    delta.vars.push_back({let->name, shape.bound_type});
    cs.premises.push_back({delta, r, let->body, j.type, j.qp, j.mode});
    return cs;
}

ConstraintSet emit_app(const Judgement& j, const SymAnnotation& qf, const SymAnnotation& qpf) {
    if (!j.expr || !j.expr->as<Apply>()) throw TypingError("app: expression is not an application");
    ConstraintSet cs;
    equate(cs, j.q, j.mode == TypingMode::Costed ? add_constant(qf, LinExpr(1)) : qf, "app.arg");
    equate(cs, j.qp, qpf, "app.result");
    return cs;
}

ConstraintSet emit_share(LinearProgram& lp, const Judgement& j, std::size_t i, std::size_t jj, const IndexTemplate& t,
                         const std::string& tag) {
    // Premise context: slot i's variable is split into i and a copy at jj.
    if (i >= j.q.arity || jj > j.q.arity) throw TypingError("share: slot out of range");
    SymAnnotation premise = fresh_annotation(lp, j.q.arity + 1, t, tag + ".Q");
    std::size_t a = i < jj ? i : i + 1;
    ConstraintSet cs;
    equate(cs, share(premise, a, jj), j.q, tag + ".share");
    cs.premises.push_back({j.ctx, premise, j.expr, j.type, j.qp, j.mode});
    return cs;
}

ConstraintSet emit_weakvar(LinearProgram& lp, const Judgement& j, const std::string& x, const IndexTemplate& t,
                           const std::string& tag) {
    auto type = j.ctx.type_of(x);
    if (!type) throw TypingError("weakvar: '" + x + "' not in context");
    ConstraintSet cs;
    TypingContext rest = erase(j.ctx, x);
    if (*type != SimpleType::Tree) {
        cs.premises.push_back({rest, j.q, j.expr, j.type, j.qp, j.mode});
        return cs;
    }
    std::size_t k = slot_of(j.ctx, x);
    SymAnnotation r = fresh_annotation(lp, j.q.arity - 1, t, tag + ".R");
    equate(cs, r, drop_slot(j.q, k), tag + ".weakvar");
    cs.constraints.push_back({j.q.rank[k], Relation::Eq, tag + ".dropped.rank"});
    for (const auto& [idx, e] : j.q.log)
        if (idx.a[k] != 0) cs.constraints.push_back({e, Relation::Eq, tag + ".dropped" + to_string(idx)});
    cs.premises.push_back({rest, r, j.expr, j.type, j.qp, j.mode});
    return cs;
}

ConstraintSet emit_weak(LinearProgram& lp, const Judgement& j, const IndexTemplate& t, const std::string& tag) {
    ConstraintSet cs;
    SymAnnotation p = fresh_annotation(lp, j.q.arity, t, tag + ".P");
    SymAnnotation pp = fresh_annotation(lp, j.qp.arity, t, tag + ".P'");
    cs.obligations.push_back({j.q.arity, j.q, p});
    cs.obligations.push_back({j.qp.arity, pp, j.qp});
    cs.premises.push_back({j.ctx, p, j.expr, j.type, pp, j.mode});
    return cs;
}

// ---------------------------------------------------------------------------

namespace {

struct CalleeSigs {
    std::vector<std::pair<SymAnnotation, SymAnnotation>> costed;
    std::vector<std::pair<Annotation, Annotation>> cost_free;
};

using CallTable = std::map<std::string, CalleeSigs>;

class Deriver {
public:
    Deriver(const Program& p, LinearProgram& lp, const TypingOptions& opts, const CallTable& calls)
        : prog_(p), lp_(lp), opts_(opts), calls_(calls) {}

    void function(const FunctionDef& f, const SymAnnotation& q, const SymAnnotation& qp, TypingMode mode) {
        TypingContext ctx;
        for (std::size_t i = 0; i < f.params.size(); ++i) ctx.vars.push_back({f.params[i], f.type->params[i]});
        derive(ctx, q, *f.body, f.type->result, qp, mode, 0, f.name);
    }

    DerivationStats stats;

private:
    const Program& prog_;
    LinearProgram& lp_;
    const TypingOptions& opts_;
    const CallTable& calls_;
    std::map<std::vector<LogIndex>, std::shared_ptr<FactSystem>> facts_;
    std::size_t counter_ = 0;

    std::string tag(const std::string& path, const char* rule) { return path + "/" + rule + std::to_string(++counter_); }

    const FactSystem& facts_for(std::size_t arity, const SymAnnotation& hi, const SymAnnotation& lo) {
        auto atoms = obligation_atoms(opts_.tmpl, arity, hi, lo);
        auto& slot = facts_[atoms];
        if (!slot) slot = std::make_shared<FactSystem>(expert_facts(arity, atoms));
        return *slot;
    }

    // Φ(ctx; hi) >= Φ(ctx; lo) coefficientwise on ranks and non-constant
    // logs, with the constant parts compared through log2 brackets.
    void dominate_folded(const SymAnnotation& hi, const SymAnnotation& lo, const std::string& t) {
        std::vector<Constraint> out;
        for (std::size_t i = 0; i < hi.arity; ++i) {
            LinExpr d = hi.rank[i] - lo.rank[i];
            if (!trivially_nonneg(d)) out.push_back({d, Relation::Ge, t + ".rank" + std::to_string(i + 1)});
        }
        LinExpr consts;
        for (const auto& [idx, e] : hi.log)
            if (idx.is_constant() && idx.b >= 2) consts += e * Rational(log2_bracket(idx.b).first);
        for (const auto& [idx, e] : lo.log) {
            if (idx.is_constant()) {
                if (idx.b >= 2) consts -= e * Rational(log2_bracket(idx.b).second);
                continue;
            }
            LinExpr d = hi.get(idx) - e;
            if (!trivially_nonneg(d)) out.push_back({d, Relation::Ge, t + ".log" + to_string(idx)});
        }
        if (!trivially_nonneg(consts)) out.push_back({consts, Relation::Ge, t + ".const"});
        rows(out);
    }

    // Weak step Φ(ctx; hi) >= Φ(ctx; lo).
    void oblige(const SymAnnotation& hi, const SymAnnotation& lo, const std::string& t) {
        if (all_zero(lo)) return;
        ++stats.obligations;
        EntailmentObligation<LinExpr> ob{hi.arity, hi, lo};
        encode_obligation(lp_, ob, facts_for(hi.arity, hi, lo), t);
    }

    // Removes slot k by the weakening log(a·|x| + u) >= log(u + c) for
    // 0 <= c <= a, taking the largest template constant available.
    SymAnnotation project_slot(const SymAnnotation& q, std::size_t k) const {
        SymAnnotation r(q.arity - 1);
        for (std::size_t i = 0, j = 0; i < q.arity; ++i)
            if (i != k) r.rank[j++] = q.rank[i];
        for (const auto& [idx, e] : q.log) {
            unsigned b = idx.b;
            for (unsigned c : opts_.tmpl.b_values)
                if (c > b && c <= idx.b + idx.a[k]) b = c;
            LogIndex to{without(idx.a, k), b};
            if (!vanishing(to)) add_to(r, to, e);
        }
        return r;
    }

    void rows(const std::vector<Constraint>& cs) {
        for (const auto& c : cs) lp_.add_row(c.expr, c.rel, LinExpr(), c.label);
    }

    // n is over slots named `names` (duplicates allowed); the result is over
    // the tree variables of ctx.
    static SymAnnotation embed(SymAnnotation n, std::vector<std::string> names, const std::vector<std::string>& ctx_trees) {
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = names.size(); j-- > i + 1;)
                if (names[j] == names[i]) {
                    n = share(n, i, j);
                    names.erase(names.begin() + std::ptrdiff_t(j));
                }
        std::vector<std::size_t> target;
        for (const auto& x : names) {
            auto it = std::find(ctx_trees.begin(), ctx_trees.end(), x);
            if (it == ctx_trees.end()) throw TypingError("'" + x + "' missing from context");
            target.push_back(std::size_t(it - ctx_trees.begin()));
        }
        SymAnnotation out(ctx_trees.size());
        for (std::size_t i = 0; i < n.arity; ++i) out.rank[target[i]] = n.rank[i];
        for (const auto& [idx, e] : n.log) {
            LogIndex m = zero_index(ctx_trees.size(), idx.b);
            for (std::size_t i = 0; i < n.arity; ++i) m.a[target[i]] = idx.a[i];
            add_to(out, m, e);
        }
        return out;
    }

    void derive(TypingContext ctx, SymAnnotation q, const Expr& e, SimpleType type, const SymAnnotation& qp,
                TypingMode mode, unsigned depth, const std::string& path) {
        auto fv = free_variables(e);
        for (std::size_t i = ctx.vars.size(); i-- > 0;) {
            const auto& x = ctx.vars[i].first;
            if (std::find(fv.begin(), fv.end(), x) != fv.end()) continue;
            if (ctx.vars[i].second == SimpleType::Tree) q = project_slot(q, slot_of(ctx, x));
            ctx.vars.erase(ctx.vars.begin() + std::ptrdiff_t(i));
        }
        auto trees = ctx.trees();

        if (auto v = e.as<VarRef>()) {
            (void)v;
            dominate_folded(q, qp, tag(path, "var"));
        } else if (e.as<BoolLit>() || e.as<Compare>()) {
            dominate_folded(q, qp, tag(path, "cmp"));
        } else if (e.as<LeafLit>()) {
            dominate_folded(q, leaf_image(qp), tag(path, "leaf"));
        } else if (auto n = e.as<NodeLit>()) {
            dominate_folded(q, embed(node_image(qp), {n->left, n->right}, trees), tag(path, "node"));
        } else if (auto ite = e.as<IfThenElse>()) {
            derive(ctx, q, *ite->then_branch, type, qp, mode, depth, path + "/then");
            derive(ctx, q, *ite->else_branch, type, qp, mode, depth, path + "/else");
        } else if (auto m = e.as<MatchTree>()) {
            match(ctx, q, e, *m, type, qp, mode, depth, path);
        } else if (auto let = e.as<LetIn>()) {
            let_in(ctx, q, *let, type, qp, mode, depth, path);
        } else if (auto app = e.as<Apply>()) {
            apply(ctx, q, *app, qp, mode, path);
        } else {
            throw TypingError("unknown expression form");
        }
    }

    void match(TypingContext ctx, SymAnnotation q, const Expr& e, const MatchTree& m, SimpleType type,
               const SymAnnotation& qp, TypingMode mode, unsigned depth, const std::string& path) {
        // Leaf branch.
        {
            std::size_t k = slot_of(ctx, m.scrutinee);
            ExprPtr body = m.leaf_branch;
            auto fv = free_variables(*body);
            if (std::find(fv.begin(), fv.end(), m.scrutinee) != fv.end())
                body = make_expr(LetIn{m.scrutinee, make_expr(LeafLit{}, e.pos), body}, e.pos);
            derive(erase(ctx, m.scrutinee), match_leaf_image(q, k), *body, type, qp, mode, depth, path + "/leaf");
        }
        // Node branch; pattern variables shadow older bindings.
        for (const auto* x : {&m.left, &m.label, &m.right}) {
            if (*x == m.scrutinee || !ctx.contains(*x)) continue;
            if (ctx.type_of(*x) == SimpleType::Tree) q = project_slot(q, slot_of(ctx, *x));
            ctx = erase(ctx, *x);
        }
        std::size_t k = slot_of(ctx, m.scrutinee);
        SymAnnotation r = match_node_image(q, k);
        TypingContext node_ctx = erase(ctx, m.scrutinee);
        node_ctx.vars.push_back({m.left, SimpleType::Tree});
        node_ctx.vars.push_back({m.label, SimpleType::Base});
        node_ctx.vars.push_back({m.right, SimpleType::Tree});
        if (m.left == m.right) throw TypingError("match pattern binds '" + m.left + "' twice");
        ExprPtr body = m.node_branch;
        auto fv = free_variables(*body);
        bool rebinding = m.scrutinee != m.left && m.scrutinee != m.label && m.scrutinee != m.right;
        if (rebinding && std::find(fv.begin(), fv.end(), m.scrutinee) != fv.end())
            body = make_expr(LetIn{m.scrutinee, make_expr(NodeLit{m.left, m.label, m.right}, e.pos), body}, e.pos);
        derive(node_ctx, r, *body, type, qp, mode, depth, path + "/node");
    }

    void let_in(const TypingContext& ctx, const SymAnnotation& q, const LetIn& let, SimpleType type,
                const SymAnnotation& qp, TypingMode mode, unsigned depth, const std::string& path) {
        ++stats.lets;
        std::string t = tag(path, "let");
        TypeEnv env;
        for (const auto& [x, ty] : ctx.vars) env[x] = ty;
        SimpleType bound_type = logpot::type_of(prog_, env, *let.bound);

        auto fv1 = free_variables(*let.bound);
        auto fv2 = free_variables(*let.body);
        fv2.erase(std::remove(fv2.begin(), fv2.end(), let.name), fv2.end());
        auto in = [](const std::vector<std::string>& s, const std::string& x) { return std::find(s.begin(), s.end(), x) != s.end(); };

        TypingContext gamma, delta;
        for (const auto& v : ctx.vars) {
            if (in(fv1, v.first)) gamma.vars.push_back(v);
            if (in(fv2, v.first)) delta.vars.push_back(v);
        }
        auto gt = gamma.trees(), dt = delta.trees();
        const std::size_t m = gt.size(), k = dt.size();

        const std::size_t ra = result_arity(bound_type);
        std::vector<std::vector<unsigned>> family;
        if (ra && k > 0) {
            if (depth < opts_.cf_nesting_cap) family = default_family(k);
            else ++stats.cap_hits;
        }

        // Weakening into a fresh annotation over Γ ++ Δ, shared back onto ctx.
        // Indices the let rule would discard are left out of S.
        SymAnnotation s(m + k);
        for (std::size_t i = 0; i < m + k; ++i) s.rank[i] = LinExpr::var(lp_.add_var(t + ".S.rank" + std::to_string(i + 1)));
        for (const auto& idx : opts_.tmpl.indices(m + k)) {
            if (vanishing(idx)) continue;
            std::vector<unsigned> ag(idx.a.begin(), idx.a.begin() + std::ptrdiff_t(m));
            std::vector<unsigned> ad(idx.a.begin() + std::ptrdiff_t(m), idx.a.end());
            bool g0 = std::all_of(ag.begin(), ag.end(), [](unsigned x) { return x == 0; });
            bool d0 = std::all_of(ad.begin(), ad.end(), [](unsigned x) { return x == 0; });
            if (!g0 && !d0 && std::find(family.begin(), family.end(), ad) == family.end()) continue;
            s.log[idx] = LinExpr::var(lp_.add_var(t + ".S.log" + to_string(idx)));
        }
        std::vector<std::string> names = gt;
        names.insert(names.end(), dt.begin(), dt.end());
        oblige(q, embed(s, names, ctx.trees()), t + ".weak");
        SymAnnotation pp = fresh_annotation(lp_, ra, opts_.tmpl, t + ".P'");
        std::vector<SymAnnotation> ppb;
        for (std::size_t f = 0; f < family.size(); ++f)
            ppb.push_back(fresh_annotation(lp_, 1, opts_.tmpl, t + ".cf" + std::to_string(f), false));
        LetImages img = let_images(lp_, s, m, k, pp, family, ppb, opts_.let_constants == LetConstants::Split, t);
        rows(img.side);

        derive(gamma, img.p, *let.bound, bound_type, pp, mode, depth, path + "/bind");
        for (std::size_t f = 0; f < family.size(); ++f)
            derive(gamma, img.pb[f], *let.bound, bound_type, ppb[f], TypingMode::CostFree, depth + 1,
                   path + "/cf" + std::to_string(f));
        delta.vars.push_back({let.name, bound_type});
        derive(delta, img.r, *let.body, type, qp, mode, depth, path + "/body");
    }

    void apply(const TypingContext& ctx, const SymAnnotation& q, const Apply& app, const SymAnnotation& qp,
               TypingMode mode, const std::string& path) {
        const FunctionDef* f = prog_.find(app.function);
        if (!f || !f->type) throw TypingError("unknown function '" + app.function + "'");
        std::vector<std::string> names;
        for (std::size_t i = 0; i < f->params.size(); ++i)
            if (f->type->params[i] == SimpleType::Tree) names.push_back(app.args[i]);
        const std::size_t mf = names.size(), rf = result_arity(f->type->result);
        std::string t = tag(path, "app");

        SymAnnotation need(mf), res(rf);
        auto it = calls_.find(app.function);
        if (mode == TypingMode::Costed) {
            if (it == calls_.end() || it->second.costed.empty())
                throw TypingError("no costed signature for '" + app.function + "'");
            const auto& pairs = it->second.costed;
            if (pairs.size() == 1) {
                need = pairs[0].first;
                res = pairs[0].second;
            } else {
                LinExpr total;
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    VarId mu = lp_.add_var(t + ".mu" + std::to_string(i));
                    total += LinExpr::var(mu);
                    need = plus(need, scaled(pairs[i].first, mu));
                    res = plus(res, scaled(pairs[i].second, mu));
                }
                lp_.add_row(total, Relation::Eq, 1, t + ".convex");
            }
            need = add_constant(need, LinExpr(1));
        }
        if (it != calls_.end())
            for (std::size_t i = 0; i < it->second.cost_free.size(); ++i) {
                VarId lambda = lp_.add_var(t + ".lambda" + std::to_string(i));
                need = plus(need, scaled(lift(it->second.cost_free[i].first), lambda));
                res = plus(res, scaled(lift(it->second.cost_free[i].second), lambda));
            }
        std::vector<Constraint> dom;
        dominate(dom, res, qp, t + ".result");
        rows(dom);
        dominate_folded(q, embed(need, names, ctx.trees()), t);
    }
};

std::vector<std::string> reachable(const Program& p, std::vector<std::string> roots) {
    if (roots.empty())
        for (const auto& f : p.functions) roots.push_back(f.name);
    std::set<std::string> seen;
    std::vector<std::string> order;
    std::function<void(const Expr&)> scan;
    std::vector<std::string> stack = roots;
    scan = [&](const Expr& e) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Apply>) stack.push_back(n.function);
                else if constexpr (std::is_same_v<T, IfThenElse>) {
                    scan(*n.then_branch);
                    scan(*n.else_branch);
                } else if constexpr (std::is_same_v<T, LetIn>) {
                    scan(*n.bound);
                    scan(*n.body);
                } else if constexpr (std::is_same_v<T, MatchTree>) {
                    scan(*n.leaf_branch);
                    scan(*n.node_branch);
                }
            },
            e.node);
    };
    while (!stack.empty()) {
        std::string f = stack.back();
        stack.pop_back();
        if (!seen.insert(f).second) continue;
        const FunctionDef* d = p.find(f);
        if (!d) throw TypingError("unknown function '" + f + "'");
        order.push_back(f);
        scan(*d->body);
    }
    std::vector<std::string> out;
    for (const auto& f : p.functions)
        if (seen.count(f.name)) out.push_back(f.name);
    return out;
}

Program ensure_resolved(const Program& p) {
    for (const auto& f : p.functions)
        if (!f.type) return resolve_types(p);
    return p;
}

// Unit candidates log(a·x + c) -> log(|result| + c').
std::vector<std::pair<Annotation, Annotation>> unit_candidates(const FunctionDef& f, const IndexTemplate& t) {
    std::vector<std::pair<Annotation, Annotation>> out;
    if (f.type->result != SimpleType::Tree) return out;
    std::size_t m = tree_count(f.type->params);
    if (m == 0) return out;
    IndexTemplate unit = t;
    unit.a_entries = {0, 1};
    for (const auto& in : unit.indices(m)) {
        if (in.is_constant()) continue;
        for (unsigned c : t.b_values) {
            Annotation q(m), qp(1);
            q.log[in] = 1;
            qp.log[LogIndex{{1}, c}] = 1;
            out.emplace_back(q, qp);
        }
    }
    return out;
}

void record(DerivationStats& total, const DerivationStats& s, const LinearProgram& lp, std::size_t pivots) {
    total.lp_vars += lp.var_count();
    total.lp_rows += lp.rows().size();
    total.obligations += s.obligations;
    total.lets += s.lets;
    total.cap_hits += s.cap_hits;
    total.pivots += pivots;
}

} // namespace

SignatureTable infer_cost_free(const Program& prog, const TypingOptions& opts, const std::vector<std::string>& functions,
                               const SignatureTable& given) {
    Program p = ensure_resolved(prog);
    CallTable calls;
    for (const auto& name : functions) {
        const FunctionDef* f = p.find(name);
        if (!f) throw TypingError("unknown function '" + name + "'");
        auto g = given.find(name);
        if (g != given.end() && !g->second.cost_free.empty()) calls[name].cost_free = g->second.cost_free;
        else if (opts.infer_cost_free) calls[name].cost_free = unit_candidates(*f, opts.tmpl);
        else calls[name];
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& name : functions) {
            const FunctionDef& f = *p.find(name);
            auto& set = calls[name].cost_free;
            for (std::size_t i = 0; i < set.size();) {
                LinearProgram lp;
                Deriver d(p, lp, opts, calls);
                bool ok;
                try {
                    d.function(f, lift(set[i].first), lift(set[i].second), TypingMode::CostFree);
                    ok = solve(lp, opts.lp).status == LpStatus::Optimal;
                } catch (const TypingError&) {
                    ok = false;
                }
                if (ok) {
                    ++i;
                } else {
                    set.erase(set.begin() + std::ptrdiff_t(i));
                    changed = true;
                }
            }
        }
    }
    SignatureTable out;
    for (const auto& name : functions) {
        const FunctionDef& f = *p.find(name);
        AnnotatedSignature sig;
        sig.function = name;
        sig.type = *f.type;
        sig.cost_free = calls[name].cost_free;
        out[name] = sig;
    }
    return out;
}

CheckResult check_program(const Program& prog, const SignatureTable& sigs, const TypingOptions& opts) {
    Program p = ensure_resolved(prog);
    CheckResult result;
    std::vector<std::string> roots;
    for (const auto& [name, sig] : sigs)
        if (!sig.costed.empty() || !sig.cost_free.empty()) roots.push_back(name);
    auto functions = reachable(p, roots);

    SignatureTable cf = infer_cost_free(p, opts, functions, sigs);
    result.cost_free = cf;
    CallTable calls;
    for (const auto& name : functions) {
        calls[name].cost_free = cf[name].cost_free;
        auto s = sigs.find(name);
        if (s != sigs.end())
            for (const auto& [q, qp] : s->second.costed) calls[name].costed.emplace_back(lift(q), lift(qp));
    }

    result.typable = true;
    for (const auto& name : functions) {
        auto s = sigs.find(name);
        if (s == sigs.end()) continue;
        const FunctionDef& f = *p.find(name);
        FunctionVerdict v;
        v.function = name;
        v.typable = true;
        if (s->second.cost_free.size() > cf[name].cost_free.size()) {
            v.typable = false;
            v.reason = "declared cost-free pairs are not derivable";
        }
        for (std::size_t i = 0; i < s->second.costed.size() && v.typable; ++i) {
            const auto& [q, qp] = s->second.costed[i];
            if (q.arity != tree_count(f.type->params) || qp.arity != result_arity(f.type->result))
                throw TypingError("signature of '" + name + "' does not match its type " + to_string(*f.type));
            LinearProgram lp;
            Deriver d(p, lp, opts, calls);
            try {
                d.function(f, lift(q), lift(qp), TypingMode::Costed);
            } catch (const TypingError& e) {
                v.typable = false;
                v.reason = e.what();
                break;
            }
            LpOutcome out = solve(lp, opts.lp);
            record(v.stats, d.stats, lp, out.pivots);
            if (out.status != LpStatus::Optimal) {
                v.typable = false;
                v.reason = "constraints for costed pair " + std::to_string(i + 1) + " are infeasible";
            }
        }
        if (v.stats.cap_hits)
            result.notes.push_back(name + ": cost-free nesting cap reached " + std::to_string(v.stats.cap_hits) + " times");
        result.typable = result.typable && v.typable;
        result.functions.push_back(v);
    }
    return result;
}

InferResult infer_program(const Program& prog, const TypingOptions& opts, const std::vector<std::string>& roots) {
    Program p = ensure_resolved(prog);
    InferResult result;
    auto functions = reachable(p, roots);
    SignatureTable cf = infer_cost_free(p, opts, functions);

    LinearProgram lp;
    CallTable calls;
    std::map<std::string, std::pair<SymAnnotation, SymAnnotation>> unknown;
    LinExpr input_weight, result_weight;
    for (const auto& name : functions) {
        const FunctionDef& f = *p.find(name);
        SymAnnotation q = fresh_annotation(lp, tree_count(f.type->params), opts.tmpl, name + ".Q");
        SymAnnotation qp = fresh_annotation(lp, result_arity(f.type->result), opts.tmpl, name + ".Q'");
        for (const auto& r : q.rank) input_weight += r;
        for (const auto& [idx, e] : q.log) input_weight += e;
        for (const auto& r : qp.rank) result_weight += r;
        for (const auto& [idx, e] : qp.log) result_weight += e;
        unknown[name] = {q, qp};
        calls[name].costed.push_back({q, qp});
        calls[name].cost_free = cf[name].cost_free;
    }
    Deriver d(p, lp, opts, calls);
    for (const auto& name : functions) {
        const auto& [q, qp] = unknown[name];
        d.function(*p.find(name), q, qp, TypingMode::Costed);
    }
    lp.set_objective(input_weight);
    LpOutcome out = solve(lp, opts.lp);
    record(result.stats, d.stats, lp, out.pivots);
    if (d.stats.cap_hits)
        result.notes.push_back("cost-free nesting cap reached " + std::to_string(d.stats.cap_hits) + " times");
    if (out.status != LpStatus::Optimal) {
        result.feasible = false;
        result.hint = "no signature exists over template " + to_string(opts.tmpl) +
                      "; try a larger template, e.g. --template a=0..1,b=0..3";
        return result;
    }
    result.objective = out.objective;
    std::vector<Rational> values = out.values;
    if (opts.refine_results) {
        LinearProgram lp2 = lp;
        lp2.add_row(input_weight, Relation::Le, out.objective, "optimum");
        lp2.set_objective(LinExpr() - result_weight);
        LpOutcome out2 = solve(lp2, opts.lp);
        result.stats.pivots += out2.pivots;
        if (out2.status == LpStatus::Optimal) values = out2.values;
        else result.notes.push_back("result refinement skipped: " + std::string(to_string(out2.status)));
    }
    result.feasible = true;
    for (const auto& name : functions) {
        const FunctionDef& f = *p.find(name);
        AnnotatedSignature sig;
        sig.function = name;
        sig.type = *f.type;
        sig.costed.emplace_back(evaluate(unknown[name].first, values), evaluate(unknown[name].second, values));
        sig.cost_free = cf[name].cost_free;
        result.signatures[name] = sig;
    }
    return result;
}

} // namespace logpot

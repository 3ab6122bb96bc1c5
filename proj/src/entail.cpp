#include "logpot/entail.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace logpot {

std::string to_string(const PotentialAtom& a) {
    if (a.kind == PotentialAtom::Kind::Rank) return "rk(" + std::to_string(a.slot + 1) + ")";
    return "log" + to_string(a.index);
}

std::optional<std::size_t> FactSystem::find(const LogIndex& i) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), i);
    if (it == atoms.end() || !(*it == i)) return std::nullopt;
    return std::size_t(it - atoms.begin());
}

bool FactSystem::holds_for(const std::vector<double>& sizes, double tol) const {
    std::vector<double> x(atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        double arg = atoms[j].b;
        for (std::size_t k = 0; k < sizes.size(); ++k) arg += atoms[j].a[k] * sizes[k];
        x[j] = log_prime(arg);
    }
    for (const auto& row : rows) {
        double s = 0;
        for (const auto& [j, c] : row.coeffs) s += c.get_d() * x[j];
        if (s > row.bound.get_d() + tol) return false;
    }
    return true;
}

namespace {

LogIndex plus(const LogIndex& u, const LogIndex& v) {
    LogIndex w;
    w.b = u.b + v.b;
    for (std::size_t k = 0; k < u.a.size(); ++k) w.a.push_back(u.a[k] + v.a[k]);
    return w;
}

bool below(const LogIndex& u, const LogIndex& v) {
    if (u.b > v.b) return false;
    for (std::size_t k = 0; k < u.a.size(); ++k)
        if (u.a[k] > v.a[k]) return false;
    return true;
}

void add_support(std::set<LogIndex>& out, const Annotation& q) {
    for (const auto& [idx, c] : q.log)
        if (sgn(c) != 0) out.insert(idx);
}

} // namespace

std::pair<unsigned, unsigned> log2_bracket(unsigned b) {
    if (b <= 1) return {0, 0};
    unsigned lo = 0;
    while ((2u << lo) <= b) ++lo;
    unsigned hi = (1u << lo) == b ? lo : lo + 1;
    return {lo, hi};
}

std::vector<LogIndex> closure_of(std::vector<LogIndex> atoms) {
    std::set<LogIndex> out(atoms.begin(), atoms.end());
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i; j < atoms.size(); ++j)
            if (atoms[i].at_least_one() && atoms[j].at_least_one()) out.insert(plus(atoms[i], atoms[j]));
    return {out.begin(), out.end()};
}

std::vector<LogIndex> collect_atoms(const Annotation& hi, const Annotation& lo, bool closure) {
    std::set<LogIndex> s;
    add_support(s, hi);
    add_support(s, lo);
    std::vector<LogIndex> atoms(s.begin(), s.end());
    return closure ? closure_of(std::move(atoms)) : atoms;
}

FactSystem expert_facts(std::size_t arity, std::vector<LogIndex> atoms) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    for (const auto& a : atoms)
        if (a.a.size() != arity) throw std::invalid_argument("expert_facts: atom " + to_string(a) + " has wrong arity");
    FactSystem fs;
    fs.arity = arity;
    fs.atoms = std::move(atoms);
    const auto& at = fs.atoms;
    const std::size_t n = at.size();

    // F1 on covering pairs only; the rest follows by transitivity.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !below(at[i], at[j])) continue;
            bool covered = true;
            for (std::size_t k = 0; k < n && covered; ++k)
                if (k != i && k != j && below(at[i], at[k]) && below(at[k], at[j])) covered = false;
            if (!covered) continue;
            fs.rows.push_back({"F1", {{i, 1}, {j, -1}}, 0});
        }

    // F2
    for (std::size_t i = 0; i < n; ++i) {
        if (!at[i].at_least_one()) continue;
        for (std::size_t j = i; j < n; ++j) {
            if (!at[j].at_least_one()) continue;
            auto w = fs.find(plus(at[i], at[j]));
            if (!w) continue;
            FactRow row{"F2", {}, -2};
            row.coeffs[i] += 1;
            row.coeffs[j] += 1;
            row.coeffs[*w] -= 2;
            fs.rows.push_back(std::move(row));
        }
    }

    // F3
    for (std::size_t i = 0; i < n; ++i) {
        if (!at[i].is_constant()) continue;
        auto [lo, hi] = log2_bracket(at[i].b);
        fs.rows.push_back({"F3", {{i, 1}}, Rational(hi)});
        fs.rows.push_back({"F3", {{i, -1}}, -Rational(lo)});
    }

    // F4
    for (std::size_t i = 0; i < n; ++i)
        if (at[i].at_least_one() && !at[i].is_constant()) fs.rows.push_back({"F4", {{i, -1}}, 0});
    return fs;
}

std::optional<FarkasCertificate> farkas_entails(const FactSystem& facts, const std::vector<std::vector<Rational>>& U,
                                                const std::vector<Rational>& v) {
    if (U.size() != v.size()) throw std::invalid_argument("farkas_entails: goal shape mismatch");
    FarkasCertificate cert;
    for (std::size_t g = 0; g < U.size(); ++g) {
        if (U[g].size() != facts.atoms.size()) throw std::invalid_argument("farkas_entails: goal width mismatch");
        LinearProgram lp;
        std::vector<LinExpr> goal(U[g].begin(), U[g].end());
        auto f = farkas_constraints(lp, facts, goal, v[g], "g" + std::to_string(g));
        LinExpr obj;
        for (VarId x : f) obj += LinExpr::var(x);
        lp.set_objective(obj);
        LpOutcome out = solve(lp);
        if (out.status != LpStatus::Optimal) return std::nullopt;
        std::vector<Rational> row;
        for (VarId x : f) row.push_back(out.values[x]);
        cert.multipliers.push_back(std::move(row));
    }
    return cert;
}

bool verify_certificate(const FactSystem& facts, const std::vector<std::vector<Rational>>& U,
                        const std::vector<Rational>& v, const FarkasCertificate& cert) {
    if (cert.multipliers.size() != U.size() || v.size() != U.size()) return false;
    for (std::size_t g = 0; g < U.size(); ++g) {
        const auto& F = cert.multipliers[g];
        if (F.size() != facts.rows.size() || U[g].size() != facts.atoms.size()) return false;
        std::vector<Rational> FA(facts.atoms.size());
        Rational Fb;
        for (std::size_t k = 0; k < F.size(); ++k) {
            if (sgn(F[k]) < 0) return false;
            if (sgn(F[k]) == 0) continue;
            for (const auto& [j, c] : facts.rows[k].coeffs) FA[j] += F[k] * c;
            Fb += F[k] * facts.rows[k].bound;
        }
        for (std::size_t j = 0; j < FA.size(); ++j)
            if (U[g][j] > FA[j]) return false;
        if (Fb > v[g]) return false;
    }
    return true;
}

EntailmentResult entails(const EntailmentObligation<Rational>& ob, bool closure) {
    EntailmentResult res;
    res.rank_ok = true;
    for (std::size_t i = 0; i < ob.arity; ++i)
        if (ob.hi.rank[i] < ob.lo.rank[i]) res.rank_ok = false;
    res.facts = expert_facts(ob.arity, collect_atoms(ob.hi, ob.lo, closure));
    res.goal.resize(res.facts.atoms.size());
    for (std::size_t j = 0; j < res.facts.atoms.size(); ++j)
        res.goal[j] = ob.lo.get(res.facts.atoms[j]) - ob.hi.get(res.facts.atoms[j]);
    res.certificate = farkas_entails(res.facts, {res.goal}, {Rational(0)});
    return res;
}

std::vector<VarId> farkas_constraints(LinearProgram& lp, const FactSystem& facts, const std::vector<LinExpr>& goal,
                                      const LinExpr& bound, const std::string& tag) {
    if (goal.size() != facts.atoms.size()) throw std::invalid_argument("farkas_constraints: goal width mismatch");
    std::vector<VarId> f;
    f.reserve(facts.rows.size());
    std::vector<LinExpr> FA(facts.atoms.size());
    LinExpr Fb;
    for (std::size_t k = 0; k < facts.rows.size(); ++k) {
        VarId x = lp.add_var(tag + ".f" + std::to_string(k));
        f.push_back(x);
        for (const auto& [j, c] : facts.rows[k].coeffs) FA[j].terms[x] = c;
        if (sgn(facts.rows[k].bound) != 0) Fb.terms[x] = facts.rows[k].bound;
    }
    for (std::size_t j = 0; j < facts.atoms.size(); ++j) {
        if (FA[j].terms.empty() && goal[j].is_constant() && sgn(goal[j].constant) <= 0) continue;
        lp.add_row(FA[j], Relation::Ge, goal[j], tag + ".atom" + to_string(facts.atoms[j]));
    }
    lp.add_row(Fb, Relation::Le, bound, tag + ".bound");
    return f;
}

std::vector<LinExpr> rank_side(const EntailmentObligation<LinExpr>& ob) {
    std::vector<LinExpr> out;
    for (std::size_t i = 0; i < ob.arity; ++i) out.push_back(ob.hi.rank[i] - ob.lo.rank[i]);
    return out;
}

void check_rank_side(LinearProgram& lp, const EntailmentObligation<LinExpr>& ob, const std::string& tag) {
    auto diffs = rank_side(ob);
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i].is_constant() && sgn(diffs[i].constant) >= 0) continue;
        lp.add_row(diffs[i], Relation::Ge, 0, tag + ".rank" + std::to_string(i + 1));
    }
}

void encode_obligation(LinearProgram& lp, const EntailmentObligation<LinExpr>& ob, const FactSystem& facts,
                       const std::string& tag) {
    check_rank_side(lp, ob, tag);
    for (const auto* side : {&ob.hi, &ob.lo})
        for (const auto& [idx, e] : side->log)
            if (!e.is_zero() && !(idx.is_constant() && idx.b <= 1) && !facts.find(idx))
                throw std::logic_error("obligation " + tag + " mentions atom " + to_string(idx) + " outside the fact system");
    std::vector<LinExpr> goal(facts.atoms.size());
    bool trivial = true;
    for (std::size_t j = 0; j < facts.atoms.size(); ++j) {
        goal[j] = ob.lo.get(facts.atoms[j]) - ob.hi.get(facts.atoms[j]);
        if (!(goal[j].is_constant() && sgn(goal[j].constant) <= 0)) trivial = false;
    }
    if (trivial) return;
    farkas_constraints(lp, facts, goal, LinExpr(), tag);
}

std::string certificate_json(const FactSystem& facts, const FarkasCertificate& cert, const std::vector<Rational>& goal) {
    using nlohmann::json;
    json j;
    j["arity"] = facts.arity;
    json atoms = json::array();
    for (const auto& a : facts.atoms) atoms.push_back(to_string(PotentialAtom::log_of(a)));
    j["atoms"] = atoms;
    json rows = json::array();
    for (const auto& r : facts.rows) {
        json row;
        row["schema"] = r.schema;
        json coeffs = json::object();
        for (const auto& [k, c] : r.coeffs) coeffs[std::to_string(k)] = c.get_str();
        row["coeffs"] = coeffs;
        row["bound"] = r.bound.get_str();
        rows.push_back(row);
    }
    j["facts"] = rows;
    json g = json::array();
    for (const auto& c : goal) g.push_back(c.get_str());
    j["goal"] = g;
    json mult = json::array();
    for (const auto& row : cert.multipliers) {
        json m = json::object();
        for (std::size_t k = 0; k < row.size(); ++k)
            if (sgn(row[k]) != 0) m[std::to_string(k)] = row[k].get_str();
        mult.push_back(m);
    }
    j["multipliers"] = mult;
    return j.dump(2);
}

} // namespace logpot

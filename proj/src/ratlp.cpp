#include "logpot/ratlp.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "smallq.hpp"

namespace logpot {

LinExpr LinExpr::var(VarId v, const Rational& c) {
    LinExpr e;
    if (sgn(c) != 0) e.terms[v] = c;
    return e;
}

bool LinExpr::is_constant() const { return terms.empty(); }
bool LinExpr::is_zero() const { return terms.empty() && sgn(constant) == 0; }

Rational LinExpr::coeff(VarId v) const {
    auto it = terms.find(v);
    return it == terms.end() ? Rational(0) : it->second;
}

Rational LinExpr::evaluate(const std::vector<Rational>& values) const {
    Rational s = constant;
    for (const auto& [v, c] : terms) s += c * values.at(v);
    return s;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    constant += o.constant;
    for (const auto& [v, c] : o.terms) {
        auto [it, fresh] = terms.try_emplace(v, c);
        if (!fresh) {
            it->second += c;
            if (sgn(it->second) == 0) terms.erase(it);
        }
    }
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    constant -= o.constant;
    for (const auto& [v, c] : o.terms) {
        auto [it, fresh] = terms.try_emplace(v, -c);
        if (!fresh) {
            it->second -= c;
            if (sgn(it->second) == 0) terms.erase(it);
        }
    }
    return *this;
}

LinExpr& LinExpr::operator*=(const Rational& k) {
    if (sgn(k) == 0) {
        terms.clear();
        constant = 0;
        return *this;
    }
    constant *= k;
    for (auto& [v, c] : terms) c *= k;
    return *this;
}

bool LinExpr::operator==(const LinExpr& o) const { return constant == o.constant && terms == o.terms; }

const char* to_string(Relation r) {
    switch (r) {
    case Relation::Le: return "<=";
    case Relation::Eq: return "=";
    case Relation::Ge: return ">=";
    }
    return "?";
}

const char* to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

VarId LinearProgram::add_var(std::string name, bool nonneg) {
    names_.push_back(std::move(name));
    nonneg_.push_back(nonneg);
    return names_.size() - 1;
}

void LinearProgram::add_row(const LinExpr& lhs, Relation rel, const LinExpr& rhs, std::string label) {
    LinExpr d = lhs - rhs;
    LpRow row;
    row.terms = std::move(d.terms);
    row.rel = rel;
    row.rhs = -d.constant;
    row.label = std::move(label);
    add_row(std::move(row));
}

void LinearProgram::add_row(LpRow row) {
    for (const auto& [v, c] : row.terms)
        if (v >= names_.size()) throw std::invalid_argument("lp row '" + row.label + "' references unknown variable");
    rows_.push_back(std::move(row));
}

namespace {

using Col = std::uint32_t;
using Q = SmallQ;
using Entry = std::pair<Col, Q>;
using SparseRow = std::vector<Entry>;

const Q* find(const SparseRow& r, Col c) {
    auto it = std::lower_bound(r.begin(), r.end(), c, [](const Entry& e, Col k) { return e.first < k; });
    return it != r.end() && it->first == c ? &it->second : nullptr;
}

// target -= k * src
void axpy(SparseRow& target, const Q& k, const SparseRow& src, SparseRow& scratch) {
    scratch.clear();
    scratch.reserve(target.size() + src.size());
    auto a = target.begin(), ae = target.end();
    auto b = src.begin(), be = src.end();
    Q t;
    while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
            scratch.push_back(std::move(*a));
            ++a;
        } else if (a == ae || b->first < a->first) {
            t = -k * b->second;
            scratch.emplace_back(b->first, t);
            ++b;
        } else {
            t = a->second - k * b->second;
            if (t.sign() != 0) scratch.emplace_back(a->first, t);
            ++a;
            ++b;
        }
    }
    target.swap(scratch);
}

enum class ColKind { Structural, Slack, Artificial };

class Tableau {
public:
    Tableau(const LinearProgram& lp, const LpOptions& opts) : lp_(lp), opts_(opts) { build(); }

    LpOutcome run() {
        LpOutcome out;
        // Phase 1.
        std::vector<Q> cost(ncols_, 0);
        for (Col c = 0; c < ncols_; ++c)
            if (kind_[c] == ColKind::Artificial) cost[c] = 1;
        price(cost);
        if (!iterate(out.pivots)) throw std::logic_error("phase 1 unbounded");
        if (objective_.sign() != 0) {
            out.status = LpStatus::Infeasible;
            out.farkas_ray = ray();
            return out;
        }
        drive_out_artificials(out.pivots);
        // Phase 2.
        cost.assign(ncols_, 0);
        for (const auto& [v, c] : lp_.objective().terms) {
            cost[pos_col_[v]] += Q(c);
            if (neg_col_[v] != none) cost[neg_col_[v]] -= Q(c);
        }
        for (Col c = 0; c < ncols_; ++c)
            if (kind_[c] == ColKind::Artificial) banned_[c] = true;
        price(cost);
        if (!iterate(out.pivots)) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        out.status = LpStatus::Optimal;
        std::vector<Rational> colval(ncols_, 0);
        for (std::size_t r = 0; r < rows_.size(); ++r) colval[basis_[r]] = rhs_[r].to_mpq();
        out.values.assign(lp_.var_count(), 0);
        for (VarId v = 0; v < lp_.var_count(); ++v) {
            out.values[v] = colval[pos_col_[v]];
            if (neg_col_[v] != none) out.values[v] -= colval[neg_col_[v]];
        }
        out.objective = lp_.objective().evaluate(out.values);
        return out;
    }

private:
    static constexpr Col none = std::numeric_limits<Col>::max();

    const LinearProgram& lp_;
    const LpOptions& opts_;
    Col ncols_ = 0;
    std::vector<ColKind> kind_;
    std::vector<bool> banned_;
    std::vector<Col> pos_col_, neg_col_;
    std::vector<SparseRow> rows_;
    std::vector<Q> rhs_;
    std::vector<Col> basis_;
    // Per original row: sign applied, and its slack/surplus and artificial columns.
    std::vector<int> row_sign_;
    std::vector<Col> row_slack_, row_art_;
    std::vector<int> slack_sign_;
    std::vector<Q> reduced_;
    Q objective_;
    SparseRow scratch_;

    Col new_col(ColKind k) {
        kind_.push_back(k);
        banned_.push_back(false);
        return ncols_++;
    }

    void build() {
        const std::size_t n = lp_.var_count();
        pos_col_.resize(n);
        neg_col_.assign(n, none);
        for (VarId v = 0; v < n; ++v) {
            pos_col_[v] = new_col(ColKind::Structural);
            if (!lp_.nonneg(v)) neg_col_[v] = new_col(ColKind::Structural);
        }
        const auto& rows = lp_.rows();
        row_sign_.resize(rows.size());
        row_slack_.assign(rows.size(), none);
        row_art_.assign(rows.size(), none);
        slack_sign_.assign(rows.size(), 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const LpRow& row = rows[i];
            int s = sgn(row.rhs) < 0 || (sgn(row.rhs) == 0 && row.rel == Relation::Ge) ? -1 : 1;
            row_sign_[i] = s;
            Relation rel = row.rel;
            if (s < 0 && rel != Relation::Eq) rel = rel == Relation::Le ? Relation::Ge : Relation::Le;
            SparseRow sr;
            for (const auto& [v, c] : row.terms) {
                if (sgn(c) == 0) continue;
                sr.emplace_back(pos_col_[v], Q(Rational(s * c)));
                if (neg_col_[v] != none) sr.emplace_back(neg_col_[v], Q(Rational(-s * c)));
            }
            if (rel == Relation::Le) {
                Col sl = new_col(ColKind::Slack);
                row_slack_[i] = sl;
                slack_sign_[i] = 1;
                sr.emplace_back(sl, 1);
                basis_.push_back(sl);
            } else {
                if (rel == Relation::Ge) {
                    Col sl = new_col(ColKind::Slack);
                    row_slack_[i] = sl;
                    slack_sign_[i] = -1;
                    sr.emplace_back(sl, -1);
                }
                Col art = new_col(ColKind::Artificial);
                row_art_[i] = art;
                sr.emplace_back(art, 1);
                basis_.push_back(art);
            }
            std::sort(sr.begin(), sr.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
            rows_.push_back(std::move(sr));
            rhs_.push_back(Q(Rational(s * row.rhs)));
        }
    }

    void price(const std::vector<Q>& cost) {
        reduced_ = cost;
        objective_ = 0;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const Q& cb = cost[basis_[r]];
            if (cb.sign() == 0) continue;
            for (const auto& [c, a] : rows_[r]) reduced_[c] -= cb * a;
            objective_ += cb * rhs_[r];
        }
    }

    void pivot(std::size_t r, Col c) {
        Q inv = Q(1) / *find(rows_[r], c);
        if (!inv.is_one()) {
            for (auto& e : rows_[r]) e.second *= inv;
            rhs_[r] *= inv;
        }
        const SparseRow& pr = rows_[r];
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i == r) continue;
            const Q* a = find(rows_[i], c);
            if (!a) continue;
            Q k = *a;
            axpy(rows_[i], k, pr, scratch_);
            rhs_[i] -= k * rhs_[r];
        }
        if (reduced_[c].sign() != 0) {
            Q k = reduced_[c];
            for (const auto& [col, a] : pr) reduced_[col] -= k * a;
            objective_ += k * rhs_[r];
        }
        basis_[r] = c;
    }

    // Returns false when the objective is unbounded below.
    bool iterate(std::size_t& pivots) {
        std::size_t degenerate = 0;
        for (;;) {
            if (pivots >= opts_.max_pivots) throw std::runtime_error("simplex pivot limit reached");
            bool bland = degenerate >= opts_.degenerate_limit;
            Col enter = none;
            for (Col c = 0; c < ncols_; ++c) {
                if (banned_[c] || reduced_[c].sign() >= 0) continue;
                if (enter == none || (!bland && reduced_[c] < reduced_[enter])) enter = c;
                if (bland) break;
            }
            if (enter == none) return true;
            std::size_t leave = rows_.size();
            Q best;
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                const Q* a = find(rows_[r], enter);
                if (!a || a->sign() <= 0) continue;
                Q ratio = rhs_[r] / *a;
                if (leave == rows_.size() || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == rows_.size()) return false;
            degenerate = best.sign() == 0 ? degenerate + 1 : 0;
            pivot(leave, enter);
            ++pivots;
        }
    }

    void drive_out_artificials(std::size_t& pivots) {
        for (std::size_t r = 0; r < rows_.size();) {
            if (kind_[basis_[r]] != ColKind::Artificial) {
                ++r;
                continue;
            }
            Col enter = none;
            for (const auto& [c, a] : rows_[r])
                if (kind_[c] != ColKind::Artificial && a.sign() != 0) {
                    enter = c;
                    break;
                }
            if (enter != none) {
                pivot(r, enter);
                ++pivots;
                ++r;
            } else {
                // Redundant row.
                rows_.erase(rows_.begin() + std::ptrdiff_t(r));
                rhs_.erase(rhs_.begin() + std::ptrdiff_t(r));
                basis_.erase(basis_.begin() + std::ptrdiff_t(r));
            }
        }
    }

    // Phase-1 duals read off the identity columns, mapped back to original rows.
    std::vector<Rational> ray() const {
        std::vector<Rational> y(lp_.rows().size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            Rational yi;
            if (row_art_[i] != none) yi = 1 - reduced_[row_art_[i]].to_mpq();
            else yi = -reduced_[row_slack_[i]].to_mpq();
            y[i] = row_sign_[i] * yi;
        }
        return y;
    }
};

bool holds(const LpRow& row, const Rational& lhs) {
    switch (row.rel) {
    case Relation::Le: return lhs <= row.rhs;
    case Relation::Eq: return lhs == row.rhs;
    case Relation::Ge: return lhs >= row.rhs;
    }
    return false;
}

} // namespace

LpOutcome solve(const LinearProgram& lp, const LpOptions& opts) {
    Tableau t(lp, opts);
    return t.run();
}

std::size_t first_violated_row(const LinearProgram& lp, const std::vector<Rational>& values) {
    if (values.size() != lp.var_count()) throw std::invalid_argument("assignment does not cover all variables");
    for (VarId v = 0; v < lp.var_count(); ++v)
        if (lp.nonneg(v) && sgn(values[v]) < 0) return lp.rows().size();
    const auto& rows = lp.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Rational s;
        for (const auto& [v, c] : rows[i].terms) s += c * values[v];
        if (!holds(rows[i], s)) return i;
    }
    return rows.size();
}

bool check_assignment(const LinearProgram& lp, const std::vector<Rational>& values) {
    if (values.size() != lp.var_count()) throw std::invalid_argument("assignment does not cover all variables");
    for (VarId v = 0; v < lp.var_count(); ++v)
        if (lp.nonneg(v) && sgn(values[v]) < 0) return false;
    return first_violated_row(lp, values) == lp.rows().size();
}

bool check_assignment(const LinearProgram& lp, const std::map<std::string, Rational>& values) {
    std::vector<Rational> v(lp.var_count());
    for (VarId i = 0; i < lp.var_count(); ++i) {
        auto it = values.find(lp.var_name(i));
        if (it == values.end()) throw std::invalid_argument("assignment misses variable '" + lp.var_name(i) + "'");
        v[i] = it->second;
    }
    return check_assignment(lp, v);
}

bool check_infeasibility_ray(const LinearProgram& lp, const std::vector<Rational>& ray) {
    const auto& rows = lp.rows();
    if (ray.size() != rows.size()) return false;
    std::vector<Rational> combo(lp.var_count());
    Rational rhs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Rational& y = ray[i];
        if (rows[i].rel == Relation::Le && sgn(y) > 0) return false;
        if (rows[i].rel == Relation::Ge && sgn(y) < 0) return false;
        for (const auto& [v, c] : rows[i].terms) combo[v] += y * c;
        rhs += y * rows[i].rhs;
    }
    for (VarId v = 0; v < lp.var_count(); ++v) {
        if (lp.nonneg(v) ? sgn(combo[v]) > 0 : sgn(combo[v]) != 0) return false;
    }
    return sgn(rhs) > 0;
}

namespace {

void write_terms(std::ostream& os, const LinearProgram& lp, const std::map<VarId, Rational>& terms) {
    if (terms.empty()) {
        os << "0";
        return;
    }
    bool first = true;
    for (const auto& [v, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << c.get_str() << " " << lp.var_name(v);
    }
}

} // namespace

std::string dump(const LinearProgram& lp) {
    std::ostringstream os;
    os << "minimize: ";
    write_terms(os, lp, lp.objective().terms);
    if (sgn(lp.objective().constant) != 0) os << " + " << lp.objective().constant.get_str();
    os << "\n";
    for (VarId v = 0; v < lp.var_count(); ++v) os << "var " << lp.var_name(v) << (lp.nonneg(v) ? " >= 0" : " free") << "\n";
    for (std::size_t i = 0; i < lp.rows().size(); ++i) {
        const LpRow& r = lp.rows()[i];
        os << (r.label.empty() ? "r" + std::to_string(i) : r.label) << ": ";
        write_terms(os, lp, r.terms);
        os << " " << to_string(r.rel) << " " << r.rhs.get_str() << "\n";
    }
    return os.str();
}

} // namespace logpot

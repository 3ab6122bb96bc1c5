#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace logpot {

using Rational = mpq_class;
using VarId = std::size_t;

// Affine expression Σ c_i x_i + constant.
struct LinExpr {
    std::map<VarId, Rational> terms;
    Rational constant;

    LinExpr() = default;
    LinExpr(int c) : constant(c) {}
    LinExpr(const Rational& c) : constant(c) {}
    static LinExpr var(VarId v, const Rational& c = 1);

    bool is_constant() const;
    bool is_zero() const;
    Rational coeff(VarId v) const;
    Rational evaluate(const std::vector<Rational>& values) const;

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(const Rational& k);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
    friend LinExpr operator*(const Rational& k, LinExpr a) { return a *= k; }
    bool operator==(const LinExpr& o) const;
};

enum class Relation { Le, Eq, Ge };

const char* to_string(Relation r);

// terms (rel) rhs; the expression constant is always folded into rhs.
struct LpRow {
    std::map<VarId, Rational> terms;
    Relation rel = Relation::Le;
    Rational rhs;
    std::string label;
};

class LinearProgram {
public:
    VarId add_var(std::string name, bool nonneg = true);
    // Adds lhs (rel) rhs; constants on either side are moved to the right.
    void add_row(const LinExpr& lhs, Relation rel, const LinExpr& rhs = LinExpr(), std::string label = {});
    void add_row(LpRow row);
    void set_objective(const LinExpr& minimise) { objective_ = minimise; }

    std::size_t var_count() const { return names_.size(); }
    const std::string& var_name(VarId v) const { return names_.at(v); }
    bool nonneg(VarId v) const { return nonneg_.at(v); }
    const std::vector<LpRow>& rows() const { return rows_; }
    const LinExpr& objective() const { return objective_; }

private:
    std::vector<std::string> names_;
    std::vector<bool> nonneg_;
    std::vector<LpRow> rows_;
    LinExpr objective_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    std::vector<Rational> values;
    Rational objective;
    // For infeasible programs: multipliers y, one per row, with y <= 0 on
    // <= rows, y >= 0 on >= rows, Σ y_i a_i <= 0 on nonnegative variables,
    // = 0 on free ones, and Σ y_i b_i > 0.
    std::vector<Rational> farkas_ray;
    std::size_t pivots = 0;
};

struct LpOptions {
    // Consecutive degenerate pivots after which pricing switches to Bland's rule.
    std::size_t degenerate_limit = 5000;
    std::size_t max_pivots = 2'000'000;
};

LpOutcome solve(const LinearProgram& lp, const LpOptions& opts = {});

bool check_assignment(const LinearProgram& lp, const std::vector<Rational>& values);
bool check_assignment(const LinearProgram& lp, const std::map<std::string, Rational>& values);
bool check_infeasibility_ray(const LinearProgram& lp, const std::vector<Rational>& ray);

// Index of the first violated row, or rows().size() when all hold.
std::size_t first_violated_row(const LinearProgram& lp, const std::vector<Rational>& values);

// One row per line: `label: 3 x + -1/2 y <= 4`, preceded by the objective and variables.
std::string dump(const LinearProgram& lp);

} // namespace logpot

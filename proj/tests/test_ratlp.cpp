#include "doctest.h"

#include <array>
#include <optional>
#include <random>

#include "logpot/ratlp.hpp"

using namespace logpot;

namespace {

struct Dense {
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b, c;
};

// min c·x subject to A x >= b, x >= 0.
LinearProgram build(const Dense& d, std::vector<VarId>& x) {
    LinearProgram lp;
    x.clear();
    for (std::size_t j = 0; j < d.c.size(); ++j) x.push_back(lp.add_var("x" + std::to_string(j)));
    for (std::size_t i = 0; i < d.A.size(); ++i) {
        LinExpr e;
        for (std::size_t j = 0; j < x.size(); ++j) e += LinExpr::var(x[j], d.A[i][j]);
        lp.add_row(e, Relation::Ge, d.b[i], "r" + std::to_string(i));
    }
    LinExpr obj;
    for (std::size_t j = 0; j < x.size(); ++j) obj += LinExpr::var(x[j], d.c[j]);
    lp.set_objective(obj);
    return lp;
}

// Vertex enumeration for two variables.
std::optional<Rational> brute_force_2d(const Dense& d) {
    std::vector<std::array<Rational, 3>> lines;
    for (std::size_t i = 0; i < d.A.size(); ++i) lines.push_back({d.A[i][0], d.A[i][1], d.b[i]});
    lines.push_back({1, 0, 0});
    lines.push_back({0, 1, 0});
    std::optional<Rational> best;
    for (std::size_t p = 0; p < lines.size(); ++p)
        for (std::size_t q = p + 1; q < lines.size(); ++q) {
            const auto& [a1, b1, c1] = lines[p];
            const auto& [a2, b2, c2] = lines[q];
            Rational det = a1 * b2 - a2 * b1;
            if (sgn(det) == 0) continue;
            Rational x = (c1 * b2 - c2 * b1) / det, y = (a1 * c2 - a2 * c1) / det;
            if (sgn(x) < 0 || sgn(y) < 0) continue;
            bool ok = true;
            for (std::size_t i = 0; i < d.A.size() && ok; ++i) ok = d.A[i][0] * x + d.A[i][1] * y >= d.b[i];
            if (!ok) continue;
            Rational v = d.c[0] * x + d.c[1] * y;
            if (!best || v < *best) best = v;
        }
    return best;
}

Dense random_dense(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_int_distribution<int> coeff(-3, 5), cost(1, 6), rhs(-4, 8);
    Dense d;
    d.A.assign(rows, std::vector<Rational>(cols));
    for (auto& r : d.A)
        for (auto& v : r) v = coeff(rng);
    for (std::size_t i = 0; i < rows; ++i) d.b.push_back(rhs(rng));
    for (std::size_t j = 0; j < cols; ++j) d.c.push_back(cost(rng));
    return d;
}

} // namespace

TEST_CASE("solve a small program") {
    LinearProgram lp;
    VarId x = lp.add_var("x"), y = lp.add_var("y");
    lp.add_row(LinExpr::var(x) + LinExpr::var(y, 2), Relation::Ge, 4);
    lp.set_objective(LinExpr::var(x) + LinExpr::var(y));
    auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.objective == 2);
    CHECK(out.values[x] == 0);
    CHECK(out.values[y] == 2);
    CHECK(check_assignment(lp, out.values));
}

TEST_CASE("infeasible program yields a checked ray") {
    LinearProgram lp;
    VarId x = lp.add_var("x");
    lp.add_row(LinExpr::var(x), Relation::Ge, 3);
    lp.add_row(LinExpr::var(x), Relation::Le, 2);
    auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Infeasible);
    CHECK(check_infeasibility_ray(lp, out.farkas_ray));
    std::vector<Rational> wrong(out.farkas_ray.size(), 0);
    CHECK(!check_infeasibility_ray(lp, wrong));
}

TEST_CASE("unbounded program") {
    LinearProgram lp;
    VarId x = lp.add_var("x");
    lp.add_row(LinExpr::var(x), Relation::Ge, 1);
    lp.set_objective(LinExpr::var(x, -1));
    CHECK(solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("free variables and equalities") {
    LinearProgram lp;
    VarId x = lp.add_var("x", false), y = lp.add_var("y");
    lp.add_row(LinExpr::var(x) + LinExpr::var(y), Relation::Eq, -3);
    lp.add_row(LinExpr::var(y), Relation::Ge, 1);
    lp.set_objective(LinExpr::var(y));
    auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.values[x] == -4);
    CHECK(out.values[y] == 1);
}

TEST_CASE("constants move to the right-hand side") {
    LinearProgram lp;
    VarId x = lp.add_var("x");
    lp.add_row(LinExpr::var(x) + LinExpr(2), Relation::Le, LinExpr(5), "c");
    REQUIRE(lp.rows().size() == 1);
    CHECK(lp.rows()[0].rhs == 3);
    CHECK(lp.rows()[0].terms.at(x) == 1);
}

TEST_CASE("check_assignment detects perturbations") {
    LinearProgram lp;
    VarId x = lp.add_var("x"), y = lp.add_var("y");
    lp.add_row(LinExpr::var(x) + LinExpr::var(y), Relation::Eq, 1, "sum");
    lp.add_row(LinExpr::var(x), Relation::Le, Rational(1, 2), "cap");
    std::vector<Rational> v{Rational(1, 2), Rational(1, 2)};
    CHECK(check_assignment(lp, v));
    CHECK(check_assignment(lp, std::map<std::string, Rational>{{"x", Rational(1, 2)}, {"y", Rational(1, 2)}}));
    v[1] += Rational(1, 1000000);
    CHECK(!check_assignment(lp, v));
    CHECK(first_violated_row(lp, v) == 0);
    CHECK(!check_assignment(lp, std::vector<Rational>{Rational(-1), Rational(2)}));
}

TEST_CASE("agrees with vertex enumeration") {
    std::mt19937_64 rng(3);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto d = random_dense(rng, 1 + trial % 4, 2);
        std::vector<VarId> x;
        auto lp = build(d, x);
        auto out = solve(lp);
        auto oracle = brute_force_2d(d);
        if (!oracle) {
            CHECK(out.status == LpStatus::Infeasible);
            if (out.status == LpStatus::Infeasible) CHECK(check_infeasibility_ray(lp, out.farkas_ray));
            continue;
        }
        REQUIRE(out.status == LpStatus::Optimal);
        CHECK(out.objective == *oracle);
        CHECK(check_assignment(lp, out.values));
        ++compared;
    }
    CHECK(compared > 100);
}

TEST_CASE("strong duality on random programs") {
    std::mt19937_64 rng(17);
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t m = 2 + trial % 6, n = 2 + trial % 7;
        auto d = random_dense(rng, m, n);
        std::vector<VarId> x;
        auto primal = build(d, x);
        // max b·y subject to A^T y <= c, y >= 0, as min -b·y.
        LinearProgram dual;
        std::vector<VarId> y;
        for (std::size_t i = 0; i < m; ++i) y.push_back(dual.add_var("y" + std::to_string(i)));
        for (std::size_t j = 0; j < n; ++j) {
            LinExpr e;
            for (std::size_t i = 0; i < m; ++i) e += LinExpr::var(y[i], d.A[i][j]);
            dual.add_row(e, Relation::Le, d.c[j]);
        }
        LinExpr obj;
        for (std::size_t i = 0; i < m; ++i) obj += LinExpr::var(y[i], -d.b[i]);
        dual.set_objective(obj);
        auto p = solve(primal), q = solve(dual);
        if (p.status == LpStatus::Optimal) {
            REQUIRE(q.status == LpStatus::Optimal);
            CHECK(p.objective == -q.objective);
            ++compared;
        } else {
            CHECK(p.status == LpStatus::Infeasible);
            CHECK(q.status == LpStatus::Unbounded);
        }
    }
    CHECK(compared > 30);
}

TEST_CASE("solving is deterministic") {
    std::mt19937_64 rng(23);
    auto d = random_dense(rng, 6, 8);
    std::vector<VarId> x;
    auto lp = build(d, x);
    auto a = solve(lp), b = solve(lp);
    CHECK(a.status == b.status);
    CHECK(a.values == b.values);
    CHECK(a.pivots == b.pivots);
}

TEST_CASE("Bland fallback reaches the same optimum") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = random_dense(rng, 6, 6);
        std::vector<VarId> x;
        auto lp = build(d, x);
        LpOptions bland;
        bland.degenerate_limit = 0;
        auto a = solve(lp), b = solve(lp, bland);
        REQUIRE(a.status == b.status);
        if (a.status == LpStatus::Optimal) CHECK(a.objective == b.objective);
    }
}

TEST_CASE("dump lists variables and labelled rows") {
    LinearProgram lp;
    VarId x = lp.add_var("x"), y = lp.add_var("y");
    lp.add_row(LinExpr::var(x, 3) + LinExpr::var(y, Rational(-1, 2)), Relation::Le, 4, "row");
    lp.set_objective(LinExpr::var(x));
    auto s = dump(lp);
    CHECK(s.find("row: 3 x + -1/2 y <= 4") != std::string::npos);
    CHECK(s.find("x") != std::string::npos);
}

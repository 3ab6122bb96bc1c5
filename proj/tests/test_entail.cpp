#include "doctest.h"

#include <algorithm>
#include <random>

#include "farkas_gen.hpp"
#include "json.hpp"
#include "logpot/entail.hpp"
#include "logpot/typing.hpp"
#include "zigzig.hpp"

using namespace logpot;

namespace {

LogIndex idx(std::vector<unsigned> a, unsigned b = 0) { return {std::move(a), b}; }

bool contains(const std::vector<LogIndex>& v, const LogIndex& i) { return std::find(v.begin(), v.end(), i) != v.end(); }

std::optional<std::size_t> find_row(const FactSystem& fs, const std::string& schema,
                                    const std::map<std::size_t, Rational>& coeffs, const Rational& bound) {
    for (std::size_t k = 0; k < fs.rows.size(); ++k)
        if (fs.rows[k].schema == schema && fs.rows[k].coeffs == coeffs && fs.rows[k].bound == bound) return k;
    return std::nullopt;
}

Annotation random_log_annotation(std::mt19937_64& rng, std::size_t arity) {
    IndexTemplate t;
    t.a_entries = {0, 1, 2};
    t.b_values = {0, 1, 2, 3};
    std::uniform_int_distribution<int> c(0, 4), pick(0, 4);
    Annotation q(arity);
    for (const auto& i : t.indices(arity))
        if (pick(rng) == 0) q.log[i] = Rational(c(rng), 2);
    return q;
}

double log_part(const Annotation& q, const std::vector<double>& sizes) {
    double s = 0;
    for (const auto& [i, c] : q.log) {
        double arg = i.b;
        for (std::size_t k = 0; k < sizes.size(); ++k) arg += i.a[k] * sizes[k];
        s += c.get_d() * log_prime(arg);
    }
    return s;
}

} // namespace

TEST_CASE("collect_atoms on the zig-zig weakening") {
    auto atoms = collect_atoms(zigzig::q2(), zigzig::q3());
    for (const auto& i : {idx({1, 0, 0}), idx({0, 1, 0}), idx({0, 0, 1}), idx({0, 1, 1}), idx({1, 0, 1}),
                          idx({1, 1, 1}), idx({0, 0, 0}, 2)})
        CHECK(contains(atoms, i));
    CHECK(std::is_sorted(atoms.begin(), atoms.end()));
}

TEST_CASE("collect_atoms with identical sides") {
    auto q = zigzig::q();
    auto atoms = collect_atoms(q, q, false);
    CHECK(atoms == std::vector<LogIndex>{idx({0}, 2), idx({1}, 0)});
}

TEST_CASE("collect_atoms closes a single atom under sums") {
    Annotation q(1);
    q.log[idx({1})] = 1;
    auto atoms = collect_atoms(q, Annotation(1));
    CHECK(contains(atoms, idx({1})));
    CHECK(contains(atoms, idx({2})));
    CHECK(atoms.size() == 2);
}

TEST_CASE("closure skips arguments that may be below one") {
    auto atoms = closure_of({idx({0}, 0), idx({1}, 0)});
    CHECK(contains(atoms, idx({2}, 0)));
    CHECK(atoms.size() == 3);
}

TEST_CASE("log2_bracket") {
    CHECK(log2_bracket(0) == std::pair<unsigned, unsigned>{0, 0});
    CHECK(log2_bracket(1) == std::pair<unsigned, unsigned>{0, 0});
    CHECK(log2_bracket(2) == std::pair<unsigned, unsigned>{1, 1});
    CHECK(log2_bracket(3) == std::pair<unsigned, unsigned>{1, 2});
    CHECK(log2_bracket(4) == std::pair<unsigned, unsigned>{2, 2});
    CHECK(log2_bracket(5) == std::pair<unsigned, unsigned>{2, 3});
}

TEST_CASE("constant facts pin log 2 to one") {
    auto fs = expert_facts(1, {idx({0}, 2), idx({1})});
    auto c = *fs.find(idx({0}, 2));
    CHECK(find_row(fs, "F3", {{c, 1}}, 1));
    CHECK(find_row(fs, "F3", {{c, -1}}, -1));
    auto t = *fs.find(idx({1}));
    CHECK(find_row(fs, "F4", {{t, -1}}, 0));
}

TEST_CASE("F2 on a doubled argument") {
    auto fs = expert_facts(1, {idx({1}), idx({2})});
    auto x = *fs.find(idx({1})), y = *fs.find(idx({2}));
    CHECK(find_row(fs, "F2", {{x, 2}, {y, -2}}, -2));
    CHECK(find_row(fs, "F1", {{x, 1}, {y, -1}}, 0));
}

TEST_CASE("F1 is generated on covering pairs") {
    auto fs = expert_facts(1, {idx({1}), idx({2}), idx({3})});
    auto a = *fs.find(idx({1})), c = *fs.find(idx({3}));
    CHECK(!find_row(fs, "F1", {{a, 1}, {c, -1}}, 0));
    CHECK(entails({1, [] {
                       Annotation h(1);
                       h.log[idx({3})] = 1;
                       return h;
                   }(),
                   [] {
                       Annotation l(1);
                       l.log[idx({1})] = 1;
                       return l;
                   }()},
                  false)
              .holds());
}

TEST_CASE("expert facts hold numerically") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(1, 1000), small(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t arity = 1 + trial % 3;
        auto fs = expert_facts(arity, collect_atoms(random_log_annotation(rng, arity), random_log_annotation(rng, arity)));
        for (int s = 0; s < 20; ++s) {
            std::vector<double> sizes;
            for (std::size_t k = 0; k < arity; ++k) sizes.push_back(s % 2 ? size(rng) : small(rng));
            REQUIRE(fs.holds_for(sizes));
        }
    }
}

TEST_CASE("farkas examples") {
    FactSystem fs;
    fs.arity = 1;
    fs.atoms = {idx({1})};
    fs.rows = {{"R", {{0, 1}}, 1}};
    auto yes = farkas_entails(fs, {{1}}, {1});
    REQUIRE(yes);
    CHECK(yes->multipliers[0][0] == 1);
    CHECK(verify_certificate(fs, {{1}}, {1}, *yes));
    CHECK(!farkas_entails(fs, {{1}}, {0}));
    CHECK(farkas_entails(fs, {{-1}}, {0}));
    CHECK(!farkas_entails(fs, {{-1}}, {-1}));
    CHECK(farkas_entails(fs, {{0}}, {0}));
}

TEST_CASE("verify_certificate rejects bad multipliers") {
    FactSystem fs;
    fs.arity = 1;
    fs.atoms = {idx({1})};
    fs.rows = {{"R", {{0, 1}}, 1}};
    CHECK(!verify_certificate(fs, {{1}}, {1}, FarkasCertificate{{{-1}}}));
    CHECK(!verify_certificate(fs, {{1}}, {0}, FarkasCertificate{{{1}}}));
    CHECK(!verify_certificate(fs, {{2}}, {2}, FarkasCertificate{{{1}}}));
    CHECK(verify_certificate(fs, {{2}}, {2}, FarkasCertificate{{{2}}}));
}

TEST_CASE("farkas round trip on random systems") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        auto in = farkas_gen::system(rng, 10, 6);
        std::vector<Rational> u;
        Rational v;
        farkas_gen::implied_goal(rng, in.facts, u, v);
        auto cert = farkas_entails(in.facts, {u}, {v});
        REQUIRE(cert);
        CHECK(verify_certificate(in.facts, {u}, {v}, *cert));
        farkas_gen::violated_goal(rng, in, u, v);
        CHECK(!farkas_entails(in.facts, {u}, {v}));
    }
}

TEST_CASE("zig-zig weakening uses the F2 row on bl and cr + br") {
    auto res = entails({3, zigzig::q2(), zigzig::q3()});
    REQUIRE(res.holds());
    const auto& fs = res.facts;
    auto bl = *fs.find(idx({0, 1, 0})), crbr = *fs.find(idx({1, 0, 1})), t = *fs.find(idx({1, 1, 1}));
    auto row = find_row(fs, "F2", {{bl, 1}, {crbr, 1}, {t, -2}}, -2);
    REQUIRE(row);
    CHECK(verify_certificate(fs, {res.goal}, {0}, *res.certificate));
    CHECK(!entails({3, zigzig::q3(), zigzig::q2()}).holds());
}

TEST_CASE("rank side failure blocks entailment") {
    auto hi = zigzig::q2();
    auto lo = zigzig::q3();
    hi.rank[0] = 0;
    auto res = entails({3, hi, lo});
    CHECK(!res.rank_ok);
    CHECK(!res.holds());
}

TEST_CASE("certified entailments are numerically sound") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(1, 500);
    int certified = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t arity = 1 + trial % 2;
        auto hi = random_log_annotation(rng, arity);
        auto lo = trial % 3 == 0 ? hi : random_log_annotation(rng, arity);
        if (trial % 3 == 0 && !lo.log.empty()) lo.log.begin()->second /= 2;
        auto res = entails({arity, hi, lo});
        if (!res.holds()) continue;
        ++certified;
        for (int s = 0; s < 50; ++s) {
            std::vector<double> sizes;
            for (std::size_t k = 0; k < arity; ++k) sizes.push_back(size(rng));
            REQUIRE(log_part(hi, sizes) >= log_part(lo, sizes) - 1e-9);
        }
    }
    CHECK(certified > 50);
}

TEST_CASE("symbolic obligation matches the numeric verdict") {
    LinearProgram lp;
    EntailmentObligation<LinExpr> ob{3, lift(zigzig::q2()), lift(zigzig::q3())};
    auto fs = expert_facts(3, collect_atoms(zigzig::q2(), zigzig::q3()));
    encode_obligation(lp, ob, fs, "w");
    CHECK(solve(lp).status == LpStatus::Optimal);

    LinearProgram bad;
    EntailmentObligation<LinExpr> rev{3, lift(zigzig::q3()), lift(zigzig::q2())};
    encode_obligation(bad, rev, fs, "w");
    auto out = solve(bad);
    CHECK(out.status == LpStatus::Infeasible);
    CHECK(check_infeasibility_ray(bad, out.farkas_ray));
}

TEST_CASE("check_rank_side") {
    LinearProgram lp;
    VarId x = lp.add_var("x");
    SymAnnotation hi(1), lo(1);
    hi.rank[0] = 1;
    lo.rank[0] = 1;
    check_rank_side(lp, {1, hi, lo}, "r");
    CHECK(lp.rows().empty());
    lo.rank[0] = LinExpr::var(x);
    check_rank_side(lp, {1, hi, lo}, "r");
    REQUIRE(lp.rows().size() == 1);
    CHECK(lp.rows()[0].rel == Relation::Ge);
    hi.rank[0] = 0;
    lo.rank[0] = 1;
    LinearProgram lp2;
    check_rank_side(lp2, {1, hi, lo}, "r");
    CHECK(solve(lp2).status == LpStatus::Infeasible);
}

TEST_CASE("certificate_json") {
    auto res = entails({3, zigzig::q2(), zigzig::q3()});
    REQUIRE(res.holds());
    auto j = nlohmann::json::parse(certificate_json(res.facts, *res.certificate, res.goal));
    CHECK(j["atoms"].size() == res.facts.atoms.size());
    CHECK(j["facts"].size() == res.facts.rows.size());
    CHECK(j["multipliers"].size() == 1);
    CHECK(j["goal"].size() == res.goal.size());
}

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <random>
#include <string>
#include <tuple>

#include "farkas_gen.hpp"
#include "logpot/corpus.hpp"
#include "logpot/driver.hpp"
#include "logpot/sigfile.hpp"
#include "reference.hpp"
#include "zigzig.hpp"

using namespace logpot;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string corpus_file(const std::string& name) { return std::string(LOGPOT_CORPUS_DIR) + "/" + name; }

constexpr auto T = SimpleType::Tree;
constexpr auto B = SimpleType::Base;

SymAnnotation permute(const SymAnnotation& q, const std::vector<std::size_t>& order) {
    SymAnnotation out(q.arity);
    for (std::size_t i = 0; i < order.size(); ++i) out.rank[i] = q.rank[order[i]];
    for (const auto& [idx, e] : q.log) {
        LogIndex m{std::vector<unsigned>(q.arity), idx.b};
        for (std::size_t i = 0; i < order.size(); ++i) m.a[i] = idx.a[order[i]];
        out.log[m] = e;
    }
    return out;
}

void pin(LinearProgram& lp, const SymAnnotation& sym, const Annotation& value, const std::string& tag) {
    for (std::size_t i = 0; i < sym.arity; ++i) lp.add_row(sym.rank[i], Relation::Eq, LinExpr(value.rank[i]), tag);
    std::set<LogIndex> keys;
    for (const auto& [idx, e] : sym.log) keys.insert(idx);
    for (const auto& [idx, c] : value.log) keys.insert(idx);
    for (const auto& idx : keys) lp.add_row(sym.get(idx), Relation::Eq, LinExpr(value.get(idx)), tag);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

CorpusSpec exhaustive12() {
    CorpusSpec s;
    s.max_leaves = 12;
    s.key_limit = 13;
    return s;
}

CorpusSpec random64() {
    CorpusSpec s;
    s.generator = CorpusSpec::Generator::Random;
    s.max_leaves = 64;
    s.count = 1000;
    s.seed = 1;
    return s;
}

// Exhaustive and random corpora for one costed pair.
Outcome validate_both(const Program& p, const std::string& f, const Annotation& q, const Annotation& qp) {
    std::string detail;
    bool ok = true;
    for (const auto& spec : {exhaustive12(), random64()}) {
        auto v = validate_pair(p, f, q, qp, CostMode::Costed, generate(spec), spec);
        ok = ok && v.violations == 0 && v.nonterminating == 0 && v.inputs > 0;
        detail += (detail.empty() ? "" : "; ") + std::to_string(v.inputs) + " inputs, min slack " + fmt("%.4g", v.min_slack);
        if (v.violations) detail += ", violated by " + v.witness;
    }
    return {ok, detail};
}

Outcome zigzig_certification() {
    auto t0 = std::chrono::steady_clock::now();
    Program p = load_program(corpus_file("splay.lam"));
    auto check = check_program(p, load_signatures(corpus_file("splay.sig")));
    double check_time = seconds_since(t0);

    IndexTemplate tm;
    LinearProgram lp;
    auto leaf = make_expr(LeafLit{});
    auto e5 = make_expr(MatchTree{"x", leaf, "al", "a1", "ar", leaf});
    auto e4 = make_expr(LetIn{"x", make_expr(Apply{"splay", {"a", "bl"}}), e5});
    auto e1 = make_expr(MatchTree{"cl", leaf, "bl", "b", "br", e4});
    auto e0 = make_expr(MatchTree{"t", leaf, "cl", "c", "cr", e1});

    std::vector<std::pair<ConstraintSet, std::string>> sets;
    Judgement j0{{{{"a", B}, {"t", T}}}, lift(zigzig::q()), e0, T, lift(zigzig::q_result())};
    auto m0 = emit_match(lp, j0, tm, "m0");
    SymAnnotation v1 = m0.premises[1].q;
    auto m1 = emit_match(lp, m0.premises[1], tm, "m1");
    SymAnnotation v2 = m1.premises[1].q;
    SymAnnotation v3 = fresh_annotation(lp, 3, tm, "V3");
    ConstraintSet weak;
    weak.obligations.push_back({3, v2, v3});

    Judgement j3{{{{"bl", T}, {"a", B}, {"cr", T}, {"br", T}}}, permute(v3, {1, 0, 2}), e4, T, m1.premises[1].qp};
    LetShape shape;
    shape.m = 1;
    shape.k = 2;
    auto let = emit_let(lp, j3, shape, tm, "let");
    auto app = emit_app(let.premises[0], lift(zigzig::q()), lift(zigzig::q_result()));
    auto family = default_family(2);
    Annotation unit_log = zigzig::make(1, {0}, {{{{1}, 0}, 1}});
    ConstraintSet cost_free;
    for (std::size_t f = 0; f < family.size(); ++f) {
        bool both = family[f] == std::vector<unsigned>{1, 1};
        cost_free.append(emit_app(let.premises[1 + f], lift(both ? unit_log : Annotation(1)),
                                  lift(both ? unit_log : Annotation(1))));
    }
    Judgement body = let.premises.back();
    SymAnnotation v4 = fresh_annotation(lp, 3, tm, "V4");
    ConstraintSet weak2;
    weak2.obligations.push_back({3, body.q, v4});
    body.q = v4;
    auto m4 = emit_match(lp, body, tm, "m4");
    SymAnnotation v5 = m4.premises[1].q;

    m0.add_to(lp, tm, "m0");
    m1.add_to(lp, tm, "m1");
    weak.add_to(lp, tm, "weak");
    let.add_to(lp, tm, "let");
    app.add_to(lp, tm, "app");
    cost_free.add_to(lp, tm, "cf");
    weak2.add_to(lp, tm, "weak2");
    m4.add_to(lp, tm, "m4");

    Annotation q5 = evaluate(match_node_image(lift(zigzig::q4()), 2), {});
    const std::vector<std::tuple<const char*, const SymAnnotation*, Annotation>> pins = {
        {"Q1", &v1, zigzig::q1()}, {"Q2", &v2, zigzig::q2()}, {"Q3", &v3, zigzig::q3()},
        {"Q4", &v4, zigzig::q4()}, {"Q5", &v5, q5}};
    LinearProgram pinned = lp;
    LpOutcome out;
    std::string stuck;
    for (const auto& [name, sym, value] : pins) {
        pin(pinned, *sym, value, name);
        out = solve(pinned);
        if (out.status != LpStatus::Optimal) {
            stuck = std::string(", infeasible once ") + name + " is pinned";
            break;
        }
    }
    bool assignment = stuck.empty() && check_assignment(lp, out.values);
    for (const auto& [name, sym, value] : pins)
        if (assignment && !(evaluate(*sym, out.values) == value)) {
            assignment = false;
            stuck = std::string(", ") + name + " differs";
        }
    std::string detail = std::string("check ") + (check.typable ? "typable" : "not typable") + " in " +
                         fmt("%.1f s", check_time) + ", zig-zig constraints " + std::to_string(lp.rows().size()) +
                         " rows, check_assignment " + (assignment ? "true" : "false") + stuck;
    return {check.typable && assignment && check_time < 10, detail};
}

Outcome weakening_certificate() {
    auto res = entails({3, zigzig::q2(), zigzig::q3()});
    if (!res.holds()) return {false, "Q2 >= Q3 not certified"};
    const auto& fs = res.facts;
    auto bl = fs.find({{0, 1, 0}, 0}), crbr = fs.find({{1, 0, 1}, 0}), t = fs.find({{1, 1, 1}, 0});
    if (!bl || !crbr || !t) return {false, "atoms missing"};
    std::map<std::size_t, Rational> f2{{*bl, 1}, {*crbr, 1}, {*t, -2}};
    Rational used = -1;
    for (std::size_t k = 0; k < fs.rows.size(); ++k)
        if (fs.rows[k].schema == "F2" && fs.rows[k].coeffs == f2 && fs.rows[k].bound == -2)
            used = res.certificate->multipliers[0][k];
    bool exact = verify_certificate(fs, {res.goal}, {0}, *res.certificate);
    return {sgn(used) > 0 && exact, std::to_string(fs.atoms.size()) + " atoms, " + std::to_string(fs.rows.size()) +
                                        " facts, F2 multiplier " + used.get_str() + ", exact re-check " +
                                        (exact ? "true" : "false")};
}

// Q - 1 against the body cost is Q against the cost of the whole call.
Annotation with_call(const Annotation& q) { return add_constant(q, -1); }

Outcome empirical_soundness() {
    auto t0 = std::chrono::steady_clock::now();
    Program p = load_program(corpus_file("splay.lam"));
    auto body = validate_both(p, "splay", zigzig::q(), zigzig::q_result());
    auto call = validate_both(p, "splay", with_call(zigzig::q()), zigzig::q_result());
    double secs = seconds_since(t0);
    return {body.pass && call.pass && secs < 60,
            "body cost: " + body.detail + "; with the call: " + call.detail + fmt(", %.1f s", secs)};
}

Outcome telescoping_sequences() {
    Program p = load_program(corpus_file("splay.lam"));
    auto body = telescoping(p, "splay", zigzig::q(), zigzig::q_result(), 100, 256, 64, 1, 1'000'000, 1e-4);
    auto call = telescoping(p, "splay", with_call(zigzig::q()), zigzig::q_result(), 100, 256, 64, 1, 1'000'000, 1e-4);
    bool ok = true;
    for (const auto* t : {&body, &call}) ok = ok && t->applicable && t->violations == 0 && t->operations == 100 * 256;
    return {ok, std::to_string(body.operations) + " operations, min slack " + fmt("%.4g", body.min_slack) +
                    ", with the call " + fmt("%.4g", call.min_slack)};
}

Outcome cost_free_pair() {
    Program p = load_program(corpus_file("splay.lam"));
    auto check = check_program(p, load_signatures(corpus_file("splay.sig")));
    Annotation unit_log = zigzig::make(1, {0}, {{{{1}, 0}, 1}});
    bool certified = false;
    if (auto it = check.cost_free.find("splay"); it != check.cost_free.end())
        for (const auto& [q, qp] : it->second.cost_free)
            if (q == unit_log && qp == unit_log) certified = true;
    auto spec = exhaustive12();
    auto trees = generate(spec);
    Interpreter interp(p);
    EvalOptions eo;
    eo.mode = CostMode::CostFree;
    std::size_t runs = 0, mismatches = 0;
    for (const auto& t : trees)
        for (const auto& k : probe_keys(t, spec)) {
            auto r = interp.run_function("splay", {Value::base(k), Value::tree(t)}, eo);
            ++runs;
            const Tree& out = r.value.as_tree();
            if (out.size() != t.size() || r.cost != 0 || potential(t, unit_log) != potential(out, unit_log)) ++mismatches;
        }
    return {certified && mismatches == 0, std::string("pair ") + (certified ? "certified" : "not certified") + ", " +
                                              std::to_string(runs) + " runs, " + std::to_string(mismatches) +
                                              " size or potential mismatches"};
}

Outcome log_facts() {
    std::size_t bad2 = 0, bad_shift = 0, checks = 0;
    for (int x = 1; x <= 1000; ++x)
        for (int y = 1; y <= 1000; ++y) {
            if (2 + std::log2(x) + std::log2(y) > 2 * std::log2(double(x) + y) + 1e-12) ++bad2;
            if (x <= y)
                for (int w : {1, 2, 3, 5, 8, 13, 100, 500, 999, 1000}) {
                    ++checks;
                    if (std::log2(double(x) + w) > std::log2(double(y) + w) + 1e-12) ++bad_shift;
                }
        }
    return {bad2 == 0 && bad_shift == 0, "1000000 pairs, " + std::to_string(checks) + " shifts, " +
                                             std::to_string(bad2 + bad_shift) + " failures"};
}

Annotation random_annotation(std::mt19937_64& rng, std::size_t arity) {
    IndexTemplate t;
    t.a_entries = {0, 1, 2};
    t.b_values = {0, 1, 2, 3};
    std::uniform_int_distribution<int> c(0, 6), pick(0, 2);
    Annotation q(arity);
    for (auto& r : q.rank) r = Rational(c(rng), 2);
    for (const auto& idx : t.indices(arity))
        if (pick(rng) == 0) q.log[idx] = Rational(c(rng), 3);
    return q;
}

Outcome sharing_and_node() {
    std::mt19937_64 rng(2024);
    std::size_t bad_share = 0, bad_node = 0;
    for (int i = 0; i < 1000; ++i) {
        auto q = random_annotation(rng, 2);
        Tree u = random_bst(rng, 1 + rng() % 40);
        double lhs = potential({u, u}, q), rhs = potential(u, share(q, 0, 1));
        if (std::abs(lhs - rhs) > 1e-9) ++bad_share;
    }
    for (int i = 0; i < 1000; ++i) {
        auto qp = random_annotation(rng, 1);
        auto q = evaluate(node_image(lift(qp)), {});
        Tree u = random_bst(rng, 1 + rng() % 40), v = random_bst(rng, 1 + rng() % 40);
        double lhs = potential({u, v}, q), rhs = potential(Tree::node(u, 0, v), qp);
        if (std::abs(lhs - rhs) > 1e-9) ++bad_node;
    }
    return {bad_share == 0 && bad_node == 0,
            std::to_string(bad_share) + " sharing and " + std::to_string(bad_node) + " node mismatches in 2000 instances"};
}

Outcome farkas_round_trip() {
    std::mt19937_64 rng(99);
    std::size_t certified = 0, rejected = 0;
    for (int i = 0; i < 100; ++i) {
        auto in = farkas_gen::system(rng, 2 + i % 9, 1 + i % 6);
        std::vector<Rational> u;
        Rational v;
        farkas_gen::implied_goal(rng, in.facts, u, v);
        auto cert = farkas_entails(in.facts, {u}, {v});
        if (cert && verify_certificate(in.facts, {u}, {v}, *cert)) ++certified;
    }
    for (int i = 0; i < 20; ++i) {
        auto in = farkas_gen::system(rng, 10, 6);
        std::vector<Rational> u;
        Rational v;
        farkas_gen::violated_goal(rng, in, u, v);
        if (!farkas_entails(in.facts, {u}, {v})) ++rejected;
    }
    return {certified == 100 && rejected == 20,
            std::to_string(certified) + "/100 certified, " + std::to_string(rejected) + "/20 rejected"};
}

Outcome inference() {
    TypingOptions opts;
    opts.let_constants = LetConstants::Split;
    auto t0 = std::chrono::steady_clock::now();
    Program splay = load_program(corpus_file("splay.lam"));
    auto a = infer_program(splay, opts, {"splay"});
    if (!a.feasible) return {false, "splay: infeasible"};
    const auto& [q, qp] = a.signatures.at("splay").costed.at(0);
    auto ra = validate_both(splay, "splay", q, qp);

    Program del = load_program(corpus_file("delete.lam"));
    auto b = infer_program(del, opts, {"splay_max"});
    if (!b.feasible) return {false, "splay_max: infeasible"};
    const auto& [qm, qpm] = b.signatures.at("splay_max").costed.at(0);
    auto rb = validate_both(del, "splay_max", qm, qpm);
    return {ra.pass && rb.pass, "splay " + format_annotation(q) + " -> " + format_annotation(qp) + " (" + ra.detail +
                                    "); splay_max " + format_annotation(qm) + " -> " + format_annotation(qpm) + " (" +
                                    rb.detail + ")" + fmt(", %.1f s", seconds_since(t0))};
}

Outcome functional_oracle() {
    auto spec = exhaustive12();
    auto trees = generate(spec);
    Program splay = load_program(corpus_file("splay.lam"));
    Program insert = load_program(corpus_file("insert.lam"));
    Program del = load_program(corpus_file("delete.lam"));
    struct Op {
        const char* name;
        const Program* prog;
        Tree (*ref)(long, const Tree&);
    };
    std::string detail;
    bool ok = true;
    for (const Op& op : {Op{"splay", &splay, reference::splay}, Op{"insert", &insert, reference::insert},
                         Op{"delete", &del, reference::remove}}) {
        Interpreter interp(*op.prog);
        std::size_t runs = 0, mismatches = 0;
        for (const auto& t : trees)
            for (const auto& k : probe_keys(t, spec)) {
                auto r = interp.run_function(op.name, {Value::base(k), Value::tree(t)}, {});
                ++runs;
                if (!(r.value.as_tree() == op.ref(k.get_si(), t))) ++mismatches;
            }
        ok = ok && mismatches == 0;
        detail += std::string(detail.empty() ? "" : ", ") + op.name + " " + std::to_string(runs - mismatches) + "/" +
                  std::to_string(runs);
    }
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"zig-zig certification of splay", zigzig_certification},
        {"weakening certificate with the F2 instance", weakening_certificate},
        {"empirical soundness of the splay bound", empirical_soundness},
        {"telescoping over operation sequences", telescoping_sequences},
        {"cost-free pair preserves size", cost_free_pair},
        {"logarithm facts on the integer grid", log_facts},
        {"sharing and node potential equalities", sharing_and_node},
        {"Farkas round trip", farkas_round_trip},
        {"inference for splay and splay_max", inference},
        {"functional oracle for splay, insert and delete", functional_oracle},
    };
    int failed = 0;
    std::size_t ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        ++ran;
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(ran) - failed, ran);
    return failed ? 1 : 0;
}

#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <set>

#include "logpot/corpus.hpp"
#include "logpot/sigfile.hpp"
#include "test_support.hpp"
#include "zigzig.hpp"

using namespace logpot;

namespace {

std::string fixture(const std::string& name) { return std::string(LOGPOT_FIXTURE_DIR) + "/" + name; }

std::size_t catalan(std::size_t n) {
    std::size_t c = 1;
    for (std::size_t k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("logpot_test_" + name)).string();
}

} // namespace

TEST_CASE("exhaustive corpus sizes are Catalan sums") {
    for (std::size_t n = 0; n <= 9; ++n) {
        std::size_t expected = 0;
        for (std::size_t k = 1; k <= n; ++k) expected += catalan(k - 1);
        auto trees = exhaustive_bsts(n);
        CHECK(trees.size() == expected);
    }
    CHECK(catalan(11) == 58786);
}

TEST_CASE("exhaustive corpus trees are distinct search trees") {
    auto trees = exhaustive_bsts(7);
    std::set<std::string> seen;
    for (const auto& t : trees) {
        CHECK(is_bst(t));
        seen.insert(format_tree(t));
    }
    CHECK(seen.size() == trees.size());
}

TEST_CASE("random corpus is reproducible") {
    auto a = random_bsts(50, 64, 9), b = random_bsts(50, 64, 9), c = random_bsts(50, 64, 10);
    REQUIRE(a.size() == 50);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(is_bst(a[i]));
        CHECK(a[i].size() >= 1);
        CHECK(a[i].size() <= 64);
        if (!(a[i] == c[i])) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("probe keys") {
    Tree t = node(single(1), 2, single(3));
    CorpusSpec spec;
    auto keys = probe_keys(t, spec);
    CHECK(keys == std::vector<BaseValue>{0, 1, 2, 3, 4});
    spec.key_limit = 2;
    CHECK(probe_keys(t, spec) == std::vector<BaseValue>{0, 1, 2});
    CHECK(probe_keys(leaf(), CorpusSpec{}).size() >= 1);
}

TEST_CASE("eval command") {
    auto r = cmd_eval(corpus_file("splay.lam"), "splay", {"2", "((leaf, 1, leaf), 2, leaf)"});
    CHECK(r.exit_code == 0);
    CHECK(r.json["status"] == "value");
    CHECK(r.json["cost"] == 1);
    CHECK(r.json["command"] == "eval");

    auto arity = cmd_eval(corpus_file("splay.lam"), "splay", {"1"});
    CHECK(arity.exit_code == 2);
    CHECK(arity.json.contains("error"));

    DriverOptions opts;
    opts.fuel = 100;
    auto loop = cmd_eval(corpus_file("loop.lam"), "loop", {"leaf"}, opts);
    CHECK(loop.exit_code == 1);
    CHECK(loop.json["status"] == "nontermination");

    CHECK(cmd_eval(corpus_file("missing.lam"), "f", {}).exit_code == 2);
    CHECK(cmd_eval(corpus_file("splay.lam"), "nope", {}).exit_code == 2);
}

TEST_CASE("check command exit codes") {
    auto ok = cmd_check(corpus_file("id.lam"), corpus_file("id.sig"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.json["typable"] == true);
    CHECK(ok.json.contains("functions"));
    CHECK(ok.json["let_constants"] == "shared");

    auto bad = cmd_check(fixture("malformed.lam"), corpus_file("id.sig"));
    CHECK(bad.exit_code == 2);
    CHECK(bad.json["error"].get<std::string>().find("malformed.lam:") != std::string::npos);
}

TEST_CASE("infer command writes a signature file") {
    DriverOptions opts;
    opts.sig_out = temp_path("id.sig");
    auto r = cmd_infer(corpus_file("id.lam"), opts);
    REQUIRE(r.exit_code == 0);
    CHECK(r.json["feasible"] == true);
    CHECK(r.json["let_constants"] == "split");
    auto sigs = load_signatures(opts.sig_out);
    REQUIRE(sigs.count("id"));
    CHECK(is_zero(sigs.at("id").costed.at(0).first));
    CHECK(cmd_check(corpus_file("id.lam"), opts.sig_out).exit_code == 0);
    std::remove(opts.sig_out.c_str());
}

TEST_CASE("validate command") {
    DriverOptions opts;
    opts.corpus.max_leaves = 6;
    opts.sequences = 3;
    opts.sequence_length = 10;
    opts.sequence_leaves = 8;
    auto r = cmd_validate(corpus_file("id.lam"), corpus_file("id.sig"), opts);
    CHECK(r.exit_code == 0);
    CHECK(r.json["validation"]["passed"] == true);
    CHECK(r.json["validation"]["sequences"].size() == 1);

    opts.force = true;
    DriverOptions random = opts;
    random.corpus.generator = CorpusSpec::Generator::Random;
    random.corpus.max_leaves = 64;
    random.corpus.count = 300;
    auto weak = cmd_validate(corpus_file("splay.lam"), corpus_file("splay_weak.sig"), random);
    CHECK(weak.exit_code == 1);
    CHECK(weak.json["validation"]["passed"] == false);
    CHECK(weak.text.find("violated") != std::string::npos);

    opts.corpus.max_leaves = 0;
    auto empty = cmd_validate(corpus_file("id.lam"), corpus_file("id.sig"), opts);
    CHECK(empty.exit_code == 0);
    CHECK(empty.json["validation"]["warnings"].size() == 1);
}

TEST_CASE("validate_pair on splay") {
    auto p = corpus_program("splay.lam");
    CorpusSpec spec;
    spec.max_leaves = 7;
    auto trees = generate(spec);
    auto good = validate_pair(p, "splay", add_constant(zigzig::q(), 0), zigzig::q_result(), CostMode::Costed, trees, spec);
    CHECK(good.violations == 0);
    CHECK(good.inputs > trees.size());
    CHECK(good.min_slack >= -1e-6);

    Annotation weak(1);
    weak.rank[0] = 1;
    auto bad = validate_pair(p, "splay", weak, zigzig::q_result(), CostMode::Costed, trees, spec);
    CHECK(bad.violations > 0);
    CHECK(!bad.witness.empty());
    auto again = validate_pair(p, "splay", weak, zigzig::q_result(), CostMode::Costed, trees, spec, 1'000'000, 1);
    CHECK(again.witness == bad.witness);
}

TEST_CASE("telescoping applies to tree transformers") {
    auto p = corpus_program("splay.lam");
    auto t = telescoping(p, "splay", zigzig::q(), zigzig::q_result(), 5, 50, 16, 3);
    CHECK(t.applicable);
    CHECK(t.operations == 250);
    CHECK(t.violations == 0);
}

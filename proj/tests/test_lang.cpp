#include "doctest.h"

#include "logpot/syntax.hpp"
#include "logpot/wellformed.hpp"
#include "test_support.hpp"

using namespace logpot;

TEST_CASE("parse identity definition") {
    Program p = parse_program("id t = t");
    REQUIRE(p.functions.size() == 1);
    CHECK(p.functions[0].name == "id");
    CHECK(p.functions[0].params == std::vector<std::string>{"t"});
    REQUIRE(p.functions[0].body->as<VarRef>());
    CHECK(p.functions[0].body->as<VarRef>()->name == "t");
}

TEST_CASE("parse splay program") {
    Program p = parse_program(read_file(corpus_file("splay.lam")));
    REQUIRE(p.functions.size() == 1);
    const auto* m = p.functions[0].body->as<MatchTree>();
    REQUIRE(m);
    CHECK(m->scrutinee == "t");
    CHECK(m->leaf_branch->as<LeafLit>());
    CHECK(m->left == "cl");
    CHECK(m->label == "c");
    CHECK(m->right == "cr");
}

TEST_CASE("nested application is not let normal") {
    try {
        parse_program("f t = g (h t)");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::NotLetNormal);
        CHECK(e.pos().line == 1);
    }
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_program("f t = match t with\n  | leaf ->");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::Syntax);
        CHECK(e.pos().line == 2);
    }
}

TEST_CASE("nested node literals are lifted into lets") {
    Program p = parse_program("f a t = ((t, a, t), a, t)");
    const auto* let = p.functions[0].body->as<LetIn>();
    REQUIRE(let);
    CHECK(let->bound->as<NodeLit>());
    CHECK(let->body->as<NodeLit>()->left == let->name);
}

TEST_CASE("one-branch match is partial") {
    Program p = parse_program("f t = match t with | node l a r -> l");
    const auto* m = p.functions[0].body->as<MatchTree>();
    REQUIRE(m);
    CHECK(m->partial);
    CHECK(m->leaf_branch->as<LeafLit>());
}

TEST_CASE("print then parse is the identity") {
    for (const char* f : {"splay.lam", "insert.lam", "delete.lam", "id.lam", "constant.lam", "loop.lam"}) {
        Program p = parse_program(read_file(corpus_file(f)));
        Program q = parse_program(print_program(p));
        REQUIRE(p.functions.size() == q.functions.size());
        for (std::size_t i = 0; i < p.functions.size(); ++i) {
            CHECK(p.functions[i].name == q.functions[i].name);
            CHECK(p.functions[i].params == q.functions[i].params);
            CHECK(same_ast(*p.functions[i].body, *q.functions[i].body));
        }
    }
}

TEST_CASE("tree size counts leaves") {
    CHECK(size(Value::tree(leaf())) == 1);
    CHECK(size(Value::tree(single(1))) == 2);
    CHECK(size(Value::tree(node(single(1), 2, leaf()))) == 3);
    CHECK_THROWS_AS(size(Value::boolean(true)), std::invalid_argument);
}

TEST_CASE("size is additive") {
    Tree l = node(single(1), 2, single(3)), r = single(5);
    Tree t = node(l, 4, r);
    CHECK(t.size() == l.size() + r.size());
    CHECK(t.size() >= 1);
}

TEST_CASE("values parse and print") {
    Value v = parse_value("((leaf, 1, nil), 2, leaf)");
    CHECK(v.as_tree() == node(single(1), 2, leaf()));
    CHECK(format_value(v) == "((leaf, 1, leaf), 2, leaf)");
    CHECK(parse_value("true").as_bool());
    CHECK(parse_value("-12").as_base() == -12);
}

TEST_CASE("well formed splay has no diagnostics") {
    Program p = parse_program(read_file(corpus_file("splay.lam")));
    CHECK(well_formed(p).empty());
}

TEST_CASE("unbound variable diagnostic") {
    auto d = well_formed(parse_program("f t = y"));
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == Diagnostic::Kind::UnboundVariable);
}

TEST_CASE("argument type mismatch diagnostic") {
    std::string src = read_file(corpus_file("splay.lam")) + "\ng : B * T -> T\ng a t = let b = a = a in splay b t\n";
    auto d = well_formed(parse_program(src));
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == Diagnostic::Kind::ArgumentTypeMismatch);
}

TEST_CASE("comparing trees is rejected") {
    auto d = well_formed(parse_program("f : T * T -> Bool\nf s t = s < t"));
    REQUIRE(!d.empty());
    CHECK(d[0].kind == Diagnostic::Kind::TreeComparison);
}

TEST_CASE("parameter types are inferred") {
    Program p = resolve_types(parse_program("f a t = match t with | leaf -> leaf | node l b r -> if a < b then l else r"));
    REQUIRE(p.functions[0].type);
    CHECK(p.functions[0].type->params == std::vector<SimpleType>{SimpleType::Base, SimpleType::Tree});
    CHECK(p.functions[0].type->result == SimpleType::Tree);
}

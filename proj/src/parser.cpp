#include <cctype>
#include <set>

#include "logpot/syntax.hpp"

namespace logpot {

namespace {

enum class Tok {
    Ident,
    Number,
    Let,
    In,
    If,
    Then,
    Else,
    Match,
    With,
    Leaf,
    Node,
    True,
    False,
    LParen,
    RParen,
    Comma,
    Bar,
    Arrow,
    Equals,
    Less,
    Greater,
    Colon,
    Star,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '\'';
}

std::vector<Token> lex(std::string_view src) {
    static const std::map<std::string, Tok, std::less<>> keywords = {
        {"let", Tok::Let},     {"in", Tok::In},       {"if", Tok::If},     {"then", Tok::Then},
        {"else", Tok::Else},   {"match", Tok::Match}, {"with", Tok::With}, {"leaf", Tok::Leaf},
        {"nil", Tok::Leaf},    {"node", Tok::Node},   {"true", Tok::True}, {"false", Tok::False},
    };
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
            advance(1);
            continue;
        }
        if (src.substr(i, 2) == "--") {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        SourcePos pos{line, col};
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            auto kw = keywords.find(word);
            out.push_back({kw == keywords.end() ? Tok::Ident : kw->second, word, pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Number, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (src.substr(i, 2) == "->") {
            out.push_back({Tok::Arrow, "->", pos});
            advance(2);
            continue;
        }
        Tok k;
        switch (c) {
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case '|': k = Tok::Bar; break;
        case '=': k = Tok::Equals; break;
        case '<': k = Tok::Less; break;
        case '>': k = Tok::Greater; break;
        case ':': k = Tok::Colon; break;
        case '*': k = Tok::Star; break;
        default:
            throw ParseError(ParseError::Kind::Syntax, pos, std::string("unexpected character '") + c + "'");
        }
        out.push_back({k, std::string(1, c), pos});
        advance(1);
    }
    out.push_back({Tok::End, "", {line, col}});
    return out;
}

// Surface syntax before let-normalisation.
struct Surface;
using SurfacePtr = std::shared_ptr<Surface>;

struct Surface {
    enum class Kind { Var, Bool, Leaf, Node, Cmp, App, If, Let, Match };
    Kind kind;
    SourcePos pos;
    std::string name;            // Var, App function, Let binder
    bool bool_value = false;     // Bool
    CmpOp op = CmpOp::Eq;        // Cmp
    std::vector<SurfacePtr> kids;
    // Match
    bool has_leaf = false;
    bool has_node = false;
    std::string pl, pa, pr;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    struct RawDef {
        std::string name;
        std::vector<std::string> params;
        SurfacePtr body;
        SourcePos pos;
    };
    struct RawDecl {
        std::string name;
        FunctionType type;
        SourcePos pos;
    };

    void parse_all(std::vector<RawDef>& defs, std::vector<RawDecl>& decls) {
        while (peek().kind != Tok::End) {
            const Token& head = peek();
            if (head.kind != Tok::Ident || head.pos.column != 1)
                fail(head.pos, "expected a top-level definition starting in column 1");
            if (peek(1).kind == Tok::Colon) {
                decls.push_back(parse_decl());
            } else {
                defs.push_back(parse_def());
            }
        }
    }

private:
    std::vector<Token> toks_;
    std::size_t at_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = std::min(at_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    // Tokens in column 1 belong to the next top-level item.
    bool at_item_boundary() const {
        const Token& t = peek();
        return t.kind == Tok::End || (at_ > 0 && t.pos.column == 1);
    }
    Token take() { return toks_[at_++]; }

    [[noreturn]] static void fail(SourcePos pos, const std::string& msg) {
        throw ParseError(ParseError::Kind::Syntax, pos, msg);
    }

    Token expect(Tok k, const char* what) {
        if (at_item_boundary() || peek().kind != k) {
            const Token& t = peek();
            fail(t.pos, std::string("expected ") + what + (t.kind == Tok::End ? " before end of input" : ", found '" + t.text + "'"));
        }
        return take();
    }

    SimpleType parse_type_atom() {
        Token t = take();
        if (t.kind == Tok::Ident) {
            if (t.text == "B" || t.text == "Base") return SimpleType::Base;
            if (t.text == "T" || t.text == "Tree") return SimpleType::Tree;
            if (t.text == "Bool") return SimpleType::Bool;
        }
        fail(t.pos, "unknown type '" + t.text + "'");
    }

    RawDecl parse_decl() {
        RawDecl d;
        Token name = take();
        d.name = name.text;
        d.pos = name.pos;
        take(); // ':'
        if (peek().kind == Tok::LParen && peek(1).kind == Tok::RParen) {
            take();
            take();
        } else {
            d.type.params.push_back(parse_type_atom());
            while (!at_item_boundary() && peek().kind == Tok::Star) {
                take();
                d.type.params.push_back(parse_type_atom());
            }
        }
        expect(Tok::Arrow, "'->' in type declaration");
        d.type.result = parse_type_atom();
        return d;
    }

    RawDef parse_def() {
        RawDef d;
        Token name = take();
        d.name = name.text;
        d.pos = name.pos;
        while (!at_item_boundary() && peek().kind == Tok::Ident) d.params.push_back(take().text);
        expect(Tok::Equals, "'=' after function parameters");
        d.body = parse_expr();
        if (!at_item_boundary()) fail(peek().pos, "unexpected '" + peek().text + "' after function body");
        return d;
    }

    SurfacePtr node(Surface::Kind k, SourcePos pos) {
        auto s = std::make_shared<Surface>();
        s->kind = k;
        s->pos = pos;
        return s;
    }

    SurfacePtr parse_expr() {
        if (at_item_boundary()) fail(peek().pos, "expected an expression");
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Let: {
            auto s = node(Surface::Kind::Let, take().pos);
            s->name = expect(Tok::Ident, "identifier after 'let'").text;
            expect(Tok::Equals, "'=' in let binding");
            s->kids.push_back(parse_expr());
            expect(Tok::In, "'in'");
            s->kids.push_back(parse_expr());
            return s;
        }
        case Tok::If: {
            auto s = node(Surface::Kind::If, take().pos);
            s->kids.push_back(parse_expr());
            expect(Tok::Then, "'then'");
            s->kids.push_back(parse_expr());
            expect(Tok::Else, "'else'");
            s->kids.push_back(parse_expr());
            return s;
        }
        case Tok::Match: return parse_match();
        default: return parse_cmp();
        }
    }

    SurfacePtr parse_match() {
        auto s = node(Surface::Kind::Match, take().pos);
        s->kids.resize(3);
        s->kids[0] = parse_expr();
        expect(Tok::With, "'with'");
        bool any = false;
        while (!at_item_boundary() && peek().kind == Tok::Bar) {
            take();
            any = true;
            if (peek().kind == Tok::Leaf) {
                Token lt = take();
                if (s->has_leaf) fail(lt.pos, "duplicate leaf branch");
                expect(Tok::Arrow, "'->'");
                s->has_leaf = true;
                s->kids[1] = parse_expr();
            } else {
                SourcePos p = peek().pos;
                if (s->has_node) fail(p, "duplicate node branch");
                if (peek().kind == Tok::Node) {
                    take();
                    s->pl = expect(Tok::Ident, "pattern variable").text;
                    s->pa = expect(Tok::Ident, "pattern variable").text;
                    s->pr = expect(Tok::Ident, "pattern variable").text;
                } else if (peek().kind == Tok::LParen) {
                    take();
                    s->pl = expect(Tok::Ident, "pattern variable").text;
                    expect(Tok::Comma, "','");
                    s->pa = expect(Tok::Ident, "pattern variable").text;
                    expect(Tok::Comma, "','");
                    s->pr = expect(Tok::Ident, "pattern variable").text;
                    expect(Tok::RParen, "')'");
                } else {
                    fail(p, "expected a 'leaf' or 'node l a r' pattern");
                }
                expect(Tok::Arrow, "'->'");
                s->has_node = true;
                s->kids[2] = parse_expr();
            }
        }
        if (!any) fail(peek().pos, "match needs at least one branch");
        if (!s->has_node) fail(s->pos, "match without a node branch");
        return s;
    }

    SurfacePtr parse_cmp() {
        SurfacePtr lhs = parse_app();
        if (at_item_boundary()) return lhs;
        CmpOp op;
        switch (peek().kind) {
        case Tok::Less: op = CmpOp::Lt; break;
        case Tok::Greater: op = CmpOp::Gt; break;
        case Tok::Equals: op = CmpOp::Eq; break;
        default: return lhs;
        }
        auto s = node(Surface::Kind::Cmp, take().pos);
        s->op = op;
        s->kids.push_back(lhs);
        s->kids.push_back(parse_app());
        return s;
    }

    bool atom_start() const {
        if (at_item_boundary()) return false;
        switch (peek().kind) {
        case Tok::Ident:
        case Tok::True:
        case Tok::False:
        case Tok::Leaf:
        case Tok::LParen: return true;
        default: return false;
        }
    }

    SurfacePtr parse_app() {
        if (!at_item_boundary() && peek().kind == Tok::Ident) {
            Token head = take();
            if (!atom_start()) {
                auto v = node(Surface::Kind::Var, head.pos);
                v->name = head.text;
                return v;
            }
            auto s = node(Surface::Kind::App, head.pos);
            s->name = head.text;
            while (atom_start()) s->kids.push_back(parse_atom());
            return s;
        }
        return parse_atom();
    }

    SurfacePtr parse_atom() {
        if (at_item_boundary()) fail(peek().pos, "expected an expression");
        Token t = take();
        switch (t.kind) {
        case Tok::Ident: {
            auto v = node(Surface::Kind::Var, t.pos);
            v->name = t.text;
            return v;
        }
        case Tok::True:
        case Tok::False: {
            auto b = node(Surface::Kind::Bool, t.pos);
            b->bool_value = t.kind == Tok::True;
            return b;
        }
        case Tok::Leaf: return node(Surface::Kind::Leaf, t.pos);
        case Tok::LParen: {
            SurfacePtr first = parse_expr();
            if (!at_item_boundary() && peek().kind == Tok::Comma) {
                auto n = node(Surface::Kind::Node, t.pos);
                n->kids.push_back(first);
                take();
                n->kids.push_back(parse_expr());
                expect(Tok::Comma, "',' in node literal");
                n->kids.push_back(parse_expr());
                expect(Tok::RParen, "')'");
                return n;
            }
            expect(Tok::RParen, "')'");
            return first;
        }
        default: fail(t.pos, "unexpected '" + t.text + "'");
        }
    }
};

// Let-normalisation of the surface tree.
class Normaliser {
public:
    explicit Normaliser(const std::map<std::string, std::size_t>& arities) : arities_(arities) {}

    ExprPtr lower(const SurfacePtr& s) {
        using K = Surface::Kind;
        switch (s->kind) {
        case K::Var:
            if (auto f = arities_.find(s->name); f != arities_.end() && f->second == 0 && !bound(s->name))
                return make_expr(Apply{s->name, {}}, s->pos);
            return make_expr(VarRef{s->name}, s->pos);
        case K::Bool: return make_expr(BoolLit{s->bool_value}, s->pos);
        case K::Leaf: return make_expr(LeafLit{}, s->pos);
        case K::Node: {
            std::vector<std::pair<std::string, ExprPtr>> lifted;
            std::string l = operand_for_node(s->kids[0], lifted);
            std::string a = operand_for_node(s->kids[1], lifted);
            std::string r = operand_for_node(s->kids[2], lifted);
            return wrap(lifted, make_expr(NodeLit{l, a, r}, s->pos));
        }
        case K::Cmp: {
            if (is_leaf_test(*s))
                not_let_normal(s->pos, "tree comparison with leaf is only allowed as an if condition");
            std::string l = variable_operand(s->kids[0], "comparison operand");
            std::string r = variable_operand(s->kids[1], "comparison operand");
            return make_expr(Compare{s->op, l, r}, s->pos);
        }
        case K::App: {
            std::vector<std::pair<std::string, ExprPtr>> lifted;
            std::vector<std::string> args;
            for (const auto& k : s->kids) {
                if (k->kind == K::Var) {
                    args.push_back(k->name);
                } else if (k->kind == K::Leaf || k->kind == K::Node) {
                    std::string fresh = fresh_name();
                    lifted.emplace_back(fresh, lower(k));
                    args.push_back(fresh);
                } else {
                    not_let_normal(k->pos, "application argument not a variable");
                }
            }
            return wrap(lifted, make_expr(Apply{s->name, args}, s->pos));
        }
        case K::If: {
            const SurfacePtr& c = s->kids[0];
            if (c->kind == K::Var) {
                return make_expr(IfThenElse{c->name, lower(s->kids[1]), lower(s->kids[2])}, s->pos);
            }
            if (is_leaf_test(*c)) return lower_leaf_test(*s);
            std::string fresh = fresh_name();
            ExprPtr cond = lower(c);
            return make_expr(LetIn{fresh, cond, make_expr(IfThenElse{fresh, lower(s->kids[1]), lower(s->kids[2])}, s->pos)},
                             s->pos);
        }
        case K::Let: {
            ExprPtr bound_expr = lower(s->kids[0]);
            scope_.push_back(s->name);
            ExprPtr body = lower(s->kids[1]);
            scope_.pop_back();
            return make_expr(LetIn{s->name, bound_expr, body}, s->pos);
        }
        case K::Match: {
            const SurfacePtr& scrut = s->kids[0];
            std::vector<std::pair<std::string, ExprPtr>> lifted;
            std::string x;
            if (scrut->kind == K::Var) {
                x = scrut->name;
            } else {
                x = fresh_name();
                lifted.emplace_back(x, lower(scrut));
            }
            ExprPtr leaf_branch = s->has_leaf ? lower(s->kids[1]) : make_expr(LeafLit{}, s->pos);
            std::string l = pattern_name(s->pl), a = pattern_name(s->pa), r = pattern_name(s->pr);
            scope_.insert(scope_.end(), {l, a, r});
            ExprPtr node_branch = lower(s->kids[2]);
            scope_.resize(scope_.size() - 3);
            MatchTree m{x, leaf_branch, l, a, r, node_branch, !s->has_leaf};
            return wrap(lifted, make_expr(std::move(m), s->pos));
        }
        }
        throw ParseError(ParseError::Kind::Syntax, s->pos, "unhandled construct");
    }

    void enter(const std::vector<std::string>& params) { scope_ = params; }

private:
    const std::map<std::string, std::size_t>& arities_;
    std::vector<std::string> scope_;
    int counter_ = 0;

    bool bound(const std::string& n) const { return std::find(scope_.begin(), scope_.end(), n) != scope_.end(); }

    std::string fresh_name() { return "$" + std::to_string(++counter_); }

    std::string pattern_name(const std::string& n) { return n == "_" ? fresh_name() : n; }

    [[noreturn]] static void not_let_normal(SourcePos pos, const std::string& msg) {
        throw ParseError(ParseError::Kind::NotLetNormal, pos, msg);
    }

    static bool is_leaf_test(const Surface& s) {
        if (s.kind != Surface::Kind::Cmp || s.op != CmpOp::Eq) return false;
        auto k0 = s.kids[0]->kind, k1 = s.kids[1]->kind;
        return (k0 == Surface::Kind::Var && k1 == Surface::Kind::Leaf) ||
               (k0 == Surface::Kind::Leaf && k1 == Surface::Kind::Var);
    }

    std::string variable_operand(const SurfacePtr& s, const char* what) {
        if (s->kind != Surface::Kind::Var) not_let_normal(s->pos, std::string(what) + " not a variable");
        return s->name;
    }

    std::string operand_for_node(const SurfacePtr& s, std::vector<std::pair<std::string, ExprPtr>>& lifted) {
        if (s->kind == Surface::Kind::Var) return s->name;
        if (s->kind == Surface::Kind::Leaf || s->kind == Surface::Kind::Node) {
            std::string fresh = fresh_name();
            lifted.emplace_back(fresh, lower(s));
            return fresh;
        }
        not_let_normal(s->pos, "node component not a variable");
    }

    static ExprPtr wrap(const std::vector<std::pair<std::string, ExprPtr>>& lifted, ExprPtr inner) {
        for (auto it = lifted.rbegin(); it != lifted.rend(); ++it)
            inner = make_expr(LetIn{it->first, it->second, inner}, inner->pos);
        return inner;
    }

    // `if x = leaf then A else B` becomes a match on x. The branches rebuild
    // x when they still refer to it, since the match consumes the scrutinee.
    ExprPtr lower_leaf_test(const Surface& s) {
        const Surface& c = *s.kids[0];
        std::string x = c.kids[0]->kind == Surface::Kind::Var ? c.kids[0]->name : c.kids[1]->name;
        ExprPtr then_branch = lower(s.kids[1]);
        if (mentions(*then_branch, x))
            then_branch = make_expr(LetIn{x, make_expr(LeafLit{}, s.pos), then_branch}, s.pos);
        std::string l = fresh_name(), a = fresh_name(), r = fresh_name();
        ExprPtr else_branch = lower(s.kids[2]);
        if (mentions(*else_branch, x))
            else_branch = make_expr(LetIn{x, make_expr(NodeLit{l, a, r}, s.pos), else_branch}, s.pos);
        return make_expr(MatchTree{x, then_branch, l, a, r, else_branch, false}, s.pos);
    }

    static bool mentions(const Expr& e, const std::string& x) {
        auto fv = free_variables(e);
        return std::find(fv.begin(), fv.end(), x) != fv.end();
    }
};

} // namespace

Program parse_program(std::string_view source) {
    Parser parser(lex(source));
    std::vector<Parser::RawDef> defs;
    std::vector<Parser::RawDecl> decls;
    parser.parse_all(defs, decls);

    std::map<std::string, std::size_t> arities;
    for (const auto& d : defs) {
        if (arities.count(d.name))
            throw ParseError(ParseError::Kind::Syntax, d.pos, "duplicate definition of '" + d.name + "'");
        arities[d.name] = d.params.size();
    }

    Program p;
    Normaliser norm(arities);
    for (const auto& d : defs) {
        FunctionDef f;
        f.name = d.name;
        f.params = d.params;
        f.pos = d.pos;
        norm.enter(d.params);
        f.body = norm.lower(d.body);
        p.functions.push_back(std::move(f));
    }
    for (const auto& decl : decls) {
        FunctionDef* f = p.find(decl.name);
        if (!f) throw ParseError(ParseError::Kind::Syntax, decl.pos, "type declared for undefined function '" + decl.name + "'");
        if (decl.type.params.size() != f->params.size())
            throw ParseError(ParseError::Kind::Syntax, decl.pos, "declared arity differs from definition of '" + decl.name + "'");
        f->type = decl.type;
    }
    return p;
}

} // namespace logpot

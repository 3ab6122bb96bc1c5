#include <cctype>

#include "logpot/potential.hpp"

namespace logpot {

std::string format_annotation(const Annotation& q) {
    std::string s = "rank: [";
    for (std::size_t k = 0; k < q.arity; ++k) {
        if (k) s += ",";
        s += q.rank[k].get_str();
    }
    s += "]; log: {";
    bool first = true;
    for (const auto& [idx, c] : q.log) {
        if (sgn(c) == 0) continue;
        if (!first) s += ", ";
        first = false;
        s += to_string(idx) + ": " + c.get_str();
    }
    return s + "}";
}

namespace {

class AnnotationReader {
public:
    AnnotationReader(std::string_view s, std::size_t arity) : s_(s), arity_(arity) {}

    Annotation read() {
        Annotation q(arity_);
        bool seen_rank = false;
        skip();
        while (i_ < s_.size()) {
            if (keyword("rank")) {
                expect(':');
                expect('[');
                std::vector<Rational> ranks;
                skip();
                if (!peek(']')) {
                    ranks.push_back(number());
                    while (accept(',')) ranks.push_back(number());
                }
                expect(']');
                if (ranks.size() != arity_)
                    fail("rank list has " + std::to_string(ranks.size()) + " entries, expected " + std::to_string(arity_));
                q.rank = ranks;
                seen_rank = true;
            } else if (keyword("log")) {
                expect(':');
                expect('{');
                skip();
                if (!peek('}')) {
                    entry(q);
                    while (accept(',')) entry(q);
                }
                expect('}');
            } else {
                fail("expected 'rank' or 'log'");
            }
            if (!accept(';')) break;
            skip();
        }
        skip();
        if (i_ != s_.size()) fail("trailing characters");
        if (!seen_rank && arity_ != 0) q.rank.assign(arity_, 0);
        validate(q);
        return q;
    }

private:
    std::string_view s_;
    std::size_t arity_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("annotation '" + std::string(s_) + "' at offset " + std::to_string(i_) + ": " + msg);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }
    bool accept(char c) {
        if (!peek(c)) return false;
        ++i_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    bool keyword(std::string_view w) {
        skip();
        if (s_.substr(i_, w.size()) != w) return false;
        i_ += w.size();
        return true;
    }
    unsigned natural() {
        skip();
        std::size_t j = i_;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j == i_) fail("expected a natural number");
        unsigned v = unsigned(std::stoul(std::string(s_.substr(i_, j - i_))));
        i_ = j;
        return v;
    }
    Rational number() {
        skip();
        std::size_t j = i_;
        while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '/' || s_[j] == '-')) ++j;
        if (j == i_) fail("expected a rational");
        Rational r;
        if (r.set_str(std::string(s_.substr(i_, j - i_)), 10) != 0) fail("bad rational");
        if (r.get_den() == 0) fail("zero denominator");
        r.canonicalize();
        i_ = j;
        return r;
    }
    void entry(Annotation& q) {
        expect('(');
        LogIndex idx;
        skip();
        if (!peek('|')) {
            idx.a.push_back(natural());
            while (accept(',')) idx.a.push_back(natural());
        }
        expect('|');
        idx.b = natural();
        expect(')');
        expect(':');
        if (idx.a.size() != arity_) fail("index " + to_string(idx) + " does not fit arity " + std::to_string(arity_));
        q.log[idx] += number();
    }
};

} // namespace

Annotation parse_annotation(const std::string& text, std::size_t arity) { return AnnotationReader(text, arity).read(); }

} // namespace logpot

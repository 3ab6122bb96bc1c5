#pragma once

#include <gmpxx.h>

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "logpot/syntax.hpp"
#include "logpot/value.hpp"

namespace logpot {

using Rational = mpq_class;

// Index (a_1..a_m | b) of the basic function log(a_1|t_1| + ... + a_m|t_m| + b).
struct LogIndex {
    std::vector<unsigned> a;
    unsigned b = 0;

    bool is_constant() const;
    // The argument of the logarithm is at least 1 for all trees.
    bool at_least_one() const;

    auto operator<=>(const LogIndex&) const = default;
};

std::string to_string(const LogIndex& i);

// Sparse nonnegative coefficients over the basic potential functions of a
// sequence of `arity` trees: one rank coefficient per tree plus log terms.
template <class Coeff>
struct AnnotationOf {
    std::size_t arity = 0;
    std::vector<Coeff> rank;
    std::map<LogIndex, Coeff> log;

    AnnotationOf() = default;
    explicit AnnotationOf(std::size_t m) : arity(m), rank(m) {}

    Coeff& at(const LogIndex& i) {
        if (i.a.size() != arity) throw std::invalid_argument("log index " + to_string(i) + " does not fit arity " + std::to_string(arity));
        return log[i];
    }
    Coeff get(const LogIndex& i) const {
        auto it = log.find(i);
        return it == log.end() ? Coeff() : it->second;
    }
    Coeff constant(unsigned b) const { return get(LogIndex{std::vector<unsigned>(arity, 0), b}); }
};

using Annotation = AnnotationOf<Rational>;

// log'(n) = log2(max(n, 1)).
double log_prime(double n);

double rank(const Tree& t);

// Φ(t_1..t_m; Q).
double potential(const std::vector<Tree>& trees, const Annotation& q);
double potential(const Tree& t, const Annotation& q);

// Value of a single basic function on the given trees.
double basic_potential(const std::vector<Tree>& trees, const LogIndex& i);

void validate(const Annotation& q);
bool is_zero(const Annotation& q);
bool operator==(const Annotation& x, const Annotation& y);

// Merges slots i and j (j is removed, the merged slot stays at i).
template <class Coeff>
AnnotationOf<Coeff> share(const AnnotationOf<Coeff>& q, std::size_t i, std::size_t j) {
    if (i == j || i >= q.arity || j >= q.arity) throw std::invalid_argument("share: bad slots");
    AnnotationOf<Coeff> out(q.arity - 1);
    std::size_t k = 0;
    for (std::size_t s = 0; s < q.arity; ++s) {
        if (s == j) continue;
        out.rank[k] = q.rank[s];
        if (s == i) out.rank[k] += q.rank[j];
        ++k;
    }
    for (const auto& [idx, c] : q.log) {
        LogIndex m;
        m.b = idx.b;
        for (std::size_t s = 0; s < q.arity; ++s) {
            if (s == j) continue;
            m.a.push_back(s == i ? idx.a[i] + idx.a[j] : idx.a[s]);
        }
        out.log[m] += c;
    }
    return out;
}

// Q + K: raises the coefficient of the constant function log(0|t| + 2) = 1.
template <class Coeff, class K>
AnnotationOf<Coeff> add_constant(AnnotationOf<Coeff> q, const K& k) {
    q.log[LogIndex{std::vector<unsigned>(q.arity, 0), 2}] += k;
    return q;
}

// Which a-entries and constants fresh annotations range over.
struct IndexTemplate {
    std::set<unsigned> a_entries{0, 1};
    std::set<unsigned> b_values{0, 1, 2};
    // Upper bound on nonzero a-entries per index; 0 means unbounded.
    unsigned max_support = 0;

    void validate() const;
    std::vector<LogIndex> indices(std::size_t arity) const;
};

// "a=0..1,b=0..2" style description used by the CLI.
IndexTemplate parse_template(const std::string& spec);
std::string to_string(const IndexTemplate& t);

struct AnnotatedSignature {
    std::string function;
    FunctionType type;
    std::vector<std::pair<Annotation, Annotation>> costed;
    std::vector<std::pair<Annotation, Annotation>> cost_free;
};

std::size_t tree_count(const std::vector<SimpleType>& types);
std::size_t result_arity(SimpleType t);

// Annotation text format: `rank: [q1,...]; log: {(a1,...,am|b): q, ...}`.
std::string format_annotation(const Annotation& q);
Annotation parse_annotation(const std::string& text, std::size_t arity);

} // namespace logpot

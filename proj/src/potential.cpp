#include "logpot/potential.hpp"

#include <cmath>
#include <sstream>

namespace logpot {

bool LogIndex::is_constant() const {
    for (unsigned x : a)
        if (x) return false;
    return true;
}

bool LogIndex::at_least_one() const { return b >= 1 || !is_constant(); }

std::string to_string(const LogIndex& i) {
    std::string s = "(";
    for (std::size_t k = 0; k < i.a.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(i.a[k]);
    }
    return s + "|" + std::to_string(i.b) + ")";
}

double log_prime(double n) { return n <= 1 ? 0.0 : std::log2(n); }

double rank(const Tree& t) {
    if (t.is_leaf()) return 0.0;
    return rank(t.left()) + log_prime(double(t.left().size())) + log_prime(double(t.right().size())) + rank(t.right());
}

double basic_potential(const std::vector<Tree>& trees, const LogIndex& i) {
    if (i.a.size() != trees.size()) throw std::invalid_argument("basic potential: arity mismatch");
    double arg = i.b;
    for (std::size_t k = 0; k < trees.size(); ++k) arg += double(i.a[k]) * double(trees[k].size());
    return log_prime(arg);
}

double potential(const std::vector<Tree>& trees, const Annotation& q) {
    if (trees.size() != q.arity)
        throw std::invalid_argument("potential: " + std::to_string(trees.size()) + " trees for an annotation of arity " +
                                    std::to_string(q.arity));
    double sum = 0;
    for (std::size_t k = 0; k < trees.size(); ++k)
        if (sgn(q.rank[k]) != 0) sum += q.rank[k].get_d() * rank(trees[k]);
    for (const auto& [idx, c] : q.log)
        if (sgn(c) != 0) sum += c.get_d() * basic_potential(trees, idx);
    return sum;
}

double potential(const Tree& t, const Annotation& q) { return potential(std::vector<Tree>{t}, q); }

void validate(const Annotation& q) {
    if (q.rank.size() != q.arity) throw std::invalid_argument("annotation: rank list does not match arity");
    for (const auto& r : q.rank)
        if (sgn(r) < 0) throw std::invalid_argument("annotation: negative rank coefficient");
    for (const auto& [idx, c] : q.log) {
        if (idx.a.size() != q.arity) throw std::invalid_argument("annotation: index " + to_string(idx) + " has wrong length");
        if (sgn(c) < 0) throw std::invalid_argument("annotation: negative coefficient at " + to_string(idx));
    }
}

bool is_zero(const Annotation& q) {
    for (const auto& r : q.rank)
        if (sgn(r) != 0) return false;
    for (const auto& [idx, c] : q.log)
        if (sgn(c) != 0) return false;
    return true;
}

bool operator==(const Annotation& x, const Annotation& y) {
    if (x.arity != y.arity || x.rank != y.rank) return false;
    for (const auto& [idx, c] : x.log)
        if (y.get(idx) != c) return false;
    for (const auto& [idx, c] : y.log)
        if (x.get(idx) != c) return false;
    return true;
}

void IndexTemplate::validate() const {
    if (a_entries.empty() || b_values.empty()) throw std::invalid_argument("template: empty entry set");
    if (!a_entries.count(0)) throw std::invalid_argument("template: a-entries must include 0");
    if (!b_values.count(2)) throw std::invalid_argument("template: b must include 2 so the constant 1 is expressible");
}

std::vector<LogIndex> IndexTemplate::indices(std::size_t arity) const {
    std::vector<unsigned> entries(a_entries.begin(), a_entries.end());
    std::vector<LogIndex> out;
    std::vector<std::size_t> pos(arity, 0);
    for (;;) {
        LogIndex idx;
        unsigned support = 0;
        for (std::size_t k = 0; k < arity; ++k) {
            idx.a.push_back(entries[pos[k]]);
            if (entries[pos[k]]) ++support;
        }
        if (max_support == 0 || support <= max_support)
            for (unsigned b : b_values) {
                idx.b = b;
                out.push_back(idx);
            }
        std::size_t k = 0;
        while (k < arity && ++pos[k] == entries.size()) pos[k++] = 0;
        if (k == arity) break;
    }
    return out;
}

namespace {

std::set<unsigned> parse_range(const std::string& v) {
    std::set<unsigned> out;
    auto dots = v.find("..");
    try {
        if (dots == std::string::npos) {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ';')) out.insert(unsigned(std::stoul(item)));
        } else {
            unsigned lo = unsigned(std::stoul(v.substr(0, dots)));
            unsigned hi = unsigned(std::stoul(v.substr(dots + 2)));
            if (lo > hi) throw std::invalid_argument("empty range");
            for (unsigned x = lo; x <= hi; ++x) out.insert(x);
        }
    } catch (const std::logic_error&) {
        throw std::invalid_argument("template: bad range '" + v + "'");
    }
    return out;
}

} // namespace

IndexTemplate parse_template(const std::string& spec) {
    IndexTemplate t;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("template: expected key=value in '" + part + "'");
        std::string key = part.substr(0, eq), val = part.substr(eq + 1);
        if (key == "a") t.a_entries = parse_range(val);
        else if (key == "b") t.b_values = parse_range(val);
        else if (key == "support") t.max_support = unsigned(*parse_range(val).begin());
        else throw std::invalid_argument("template: unknown key '" + key + "'");
    }
    t.validate();
    return t;
}

std::string to_string(const IndexTemplate& t) {
    auto show = [](const std::set<unsigned>& s) {
        bool contiguous = *s.rbegin() - *s.begin() + 1 == s.size();
        if (contiguous) return std::to_string(*s.begin()) + ".." + std::to_string(*s.rbegin());
        std::string out;
        for (unsigned x : s) out += (out.empty() ? "" : ";") + std::to_string(x);
        return out;
    };
    std::string s = "a=" + show(t.a_entries) + ",b=" + show(t.b_values);
    if (t.max_support) s += ",support=" + std::to_string(t.max_support);
    return s;
}

std::size_t tree_count(const std::vector<SimpleType>& types) {
    std::size_t n = 0;
    for (auto t : types)
        if (t == SimpleType::Tree) ++n;
    return n;
}

std::size_t result_arity(SimpleType t) { return t == SimpleType::Tree ? 1 : 0; }

} // namespace logpot

#include "logpot/corpus.hpp"

#include <map>

namespace logpot {

namespace {

// All shapes with n leaves whose labels start at `first`.
const std::vector<Tree>& shapes(std::size_t n, long first, std::map<std::pair<std::size_t, long>, std::vector<Tree>>& memo) {
    auto key = std::make_pair(n, first);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<Tree> out;
    if (n == 1) {
        out.push_back(Tree::leaf());
    } else {
        for (std::size_t l = 1; l < n; ++l) {
            long label = first + long(l) - 1;
            const auto& left = shapes(l, first, memo);
            const auto& right = shapes(n - l, label + 1, memo);
            for (const auto& a : left)
                for (const auto& b : right) out.push_back(Tree::node(a, label, b));
        }
    }
    return memo.emplace(key, std::move(out)).first->second;
}

Tree build(std::mt19937_64& rng, std::size_t leaves, long& next) {
    if (leaves == 1) return Tree::leaf();
    std::uniform_int_distribution<std::size_t> split(1, leaves - 1);
    std::size_t l = split(rng);
    Tree left = build(rng, l, next);
    long label = next++;
    Tree right = build(rng, leaves - l, next);
    return Tree::node(std::move(left), label, std::move(right));
}

} // namespace

std::vector<Tree> exhaustive_bsts(std::size_t max_leaves) {
    std::map<std::pair<std::size_t, long>, std::vector<Tree>> memo;
    std::vector<Tree> out;
    for (std::size_t n = 1; n <= max_leaves; ++n) {
        const auto& s = shapes(n, 1, memo);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

Tree random_bst(std::mt19937_64& rng, std::size_t leaves) {
    if (leaves == 0) throw std::invalid_argument("random_bst: a tree has at least one leaf");
    long next = 1;
    return build(rng, leaves, next);
}

std::vector<Tree> random_bsts(std::size_t count, std::size_t max_leaves, std::uint64_t seed) {
    std::vector<Tree> out;
    if (max_leaves == 0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(1, max_leaves);
    for (std::size_t i = 0; i < count; ++i) out.push_back(random_bst(rng, size(rng)));
    return out;
}

std::vector<Tree> generate(const CorpusSpec& spec) {
    if (spec.generator == CorpusSpec::Generator::Exhaustive) return exhaustive_bsts(spec.max_leaves);
    return random_bsts(spec.count, spec.max_leaves, spec.seed);
}

std::vector<BaseValue> probe_keys(const Tree& t, const CorpusSpec& spec) {
    std::vector<BaseValue> keys;
    if (spec.key_limit) {
        for (std::int64_t k = 0; k <= *spec.key_limit; ++k) keys.emplace_back(long(k));
        return keys;
    }
    auto labels = inorder_labels(t);
    if (labels.empty()) return {BaseValue(0)};
    keys.push_back(labels.front() - 1);
    keys.insert(keys.end(), labels.begin(), labels.end());
    keys.push_back(labels.back() + 1);
    return keys;
}

bool is_bst(const Tree& t) {
    auto labels = inorder_labels(t);
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (!(labels[i - 1] < labels[i])) return false;
    return true;
}

} // namespace logpot

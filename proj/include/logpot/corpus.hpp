#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "logpot/value.hpp"

namespace logpot {

struct CorpusSpec {
    enum class Generator { Exhaustive, Random };
    Generator generator = Generator::Exhaustive;
    std::size_t max_leaves = 12;
    // Random generator only.
    std::size_t count = 1000;
    std::uint64_t seed = 1;
    // Keys 0..key_limit for every tree; unset means every label plus one key
    // below the smallest and one above the largest.
    std::optional<std::int64_t> key_limit;
};

// Every tree shape with 1..max_leaves leaves, labelled 1, 2, ... in order.
std::vector<Tree> exhaustive_bsts(std::size_t max_leaves);

// A tree with the given number of leaves whose left subtree size is drawn
// uniformly at every node, labelled 1, 2, ... in order.
Tree random_bst(std::mt19937_64& rng, std::size_t leaves);

// `count` trees with sizes drawn uniformly from 1..max_leaves.
std::vector<Tree> random_bsts(std::size_t count, std::size_t max_leaves, std::uint64_t seed);

std::vector<Tree> generate(const CorpusSpec& spec);

std::vector<BaseValue> probe_keys(const Tree& t, const CorpusSpec& spec);

bool is_bst(const Tree& t);

} // namespace logpot

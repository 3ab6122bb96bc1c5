#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace logpot {

// Elements of the base type: arbitrary-precision integers.
using BaseValue = mpz_class;

struct TreeNode;

// Immutable binary tree; a null pointer is the leaf.
class Tree {
public:
    Tree() = default;
    static Tree leaf() { return Tree(); }
    static Tree node(Tree left, BaseValue label, Tree right);

    bool is_leaf() const { return !node_; }
    const Tree& left() const;
    const BaseValue& label() const;
    const Tree& right() const;

    // Number of leaves; |leaf| = 1.
    std::size_t size() const;

    bool operator==(const Tree& other) const;
    bool same_node(const Tree& other) const { return node_ == other.node_; }

private:
    std::shared_ptr<const TreeNode> node_;
};

struct TreeNode {
    Tree left;
    BaseValue label;
    Tree right;
    std::size_t size;
};

struct Value {
    std::variant<bool, BaseValue, Tree> data;

    static Value boolean(bool b) { return Value{b}; }
    static Value base(BaseValue v) { return Value{std::move(v)}; }
    static Value tree(Tree t) { return Value{std::move(t)}; }

    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_base() const { return std::holds_alternative<BaseValue>(data); }
    bool is_tree() const { return std::holds_alternative<Tree>(data); }

    // Throw std::invalid_argument on kind mismatch.
    bool as_bool() const;
    const BaseValue& as_base() const;
    const Tree& as_tree() const;

    bool operator==(const Value& other) const;
};

// size(v) for a tree value; throws std::invalid_argument otherwise.
std::size_t size(const Value& v);

std::vector<BaseValue> inorder_labels(const Tree& t);

// Value syntax: `true`, `false`, integers, `leaf`/`nil`, `(l, a, r)`.
std::string format_value(const Value& v);
std::string format_tree(const Tree& t);
Value parse_value(std::string_view text);

} // namespace logpot

#include "logpot/value.hpp"

#include <cctype>
#include <stdexcept>

namespace logpot {

Tree Tree::node(Tree left, BaseValue label, Tree right) {
    Tree t;
    std::size_t n = left.size() + right.size();
    t.node_ = std::make_shared<const TreeNode>(TreeNode{std::move(left), std::move(label), std::move(right), n});
    return t;
}

const Tree& Tree::left() const {
    if (!node_) throw std::invalid_argument("left of leaf");
    return node_->left;
}

const BaseValue& Tree::label() const {
    if (!node_) throw std::invalid_argument("label of leaf");
    return node_->label;
}

const Tree& Tree::right() const {
    if (!node_) throw std::invalid_argument("right of leaf");
    return node_->right;
}

std::size_t Tree::size() const { return node_ ? node_->size : 1; }

bool Tree::operator==(const Tree& other) const {
    if (node_ == other.node_) return true;
    if (!node_ || !other.node_) return false;
    return node_->size == other.node_->size && node_->label == other.node_->label && node_->left == other.node_->left &&
           node_->right == other.node_->right;
}

bool Value::as_bool() const {
    if (auto b = std::get_if<bool>(&data)) return *b;
    throw std::invalid_argument("expected a Bool value");
}

const BaseValue& Value::as_base() const {
    if (auto b = std::get_if<BaseValue>(&data)) return *b;
    throw std::invalid_argument("expected a base value");
}

const Tree& Value::as_tree() const {
    if (auto t = std::get_if<Tree>(&data)) return *t;
    throw std::invalid_argument("expected a tree value");
}

bool Value::operator==(const Value& other) const { return data == other.data; }

std::size_t size(const Value& v) { return v.as_tree().size(); }

std::vector<BaseValue> inorder_labels(const Tree& t) {
    std::vector<BaseValue> out;
    std::vector<const Tree*> stack;
    const Tree* cur = &t;
    while (!cur->is_leaf() || !stack.empty()) {
        while (!cur->is_leaf()) {
            stack.push_back(cur);
            cur = &cur->left();
        }
        const Tree* top = stack.back();
        stack.pop_back();
        out.push_back(top->label());
        cur = &top->right();
    }
    return out;
}

std::string format_tree(const Tree& t) {
    if (t.is_leaf()) return "leaf";
    return "(" + format_tree(t.left()) + ", " + t.label().get_str() + ", " + format_tree(t.right()) + ")";
}

std::string format_value(const Value& v) {
    if (v.is_bool()) return v.as_bool() ? "true" : "false";
    if (v.is_base()) return v.as_base().get_str();
    return format_tree(v.as_tree());
}

namespace {

class ValueReader {
public:
    explicit ValueReader(std::string_view s) : s_(s) {}

    Value read_all() {
        Value v = read();
        skip();
        if (i_ != s_.size()) fail("trailing characters");
        return v;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("bad value '" + std::string(s_) + "' at offset " + std::to_string(i_) + ": " + msg);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool word(std::string_view w) {
        if (s_.substr(i_, w.size()) != w) return false;
        std::size_t end = i_ + w.size();
        if (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) return false;
        i_ = end;
        return true;
    }
    void expect(char c) {
        skip();
        if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    Value read() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end");
        if (word("true")) return Value::boolean(true);
        if (word("false")) return Value::boolean(false);
        if (word("leaf") || word("nil")) return Value::tree(Tree::leaf());
        char c = s_[i_];
        if (c == '(') {
            ++i_;
            Value l = read();
            expect(',');
            Value a = read();
            expect(',');
            Value r = read();
            expect(')');
            if (!l.is_tree() || !r.is_tree() || !a.is_base()) fail("node needs tree children and a base label");
            return Value::tree(Tree::node(l.as_tree(), a.as_base(), r.as_tree()));
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i_ + 1;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
            std::string digits(s_.substr(i_, j - i_));
            if (digits == "-") fail("expected digits");
            i_ = j;
            return Value::base(BaseValue(digits));
        }
        fail("unexpected character");
    }
};

} // namespace

Value parse_value(std::string_view text) { return ValueReader(text).read_all(); }

} // namespace logpot

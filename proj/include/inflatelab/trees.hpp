#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "inflatelab/rational.hpp"

namespace inflatelab {

/// Allowed child counts of non-terminal nodes.
enum class AritySet {
    ternary,        // every internal node has exactly three children
    unary_ternary,  // one or three children
};

inline constexpr int kDefaultEnumerationCap = 8;

/// Rooted tree with ordered children: a leaf, or a node with 1 or 3 subtrees.
class Tree {
public:
    Tree() = default;  // leaf
    static Tree leaf() { return {}; }
    static Tree node(std::vector<Tree> children) {
        if (children.size() != 1 && children.size() != 3)
            throw StructuralError("tree nodes have one or three children, got " + std::to_string(children.size()));
        Tree t;
        t.children_ = std::move(children);
        return t;
    }

    bool is_leaf() const noexcept { return children_.empty(); }
    std::size_t arity() const noexcept { return children_.size(); }
    const std::vector<Tree>& children() const noexcept { return children_; }
    const Tree& child(std::size_t i) const { return children_.at(i); }

    std::size_t node_count() const {
        std::size_t c = 1;
        for (const auto& ch : children_) c += ch.node_count();
        return c;
    }
    std::size_t terminal_count() const {
        if (is_leaf()) return 1;
        std::size_t c = 0;
        for (const auto& ch : children_) c += ch.terminal_count();
        return c;
    }
    /// Number of non-terminal nodes with the given arity (0 = all of them).
    std::size_t internal_count(std::size_t arity = 0) const {
        if (is_leaf()) return 0;
        std::size_t c = (arity == 0 || children_.size() == arity) ? 1 : 0;
        for (const auto& ch : children_) c += ch.internal_count(arity);
        return c;
    }

    bool operator==(const Tree&) const = default;

private:
    std::vector<Tree> children_;
};

/// Unary/ternary internal node counts (j1, j3); generation is their sum.
struct TreeIndex {
    std::size_t unary = 0;
    std::size_t ternary = 0;
    std::size_t generation() const noexcept { return unary + ternary; }
    bool operator==(const TreeIndex&) const = default;
};

inline TreeIndex tree_index(const Tree& t) { return {t.internal_count(1), t.internal_count(3)}; }

inline bool fits_arity(const Tree& t, AritySet arity) {
    if (t.is_leaf()) return true;
    if (arity == AritySet::ternary && t.arity() != 3) return false;
    for (const auto& ch : t.children())
        if (!fits_arity(ch, arity)) return false;
    return true;
}

// Serialization: "L" for a leaf, "(" children ")" for a node.

inline void serialize_into(const Tree& t, std::string& out) {
    if (t.is_leaf()) {
        out += 'L';
        return;
    }
    out += '(';
    for (const auto& ch : t.children()) serialize_into(ch, out);
    out += ')';
}

inline std::string serialize(const Tree& t) {
    std::string s;
    serialize_into(t, s);
    return s;
}

namespace detail {
inline Tree parse_tree_at(std::string_view s, std::size_t& pos) {
    if (pos >= s.size()) throw ParseError("unexpected end of tree string", pos);
    if (s[pos] == 'L') {
        ++pos;
        return Tree::leaf();
    }
    if (s[pos] != '(') throw ParseError(std::string("unexpected character '") + s[pos] + "' in tree string", pos);
    std::size_t open = pos++;
    std::vector<Tree> children;
    while (pos < s.size() && s[pos] != ')') children.push_back(parse_tree_at(s, pos));
    if (pos >= s.size()) throw ParseError("unbalanced '(' in tree string", open);
    ++pos;
    if (children.size() != 1 && children.size() != 3)
        throw ParseError("node with " + std::to_string(children.size()) + " children", open);
    return Tree::node(std::move(children));
}
}  // namespace detail

inline Tree parse_tree(std::string_view s) {
    std::size_t pos = 0;
    Tree t = detail::parse_tree_at(s, pos);
    if (pos != s.size()) throw ParseError("trailing characters after tree", pos);
    return t;
}

/**
 * All trees with exactly `generation` internal nodes, each once, sorted by
 * serialization. For the mixed arity set the generation counts unary and
 * ternary nodes together.
 */
inline std::vector<Tree> enumerate(int generation, AritySet arity, int cap = kDefaultEnumerationCap) {
    if (generation < 0) throw UsageError("generation must be nonnegative");
    if (generation > cap)
        throw ResourceError("generation " + std::to_string(generation) + " exceeds enumeration cap " +
                            std::to_string(cap) + "; use count() instead");
    std::vector<std::vector<Tree>> by_gen(static_cast<std::size_t>(generation) + 1);
    by_gen[0] = {Tree::leaf()};
    for (int g = 1; g <= generation; ++g) {
        auto& out = by_gen[static_cast<std::size_t>(g)];
        if (arity == AritySet::unary_ternary)
            for (const auto& c : by_gen[static_cast<std::size_t>(g - 1)]) out.push_back(Tree::node({c}));
        for (int a = 0; a <= g - 1; ++a)
            for (int b = 0; a + b <= g - 1; ++b) {
                int c = g - 1 - a - b;
                for (const auto& ta : by_gen[static_cast<std::size_t>(a)])
                    for (const auto& tb : by_gen[static_cast<std::size_t>(b)])
                        for (const auto& tc : by_gen[static_cast<std::size_t>(c)]) out.push_back(Tree::node({ta, tb, tc}));
            }
    }
    auto result = std::move(by_gen[static_cast<std::size_t>(generation)]);
    std::vector<std::pair<std::string, std::size_t>> keys;
    keys.reserve(result.size());
    for (std::size_t i = 0; i < result.size(); ++i) keys.emplace_back(serialize(result[i]), i);
    std::sort(keys.begin(), keys.end());
    std::vector<Tree> sorted;
    sorted.reserve(result.size());
    for (const auto& [k, i] : keys) sorted.push_back(std::move(result[i]));
    return sorted;
}

/// Counts for generations 0..max_generation from the convolution recurrence.
inline std::vector<BigInt> count_sequence(int max_generation, AritySet arity) {
    if (max_generation < 0) throw UsageError("generation must be nonnegative");
    const auto n = static_cast<std::size_t>(max_generation) + 1;
    std::vector<BigInt> c(n);
    // pair[m] = sum_{a+b=m} c_a c_b
    std::vector<BigInt> pair(n);
    c[0] = 1;
    pair[0] = 1;
    for (std::size_t j = 1; j < n; ++j) {
        BigInt triple = 0;
        for (std::size_t a = 0; a <= j - 1; ++a) triple += c[a] * pair[j - 1 - a];
        c[j] = triple + (arity == AritySet::unary_ternary ? c[j - 1] : BigInt(0));
        BigInt p = 0;
        for (std::size_t a = 0; a <= j; ++a) p += c[a] * c[j - a];
        pair[j] = p;
    }
    return c;
}

inline BigInt count(int generation, AritySet arity) { return count_sequence(generation, arity).back(); }

/// Certifies count(j) <= c0^j exactly, for rational c0 > 0.
inline bool count_certificate(int generation, AritySet arity, const Rational& c0) {
    BigRational bound = 1;
    const BigRational base = c0.to_big();
    for (int i = 0; i < generation; ++i) bound *= base;
    return BigRational(count(generation, arity)) <= bound;
}

/// Constant used for count certificates: 27/4 for ternary trees, 8 for mixed arity.
inline Rational default_tree_constant(AritySet arity) {
    return arity == AritySet::ternary ? Rational(27, 4) : Rational(8);
}

}  // namespace inflatelab

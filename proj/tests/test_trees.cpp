#include <catch_amalgamated.hpp>

#include <set>

#include "inflatelab/trees.hpp"

using namespace inflatelab;

TEST_CASE("small generations", "[trees]") {
    auto g0 = enumerate(0, AritySet::ternary);
    REQUIRE(g0.size() == 1);
    CHECK(g0[0].is_leaf());
    CHECK(enumerate(2, AritySet::ternary).size() == 3);
    CHECK(enumerate(2, AritySet::unary_ternary).size() == 8);
    CHECK(count(3, AritySet::ternary) == 12);
    CHECK(count(1, AritySet::unary_ternary) == 2);
    auto g1 = enumerate(1, AritySet::unary_ternary);
    CHECK(serialize(g1[0]) == "(L)");
    CHECK(serialize(g1[1]) == "(LLL)");
}

TEST_CASE("Fuss-Catalan and mixed-arity sequences", "[trees]") {
    const std::vector<int> fuss = {1, 1, 3, 12, 55, 273, 1428};
    const auto c = count_sequence(6, AritySet::ternary);
    for (std::size_t j = 0; j < fuss.size(); ++j) CHECK(c[j] == fuss[j]);
    const std::vector<int> mixed = {1, 2, 8, 44, 280, 1936};
    const auto m = count_sequence(5, AritySet::unary_ternary);
    for (std::size_t j = 0; j < mixed.size(); ++j) CHECK(m[j] == mixed[j]);
    // closed form (1/(2j+1)) C(3j, j) well past 64 bits
    for (int j : {10, 30, 60}) {
        BigInt binom = 1;
        for (int i = 1; i <= j; ++i) binom = binom * (2 * j + i) / i;
        CHECK(count(j, AritySet::ternary) == binom / (2 * j + 1));
    }
}

TEST_CASE("enumeration agrees with the recurrence up to the cap", "[trees]") {
    for (auto arity : {AritySet::ternary, AritySet::unary_ternary}) {
        const int top = arity == AritySet::ternary ? 6 : 5;
        const auto c = count_sequence(top, arity);
        for (int j = 0; j <= top; ++j) CHECK(BigInt(enumerate(j, arity).size()) == c[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("structure of enumerated trees", "[trees][property]") {
    for (int j = 0; j <= 5; ++j) {
        std::set<std::string> seen;
        std::string prev;
        for (const auto& t : enumerate(j, AritySet::ternary)) {
            CHECK(t.node_count() == static_cast<std::size_t>(3 * j + 1));
            CHECK(t.terminal_count() == static_cast<std::size_t>(2 * j + 1));
            CHECK(t.internal_count() == static_cast<std::size_t>(j));
            CHECK(fits_arity(t, AritySet::ternary));
            const auto s = serialize(t);
            CHECK(seen.insert(s).second);
            CHECK(prev < s);  // canonical order
            prev = s;
        }
    }
    for (int j = 0; j <= 4; ++j) {
        std::set<std::string> seen;
        for (const auto& t : enumerate(j, AritySet::unary_ternary)) {
            const auto idx = tree_index(t);
            CHECK(idx.generation() == static_cast<std::size_t>(j));
            // each ternary node adds two terminals, unary nodes add none
            CHECK(t.terminal_count() == 2 * idx.ternary + 1);
            CHECK(seen.insert(serialize(t)).second);
        }
    }
}

TEST_CASE("serialization round trips", "[trees][io]") {
    for (auto arity : {AritySet::ternary, AritySet::unary_ternary})
        for (int j = 0; j <= 4; ++j)
            for (const auto& t : enumerate(j, arity)) {
                CHECK(parse_tree(serialize(t)) == t);
                CHECK(serialize(parse_tree(serialize(t))) == serialize(t));
            }
    CHECK(serialize(Tree::leaf()) == "L");
    CHECK(serialize(Tree::node({Tree::leaf(), Tree::leaf(), Tree::leaf()})) == "(LLL)");
}

TEST_CASE("malformed tree strings report positions", "[trees][errors]") {
    auto pos = [](const char* s) {
        try {
            parse_tree(s);
        } catch (const ParseError& e) {
            return static_cast<long>(e.position());
        }
        return -1L;
    };
    CHECK(pos("(LL)") == 0);
    CHECK(pos("(LLL") == 0);
    CHECK(pos("(LLX)") == 3);
    CHECK(pos("LL") == 1);
    CHECK(pos("") == 0);
    CHECK(pos("((LLL)L(L))") == -1);
    CHECK_THROWS_AS(Tree::node({Tree::leaf(), Tree::leaf()}), StructuralError);
}

TEST_CASE("cap and certificates", "[trees]") {
    CHECK_THROWS_AS(enumerate(9, AritySet::ternary), ResourceError);
    CHECK_NOTHROW(enumerate(3, AritySet::ternary, 3));
    CHECK_THROWS_AS(enumerate(4, AritySet::ternary, 3), ResourceError);
    for (int j = 0; j <= 30; ++j) CHECK(count_certificate(j, AritySet::ternary, Rational(27, 4)));
    CHECK_FALSE(count_certificate(2, AritySet::ternary, Rational(1)));
    // 8^j holds for the mixed set only up to j = 40: the growth rate is about 9.44
    CHECK(count_certificate(40, AritySet::unary_ternary, Rational(8)));
    CHECK_FALSE(count_certificate(41, AritySet::unary_ternary, Rational(8)));
}

#include <catch2/catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "support/tensor_oracles.hpp"
#include "tpr/knowledge_base.hpp"

using namespace tpr;
using namespace tprtest;
using Catch::Matchers::WithinAbs;

namespace {

KnowledgeBase empty_kb(Tensor::Repr repr = Tensor::Repr::factored) {
    auto space = apple_space();
    return KnowledgeBase(space, repr, Timeline::build(*space, 4));
}

Tensor shadow_sum(const KnowledgeBase& kb) {
    Tensor sum = Tensor::dense_zeros(dim_list(4, kb.space().d()));
    for (const auto& [p, net] : kb.shadow())
        sum += static_cast<double>(net) * encode_prop(p, kb.space()).densify();
    return sum;
}

}  // namespace

TEST_CASE("encode_prop builds the signed rank-1 binding", "[kb]") {
    auto space = apple_space();
    Tensor enc = encode_prop(prop("@", "a", "j", "t1"), *space);
    REQUIRE(enc.is_factored());
    REQUIRE(enc.order() == 4);
    Tensor expect = outer(outer(outer(space->tensor("@"), space->tensor("a")),
                                space->tensor("j")),
                          space->tensor("t1"));
    REQUIRE(max_abs_diff(enc, expect) < 1e-12);

    Tensor prec = encode_prop(prop("<", "t1", "t2"), *space);
    REQUIRE_THAT(prec.dot(Tensor::rank_one(1.0, {space->dual("<"), space->dual("t1"),
                                                 space->dual("t2"), space->dual(kDummySymbol)})),
                 WithinAbs(1.0, 1e-9));
}

TEST_CASE("a proposition and its negation cancel", "[kb]") {
    auto space = apple_space();
    Tensor sum = encode_prop(prop("@", "a", "j", "t4", -1), *space) +
                 encode_prop(prop("@", "a", "j", "t4"), *space);
    REQUIRE_THAT(sum.norm(), WithinAbs(0.0, 1e-9));
}

TEST_CASE("added facts hold and absent facts score zero", "[kb]") {
    for (auto repr : {Tensor::Repr::factored, Tensor::Repr::dense}) {
        KnowledgeBase kb = empty_kb(repr);
        REQUIRE_THAT(kb.holds(prop("@", "a", "j", "t1")), WithinAbs(0.0, 1e-12));
        kb.add(prop("@", "a", "j", "t1"));
        REQUIRE_THAT(kb.holds(prop("@", "a", "j", "t1")), WithinAbs(1.0, 1e-9));
        REQUIRE_THAT(kb.holds(prop("@", "a", "k", "t1")), WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("adding the negation cancels a fact", "[kb]") {
    KnowledgeBase kb = empty_kb();
    kb.add(prop("@", "a", "j", "t4"));
    kb.add(prop("@", "a", "j", "t4", -1));
    REQUIRE_THAT(kb.holds(prop("@", "a", "j", "t4")), WithinAbs(0.0, 1e-9));
    REQUIRE(kb.shadow().empty());
    REQUIRE(kb.b().term_count() == 0);
}

TEST_CASE("a standalone negation is retained with score -1", "[kb]") {
    KnowledgeBase kb = empty_kb();
    kb.add(prop("@", "a", "j", "t2", -1));
    REQUIRE_THAT(kb.holds(prop("@", "a", "j", "t2")), WithinAbs(-1.0, 1e-9));
    REQUIRE(kb.shadow().at(prop("@", "a", "j", "t2")) == -1);
}

TEST_CASE("three distinct facts give three terms and squared norm three", "[kb]") {
    KnowledgeBase kb = empty_kb();
    kb.add(prop("@", "a", "j", "t1"));
    kb.add(prop("@", "j", "f", "t2"));
    kb.add(prop("<", "t1", "t2"));
    REQUIRE(kb.b().term_count() == 3);
    double n = kb.b().densify().norm();
    REQUIRE_THAT(n * n, WithinAbs(3.0, 1e-9));
}

TEST_CASE("the time operator steps time vectors forward and back", "[kb]") {
    auto space = apple_space();
    Timeline tl = Timeline::build(*space, 4);
    for (std::size_t i = 1; i < 4; ++i) {
        auto stepped = tl.apply(tl.time_vec(i));
        for (std::size_t c = 0; c < space->d(); ++c)
            REQUIRE_THAT(stepped[c], WithinAbs(tl.time_vec(i + 1)[c], 1e-9));
        auto back = tl.apply_inverse(stepped);
        for (std::size_t c = 0; c < space->d(); ++c)
            REQUIRE_THAT(back[c], WithinAbs(tl.time_vec(i)[c], 1e-9));
    }
}

TEST_CASE("the time operator annihilates non-time symbols", "[kb]") {
    auto space = apple_space();
    Timeline tl = Timeline::build(*space, 4);
    auto out = tl.apply(space->vec("a"));
    for (double x : out) REQUIRE_THAT(x, WithinAbs(0.0, 1e-9));
}

TEST_CASE("timelines need at least two time symbols", "[kb]") {
    auto space = apple_space();
    REQUIRE_THROWS_AS(Timeline::build(*space, 1), symbol_error);
}

TEST_CASE("precedence updates record the immediate-precedence fact", "[kb]") {
    KnowledgeBase kb = empty_kb();
    kb.add_precedence(1);  // no predecessor: no-op
    REQUIRE(kb.shadow().empty());
    kb.add_precedence(2);
    REQUIRE(kb.shadow_holds(prop("<", "t1", "t2")));
    kb.add_precedence(3);
    kb.add_precedence(4);
    std::size_t count = 0;
    for (const auto& [p, net] : kb.shadow())
        if (p.pred == "<") count += net;
    REQUIRE(count == 3);
}

TEST_CASE("densified tensor equals the shadow encoding after random ops", "[kb]") {
    std::mt19937_64 rng(77);
    for (auto repr : {Tensor::Repr::factored, Tensor::Repr::dense}) {
        KnowledgeBase kb = empty_kb(repr);
        std::vector<std::string> ents{"a", "j", "f", "k"};
        for (int op = 0; op < 30; ++op) {
            Proposition p = prop("@", ents[rng() % 4], ents[rng() % 4],
                                 time_symbol(1 + rng() % 4), rng() % 3 == 0 ? -1 : +1);
            kb.add(p);
            REQUIRE(max_abs_diff(kb.b(), shadow_sum(kb)) < 1e-9);
        }
        // holds matches shadow membership for every canonical proposition
        for (const auto& [p, net] : kb.shadow())
            REQUIRE_THAT(kb.holds(p), WithinAbs(static_cast<double>(net), 1e-9));
    }
}

TEST_CASE("unknown symbols in propositions are rejected", "[kb]") {
    KnowledgeBase kb = empty_kb();
    REQUIRE_THROWS_AS(kb.add(prop("@", "nope", "j", "t1")), symbol_error);
    REQUIRE_THROWS_AS(kb.holds(prop("zzz", "a", "j", "t1")), symbol_error);
}

#include <catch2/catch_amalgamated.hpp>

#include "support/tensor_oracles.hpp"
#include "tpr/tensor.hpp"

using namespace tpr;
using namespace tprtest;
using Catch::Matchers::WithinAbs;

namespace {

Tensor basis2(std::size_t k) {
    std::vector<double> v(2, 0.0);
    v[k] = 1.0;
    return Tensor::from_vector(v);
}

dim_list random_dims(std::mt19937_64& rng, std::size_t max_order, std::size_t max_d) {
    std::size_t order = rng() % (max_order + 1);
    dim_list dims(order);
    for (auto& d : dims) d = 1 + rng() % max_d;
    return dims;
}

}  // namespace

TEST_CASE("outer of one-hot basis vectors places a single one", "[tensor]") {
    Tensor m = outer(basis2(0), basis2(0));
    REQUIRE(m.order() == 2);
    REQUIRE_THAT(m.at({0, 0}), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(m.at({0, 1}), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(m.at({1, 0}), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(m.at({1, 1}), WithinAbs(0.0, 1e-15));
}

TEST_CASE("outer of two vectors equals the rank-1 matrix u v^T", "[tensor]") {
    std::mt19937_64 rng(11);
    Tensor u = random_dense(rng, {5});
    Tensor v = random_dense(rng, {4});
    Tensor m = outer(u, v);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            REQUIRE_THAT(m.at({i, j}), WithinAbs(u.at({i}) * v.at({j}), 1e-12));
}

TEST_CASE("outer matches the nested-loop oracle", "[tensor]") {
    std::mt19937_64 rng(12);
    Tensor a = random_dense(rng, {3, 3});
    Tensor b = random_dense(rng, {3});
    REQUIRE(max_abs_diff(outer(a, b), outer_loops(a, b)) < 1e-12);
}

TEST_CASE("outer of factored operands stays factored", "[tensor]") {
    std::mt19937_64 rng(13);
    Tensor a = random_factored(rng, {2, 3}, 2);
    Tensor b = random_factored(rng, {4}, 3);
    Tensor c = outer(a, b);
    REQUIRE(c.is_factored());
    REQUIRE(c.order() == 3);
    REQUIRE(max_abs_diff(c, outer_loops(a, b)) < 1e-12);
}

TEST_CASE("contracting the identity gives its trace", "[tensor]") {
    Tensor eye = Tensor::dense({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor tr = contract(eye, 0, 1);
    REQUIRE(tr.order() == 0);
    REQUIRE_THAT(tr.value(), WithinAbs(3.0, 1e-15));
}

TEST_CASE("contracting an outer product gives the dot product", "[tensor]") {
    std::mt19937_64 rng(14);
    Tensor u = random_dense(rng, {6});
    Tensor v = random_dense(rng, {6});
    double expect = Tensor::dot_vec(u.to_vector(), v.to_vector());
    REQUIRE_THAT(contract(outer(u, v), 0, 1).value(), WithinAbs(expect, 1e-12));
}

TEST_CASE("contraction matches the exhaustive-sum oracle on an order-4 tensor", "[tensor]") {
    std::mt19937_64 rng(15);
    Tensor t = random_dense(rng, {2, 2, 2, 2});
    REQUIRE(max_abs_diff(contract(t, 1, 3), contract_loops(t, 1, 3)) < 1e-12);
    Tensor f = random_factored(rng, {3, 2, 3, 2}, 4);
    REQUIRE(max_abs_diff(contract(f, 0, 2), contract_loops(f, 0, 2)) < 1e-12);
}

TEST_CASE("contract rejects mismatched or out-of-range modes", "[tensor]") {
    Tensor t = Tensor::dense_zeros({2, 3});
    REQUIRE_THROWS_AS(contract(t, 0, 1), tensor_error);  // sizes differ
    REQUIRE_THROWS_AS(contract(t, 0, 5), tensor_error);
    REQUIRE_THROWS_AS(contract(t, 1, 1), tensor_error);
}

TEST_CASE("inner with one pair is the matrix-vector product", "[tensor]") {
    std::mt19937_64 rng(16);
    Tensor m = random_dense(rng, {4, 3});
    Tensor u = random_dense(rng, {3});
    Tensor mu = inner(m, u, {{1, 0}});
    REQUIRE(mu.order() == 1);
    for (std::size_t i = 0; i < 4; ++i) {
        double expect = 0.0;
        for (std::size_t j = 0; j < 3; ++j) expect += m.at({i, j}) * u.at({j});
        REQUIRE_THAT(mu.at({i}), WithinAbs(expect, 1e-12));
    }
}

TEST_CASE("inner over all modes of a normalized rank-1 tensor is one", "[tensor]") {
    std::vector<double> a{0.6, 0.8};
    std::vector<double> b{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    Tensor t = Tensor::rank_one(1.0, {a, b});
    REQUIRE_THAT(inner(t, t, {{0, 0}, {1, 1}}).value(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("inner matches the dense outer-then-contract oracle", "[tensor]") {
    std::mt19937_64 rng(17);
    Tensor a = random_dense(rng, {2, 2, 2, 2});
    Tensor b = random_dense(rng, {2, 2, 2, 2});
    ModePairs pairs{{0, 1}, {2, 3}, {3, 0}};
    REQUIRE(max_abs_diff(inner(a, b, pairs), inner_loops(a, b, pairs)) < 1e-12);
}

TEST_CASE("inner rejects repeated modes and size mismatches", "[tensor]") {
    Tensor a = Tensor::dense_zeros({2, 3});
    Tensor b = Tensor::dense_zeros({2, 2});
    REQUIRE_THROWS_AS(inner(a, b, {{1, 0}}), tensor_error);
    REQUIRE_THROWS_AS(inner(a, b, {{0, 0}, {0, 1}}), tensor_error);
}

TEST_CASE("factored and mixed inner agree with the dense path", "[tensor]") {
    std::mt19937_64 rng(18);
    Tensor fa = random_factored(rng, {3, 2, 4}, 3);
    Tensor fb = random_factored(rng, {2, 3, 2}, 2);
    ModePairs pairs{{1, 0}, {0, 1}};
    Tensor ff = inner(fa, fb, pairs);
    REQUIRE(ff.is_factored());
    REQUIRE(max_abs_diff(ff, inner_loops(fa, fb, pairs)) < 1e-12);

    // factored x dense with a single free dense mode stays factored
    Tensor db = fb.densify();
    Tensor fd = inner(fa, db, pairs);
    REQUIRE(fd.is_factored());
    REQUIRE(max_abs_diff(fd, inner_loops(fa, fb, pairs)) < 1e-12);

    Tensor da = fa.densify();
    REQUIRE(max_abs_diff(inner(da, fb, pairs), inner_loops(fa, fb, pairs)) < 1e-12);
}

TEST_CASE("bilinearity of outer and inner", "[tensor]") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        Tensor u = random_dense(rng, {3, 2});
        Tensor u2 = random_dense(rng, {3, 2});
        Tensor v = random_dense(rng, {2, 2});
        double a = uniform_pm1(rng), b = uniform_pm1(rng);
        Tensor lhs = outer(a * u + b * u2, v);
        Tensor rhs = a * outer(u, v) + b * outer(u2, v);
        REQUIRE(max_abs_diff(lhs, rhs) < 1e-9);
        ModePairs pairs{{1, 0}};
        Tensor li = inner(a * u + b * u2, v, pairs);
        Tensor ri = a * inner(u, v, pairs) + b * inner(u2, v, pairs);
        REQUIRE(max_abs_diff(li, ri) < 1e-9);
    }
}

TEST_CASE("densify-then-op equals op-then-densify on factored tensors", "[tensor]") {
    std::mt19937_64 rng(20);
    for (int rep = 0; rep < 25; ++rep) {
        dim_list da = random_dims(rng, 3, 3);
        dim_list db = random_dims(rng, 2, 3);
        Tensor a = random_factored(rng, da, 1 + rng() % 8);
        Tensor b = random_factored(rng, db, 1 + rng() % 8);
        REQUIRE(max_abs_diff(outer(a, b), outer(a.densify(), b.densify())) < 1e-9);
        if (a.order() >= 2 && a.dims()[0] == a.dims()[1])
            REQUIRE(max_abs_diff(contract(a, 0, 1), contract(a.densify(), 0, 1)) < 1e-9);
        if (!da.empty() && !db.empty() && da[0] == db[0]) {
            ModePairs pairs{{0, 0}};
            REQUIRE(max_abs_diff(inner(a, b, pairs), inner(a.densify(), b.densify(), pairs)) <
                    1e-9);
        }
    }
}

TEST_CASE("mode-count arithmetic", "[tensor]") {
    std::mt19937_64 rng(21);
    Tensor a = random_dense(rng, {2, 3, 2});
    Tensor b = random_dense(rng, {3, 2});
    REQUIRE(outer(a, b).order() == 5);
    REQUIRE(contract(a, 0, 2).order() == 1);
    REQUIRE(inner(a, b, {{1, 0}, {2, 1}}).order() == 3 + 2 - 2 * 2);
}

TEST_CASE("scalars are order-0 tensors closed under contraction", "[tensor]") {
    Tensor s = Tensor::scalar(2.5);
    REQUIRE(s.order() == 0);
    REQUIRE_THAT(outer(s, s).value(), WithinAbs(6.25, 1e-15));
    Tensor u = Tensor::from_vector({1.0, 2.0});
    REQUIRE(outer(s, u).order() == 1);
    REQUIRE_THAT(inner(u, u, {{0, 0}}).value(), WithinAbs(5.0, 1e-15));
}

TEST_CASE("compact merges duplicate terms and drops cancellations", "[tensor]") {
    std::vector<double> f{1.0, 2.0};
    Tensor t = Tensor::factored({2}, {RankOneTerm{1.0, {f}}, RankOneTerm{0.5, {f}},
                                      RankOneTerm{-1.5, {f}}});
    t.compact();
    REQUIRE(t.term_count() == 0);
    REQUIRE_THAT(t.norm(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("factored norm agrees with dense norm", "[tensor]") {
    std::mt19937_64 rng(22);
    Tensor t = random_factored(rng, {3, 3, 2}, 5);
    REQUIRE_THAT(t.norm(), WithinAbs(t.densify().norm(), 1e-9));
    REQUIRE_THAT(t.dot(t.densify()), WithinAbs(t.densify().dot(t.densify()), 1e-9));
}

TEST_CASE("permuted reorders modes consistently in both representations", "[tensor]") {
    std::mt19937_64 rng(23);
    Tensor t = random_factored(rng, {2, 3, 4}, 3);
    std::vector<std::size_t> perm{2, 0, 1};
    Tensor pf = t.permuted(perm);
    Tensor pd = t.densify().permuted(perm);
    REQUIRE(pf.dims() == dim_list{4, 2, 3});
    REQUIRE(max_abs_diff(pf, pd) < 1e-12);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k)
                REQUIRE_THAT(pf.at({k, i, j}), WithinAbs(t.at({i, j, k}), 1e-12));
}

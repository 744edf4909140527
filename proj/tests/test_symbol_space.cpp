#include <catch2/catch_amalgamated.hpp>

#include "support/tensor_oracles.hpp"
#include "tpr/symbol_space.hpp"

using namespace tpr;
using Catch::Matchers::WithinAbs;

namespace {

// Independent dual computation for cross-checking: solves F^T F X = F^T by
// plain elimination without pivoting tricks shared with the library.
std::vector<std::vector<double>> reference_duals(const SymbolSpace& s) {
    const std::size_t n = s.size(), d = s.d();
    std::vector<std::vector<double>> aug(n, std::vector<double>(n + d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug[i][j] = Tensor::dot_vec(s.vec(i), s.vec(j));
        for (std::size_t c = 0; c < d; ++c) aug[i][n + c] = s.vec(i)[c];
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (std::abs(aug[piv][col]) < 1e-12) ++piv;
        std::swap(aug[piv], aug[col]);
        double p = aug[col][col];
        for (auto& x : aug[col]) x /= p;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = aug[r][col];
            for (std::size_t c = 0; c < n + d; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    std::vector<std::vector<double>> duals(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) duals[i][c] = aug[i][n + c];
    return duals;
}

}  // namespace

TEST_CASE("orthonormal generation yields F^T F = I", "[symbols]") {
    auto s = SymbolSpace::build({"a", "b"}, 4, SymbolSpace::Encoding::orthonormal, 1);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            REQUIRE_THAT(Tensor::dot_vec(s.vec(i), s.vec(j)),
                         WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
}

TEST_CASE("independent generation satisfies duals . F = I", "[symbols]") {
    std::vector<std::string> names;
    for (int i = 0; i < 8; ++i) names.push_back("s" + std::to_string(i));
    auto s = SymbolSpace::build(names, 8, SymbolSpace::Encoding::independent, 7);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            REQUIRE_THAT(Tensor::dot_vec(s.dual(i), s.vec(j)),
                         WithinAbs(i == j ? 1.0 : 0.0, 1e-9));
    auto ref = reference_duals(s);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t c = 0; c < 8; ++c)
            REQUIRE_THAT(s.dual(i)[c], WithinAbs(ref[i][c], 1e-9));
}

TEST_CASE("unbinding a proposition set recovers the bound argument", "[symbols]") {
    std::vector<std::string> names{"P1", "P2", "a1", "a2", "b1", "b2", "c1", "c2"};
    auto s = SymbolSpace::build(names, 12, SymbolSpace::Encoding::orthonormal, 3);
    Tensor b = Tensor::rank_one(1.0, {s.vec("P1"), s.vec("a1"), s.vec("b1"), s.vec("c1")});
    b += Tensor::rank_one(1.0, {s.vec("P2"), s.vec("a2"), s.vec("b2"), s.vec("c2")});
    b += Tensor::rank_one(1.0, {s.vec("P1"), s.vec("a2"), s.vec("b1"), s.vec("c2")});
    Tensor probe = Tensor::rank_one(1.0, {s.dual("P2"), s.dual("a2"), s.dual("b2")});
    Tensor x = inner(b, probe, {{0, 0}, {1, 1}, {2, 2}});
    REQUIRE(x.order() == 1);
    auto xv = x.to_vector();
    for (std::size_t c = 0; c < s.d(); ++c)
        REQUIRE_THAT(xv[c], WithinAbs(s.vec("c2")[c], 1e-9));
}

TEST_CASE("decode ranks the encoded symbol first with score one", "[symbols]") {
    auto s = SymbolSpace::build({"x", "y", "z"}, 6, SymbolSpace::Encoding::orthonormal, 5);
    for (const auto& name : s.names()) {
        auto decoded = s.decode(s.vec(name));
        REQUIRE(decoded.size() == 1);
        REQUIRE(decoded[0].name == name);
        REQUIRE_THAT(decoded[0].score, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("decode is linear and applies the threshold", "[symbols]") {
    auto s = SymbolSpace::build({"f1", "f2"}, 4, SymbolSpace::Encoding::orthonormal, 9);
    std::vector<double> v(s.d());
    for (std::size_t c = 0; c < s.d(); ++c) v[c] = 0.9 * s.vec("f1")[c] + 0.1 * s.vec("f2")[c];
    auto decoded = s.decode(v, 0.5);
    REQUIRE(decoded.size() == 1);
    REQUIRE(decoded[0].name == "f1");
    REQUIRE_THAT(decoded[0].score, WithinAbs(0.9, 1e-9));
    REQUIRE(s.decode(std::vector<double>(s.d(), 0.0)).empty());
}

TEST_CASE("identical seeds reproduce bit-identical vectors", "[symbols]") {
    auto a = SymbolSpace::build({"p", "q", "r"}, 8, SymbolSpace::Encoding::orthonormal, 42);
    auto b = SymbolSpace::build({"p", "q", "r"}, 8, SymbolSpace::Encoding::orthonormal, 42);
    auto c = SymbolSpace::build({"p", "q", "r"}, 8, SymbolSpace::Encoding::orthonormal, 43);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(a.vec(k) == b.vec(k));
    }
    bool any_diff = false;
    for (std::size_t k = 0; k < 3; ++k) any_diff = any_diff || a.vec(k) != c.vec(k);
    REQUIRE(any_diff);
}

TEST_CASE("generated vectors are distributed", "[symbols]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto s = SymbolSpace::build({"a", "b", "c", "d"}, 4,
                                    SymbolSpace::Encoding::orthonormal, seed);
        for (std::size_t k = 0; k < s.size(); ++k)
            for (double x : s.vec(k)) REQUIRE(std::abs(x) < 0.95);
    }
}

TEST_CASE("too many symbols for the dimension is an error", "[symbols]") {
    REQUIRE_THROWS_AS(SymbolSpace::build({"a", "b", "c"}, 2,
                                         SymbolSpace::Encoding::orthonormal, 0),
                      symbol_error);
    REQUIRE_THROWS_AS(SymbolSpace::build({"a", "b", "c"}, 2,
                                         SymbolSpace::Encoding::independent, 0),
                      symbol_error);
}

TEST_CASE("unknown symbols and duplicates are rejected", "[symbols]") {
    auto s = SymbolSpace::build({"a", "b"}, 4, SymbolSpace::Encoding::orthonormal, 1);
    REQUIRE_THROWS_AS(s.vec("missing"), symbol_error);
    REQUIRE_THROWS_AS(SymbolSpace::build({"a", "a"}, 4, SymbolSpace::Encoding::orthonormal, 1),
                      symbol_error);
}

TEST_CASE("custom one-hot columns round-trip through decode", "[symbols]") {
    std::vector<std::vector<double>> cols{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    auto s = SymbolSpace::with_columns({"a", "b", "c"}, cols,
                                       SymbolSpace::Encoding::orthonormal);
    auto decoded = s.decode(s.vec("b"));
    REQUIRE(decoded.size() == 1);
    REQUIRE(decoded[0].name == "b");
}

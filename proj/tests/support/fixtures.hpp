#pragma once
// Shared story fixtures for unit and acceptance tests.

#include <memory>
#include <string>
#include <vector>

#include "tpr/inference.hpp"
#include "tpr/knowledge_base.hpp"
#include "tpr/symbol_space.hpp"

namespace tprtest {

using tpr::Proposition;
using tpr::prop;
using tpr::Story;

/// Symbols for the apple story: actor j, object a, locations f and k.
inline std::vector<std::string> apple_symbols(std::size_t num_times = 4) {
    std::vector<std::string> names{"@", "<", tpr::kDummySymbol, "a", "j", "f", "k"};
    for (std::size_t i = 1; i <= num_times; ++i) names.push_back(tpr::time_symbol(i));
    return names;
}

inline std::shared_ptr<const tpr::SymbolSpace> apple_space(std::size_t d = 16,
                                                           std::uint64_t seed = 0) {
    return std::make_shared<tpr::SymbolSpace>(tpr::SymbolSpace::build(
        apple_symbols(), d, tpr::SymbolSpace::Encoding::orthonormal, seed));
}

/// John picks up the apple, walks to the office, then the kitchen, and
/// drops the apple there.
inline Story apple_story() {
    return {
        {prop("@", "a", "j", "t1")},
        {prop("@", "j", "f", "t2")},
        {prop("@", "j", "k", "t3")},
        {prop("@", "a", "j", "t4", -1)},
    };
}

/// The facts the reasoning loop must derive for the apple story (persistence
/// and transitivity inferences plus the precedence updates).
inline std::vector<Proposition> apple_expected_derived() {
    return {
        prop("@", "a", "j", "t2"), prop("@", "a", "f", "t2"),
        prop("@", "a", "j", "t3"), prop("@", "a", "k", "t3"),
        prop("@", "a", "k", "t4"),
        prop("<", "t1", "t2"),     prop("<", "t2", "t3"),
        prop("<", "t3", "t4"),
    };
}

}  // namespace tprtest

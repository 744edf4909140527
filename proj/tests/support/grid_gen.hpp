#pragma once
// Random spanning-tree placements of small location grids for the
// path-finding tests. Tree-shaped fact sets are always consistent under
// non-commuting direction matrices.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tpr/direction.hpp"

namespace tprtest {

struct GridPlacement {
    std::size_t rows = 0, cols = 0;
    std::vector<tpr::DirectionFact> facts;
    std::map<std::string, std::pair<int, int>> coords;  // name -> (row, col)
};

inline std::string grid_name(std::size_t r, std::size_t c) {
    return "g" + std::to_string(r) + std::to_string(c);
}

/// Random spanning tree over an R x C grid, emitted as direction facts
/// (each edge randomly stated in one of its two equivalent orientations).
inline GridPlacement random_grid_tree(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    GridPlacement g;
    g.rows = rows;
    g.cols = cols;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            g.coords[grid_name(r, c)] = {static_cast<int>(r), static_cast<int>(c)};

    struct Edge {
        std::size_t r1, c1, r2, c2;  // cell2 is east or north of cell1
        bool east;
    };
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({r, c, r, c + 1, true});
            if (r + 1 < rows) edges.push_back({r, c, r + 1, c, false});
        }
    std::shuffle(edges.begin(), edges.end(), rng);

    std::vector<std::size_t> parent(rows * cols);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges) {
        std::size_t a = e.r1 * cols + e.c1, b = e.r2 * cols + e.c2;
        if (find(a) == find(b)) continue;
        parent[find(a)] = find(b);
        // north(x, y): x one row up from y; east(x, y): x one column right
        std::string lo = grid_name(e.r1, e.c1), hi = grid_name(e.r2, e.c2);
        tpr::Direction d = e.east ? tpr::Direction::east : tpr::Direction::north;
        if (rng() % 2)
            g.facts.push_back({d, hi, lo});
        else
            g.facts.push_back({tpr::direction_inverse(d), lo, hi});
    }
    return g;
}

}  // namespace tprtest

#pragma once
// Compass directions shared by the path-finding model and the symbolic
// path closure.

#include <stdexcept>
#include <string>
#include <vector>

namespace tpr {

enum class Direction { north, south, east, west };

/// Fixed enumeration order used for path tie-breaking.
inline constexpr Direction kDirections[4] = {Direction::north, Direction::south,
                                             Direction::east, Direction::west};

inline Direction direction_inverse(Direction d) {
    switch (d) {
        case Direction::north: return Direction::south;
        case Direction::south: return Direction::north;
        case Direction::east: return Direction::west;
        case Direction::west: return Direction::east;
    }
    throw std::logic_error("bad direction");
}

inline char direction_char(Direction d) {
    switch (d) {
        case Direction::north: return 'n';
        case Direction::south: return 's';
        case Direction::east: return 'e';
        case Direction::west: return 'w';
    }
    throw std::logic_error("bad direction");
}

inline bool parse_direction(const std::string& s, Direction& out) {
    if (s == "n") out = Direction::north;
    else if (s == "s") out = Direction::south;
    else if (s == "e") out = Direction::east;
    else if (s == "w") out = Direction::west;
    else return false;
    return true;
}

/// A stated direction relation: `x` lies one step in direction `dir` from
/// `y` (e.g. north(x, y) reads "x is north of y").
struct DirectionFact {
    Direction dir;
    std::string x, y;
};

using Path = std::vector<Direction>;

inline std::string path_to_string(const Path& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += direction_char(p[i]);
    }
    return s + "]";
}

}  // namespace tpr

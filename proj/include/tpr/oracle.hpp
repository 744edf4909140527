#pragma once
// Brute-force symbolic reasoner used as ground truth: forward chaining over
// ground atoms with the persistence, transitivity and precedence rules, and
// query answering by exhaustive enumeration. Deliberately unindexed and
// only suitable for desk-scale universes.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpr/direction.hpp"
#include "tpr/inference.hpp"
#include "tpr/query.hpp"

namespace tpr::oracle {

struct GroundKB {
    std::map<Proposition, int> atoms;  // canonical (sign +1) atom -> net count
    std::vector<std::string> universe;
    std::size_t num_times = 0;

    bool holds(const Proposition& p) const {
        Proposition key = p;
        key.sign = +1;
        auto it = atoms.find(key);
        return it != atoms.end() && it->second > 0;
    }

    void bump(Proposition p, int delta) {
        p.sign = +1;
        auto it = atoms.try_emplace(p, 0).first;
        it->second += delta;
        if (it->second == 0) atoms.erase(it);
    }
};

struct Axioms {
    bool persistence = true;
    bool transitivity = true;
    bool precedence = true;
    AxiomConfig config;
};

using tpr::time_index;

namespace detail {

inline void transitive_close_at(GroundKB& kb, std::size_t i, const Axioms& ax, bool seminaive) {
    const std::string t = time_symbol(i);
    for (const auto& pred : ax.config.transitive_preds) {
        // frontier starts as every positive fact at t
        std::vector<Proposition> frontier;
        for (const auto& [p, net] : kb.atoms)
            if (net > 0 && p.pred == pred && p.args[2] == t) frontier.push_back(p);
        while (true) {
            std::vector<Proposition> current;
            for (const auto& [p, net] : kb.atoms)
                if (net > 0 && p.pred == pred && p.args[2] == t) current.push_back(p);
            std::set<Proposition> fresh;
            auto try_compose = [&](const Proposition& a, const Proposition& b) {
                if (a.args[1] != b.args[0]) return;
                Proposition cand = prop(pred, a.args[0], b.args[1], t);
                if (!kb.holds(cand)) fresh.insert(cand);
            };
            if (seminaive) {
                for (const auto& a : frontier)
                    for (const auto& b : current) {
                        try_compose(a, b);
                        try_compose(b, a);
                    }
            } else {
                for (const auto& a : current)
                    for (const auto& b : current) try_compose(a, b);
            }
            if (fresh.empty()) break;
            frontier.assign(fresh.begin(), fresh.end());
            for (const auto& p : fresh) kb.bump(p, +1);
        }
    }
}

}  // namespace detail

/// Runs a story through the same per-timestep loop as the tensor engine:
/// persistence from the previous step, the precedence update, the sentence
/// facts (a negation cancels its positive counterpart), then transitive
/// closure at the current time.
inline GroundKB run_story(const Story& story, const std::vector<std::string>& universe,
                          const Axioms& ax = {}, bool seminaive = false) {
    GroundKB kb;
    kb.universe = universe;
    kb.num_times = story.size();
    for (std::size_t i = 1; i <= story.size(); ++i) {
        if (i >= 2) {
            if (ax.persistence) {
                std::vector<std::pair<Proposition, int>> copies;
                for (const auto& [p, net] : kb.atoms)
                    if (net != 0 && ax.config.persistent_preds.count(p.pred) &&
                        p.args[2] == time_symbol(i - 1))
                        copies.push_back({prop(p.pred, p.args[0], p.args[1], time_symbol(i)), net});
                for (const auto& [p, net] : copies) kb.bump(p, net);
            }
            if (ax.precedence) kb.bump(prop("<", time_symbol(i - 1), time_symbol(i)), +1);
        }
        for (const auto& p : story[i - 1]) kb.bump(p, p.sign);
        if (ax.transitivity) detail::transitive_close_at(kb, i, ax, seminaive);
    }
    return kb;
}

/// Least fixed point of the selected axioms over a static atom set: atoms
/// stamped with time t_k arrive at step k, everything else before step 1.
inline GroundKB closure(const GroundKB& kb0, const Axioms& ax = {}, bool seminaive = false) {
    std::size_t m = kb0.num_times;
    for (const auto& [p, net] : kb0.atoms) m = std::max(m, time_index(p.args[2]));
    Story story(std::max<std::size_t>(m, 1));
    for (const auto& [p, net] : kb0.atoms) {
        std::size_t at = time_index(p.args[2]);
        if (at == 0) at = 1;
        for (int k = 0; k < std::abs(net); ++k) {
            Proposition q = p;
            q.sign = net > 0 ? +1 : -1;
            story[at - 1].push_back(q);
        }
    }
    GroundKB out = run_story(story, kb0.universe, ax, seminaive);
    out.num_times = std::max(kb0.num_times, m);
    return out;
}

/// Answers a conjunctive query by enumerating every assignment of answer
/// and existential variables over the universe. Returns the set of answer
/// tuples (in query-variable order) with at least one witness.
inline std::set<std::vector<std::string>> answer(
    const GroundKB& kb, const Query& q,
    const std::vector<std::string>& extra_exclusions = {}) {
    std::vector<std::string> vars = q.query_vars;
    vars.insert(vars.end(), q.exist_vars.begin(), q.exist_vars.end());
    std::map<std::string, std::size_t> var_pos;
    for (std::size_t i = 0; i < vars.size(); ++i) var_pos[vars[i]] = i;

    auto term_value = [&](const QueryTerm& t,
                          const std::vector<std::size_t>& assign) -> const std::string& {
        if (t.kind == QueryTerm::Kind::constant) return t.name;
        return kb.universe[assign[var_pos.at(t.name)]];
    };

    std::set<std::vector<std::string>> out;
    std::vector<std::size_t> assign(vars.size(), 0);
    while (true) {
        bool ok = true;
        // exclusions
        for (std::size_t v = 0; v < q.query_vars.size() && ok; ++v) {
            const std::string& val = kb.universe[assign[v]];
            for (const auto& c : extra_exclusions)
                if (val == c) ok = false;
            auto it = q.exclusions.find(q.query_vars[v]);
            if (ok && it != q.exclusions.end())
                for (const auto& c : it->second)
                    if (val == c) ok = false;
        }
        for (const auto& atom : q.atoms) {
            if (!ok) break;
            if (atom.pred == kNextPred) {
                std::size_t a = time_index(term_value(atom.args[0], assign));
                std::size_t b = time_index(term_value(atom.args[1], assign));
                ok = a != 0 && b == a + 1 && b <= kb.num_times;
                continue;
            }
            Proposition p;
            p.pred = atom.pred;
            for (std::size_t s = 0; s < 3; ++s)
                p.args[s] = s < atom.args.size() ? term_value(atom.args[s], assign)
                                                 : (atom.pred == "<" ? kDummySymbol
                                                                     : std::string());
            if (atom.args.size() < 3 && atom.pred != "<") {
                // unpadded slot: existentially satisfied by any symbol
                bool any = false;
                for (const auto& s : kb.universe) {
                    p.args[2] = s;
                    if (kb.holds(p)) {
                        any = true;
                        break;
                    }
                }
                ok = any;
                continue;
            }
            ok = kb.holds(p);
        }
        // explicit slot equalities
        for (const auto& [x, y] : q.equalities) {
            if (!ok) break;
            ok = term_value(q.atoms[x.atom].args[x.slot], assign) ==
                 term_value(q.atoms[y.atom].args[y.slot], assign);
        }
        if (ok) {
            std::vector<std::string> tuple;
            for (std::size_t v = 0; v < q.query_vars.size(); ++v)
                tuple.push_back(kb.universe[assign[v]]);
            out.insert(std::move(tuple));
        }
        std::size_t m = vars.size();
        bool wrapped = true;
        while (m-- > 0) {
            if (++assign[m] < kb.universe.size()) {
                wrapped = false;
                break;
            }
            assign[m] = 0;
        }
        if (wrapped || vars.empty()) {
            if (vars.empty() && ok) return out;  // ground query: single check
            if (vars.empty()) return {};
            break;
        }
    }
    return out;
}

/// Closure of the path axioms over stated direction facts: inverse facts,
/// single-step paths, and walk compositions up to max_len. Returns, per
/// ordered location pair, the valid paths in travel order (first step
/// first), shortest first with ties in n < s < e < w order.
inline std::map<std::pair<std::string, std::string>, std::vector<Path>> path_closure(
    const std::vector<DirectionFact>& facts, std::size_t max_len = 2) {
    // edges[from] = list of (direction, to), including the inverses
    std::map<std::string, std::vector<std::pair<Direction, std::string>>> edges;
    std::set<std::string> locations;
    for (const auto& f : facts) {
        locations.insert(f.x);
        locations.insert(f.y);
        edges[f.y].push_back({f.dir, f.x});                       // step dir from y lands on x
        edges[f.x].push_back({direction_inverse(f.dir), f.y});    // inverse semantics
    }
    std::map<std::pair<std::string, std::string>, std::vector<Path>> out;
    for (const auto& from : locations) {
        std::vector<std::pair<std::string, Path>> layer{{from, {}}};
        for (std::size_t len = 1; len <= max_len; ++len) {
            std::vector<std::pair<std::string, Path>> next_layer;
            for (const auto& [loc, path] : layer) {
                for (Direction d : kDirections) {
                    auto it = edges.find(loc);
                    if (it == edges.end()) continue;
                    for (const auto& [dir, to] : it->second) {
                        if (dir != d) continue;
                        Path np = path;
                        np.push_back(d);
                        out[{from, to}].push_back(np);
                        next_layer.push_back({to, np});
                    }
                }
            }
            layer = std::move(next_layer);
        }
    }
    // dedupe (parallel stated edges can produce the same walk twice) while
    // keeping the shortest-first, direction-ordered enumeration order
    for (auto& [key, paths] : out) {
        std::vector<Path> unique;
        for (const auto& p : paths)
            if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
        std::stable_sort(unique.begin(), unique.end(),
                         [](const Path& a, const Path& b) { return a.size() < b.size(); });
        paths = std::move(unique);
    }
    return out;
}

}  // namespace tpr::oracle

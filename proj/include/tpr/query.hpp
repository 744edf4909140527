#pragma once
// Conjunctive queries over the knowledge base, compiled to multi-tensor
// contraction plans and evaluated without ever materializing a joint outer
// product.
//
// A query is a conjunction of three-place atoms whose slots hold constants,
// answer ("query") variables or existential variables, plus optional
// explicit slot equalities. Compilation groups variable slots into classes:
//
//   - a two-slot existential class becomes a pairwise index join between
//     the two bound atom copies;
//   - one-slot and 3+-slot existential classes are evaluated by summing
//     over the symbol universe through the unbinding duals (the raw
//     index-diagonal is basis-dependent beyond pairs, the symbol sum is
//     what "exists" means);
//   - an answer-variable class leaves its mode free (or, when the variable
//     occupies several slots, is likewise evaluated by symbol enumeration
//     and re-encoded on a fresh mode).
//
// The reserved predicate "next" relates two times through the timeline's
// increment operator instead of a knowledge-base copy.

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpr/knowledge_base.hpp"

namespace tpr {

class query_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reserved predicate name: next(t, u) holds when u is the time immediately
/// after t. Compiled to the time-increment operator.
inline const std::string kNextPred = "next";

struct QueryTerm {
    enum class Kind { constant, variable };
    Kind kind = Kind::constant;
    std::string name;
};

inline QueryTerm qconst(std::string name) {
    return {QueryTerm::Kind::constant, std::move(name)};
}
inline QueryTerm qvar(std::string name) {
    return {QueryTerm::Kind::variable, std::move(name)};
}

struct QueryAtom {
    std::string pred;
    std::vector<QueryTerm> args;  // 2 or 3 as written; padded at compile time
};

struct SlotRef {
    std::size_t atom = 0;
    std::size_t slot = 0;
    friend auto operator<=>(const SlotRef&, const SlotRef&) = default;
};

struct Query {
    std::vector<std::string> query_vars;
    std::vector<std::string> exist_vars;
    std::vector<QueryAtom> atoms;
    std::vector<std::pair<SlotRef, SlotRef>> equalities;
    std::map<std::string, std::vector<std::string>> exclusions;  // var -> constants
};

class ContractionPlan {
public:
    enum class ClassKind { pair_join, enumerated, free_var, enum_var };

    struct ClassInfo {
        ClassKind kind;
        std::vector<SlotRef> slots;
        std::size_t var_index = 0;  // for free_var / enum_var
    };

    struct AtomSpec {
        bool time_shift = false;
        std::string pred;
        std::vector<std::optional<std::string>> const_syms;  // per arg slot
        std::vector<int> slot_class;                         // per arg slot, -1 when constant
    };

    const std::vector<AtomSpec>& atoms() const { return atoms_; }
    const std::vector<ClassInfo>& classes() const { return classes_; }
    const std::vector<std::string>& query_vars() const { return query_vars_; }

    std::size_t count(ClassKind k) const {
        std::size_t n = 0;
        for (const auto& c : classes_)
            if (c.kind == k) ++n;
        return n;
    }

    /// Runs the plan against a knowledge base of the compile-time symbol
    /// space. Result modes follow query-variable order.
    Tensor execute(const KnowledgeBase& kb) const {
        std::vector<Node> nodes;
        nodes.reserve(atoms_.size());
        for (const auto& spec : atoms_) nodes.push_back(make_node(kb, spec));
        std::vector<std::size_t> enum_classes;
        for (std::size_t c = 0; c < classes_.size(); ++c)
            if (classes_[c].kind == ClassKind::enumerated ||
                classes_[c].kind == ClassKind::enum_var)
                enum_classes.push_back(c);
        Tensor result = eval_nodes(nodes, enum_classes, 0);
        return result;
    }

private:
    friend ContractionPlan compile(const Query&, std::shared_ptr<const SymbolSpace>);

    struct Node {
        Tensor tensor;
        std::vector<int> tags;  // class id per mode
    };

    Node make_node(const KnowledgeBase& kb, const AtomSpec& spec) const {
        if (spec.time_shift) {
            if (!kb.timeline())
                throw query_error("query uses 'next' but the knowledge base has no timeline");
            Node n{kb.timeline()->increment_matrix(), {}};
            // next(t, u): matrix mode 0 is the u side, mode 1 the t side.
            n.tags = {spec.slot_class[1], spec.slot_class[0]};
            return bind_node_constants(n, spec);
        }
        std::vector<std::vector<double>> probe{space_->dual(spec.pred)};
        ModePairs pairs{{0, 0}};
        Node n;
        for (std::size_t s = 0; s < spec.const_syms.size(); ++s) {
            if (spec.const_syms[s]) {
                pairs.push_back({s + 1, probe.size()});
                probe.push_back(space_->dual(*spec.const_syms[s]));
            }
        }
        n.tensor = inner(kb.b(), Tensor::rank_one(1.0, std::move(probe)), pairs);
        for (std::size_t s = 0; s < spec.const_syms.size(); ++s)
            if (!spec.const_syms[s]) n.tags.push_back(spec.slot_class[s]);
        return n;
    }

    // Binds constant slots of a time-shift atom: slot 0 (the earlier time)
    // lives on matrix mode 1, slot 1 on matrix mode 0.
    Node bind_node_constants(Node n, const AtomSpec& spec) const {
        for (std::size_t s = 0; s < spec.const_syms.size(); ++s) {
            if (!spec.const_syms[s]) continue;
            std::size_t mode = s == 0 ? 1 : 0;
            if (n.tensor.order() == 1) mode = 0;  // the other slot was already bound
            Tensor v = Tensor::from_vector(space_->dual(*spec.const_syms[s]));
            n.tensor = inner(n.tensor, v, {{mode, 0}});
            n.tags.erase(n.tags.begin() + static_cast<std::ptrdiff_t>(mode));
        }
        return n;
    }

    Tensor eval_nodes(std::vector<Node> nodes, const std::vector<std::size_t>& enum_classes,
                      std::size_t next_enum) const {
        if (next_enum < enum_classes.size()) {
            std::size_t cid = enum_classes[next_enum];
            const ClassInfo& cls = classes_[cid];
            Tensor total;
            bool first = true;
            for (std::size_t s = 0; s < space_->size(); ++s) {
                std::vector<Node> bound = nodes;
                Tensor dual = Tensor::from_vector(space_->dual(s));
                for (auto& node : bound) {
                    for (std::size_t m = 0; m < node.tags.size();) {
                        if (node.tags[m] == static_cast<int>(cid)) {
                            node.tensor = inner(node.tensor, dual, {{m, 0}});
                            node.tags.erase(node.tags.begin() + static_cast<std::ptrdiff_t>(m));
                        } else {
                            ++m;
                        }
                    }
                }
                Tensor r = eval_nodes(std::move(bound), enum_classes, next_enum + 1);
                if (cls.kind == ClassKind::enum_var) {
                    // re-encode the enumerated answer on a fresh mode
                    r = outer(r, Tensor::from_vector(space_->vec(s)));
                }
                if (first) {
                    total = std::move(r);
                    first = false;
                } else {
                    total += r;
                }
            }
            return total;
        }

        // Self-joins within single nodes first.
        for (auto& node : nodes) resolve_self_joins(node);

        // Greedy pairwise contraction over the remaining join classes.
        while (true) {
            int best_a = -1, best_b = -1;
            double best_size = 0.0;
            for (std::size_t a = 0; a < nodes.size(); ++a)
                for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                    std::size_t joins = shared_joins(nodes[a], nodes[b]).size();
                    if (joins == 0) continue;
                    double size = double(nodes[a].tensor.size()) * double(nodes[b].tensor.size());
                    for (std::size_t j = 0; j < joins; ++j)
                        size /= double(space_->d()) * double(space_->d());
                    if (best_a < 0 || size < best_size) {
                        best_a = static_cast<int>(a);
                        best_b = static_cast<int>(b);
                        best_size = size;
                    }
                }
            if (best_a < 0) break;
            Node merged = contract_pair(nodes[best_a], nodes[best_b]);
            resolve_self_joins(merged);
            nodes.erase(nodes.begin() + best_b);
            nodes[best_a] = std::move(merged);
        }

        // Disconnected components: outer-combine.
        Node out = std::move(nodes.front());
        for (std::size_t k = 1; k < nodes.size(); ++k) {
            out.tensor = outer(out.tensor, nodes[k].tensor);
            out.tags.insert(out.tags.end(), nodes[k].tags.begin(), nodes[k].tags.end());
        }

        // Re-order free modes to query-variable order.
        std::vector<std::size_t> perm;
        for (std::size_t q = 0; q < query_vars_.size(); ++q) {
            for (std::size_t m = 0; m < out.tags.size(); ++m) {
                int cid = out.tags[m];
                if (cid >= 0 && classes_[cid].kind == ClassKind::free_var &&
                    classes_[cid].var_index == q)
                    perm.push_back(m);
            }
        }
        if (perm.size() != out.tags.size())
            throw query_error("internal: dangling modes after plan execution");
        if (!std::is_sorted(perm.begin(), perm.end())) out.tensor = out.tensor.permuted(perm);
        return out.tensor;
    }

    void resolve_self_joins(Node& node) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t m1 = 0; m1 < node.tags.size() && !changed; ++m1)
                for (std::size_t m2 = m1 + 1; m2 < node.tags.size() && !changed; ++m2) {
                    int cid = node.tags[m1];
                    if (cid < 0 || cid != node.tags[m2]) continue;
                    if (classes_[cid].kind != ClassKind::pair_join) continue;
                    node.tensor = contract(node.tensor, m1, m2);
                    node.tags.erase(node.tags.begin() + static_cast<std::ptrdiff_t>(m2));
                    node.tags.erase(node.tags.begin() + static_cast<std::ptrdiff_t>(m1));
                    changed = true;
                }
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> shared_joins(const Node& a,
                                                                  const Node& b) const {
        std::vector<std::pair<std::size_t, std::size_t>> joins;
        for (std::size_t ma = 0; ma < a.tags.size(); ++ma) {
            int cid = a.tags[ma];
            if (cid < 0 || classes_[cid].kind != ClassKind::pair_join) continue;
            for (std::size_t mb = 0; mb < b.tags.size(); ++mb)
                if (b.tags[mb] == cid) joins.push_back({ma, mb});
        }
        return joins;
    }

    Node contract_pair(const Node& a, const Node& b) const {
        auto joins = shared_joins(a, b);
        ModePairs pairs;
        pairs.reserve(joins.size());
        for (auto [ma, mb] : joins) pairs.push_back({ma, mb});
        Node out;
        out.tensor = inner(a.tensor, b.tensor, pairs);
        std::set<std::size_t> used_a, used_b;
        for (auto [ma, mb] : joins) {
            used_a.insert(ma);
            used_b.insert(mb);
        }
        for (std::size_t m = 0; m < a.tags.size(); ++m)
            if (!used_a.count(m)) out.tags.push_back(a.tags[m]);
        for (std::size_t m = 0; m < b.tags.size(); ++m)
            if (!used_b.count(m)) out.tags.push_back(b.tags[m]);
        return out;
    }

    std::vector<AtomSpec> atoms_;
    std::vector<ClassInfo> classes_;
    std::vector<std::string> query_vars_;
    std::shared_ptr<const SymbolSpace> space_;
};

/// Compiles a query for a symbol space: pads atoms, normalizes repeated
/// variables and explicit equalities into slot classes, and records which
/// modes stay free, join pairwise, or get enumerated.
inline ContractionPlan compile(const Query& q, std::shared_ptr<const SymbolSpace> space) {
    ContractionPlan plan;
    plan.space_ = space;
    plan.query_vars_ = q.query_vars;

    std::set<std::string> qvars(q.query_vars.begin(), q.query_vars.end());
    std::set<std::string> evars(q.exist_vars.begin(), q.exist_vars.end());
    if (qvars.size() != q.query_vars.size())
        throw query_error("duplicate query variable");
    for (const auto& v : q.query_vars)
        if (evars.count(v)) throw query_error("variable is both answer and existential: " + v);

    // Pad atoms to three slots and collect variable occurrences.
    std::vector<QueryAtom> atoms = q.atoms;
    std::size_t fresh = 0;
    for (auto& atom : atoms) {
        if (atom.pred == kNextPred) {
            if (atom.args.size() != 2) throw query_error("next takes exactly 2 arguments");
            continue;
        }
        if (atom.args.empty() || atom.args.size() > 3)
            throw query_error("atom arity must be between 1 and 3: " + atom.pred);
        while (atom.args.size() < 3) {
            if (atom.pred == "<") {
                atom.args.push_back(qconst(kDummySymbol));
            } else {
                std::string name = "_pad" + std::to_string(fresh++);
                evars.insert(name);
                atom.args.push_back(qvar(name));
            }
        }
    }

    std::map<std::string, std::vector<SlotRef>> occurrences;
    for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t s = 0; s < atoms[a].args.size(); ++s) {
            const QueryTerm& t = atoms[a].args[s];
            if (t.kind == QueryTerm::Kind::variable) {
                if (!qvars.count(t.name) && !evars.count(t.name))
                    throw query_error("undeclared variable: " + t.name);
                occurrences[t.name].push_back({a, s});
            }
        }
    for (const auto& v : q.query_vars)
        if (!occurrences.count(v)) throw query_error("unbound query variable: " + v);
    for (const auto& v : q.exist_vars)
        if (!occurrences.count(v)) throw query_error("unused existential variable: " + v);

    // Union-find over slots: same-name occurrences plus explicit equalities.
    std::map<SlotRef, SlotRef> parent;
    auto find = [&](SlotRef s) {
        while (parent.at(s) != s) s = parent.at(s);
        return s;
    };
    for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t s = 0; s < atoms[a].args.size(); ++s) parent[{a, s}] = {a, s};
    auto unite = [&](SlotRef x, SlotRef y) { parent[find(x)] = find(y); };
    for (const auto& [name, slots] : occurrences)
        for (std::size_t i = 1; i < slots.size(); ++i) unite(slots[i], slots[0]);
    for (const auto& [x, y] : q.equalities) {
        auto valid = [&](SlotRef r) {
            return r.atom < atoms.size() && r.slot < atoms[r.atom].args.size();
        };
        if (!valid(x) || !valid(y)) throw query_error("equality references an invalid slot");
        if (atoms[x.atom].args[x.slot].kind == QueryTerm::Kind::constant ||
            atoms[y.atom].args[y.slot].kind == QueryTerm::Kind::constant)
            throw query_error("equality references a constant slot");
        unite(x, y);
    }

    // Group slots into classes.
    std::map<SlotRef, std::vector<SlotRef>> groups;
    for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t s = 0; s < atoms[a].args.size(); ++s) {
            SlotRef r{a, s};
            if (atoms[a].args[s].kind == QueryTerm::Kind::variable)
                groups[find(r)].push_back(r);
        }

    std::map<SlotRef, int> class_of;
    for (const auto& [root, slots] : groups) {
        ContractionPlan::ClassInfo info;
        info.slots = slots;
        std::set<std::string> names;
        for (const auto& r : slots) names.insert(atoms[r.atom].args[r.slot].name);
        std::vector<std::string> qnames;
        for (const auto& n : names)
            if (qvars.count(n)) qnames.push_back(n);
        if (qnames.size() > 1) throw query_error("equality ties two answer variables");
        if (qnames.size() == 1) {
            info.var_index = static_cast<std::size_t>(
                std::find(q.query_vars.begin(), q.query_vars.end(), qnames[0]) -
                q.query_vars.begin());
            info.kind = slots.size() == 1 ? ContractionPlan::ClassKind::free_var
                                          : ContractionPlan::ClassKind::enum_var;
        } else {
            info.kind = slots.size() == 2 ? ContractionPlan::ClassKind::pair_join
                                          : ContractionPlan::ClassKind::enumerated;
        }
        int cid = static_cast<int>(plan.classes_.size());
        plan.classes_.push_back(std::move(info));
        for (const auto& r : slots) class_of[r] = cid;
    }

    // Atom specs with constants resolved.
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        ContractionPlan::AtomSpec spec;
        spec.pred = atoms[a].pred;
        spec.time_shift = atoms[a].pred == kNextPred;
        if (!spec.time_shift && !space->has(spec.pred))
            throw symbol_error("unknown symbol: " + spec.pred);
        for (std::size_t s = 0; s < atoms[a].args.size(); ++s) {
            const QueryTerm& t = atoms[a].args[s];
            if (t.kind == QueryTerm::Kind::constant) {
                if (!space->has(t.name)) throw symbol_error("unknown symbol: " + t.name);
                spec.const_syms.push_back(t.name);
                spec.slot_class.push_back(-1);
            } else {
                spec.const_syms.push_back(std::nullopt);
                spec.slot_class.push_back(class_of.at({a, s}));
            }
        }
        plan.atoms_.push_back(std::move(spec));
    }
    return plan;
}

struct Answers {
    Tensor tensor;  // order = number of query variables
    struct Binding {
        std::vector<std::string> symbols;
        double score;
    };
    std::vector<Binding> bindings;
};

namespace detail {

/// Removes the span of the given unit vectors from one mode of the answer
/// tensor: T <- T - sum_c c (x)_m (c . T).
inline Tensor project_out(const Tensor& t, std::size_t mode, const std::vector<double>& v) {
    Tensor w = inner(t, Tensor::from_vector(v), {{mode, 0}});
    Tensor piece = outer(w, Tensor::from_vector(v));
    // move the appended mode back into position `mode`
    std::vector<std::size_t> perm;
    for (std::size_t m = 0, src = 0; m < t.order(); ++m) {
        if (m == mode)
            perm.push_back(t.order() - 1);
        else
            perm.push_back(src++);
    }
    return t - piece.permuted(perm);
}

}  // namespace detail

/// Evaluates a query: runs the compiled plan, applies exclusion projections
/// to each answer mode, and decodes bindings. `extra_exclusions` are applied
/// to every answer variable on top of the query's own WHERE constraints.
/// An empty binding list is a normal "no answer" result.
inline Answers evaluate(const KnowledgeBase& kb, const Query& q,
                        const std::vector<std::string>& extra_exclusions = {},
                        double threshold = 0.5, std::size_t top_s = 8) {
    ContractionPlan plan = compile(q, kb.space_ptr());
    Answers out;
    out.tensor = plan.execute(kb);
    const SymbolSpace& space = kb.space();

    for (std::size_t v = 0; v < q.query_vars.size(); ++v) {
        std::vector<std::string> excl = extra_exclusions;
        auto it = q.exclusions.find(q.query_vars[v]);
        if (it != q.exclusions.end())
            excl.insert(excl.end(), it->second.begin(), it->second.end());
        if (!excl.empty()) out.tensor = out.tensor.densify();
        for (const auto& c : excl)
            out.tensor = detail::project_out(out.tensor, v, space.vec(c));
    }

    const std::size_t nq = q.query_vars.size();
    if (nq == 0) return out;
    if (nq == 1) {
        for (const auto& d : space.decode(out.tensor.densify().to_vector(), threshold))
            out.bindings.push_back({{d.name}, d.score});
        return out;
    }

    // Joint decoding: rank the top-s candidates per mode by marginal
    // magnitude, then score every tuple through the duals.
    Tensor dense = out.tensor.densify();
    std::vector<std::vector<std::size_t>> candidates(nq);
    for (std::size_t m = 0; m < nq; ++m) {
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t s = 0; s < space.size(); ++s) {
            Tensor slice = inner(dense, Tensor::from_vector(space.dual(s)), {{m, 0}});
            double mag = slice.norm();
            if (mag > 1e-12) ranked.push_back({mag, s});
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        if (ranked.size() > top_s) ranked.resize(top_s);
        for (const auto& [mag, s] : ranked) candidates[m].push_back(s);
    }
    std::vector<std::size_t> pick(nq, 0);
    std::vector<std::size_t> counts(nq);
    for (std::size_t m = 0; m < nq; ++m) counts[m] = candidates[m].size();
    bool exhausted = std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end();
    while (!exhausted) {
        Tensor t = dense;
        for (std::size_t m = 0; m < nq; ++m)
            t = inner(t, Tensor::from_vector(space.dual(candidates[m][pick[m]])), {{0, 0}});
        double score = t.value();
        if (score >= threshold) {
            std::vector<std::string> names;
            for (std::size_t m = 0; m < nq; ++m)
                names.push_back(space.names()[candidates[m][pick[m]]]);
            out.bindings.push_back({std::move(names), score});
        }
        std::size_t m = nq;
        exhausted = true;
        while (m-- > 0) {
            if (++pick[m] < counts[m]) {
                exhausted = false;
                break;
            }
            pick[m] = 0;
        }
    }
    std::stable_sort(out.bindings.begin(), out.bindings.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.symbols < b.symbols;
    });
    return out;
}

/// Truth value of a ground proposition; delegates to the knowledge base's
/// unbinding score.
inline double truth_query(const KnowledgeBase& kb, const Proposition& p) { return kb.holds(p); }

}  // namespace tpr

#pragma once
// Query answering for the matrix-memory engine. Supports the uni-relational
// story family: facts are co-location pairs, query atoms are "@" atoms plus
// time relations ("<" or "next") between time terms. Everything is computed
// from slot matrices by dual probes; variables are enumerated (entities
// over the symbol universe, time terms over the slot queue).

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpr/query.hpp"
#include "tpr/simplified.hpp"

namespace tpr {

class SimplifiedEngine {
public:
    SimplifiedEngine(std::shared_ptr<const SymbolSpace> space, std::size_t /*num_times*/,
                     const AxiomConfig& cfg = {})
        : space_(space), memory_(std::move(space), cfg) {}

    void step(std::size_t /*i*/, const std::vector<Proposition>& facts) {
        std::vector<TwoPlaceFact> pairs;
        for (const auto& p : facts) {
            if (p.pred != "@")
                throw model_error("the simplified engine only handles '@' facts, got " +
                                  to_string(p));
            pairs.push_back({p.args[0], p.args[1], p.sign});
        }
        memory_.step(pairs);
    }

    const MatrixMemory& memory() const { return memory_; }

    struct Result {
        double truth = 0.0;
        std::vector<Answers::Binding> bindings;
    };

    Result evaluate(const Query& q, double threshold = 0.5) const {
        // classify variables: time-slot variables range over the slot
        // queue, argument-slot variables over the symbol universe
        std::set<std::string> time_vars, entity_vars;
        std::vector<QueryAtom> atoms = q.atoms;
        std::size_t fresh = 0;
        for (auto& atom : atoms) {
            if (atom.pred == "@") {
                if (atom.args.size() == 2)
                    atom.args.push_back(qvar("_t" + std::to_string(fresh++)));
                if (atom.args.size() != 3)
                    throw model_error("'@' atoms take 2 or 3 arguments");
                for (std::size_t s = 0; s < 2; ++s)
                    if (atom.args[s].kind == QueryTerm::Kind::variable)
                        entity_vars.insert(atom.args[s].name);
                if (atom.args[2].kind == QueryTerm::Kind::variable)
                    time_vars.insert(atom.args[2].name);
            } else if (atom.pred == "<" || atom.pred == kNextPred) {
                if (atom.args.size() < 2)
                    throw model_error("time relations take two time terms");
                for (std::size_t s = 0; s < 2; ++s)
                    if (atom.args[s].kind == QueryTerm::Kind::variable)
                        time_vars.insert(atom.args[s].name);
            } else {
                throw model_error("the simplified engine does not support '" + atom.pred +
                                  "' atoms");
            }
        }
        for (const auto& v : time_vars) entity_vars.erase(v);

        std::vector<std::string> vars(q.query_vars);
        for (const auto& v : q.exist_vars) vars.push_back(v);
        for (auto& atom : atoms)
            for (const auto& t : atom.args)
                if (t.kind == QueryTerm::Kind::variable &&
                    std::find(vars.begin(), vars.end(), t.name) == vars.end())
                    vars.push_back(t.name);  // fresh padding variables

        const std::size_t m = memory_.slots();
        std::map<std::string, std::vector<std::string>> domain;
        for (const auto& v : vars) {
            if (time_vars.count(v)) {
                std::vector<std::string> times;
                for (std::size_t i = 1; i <= m; ++i) times.push_back(time_symbol(i));
                domain[v] = std::move(times);
            } else {
                domain[v] = space_->names();
            }
        }

        std::map<std::vector<std::string>, double> scores;
        std::vector<std::size_t> pick(vars.size(), 0);
        bool exhausted = false;
        for (const auto& v : vars)
            if (domain[v].empty()) exhausted = true;
        if (vars.empty()) {
            Result r;
            r.truth = assignment_score(atoms, q, {}, {});
            return r;
        }
        while (!exhausted) {
            std::map<std::string, std::string> assign;
            for (std::size_t i = 0; i < vars.size(); ++i)
                assign[vars[i]] = domain[vars[i]][pick[i]];
            bool excluded = false;
            for (std::size_t v = 0; v < q.query_vars.size() && !excluded; ++v) {
                auto it = q.exclusions.find(q.query_vars[v]);
                if (it == q.exclusions.end()) continue;
                for (const auto& c : it->second)
                    if (assign[q.query_vars[v]] == c) excluded = true;
            }
            if (!excluded) {
                double s = assignment_score(atoms, q, vars, assign);
                if (s != 0.0) {
                    std::vector<std::string> tuple;
                    for (const auto& v : q.query_vars) tuple.push_back(assign[v]);
                    scores[tuple] += s;
                }
            }
            std::size_t i = vars.size();
            exhausted = true;
            while (i-- > 0) {
                if (++pick[i] < domain[vars[i]].size()) {
                    exhausted = false;
                    break;
                }
                pick[i] = 0;
            }
        }

        Result r;
        if (q.query_vars.empty()) {
            for (const auto& [tuple, s] : scores) r.truth += s;
            return r;
        }
        for (const auto& [tuple, s] : scores)
            if (s >= threshold) r.bindings.push_back({tuple, s});
        std::stable_sort(r.bindings.begin(), r.bindings.end(), [](const auto& a, const auto& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.symbols < b.symbols;
        });
        return r;
    }

private:
    double assignment_score(const std::vector<QueryAtom>& atoms, const Query& q,
                            const std::vector<std::string>& vars,
                            const std::map<std::string, std::string>& assign) const {
        (void)vars;
        auto value = [&](const QueryTerm& t) -> const std::string& {
            return t.kind == QueryTerm::Kind::constant ? t.name : assign.at(t.name);
        };
        for (const auto& [x, y] : q.equalities) {
            if (value(q.atoms[x.atom].args[x.slot]) != value(q.atoms[y.atom].args[y.slot]))
                return 0.0;
        }
        double product = 1.0;
        for (const auto& atom : atoms) {
            if (atom.pred == "@") {
                std::size_t i = time_index(value(atom.args[2]));
                double t = memory_.truth(value(atom.args[0]), value(atom.args[1]), i);
                product *= t > 0.5 ? t : 0.0;
            } else {  // "<" or next
                std::size_t a = time_index(value(atom.args[0]));
                std::size_t b = time_index(value(atom.args[1]));
                if (!(a != 0 && b == a + 1 && b <= memory_.slots())) return 0.0;
            }
            if (product == 0.0) return 0.0;
        }
        return product;
    }

    std::shared_ptr<const SymbolSpace> space_;
    MatrixMemory memory_;
};

}  // namespace tpr

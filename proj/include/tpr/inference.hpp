#pragma once
// Inference over the knowledge-base tensor: the persistence operator copies
// facts about persistent predicates forward one timestep, the transitivity
// operator composes co-located pairs at the current time, and the story
// engine drives both over a sentence-per-timestep story.
//
// Transitivity derives candidates by contracting B with itself, reads them
// out through the unbinding duals, and inserts only candidates whose truth
// score is not already ~1. Repeating the step at a fixpoint is therefore an
// exact no-op (blindly re-adding the derived tensor would instead grow
// coefficients without bound and never converge).

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tpr/knowledge_base.hpp"

namespace tpr {

struct AxiomConfig {
    std::set<std::string> persistent_preds{"@"};
    std::set<std::string> transitive_preds{"@"};
    std::size_t max_fixpoint_iters = 16;
};

/// Applies the persistence operator entering timestep i >= 2: every fact
/// with a persistent predicate at t_(i-1) contributes a copy stamped t_i;
/// all existing content is kept. The operator is linear, so net-cancelled
/// facts contribute nothing and standalone negations propagate their sign.
inline KnowledgeBase persistence_step(const KnowledgeBase& kb, std::size_t i,
                                      const AxiomConfig& cfg = {}) {
    if (i < 2) return kb;
    if (!kb.timeline()) throw symbol_error("persistence_step: knowledge base has no timeline");
    const SymbolSpace& space = kb.space();
    const Timeline& tl = *kb.timeline();
    const std::string prev = time_symbol(i - 1);
    const std::vector<double>& prev_dual = tl.time_dual(i - 1);
    const std::vector<double>& next_vec = tl.time_vec(i);

    KnowledgeBase out = kb;
    for (const std::string& pred : cfg.persistent_preds) {
        if (!space.has(pred)) continue;
        Tensor delta;
        if (kb.b().is_factored()) {
            std::vector<RankOneTerm> terms;
            for (const auto& term : kb.b().terms()) {
                double c = term.coeff * Tensor::dot_vec(space.dual(pred), term.factors[0]) *
                           Tensor::dot_vec(prev_dual, term.factors[3]);
                if (std::abs(c) <= Tensor::kCompactEps) continue;
                terms.push_back(RankOneTerm{c, {space.vec(pred), term.factors[1], term.factors[2],
                                                next_vec}});
            }
            delta = Tensor::factored(kb.b().dims(), std::move(terms));
        } else {
            Tensor core = inner(kb.b(), Tensor::rank_one(1.0, {space.dual(pred), prev_dual}),
                                {{0, 0}, {3, 1}});
            delta = outer(outer(space.tensor(pred).densify(), core.densify()),
                          Tensor::from_vector(next_vec));
        }
        std::vector<std::pair<Proposition, int>> entries;
        for (const auto& [p, net] : kb.shadow())
            if (p.pred == pred && p.args[2] == prev && net != 0)
                entries.emplace_back(prop(pred, p.args[0], p.args[1], time_symbol(i)), net);
        out.accumulate(delta, entries);
    }
    return out;
}

struct TransitivityResult {
    KnowledgeBase kb;
    std::vector<Proposition> added;
};

/// One application of the transitivity operator at timestep i: for each
/// transitive predicate p, unbind B at (p, t_i) into a d x d co-location
/// map, compose it with itself, decode the composed pairs, and add every
/// genuinely new fact p(x, z, t_i).
inline TransitivityResult transitivity_step(const KnowledgeBase& kb, std::size_t i,
                                            const AxiomConfig& cfg = {}) {
    const SymbolSpace& space = kb.space();
    const std::vector<double>& t_dual =
        kb.timeline() ? kb.timeline()->time_dual(i) : space.dual(time_symbol(i));
    TransitivityResult result{kb, {}};
    for (const std::string& pred : cfg.transitive_preds) {
        if (!space.has(pred)) continue;
        Tensor x = inner(kb.b(), Tensor::rank_one(1.0, {space.dual(pred), t_dual}),
                         {{0, 0}, {3, 1}});
        Tensor composed = inner(x, x, {{1, 0}});

        std::map<std::pair<std::size_t, std::size_t>, double> scores;
        if (composed.is_factored()) {
            for (const auto& term : composed.terms()) {
                auto [xi, sx] = space.nearest(term.factors[0]);
                auto [zi, sz] = space.nearest(term.factors[1]);
                scores[{xi, zi}] += term.coeff * sx * sz;
            }
        } else {
            for (std::size_t zi = 0; zi < space.size(); ++zi) {
                Tensor col = inner(composed, Tensor::from_vector(space.dual(zi)), {{1, 0}});
                for (std::size_t xi = 0; xi < space.size(); ++xi)
                    scores[{xi, zi}] = Tensor::dot_vec(space.dual(xi), col.to_vector());
            }
        }
        for (const auto& [pair, score] : scores) {
            if (score <= 0.5) continue;
            Proposition cand = prop(pred, space.names()[pair.first], space.names()[pair.second],
                                    time_symbol(i));
            if (result.kb.holds(cand) >= 0.5) continue;
            result.kb.add(cand);
            result.added.push_back(cand);
        }
    }
    return result;
}

/// One timestep in a story run: a list of logical-form propositions.
using Story = std::vector<std::vector<Proposition>>;

/// Drives a story through the reasoning loop: entering each timestep apply
/// persistence, record the precedence fact, add the sentence facts, then
/// close under transitivity until nothing new is derivable (capped by
/// max_fixpoint_iters).
class StoryEngine {
public:
    StoryEngine(std::shared_ptr<const SymbolSpace> space, std::size_t num_times,
                const AxiomConfig& cfg = {}, Tensor::Repr repr = Tensor::Repr::factored)
        : cfg_(cfg), kb_(space, repr, make_timeline(*space, num_times)) {}

    /// Processes timestep i with the given sentence facts. Timesteps must
    /// be visited in increasing order; skipped steps still persist.
    void step(std::size_t i, const std::vector<Proposition>& facts) {
        if (i <= current_) throw symbol_error("story timesteps must increase");
        for (std::size_t j = current_ + 1; j <= i; ++j) {
            if (j >= 2) {
                kb_ = persistence_step(kb_, j, cfg_);
                kb_.add_precedence(j);
            }
        }
        current_ = i;
        for (const auto& p : facts) kb_.add(p);
        close_transitivity();
    }

    const KnowledgeBase& kb() const { return kb_; }
    bool fixpoint_reached() const { return fixpoint_reached_; }
    std::size_t total_iterations() const { return total_iterations_; }
    std::size_t current_time() const { return current_; }

private:
    static std::optional<Timeline> make_timeline(const SymbolSpace& space, std::size_t num_times) {
        if (num_times < 2) return std::nullopt;
        return Timeline::build(space, num_times);
    }

    void close_transitivity() {
        for (std::size_t iter = 0;; ++iter) {
            if (iter >= cfg_.max_fixpoint_iters) {
                fixpoint_reached_ = false;
                return;
            }
            ++total_iterations_;
            TransitivityResult r = transitivity_step(kb_, current_, cfg_);
            if (r.added.empty()) return;  // shadow unchanged and delta-B is exactly zero
            kb_ = std::move(r.kb);
            if (kb_.b().order() != 4) throw tensor_error("inference step changed tensor order");
        }
    }

    AxiomConfig cfg_;
    KnowledgeBase kb_;
    std::size_t current_ = 0;
    bool fixpoint_reached_ = true;
    std::size_t total_iterations_ = 0;
};

struct RunReport {
    KnowledgeBase kb;
    bool fixpoint_reached = true;
    std::size_t total_iterations = 0;
};

/// Runs a whole story (sentence i lands at timestep i). The symbol space
/// must already contain every referenced symbol plus time symbols t1..tm.
inline RunReport run_story(std::shared_ptr<const SymbolSpace> space, const Story& story,
                           const AxiomConfig& cfg = {},
                           Tensor::Repr repr = Tensor::Repr::factored) {
    StoryEngine engine(std::move(space), story.size(), cfg, repr);
    for (std::size_t i = 0; i < story.size(); ++i) engine.step(i + 1, story[i]);
    return RunReport{engine.kb(), engine.fixpoint_reached(), engine.total_iterations()};
}

}  // namespace tpr

#pragma once
// The knowledge base: an order-4 tensor holding the superposition of
// encoded propositions pred (x) arg1 (x) arg2 (x) arg3, a symbolic shadow
// used for bookkeeping and oracle cross-checks (never to produce answers),
// and the timeline with its time-increment operator.

#include <array>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpr/symbol_space.hpp"
#include "tpr/tensor.hpp"

namespace tpr {

struct Proposition {
    std::string pred;
    std::array<std::string, 3> args;  // third slot may be the dummy symbol
    int sign = +1;

    friend auto operator<=>(const Proposition&, const Proposition&) = default;
};

inline Proposition prop(std::string pred, std::string a1, std::string a2,
                        std::string a3 = kDummySymbol, int sign = +1) {
    return Proposition{std::move(pred), {std::move(a1), std::move(a2), std::move(a3)}, sign};
}

inline Proposition negated(Proposition p) {
    p.sign = -p.sign;
    return p;
}

inline std::string to_string(const Proposition& p) {
    std::string s = p.sign < 0 ? "~" : "";
    s += p.pred + "(" + p.args[0] + ", " + p.args[1];
    if (p.args[2] != kDummySymbol) s += ", " + p.args[2];
    return s + ")";
}

/// sign * pred (x) arg1 (x) arg2 (x) arg3 as a single factored term.
inline Tensor encode_prop(const Proposition& p, const SymbolSpace& space) {
    return Tensor::rank_one(static_cast<double>(p.sign),
                            {space.vec(p.pred), space.vec(p.args[0]), space.vec(p.args[1]),
                             space.vec(p.args[2])});
}

/// Conventional name of the i-th time symbol (1-based).
inline std::string time_symbol(std::size_t i) { return "t" + std::to_string(i); }

/// Index of a time symbol "t<k>", or 0 when the name is not one.
inline std::size_t time_index(const std::string& name) {
    if (name.size() < 2 || name[0] != 't') return 0;
    std::size_t k = 0;
    for (std::size_t i = 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return 0;
        k = k * 10 + static_cast<std::size_t>(name[i] - '0');
    }
    return k;
}

/// Time vectors t_1..t_m plus the linear increment operator sending t_i to
/// t_(i+1) (zero on everything outside the time span) and its inverse on
/// that span. Both are built from unbinding duals, which coincides with the
/// plain transpose construction when the symbols are orthonormal.
class Timeline {
public:
    static Timeline build(const SymbolSpace& space, std::size_t num_times) {
        if (num_times < 2) throw symbol_error("timeline needs at least 2 time symbols");
        Timeline tl;
        tl.d_ = space.d();
        tl.count_ = num_times;
        for (std::size_t i = 1; i <= num_times; ++i) {
            tl.tvecs_.push_back(space.vec(time_symbol(i)));
            tl.tduals_.push_back(space.dual(time_symbol(i)));
        }
        std::vector<RankOneTerm> fwd, bwd;
        for (std::size_t i = 0; i + 1 < num_times; ++i) {
            fwd.push_back(RankOneTerm{1.0, {tl.tvecs_[i + 1], tl.tduals_[i]}});
            bwd.push_back(RankOneTerm{1.0, {tl.tvecs_[i], tl.tduals_[i + 1]}});
        }
        tl.increment_ = Tensor::factored({tl.d_, tl.d_}, std::move(fwd)).densify();
        tl.inverse_ = Tensor::factored({tl.d_, tl.d_}, std::move(bwd)).densify();
        return tl;
    }

    std::size_t count() const { return count_; }
    const std::vector<double>& time_vec(std::size_t i) const { return tvecs_.at(i - 1); }
    const std::vector<double>& time_dual(std::size_t i) const { return tduals_.at(i - 1); }

    /// d x d matrices; mode 0 is the output side, mode 1 the input side.
    const Tensor& increment_matrix() const { return increment_; }
    const Tensor& inverse_matrix() const { return inverse_; }

    std::vector<double> apply(const std::vector<double>& v) const { return mat_vec(increment_, v); }
    std::vector<double> apply_inverse(const std::vector<double>& v) const {
        return mat_vec(inverse_, v);
    }

private:
    static std::vector<double> mat_vec(const Tensor& m, const std::vector<double>& v) {
        return inner(m, Tensor::from_vector(v), {{1, 0}}).to_vector();
    }

    std::size_t d_ = 0;
    std::size_t count_ = 0;
    std::vector<std::vector<double>> tvecs_, tduals_;
    Tensor increment_, inverse_;
};

class KnowledgeBase {
public:
    KnowledgeBase(std::shared_ptr<const SymbolSpace> space, Tensor::Repr repr,
                  std::optional<Timeline> timeline = std::nullopt)
        : space_(std::move(space)), repr_(repr), timeline_(std::move(timeline)) {
        dim_list dims(4, space_->d());
        b_ = repr == Tensor::Repr::factored ? Tensor::factored_zero(dims)
                                            : Tensor::dense_zeros(dims);
    }

    const SymbolSpace& space() const { return *space_; }
    std::shared_ptr<const SymbolSpace> space_ptr() const { return space_; }
    const std::optional<Timeline>& timeline() const { return timeline_; }
    Tensor::Repr repr() const { return repr_; }
    const Tensor& b() const { return b_; }

    /// Signed shadow multiset: canonical (sign +1) proposition -> net count.
    /// A negation with no positive partner is retained as a -1 entry.
    const std::map<Proposition, int>& shadow() const { return shadow_; }

    bool shadow_holds(const Proposition& p) const {
        auto it = shadow_.find(canonical(p));
        return it != shadow_.end() && it->second > 0;
    }

    void add(const Proposition& p) {
        Tensor enc = encode_prop(p, *space_);
        if (repr_ == Tensor::Repr::dense) enc = enc.densify();
        b_ += enc;
        bump_shadow(canonical(p), p.sign);
    }

    /// Adds the precedence fact "<"(t_(i-1), t_i); no-op for i < 2.
    void add_precedence(std::size_t i) {
        if (i < 2) return;
        add(prop("<", time_symbol(i - 1), time_symbol(i)));
    }

    /// Truth score of a proposition (sign ignored): the inner product of B
    /// with the dual-encoded probe over all four modes. Approximately 1 for
    /// present facts, 0 for absent ones, -1 for net-negated ones.
    double holds(const Proposition& p) const {
        Tensor probe = Tensor::rank_one(
            1.0, {space_->dual(p.pred), space_->dual(p.args[0]), space_->dual(p.args[1]),
                  space_->dual(p.args[2])});
        return b_.dot(probe);
    }

    /// Direct tensor update used by the inference operators; keeps the
    /// shadow in sync through the supplied signed entries.
    void accumulate(const Tensor& delta, const std::vector<std::pair<Proposition, int>>& entries) {
        b_ += delta;
        for (const auto& [p, n] : entries) bump_shadow(canonical(p), n);
    }

private:
    static Proposition canonical(Proposition p) {
        p.sign = +1;
        return p;
    }

    void bump_shadow(const Proposition& key, int delta) {
        auto it = shadow_.try_emplace(key, 0).first;
        it->second += delta;
        if (it->second == 0) shadow_.erase(it);
    }

    std::shared_ptr<const SymbolSpace> space_;
    Tensor::Repr repr_;
    std::optional<Timeline> timeline_;
    Tensor b_;
    std::map<Proposition, int> shadow_;
};

/// Value-style wrapper matching the step-function signatures used by the
/// inference layer.
inline KnowledgeBase add(KnowledgeBase kb, const Proposition& p) {
    kb.add(p);
    return kb;
}

}  // namespace tpr

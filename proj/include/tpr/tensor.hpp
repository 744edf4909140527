#pragma once
// Order-n tensors over R^d with outer product, contraction and generalized
// inner product. Two interchangeable representations:
//
//   dense    - flat row-major value array, feasible up to ~d^4 at small d
//   factored - a sum of rank-1 terms (coefficient + one factor vector per
//              mode), exact and compact when the tensor is a superposition
//              of a few outer products
//
// All operations are pure; a Tensor is an immutable value once built.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tpr {

class tensor_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using dim_list = std::vector<std::size_t>;
using ModePairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// One rank-1 term of a factored tensor: coeff * f_1 (x) ... (x) f_n.
struct RankOneTerm {
    double coeff = 1.0;
    std::vector<std::vector<double>> factors;
};

class Tensor {
public:
    enum class Repr { dense, factored };

    /// Coefficients below this are dropped when compacting factored terms.
    static constexpr double kCompactEps = 1e-12;

    Tensor() : repr_(Repr::dense), values_{0.0} {}

    static Tensor scalar(double v) {
        Tensor t;
        t.values_ = {v};
        return t;
    }

    static Tensor from_vector(std::vector<double> v) {
        Tensor t;
        t.dims_ = {v.size()};
        t.values_ = std::move(v);
        return t;
    }

    static Tensor dense(dim_list dims, std::vector<double> values) {
        if (values.size() != element_count(dims))
            throw tensor_error("dense: value count does not match dims");
        Tensor t;
        t.dims_ = std::move(dims);
        t.values_ = std::move(values);
        return t;
    }

    static Tensor dense_zeros(dim_list dims) {
        Tensor t;
        t.values_.assign(element_count(dims), 0.0);
        t.dims_ = std::move(dims);
        return t;
    }

    static Tensor factored(dim_list dims, std::vector<RankOneTerm> terms) {
        for (const auto& term : terms) {
            if (term.factors.size() != dims.size())
                throw tensor_error("factored: term order does not match dims");
            for (std::size_t m = 0; m < dims.size(); ++m)
                if (term.factors[m].size() != dims[m])
                    throw tensor_error("factored: factor length does not match mode size");
        }
        Tensor t;
        t.repr_ = Repr::factored;
        t.dims_ = std::move(dims);
        t.terms_ = std::move(terms);
        return t;
    }

    static Tensor factored_zero(dim_list dims) { return factored(std::move(dims), {}); }

    static Tensor rank_one(double coeff, std::vector<std::vector<double>> factors) {
        dim_list dims;
        dims.reserve(factors.size());
        for (const auto& f : factors) dims.push_back(f.size());
        return factored(std::move(dims), {RankOneTerm{coeff, std::move(factors)}});
    }

    std::size_t order() const { return dims_.size(); }
    const dim_list& dims() const { return dims_; }
    Repr repr() const { return repr_; }
    bool is_factored() const { return repr_ == Repr::factored; }

    const std::vector<RankOneTerm>& terms() const {
        if (!is_factored()) throw tensor_error("terms: tensor is dense");
        return terms_;
    }

    const std::vector<double>& values() const {
        if (is_factored()) throw tensor_error("values: tensor is factored");
        return values_;
    }

    std::size_t size() const { return element_count(dims_); }

    double at(std::span<const std::size_t> idx) const {
        if (idx.size() != order()) throw tensor_error("at: wrong index count");
        for (std::size_t m = 0; m < idx.size(); ++m)
            if (idx[m] >= dims_[m]) throw tensor_error("at: index out of range");
        if (!is_factored()) return values_[flatten(idx)];
        double sum = 0.0;
        for (const auto& term : terms_) {
            double p = term.coeff;
            for (std::size_t m = 0; m < idx.size(); ++m) p *= term.factors[m][idx[m]];
            sum += p;
        }
        return sum;
    }

    double at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    /// Order-0 tensors are scalars.
    double value() const {
        if (order() != 0) throw tensor_error("value: tensor is not order-0");
        return at(std::span<const std::size_t>{});
    }

    std::vector<double> to_vector() const {
        if (order() != 1) throw tensor_error("to_vector: tensor is not order-1");
        return densify().values_;
    }

    Tensor densify() const {
        if (!is_factored()) return *this;
        Tensor out = dense_zeros(dims_);
        for (const auto& term : terms_) {
            std::vector<std::size_t> idx(order(), 0);
            for (std::size_t flat = 0; flat < out.values_.size(); ++flat) {
                double p = term.coeff;
                for (std::size_t m = 0; m < idx.size(); ++m) p *= term.factors[m][idx[m]];
                out.values_[flat] += p;
                advance(idx);
            }
        }
        return out;
    }

    /// Reorders modes: result mode m is input mode perm[m].
    Tensor permuted(std::span<const std::size_t> perm) const {
        if (perm.size() != order()) throw tensor_error("permuted: wrong permutation size");
        dim_list new_dims(order());
        for (std::size_t m = 0; m < order(); ++m) new_dims[m] = dims_[perm[m]];
        if (is_factored()) {
            std::vector<RankOneTerm> terms;
            terms.reserve(terms_.size());
            for (const auto& term : terms_) {
                RankOneTerm t{term.coeff, {}};
                t.factors.reserve(order());
                for (std::size_t m = 0; m < order(); ++m) t.factors.push_back(term.factors[perm[m]]);
                terms.push_back(std::move(t));
            }
            return factored(std::move(new_dims), std::move(terms));
        }
        Tensor out = dense_zeros(new_dims);
        std::vector<std::size_t> idx(order(), 0), src(order(), 0);
        for (std::size_t flat = 0; flat < out.values_.size(); ++flat) {
            for (std::size_t m = 0; m < order(); ++m) src[perm[m]] = idx[m];
            out.values_[flat] = at(src);
            advance(idx);
        }
        return out;
    }

    Tensor scaled(double a) const {
        Tensor out = *this;
        if (out.is_factored()) {
            for (auto& term : out.terms_) term.coeff *= a;
        } else {
            for (auto& v : out.values_) v *= a;
        }
        return out;
    }

    Tensor& operator+=(const Tensor& rhs) {
        if (dims_ != rhs.dims_) throw tensor_error("add: dims differ");
        if (is_factored() && rhs.is_factored()) {
            terms_.insert(terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
            compact();
            return *this;
        }
        Tensor a = densify();
        Tensor b = rhs.densify();
        for (std::size_t i = 0; i < a.values_.size(); ++i) a.values_[i] += b.values_[i];
        *this = std::move(a);
        return *this;
    }

    friend Tensor operator+(Tensor lhs, const Tensor& rhs) {
        lhs += rhs;
        return lhs;
    }

    friend Tensor operator-(const Tensor& lhs, const Tensor& rhs) {
        return lhs + rhs.scaled(-1.0);
    }

    friend Tensor operator*(double a, const Tensor& t) { return t.scaled(a); }

    /// Full inner product over all modes (mode i pairs with mode i).
    double dot(const Tensor& rhs) const {
        if (dims_ != rhs.dims_) throw tensor_error("dot: dims differ");
        if (is_factored() && rhs.is_factored()) {
            double sum = 0.0;
            for (const auto& a : terms_)
                for (const auto& b : rhs.terms_) {
                    double p = a.coeff * b.coeff;
                    for (std::size_t m = 0; m < order() && p != 0.0; ++m)
                        p *= dot_vec(a.factors[m], b.factors[m]);
                    sum += p;
                }
            return sum;
        }
        if (!is_factored() && !rhs.is_factored()) {
            double sum = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) sum += values_[i] * rhs.values_[i];
            return sum;
        }
        const Tensor& fac = is_factored() ? *this : rhs;
        const Tensor& den = is_factored() ? rhs : *this;
        double sum = 0.0;
        std::vector<std::size_t> idx(order(), 0);
        for (std::size_t flat = 0; flat < den.values_.size(); ++flat) {
            if (den.values_[flat] != 0.0) sum += den.values_[flat] * fac.at(idx);
            advance(idx);
        }
        return sum;
    }

    /// Frobenius norm; computed exactly on factored form via the Gram sum.
    double norm() const { return std::sqrt(std::max(0.0, dot(*this))); }

    std::size_t term_count() const { return is_factored() ? terms_.size() : 0; }

    /// Merges factored terms with identical factor vectors and drops terms
    /// whose coefficient falls below eps. No-op on dense tensors.
    Tensor& compact(double eps = kCompactEps) {
        if (!is_factored() || terms_.empty()) return *this;
        std::vector<std::size_t> idx(terms_.size());
        std::iota(idx.begin(), idx.end(), 0);
        auto less = [&](std::size_t a, std::size_t b) {
            for (std::size_t m = 0; m < order(); ++m) {
                const auto& fa = terms_[a].factors[m];
                const auto& fb = terms_[b].factors[m];
                if (fa < fb) return true;
                if (fb < fa) return false;
            }
            return false;
        };
        auto same = [&](std::size_t a, std::size_t b) {
            for (std::size_t m = 0; m < order(); ++m)
                if (terms_[a].factors[m] != terms_[b].factors[m]) return false;
            return true;
        };
        std::stable_sort(idx.begin(), idx.end(), less);
        std::vector<RankOneTerm> merged;
        merged.reserve(terms_.size());
        for (std::size_t i = 0; i < idx.size();) {
            double coeff = terms_[idx[i]].coeff;
            std::size_t j = i + 1;
            while (j < idx.size() && same(idx[i], idx[j])) coeff += terms_[idx[j++]].coeff;
            if (std::abs(coeff) > eps) {
                RankOneTerm t = terms_[idx[i]];
                t.coeff = coeff;
                merged.push_back(std::move(t));
            }
            i = j;
        }
        terms_ = std::move(merged);
        return *this;
    }

    static std::size_t element_count(const dim_list& dims) {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }

    // Odometer increment of a row-major multi-index.
    void advance(std::vector<std::size_t>& idx) const {
        for (std::size_t m = idx.size(); m-- > 0;) {
            if (++idx[m] < dims_[m]) return;
            idx[m] = 0;
        }
    }

    static double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }

private:
    std::size_t flatten(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t m = 0; m < idx.size(); ++m) flat = flat * dims_[m] + idx[m];
        return flat;
    }

    Repr repr_ = Repr::dense;
    dim_list dims_;
    std::vector<double> values_;      // dense payload
    std::vector<RankOneTerm> terms_;  // factored payload
};

namespace detail {

inline void check_mode(const Tensor& t, std::size_t m, const char* what) {
    if (m >= t.order()) throw tensor_error(std::string(what) + ": mode index out of range");
}

/// Contracts dense tensor modes against fixed vectors. `bound` pairs each
/// eliminated mode with the vector it is contracted with.
inline Tensor dense_contract_vectors(const Tensor& t,
                                     const std::vector<std::pair<std::size_t, std::vector<double>>>& bound) {
    std::vector<bool> gone(t.order(), false);
    for (const auto& [m, v] : bound) {
        check_mode(t, m, "inner");
        if (gone[m]) throw tensor_error("inner: mode used twice");
        if (v.size() != t.dims()[m]) throw tensor_error("inner: paired mode sizes differ");
        gone[m] = true;
    }
    dim_list out_dims;
    std::vector<std::size_t> free_modes;
    for (std::size_t m = 0; m < t.order(); ++m)
        if (!gone[m]) {
            out_dims.push_back(t.dims()[m]);
            free_modes.push_back(m);
        }
    Tensor out = Tensor::dense_zeros(out_dims);
    std::vector<double> acc(out.size(), 0.0);
    std::vector<std::size_t> idx(t.order(), 0);
    const auto& vals = t.values();
    for (std::size_t flat = 0; flat < vals.size(); ++flat) {
        double p = vals[flat];
        if (p != 0.0) {
            for (const auto& [m, v] : bound) p *= v[idx[m]];
            std::size_t out_flat = 0;
            for (std::size_t f = 0; f < free_modes.size(); ++f)
                out_flat = out_flat * out_dims[f] + idx[free_modes[f]];
            acc[out_flat] += p;
        }
        t.advance(idx);
    }
    return Tensor::dense(std::move(out_dims), std::move(acc));
}

}  // namespace detail

/// Outer product: stays factored when both operands are factored (or are
/// trivially liftable, order <= 1), dense otherwise.
inline Tensor outer(const Tensor& u, const Tensor& v) {
    auto liftable = [](const Tensor& t) { return t.is_factored() || t.order() <= 1; };
    if (liftable(u) && liftable(v)) {
        auto lift = [](const Tensor& t) -> std::vector<RankOneTerm> {
            if (t.is_factored()) return t.terms();
            if (t.order() == 0) return {RankOneTerm{t.value(), {}}};
            return {RankOneTerm{1.0, {t.values()}}};
        };
        dim_list dims = u.dims();
        dims.insert(dims.end(), v.dims().begin(), v.dims().end());
        std::vector<RankOneTerm> terms;
        auto ut = lift(u), vt = lift(v);
        terms.reserve(ut.size() * vt.size());
        for (const auto& a : ut)
            for (const auto& b : vt) {
                RankOneTerm t{a.coeff * b.coeff, a.factors};
                t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
                terms.push_back(std::move(t));
            }
        Tensor out = Tensor::factored(std::move(dims), std::move(terms));
        out.compact();
        return out;
    }
    Tensor a = u.densify();
    Tensor b = v.densify();
    dim_list dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    std::vector<double> vals;
    vals.reserve(a.values().size() * b.values().size());
    for (double x : a.values())
        for (double y : b.values()) vals.push_back(x * y);
    return Tensor::dense(std::move(dims), std::move(vals));
}

/// Contraction of modes j and k (j < k): sums over the shared index and
/// removes both modes.
inline Tensor contract(const Tensor& t, std::size_t j, std::size_t k) {
    detail::check_mode(t, j, "contract");
    detail::check_mode(t, k, "contract");
    if (j >= k) throw tensor_error("contract: requires mode j < mode k");
    if (t.dims()[j] != t.dims()[k]) throw tensor_error("contract: mode sizes differ");
    dim_list out_dims;
    for (std::size_t m = 0; m < t.order(); ++m)
        if (m != j && m != k) out_dims.push_back(t.dims()[m]);
    if (t.is_factored()) {
        std::vector<RankOneTerm> terms;
        terms.reserve(t.term_count());
        for (const auto& term : t.terms()) {
            RankOneTerm nt{term.coeff * Tensor::dot_vec(term.factors[j], term.factors[k]), {}};
            for (std::size_t m = 0; m < t.order(); ++m)
                if (m != j && m != k) nt.factors.push_back(term.factors[m]);
            terms.push_back(std::move(nt));
        }
        Tensor out = Tensor::factored(std::move(out_dims), std::move(terms));
        out.compact();
        return out;
    }
    std::vector<double> acc(Tensor::element_count(out_dims), 0.0);
    std::vector<std::size_t> idx(t.order(), 0);
    const auto& vals = t.values();
    for (std::size_t flat = 0; flat < vals.size(); ++flat) {
        if (idx[j] == idx[k] && vals[flat] != 0.0) {
            std::size_t out_flat = 0, f = 0;
            for (std::size_t m = 0; m < t.order(); ++m)
                if (m != j && m != k) out_flat = out_flat * out_dims[f++] + idx[m];
            acc[out_flat] += vals[flat];
        }
        t.advance(idx);
    }
    return Tensor::dense(std::move(out_dims), std::move(acc));
}

/// Generalized inner product: equal to contracting outer(u, v) over every
/// (mode-of-u, mode-of-v) pair, but evaluated without materializing the
/// outer product. Result modes are u's free modes followed by v's.
inline Tensor inner(const Tensor& u, const Tensor& v, const ModePairs& pairs) {
    std::vector<bool> used_u(u.order(), false), used_v(v.order(), false);
    for (const auto& [mu, mv] : pairs) {
        detail::check_mode(u, mu, "inner");
        detail::check_mode(v, mv, "inner");
        if (used_u[mu] || used_v[mv]) throw tensor_error("inner: mode used twice");
        if (u.dims()[mu] != v.dims()[mv]) throw tensor_error("inner: paired mode sizes differ");
        used_u[mu] = used_v[mv] = true;
    }
    dim_list out_dims;
    for (std::size_t m = 0; m < u.order(); ++m)
        if (!used_u[m]) out_dims.push_back(u.dims()[m]);
    for (std::size_t m = 0; m < v.order(); ++m)
        if (!used_v[m]) out_dims.push_back(v.dims()[m]);

    if (u.is_factored() && v.is_factored()) {
        std::vector<RankOneTerm> terms;
        for (const auto& a : u.terms())
            for (const auto& b : v.terms()) {
                double coeff = a.coeff * b.coeff;
                for (const auto& [mu, mv] : pairs) {
                    coeff *= Tensor::dot_vec(a.factors[mu], b.factors[mv]);
                    if (coeff == 0.0) break;
                }
                if (std::abs(coeff) <= Tensor::kCompactEps) continue;
                RankOneTerm t{coeff, {}};
                for (std::size_t m = 0; m < u.order(); ++m)
                    if (!used_u[m]) t.factors.push_back(a.factors[m]);
                for (std::size_t m = 0; m < v.order(); ++m)
                    if (!used_v[m]) t.factors.push_back(b.factors[m]);
                terms.push_back(std::move(t));
            }
        Tensor out = Tensor::factored(std::move(out_dims), std::move(terms));
        out.compact();
        return out;
    }

    // Mixed case: contract the dense side against each rank-1 term's paired
    // factor vectors. The term stays rank-1 whenever the dense residual has
    // order <= 1; otherwise fall back to a dense evaluation.
    if (u.is_factored() != v.is_factored()) {
        const bool ufac = u.is_factored();
        const Tensor& fac = ufac ? u : v;
        const Tensor& den = ufac ? v : u;
        std::size_t den_free = den.order() - pairs.size();
        if (den_free <= 1) {
            std::vector<RankOneTerm> terms;
            for (const auto& term : fac.terms()) {
                std::vector<std::pair<std::size_t, std::vector<double>>> bound;
                bound.reserve(pairs.size());
                for (const auto& [mu, mv] : pairs)
                    bound.emplace_back(ufac ? mv : mu, term.factors[ufac ? mu : mv]);
                Tensor residual = detail::dense_contract_vectors(den, bound);
                double coeff = term.coeff;
                std::vector<std::vector<double>> fac_free;
                for (std::size_t m = 0; m < fac.order(); ++m)
                    if (!(ufac ? used_u[m] : used_v[m])) fac_free.push_back(term.factors[m]);
                RankOneTerm t{coeff, {}};
                if (ufac) {
                    t.factors = std::move(fac_free);
                    if (residual.order() == 1) t.factors.push_back(residual.values());
                    else t.coeff *= residual.value();
                } else {
                    if (residual.order() == 1) t.factors.push_back(residual.values());
                    else t.coeff *= residual.value();
                    t.factors.insert(t.factors.end(), fac_free.begin(), fac_free.end());
                }
                if (std::abs(t.coeff) > Tensor::kCompactEps) terms.push_back(std::move(t));
            }
            Tensor out = Tensor::factored(std::move(out_dims), std::move(terms));
            out.compact();
            return out;
        }
    }

    // Dense path: joint summation over the paired index space per free index.
    Tensor a = u.densify();
    Tensor b = v.densify();
    std::vector<std::size_t> free_u, free_v;
    for (std::size_t m = 0; m < a.order(); ++m)
        if (!used_u[m]) free_u.push_back(m);
    for (std::size_t m = 0; m < b.order(); ++m)
        if (!used_v[m]) free_v.push_back(m);
    std::vector<double> acc(Tensor::element_count(out_dims), 0.0);
    std::vector<std::size_t> ia(a.order(), 0);
    const auto& av = a.values();
    for (std::size_t fa = 0; fa < av.size(); ++fa) {
        if (av[fa] != 0.0) {
            std::vector<std::size_t> ib(b.order(), 0);
            const auto& bv = b.values();
            for (std::size_t fb = 0; fb < bv.size(); ++fb) {
                if (bv[fb] != 0.0) {
                    bool match = true;
                    for (const auto& [mu, mv] : pairs)
                        if (ia[mu] != ib[mv]) {
                            match = false;
                            break;
                        }
                    if (match) {
                        std::size_t out_flat = 0, f = 0;
                        for (std::size_t m : free_u) out_flat = out_flat * out_dims[f++] + ia[m];
                        for (std::size_t m : free_v) out_flat = out_flat * out_dims[f++] + ib[m];
                        acc[out_flat] += av[fa] * bv[fb];
                    }
                }
                b.advance(ib);
            }
        }
        a.advance(ia);
    }
    return Tensor::dense(std::move(out_dims), std::move(acc));
}

}  // namespace tpr

#pragma once
// Distributed encoding vectors for symbols, with unbinding duals and a
// score-ranked decoder. Generation is fully deterministic for a fixed seed
// (the gaussian stream is built from raw mt19937_64 output, so results do
// not depend on the standard library's distribution internals).

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpr/tensor.hpp"

namespace tpr {

class symbol_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dummy symbol used to pad two-place predicates to three arguments.
inline const std::string kDummySymbol = "∅";

namespace detail {

class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double uniform() {  // (0, 1]
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double operator()() {  // Box-Muller, one value per draw pair
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

    std::vector<double> vec(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = (*this)();
        return v;
    }

private:
    std::mt19937_64 rng_;
};

inline double norm_vec(const std::vector<double>& v) {
    return std::sqrt(Tensor::dot_vec(v, v));
}

inline void normalize(std::vector<double>& v) {
    double n = norm_vec(v);
    for (auto& x : v) x /= n;
}

/// v := v - sum_b (v . b) b, applied twice for numerical orthogonality.
inline void reorthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
            double c = Tensor::dot_vec(v, b);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
        }
}

inline void sign_fix(std::vector<double>& v) {
    for (double x : v) {
        if (std::abs(x) > 1e-12) {
            if (x < 0)
                for (auto& y : v) y = -y;
            return;
        }
    }
}

inline bool is_distributed(const std::vector<double>& v) {
    for (double x : v)
        if (std::abs(x) >= 0.95) return false;
    return true;
}

/// In-place Gauss-Jordan inverse of a small square matrix (row-major).
/// Returns false when the matrix is numerically singular.
inline bool invert_matrix(std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        double p = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    a = std::move(inv);
    return true;
}

}  // namespace detail

class SymbolSpace {
public:
    enum class Encoding { orthonormal, independent };

    struct Decoded {
        std::string name;
        double score;
    };

    /// Generates encoding vectors for `names` in R^dim. Orthonormal mode
    /// draws gaussian columns and Gram-Schmidts them; independent mode keeps
    /// normalized gaussian draws and computes left-pseudo-inverse duals.
    /// Every generated column is distributed (no near-one-hot component).
    static SymbolSpace build(std::vector<std::string> names, std::size_t dim, Encoding encoding,
                             std::uint64_t seed) {
        if (names.empty()) throw symbol_error("symbol space needs at least one symbol");
        if (names.size() > dim)
            throw symbol_error("dimension too small: " + std::to_string(names.size()) +
                               " symbols need d >= " + std::to_string(names.size()) + ", got d = " +
                               std::to_string(dim));
        detail::GaussianStream g(seed);
        std::vector<std::vector<double>> cols;
        cols.reserve(names.size());
        for (std::size_t k = 0; k < names.size(); ++k) {
            std::vector<double> v;
            bool ok = false;
            for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                v = g.vec(dim);
                if (encoding == Encoding::orthonormal) {
                    detail::reorthogonalize(v, cols);
                    if (detail::norm_vec(v) < 1e-8) continue;
                }
                detail::normalize(v);
                ok = detail::is_distributed(v);
            }
            if (!ok)
                throw symbol_error("could not generate a distributed vector at d = " +
                                   std::to_string(dim));
            detail::sign_fix(v);
            cols.push_back(std::move(v));
        }
        return SymbolSpace(std::move(names), dim, encoding, std::move(cols));
    }

    /// Wraps caller-supplied encoding columns (e.g. a standard basis for
    /// small exact tests). Duals are computed the same way as for generated
    /// spaces; the distributedness guarantee does not apply.
    static SymbolSpace with_columns(std::vector<std::string> names,
                                    std::vector<std::vector<double>> columns, Encoding encoding) {
        if (names.size() != columns.size())
            throw symbol_error("with_columns: name/column count mismatch");
        if (columns.empty()) throw symbol_error("symbol space needs at least one symbol");
        return SymbolSpace(std::move(names), columns.front().size(), encoding, std::move(columns));
    }

    std::size_t d() const { return dim_; }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    Encoding encoding() const { return encoding_; }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw symbol_error("unknown symbol: " + name);
        return it->second;
    }

    const std::vector<double>& vec(const std::string& name) const { return cols_[index(name)]; }
    const std::vector<double>& vec(std::size_t k) const { return cols_.at(k); }
    const std::vector<double>& dual(const std::string& name) const { return duals_[index(name)]; }
    const std::vector<double>& dual(std::size_t k) const { return duals_.at(k); }

    Tensor tensor(const std::string& name) const { return Tensor::from_vector(vec(name)); }
    Tensor dual_tensor(const std::string& name) const { return Tensor::from_vector(dual(name)); }

    /// Ranks symbols by dual score against v; entries below threshold are
    /// dropped. An empty result means "no answer".
    std::vector<Decoded> decode(const std::vector<double>& v, double threshold = 0.5) const {
        if (v.size() != dim_) throw symbol_error("decode: vector has wrong dimension");
        std::vector<Decoded> out;
        for (std::size_t k = 0; k < size(); ++k) {
            double score = Tensor::dot_vec(duals_[k], v);
            if (score >= threshold) out.push_back({names_[k], score});
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const Decoded& a, const Decoded& b) { return a.score > b.score; });
        return out;
    }

    std::vector<Decoded> decode(const Tensor& v, double threshold = 0.5) const {
        if (v.order() != 1) throw symbol_error("decode: tensor is not order-1");
        return decode(v.to_vector(), threshold);
    }

    /// Best-scoring symbol regardless of threshold (by |score|), with its
    /// signed score. Used to read symbols out of derived rank-1 factors.
    std::pair<std::size_t, double> nearest(const std::vector<double>& v) const {
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t k = 0; k < size(); ++k) {
            double score = Tensor::dot_vec(duals_[k], v);
            if (std::abs(score) > std::abs(best_score)) {
                best = k;
                best_score = score;
            }
        }
        return {best, best_score};
    }

private:
    SymbolSpace(std::vector<std::string> names, std::size_t dim, Encoding encoding,
                std::vector<std::vector<double>> cols)
        : names_(std::move(names)), dim_(dim), encoding_(encoding), cols_(std::move(cols)) {
        for (std::size_t k = 0; k < names_.size(); ++k) {
            if (cols_[k].size() != dim_) throw symbol_error("column has wrong dimension");
            if (!index_.emplace(names_[k], k).second)
                throw symbol_error("duplicate symbol: " + names_[k]);
        }
        compute_duals();
    }

    void compute_duals() {
        const std::size_t n = size();
        // Gram matrix F^T F; duals are (F^T F)^-1 F^T, which reduces to F^T
        // for orthonormal columns.
        std::vector<std::vector<double>> gram(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) gram[i][j] = Tensor::dot_vec(cols_[i], cols_[j]);
        if (!detail::invert_matrix(gram))
            throw symbol_error("symbol vectors are not linearly independent");
        duals_.assign(n, std::vector<double>(dim_, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double w = gram[i][j];
                if (w == 0.0) continue;
                for (std::size_t c = 0; c < dim_; ++c) duals_[i][c] += w * cols_[j][c];
            }
    }

    std::vector<std::string> names_;
    std::size_t dim_;
    Encoding encoding_;
    std::vector<std::vector<double>> cols_;
    std::vector<std::vector<double>> duals_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace tpr

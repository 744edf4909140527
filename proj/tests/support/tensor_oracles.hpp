#pragma once
// Brute-force reference implementations for the tensor kernels, written as
// plain nested index loops so they stay independent of the library's
// evaluation strategy. Test-only code.

#include <random>
#include <vector>

#include "tpr/tensor.hpp"

namespace tprtest {

using tpr::dim_list;
using tpr::ModePairs;
using tpr::Tensor;

inline double uniform_pm1(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-52) - 1.0;  // [-1, 1)
}

inline Tensor random_dense(std::mt19937_64& rng, dim_list dims) {
    std::vector<double> vals(Tensor::element_count(dims));
    for (auto& v : vals) v = uniform_pm1(rng);
    return Tensor::dense(std::move(dims), std::move(vals));
}

inline Tensor random_factored(std::mt19937_64& rng, dim_list dims, std::size_t terms) {
    std::vector<tpr::RankOneTerm> ts;
    for (std::size_t t = 0; t < terms; ++t) {
        tpr::RankOneTerm term{uniform_pm1(rng), {}};
        for (std::size_t d : dims) {
            std::vector<double> f(d);
            for (auto& x : f) x = uniform_pm1(rng);
            term.factors.push_back(std::move(f));
        }
        ts.push_back(std::move(term));
    }
    return Tensor::factored(std::move(dims), std::move(ts));
}

inline std::vector<std::size_t> unflatten(std::size_t flat, const dim_list& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t m = dims.size(); m-- > 0;) {
        idx[m] = flat % dims[m];
        flat /= dims[m];
    }
    return idx;
}

inline Tensor outer_loops(const Tensor& a, const Tensor& b) {
    dim_list dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    std::vector<double> vals(Tensor::element_count(dims));
    for (std::size_t f = 0; f < vals.size(); ++f) {
        auto idx = unflatten(f, dims);
        std::vector<std::size_t> ia(idx.begin(), idx.begin() + a.order());
        std::vector<std::size_t> ib(idx.begin() + a.order(), idx.end());
        vals[f] = a.at(ia) * b.at(ib);
    }
    return Tensor::dense(std::move(dims), std::move(vals));
}

inline Tensor contract_loops(const Tensor& t, std::size_t j, std::size_t k) {
    dim_list out_dims;
    for (std::size_t m = 0; m < t.order(); ++m)
        if (m != j && m != k) out_dims.push_back(t.dims()[m]);
    std::vector<double> vals(Tensor::element_count(out_dims), 0.0);
    for (std::size_t f = 0; f < vals.size(); ++f) {
        auto out_idx = unflatten(f, out_dims);
        for (std::size_t beta = 0; beta < t.dims()[j]; ++beta) {
            std::vector<std::size_t> idx(t.order());
            std::size_t o = 0;
            for (std::size_t m = 0; m < t.order(); ++m)
                idx[m] = (m == j || m == k) ? beta : out_idx[o++];
            vals[f] += t.at(idx);
        }
    }
    return Tensor::dense(std::move(out_dims), std::move(vals));
}

/// Literal definition of the generalized inner product: materialize the
/// full outer product, then contract the pairs one at a time.
inline Tensor inner_loops(const Tensor& a, const Tensor& b, ModePairs pairs) {
    Tensor big = outer_loops(a, b);
    for (auto& [mu, mv] : pairs) mv += a.order();
    while (!pairs.empty()) {
        auto [j, k] = pairs.back();
        pairs.pop_back();
        if (j > k) std::swap(j, k);
        big = contract_loops(big, j, k);
        for (auto& [x, y] : pairs) {
            if (x > j) --x;
            if (x >= k) --x;  // k already shifted down by the j removal
            if (y > j) --y;
            if (y >= k) --y;
        }
    }
    return big;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    Tensor da = a.densify(), db = b.densify();
    double worst = 0.0;
    for (std::size_t i = 0; i < da.values().size(); ++i)
        worst = std::max(worst, std::abs(da.values()[i] - db.values()[i]));
    return worst;
}

}  // namespace tprtest

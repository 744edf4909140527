#pragma once
// Simplified engines that trade the order-4 knowledge tensor for plain
// matrix algebra:
//
//   MatrixMemory - one d x d matrix per timestep holding the superposition
//                  of co-location pairs x y^T (the predicate and time modes
//                  are implicit); transitive inference is matrix product.
//   Combiner     - three-place binding by d x 2d role maps: combine(g, k) =
//                  R0 g + R1 k, inverted exactly on the entity subspace by
//                  the dual maps.
//   PathModel    - locations as vectors and directions as nonsingular
//                  matrices with S = N^-1, W = E^-1; a stated relation is
//                  encoded by the identity x = D y rather than a stored
//                  fact, and a path is valid iff its matrix product maps
//                  the start location onto the goal.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpr/direction.hpp"
#include "tpr/inference.hpp"
#include "tpr/symbol_space.hpp"
#include "tpr/tensor.hpp"

namespace tpr {

class model_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Transitive inference on timestamp-sliced memories: plain matrix product.
inline Tensor simplified_transitive(const Tensor& x, const Tensor& y) {
    if (x.order() != 2 || y.order() != 2)
        throw tensor_error("simplified_transitive: operands must be order-2");
    return inner(x, y, {{1, 0}});
}

namespace detail {

inline std::vector<std::vector<double>> random_orthogonal_columns(GaussianStream& g,
                                                                  std::size_t d,
                                                                  std::size_t count) {
    std::vector<std::vector<double>> cols;
    cols.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> v;
        do {
            v = g.vec(d);
            reorthogonalize(v, cols);
        } while (norm_vec(v) < 1e-8);
        normalize(v);
        cols.push_back(std::move(v));
    }
    return cols;
}

inline Tensor matrix_from_pairs(
    std::size_t d, const std::vector<std::pair<const std::vector<double>*,
                                               const std::vector<double>*>>& pairs) {
    std::vector<double> vals(d * d, 0.0);
    for (const auto& [out, in] : pairs)
        for (std::size_t r = 0; r < d; ++r) {
            if ((*out)[r] == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c) vals[r * d + c] += (*out)[r] * (*in)[c];
        }
    return Tensor::dense({d, d}, std::move(vals));
}

inline std::vector<double> mat_vec(const Tensor& m, const std::vector<double>& v) {
    return inner(m, Tensor::from_vector(v), {{1, 0}}).to_vector();
}

}  // namespace detail

struct TwoPlaceFact {
    std::string x, y;
    int sign = +1;
};
using TwoPlaceStory = std::vector<std::vector<TwoPlaceFact>>;

/// Queue-of-matrices memory for uni-relational stories. Mirrors the full
/// engine's reasoning loop exactly (copy-forward persistence, signed fact
/// addition, deduplicated transitive closure), so slot i stays equal to the
/// full tensor's (predicate, time-i) slice.
class MatrixMemory {
public:
    MatrixMemory(std::shared_ptr<const SymbolSpace> space, const AxiomConfig& cfg = {})
        : space_(std::move(space)), cfg_(cfg) {}

    static MatrixMemory run_story(std::shared_ptr<const SymbolSpace> space,
                                  const TwoPlaceStory& story, const AxiomConfig& cfg = {}) {
        MatrixMemory mm(std::move(space), cfg);
        for (const auto& sentence : story) mm.step(sentence);
        return mm;
    }

    /// Appends the next timestep's slot: previous facts persist, the
    /// sentence facts land signed, then the slot closes transitively.
    void step(const std::vector<TwoPlaceFact>& facts) {
        const std::size_t d = space_->d();
        const bool persists = cfg_.persistent_preds.count("@") != 0;
        Tensor slot = (!slots_.empty() && persists) ? slots_.back() : Tensor::dense_zeros({d, d});
        for (const auto& f : facts)
            slot += static_cast<double>(f.sign) *
                    outer(space_->tensor(f.x), space_->tensor(f.y));
        if (cfg_.transitive_preds.count("@") != 0) close(slot, cfg_.max_fixpoint_iters);
        slots_.push_back(std::move(slot));
    }

    std::size_t slots() const { return slots_.size(); }
    const Tensor& slot(std::size_t i) const { return slots_.at(i - 1); }  // 1-based

    double truth(const std::string& x, const std::string& y, std::size_t i) const {
        if (i == 0 || i > slots_.size()) return 0.0;
        return probe(slot(i), space_->index(x), space_->index(y));
    }

    const SymbolSpace& space() const { return *space_; }

private:
    double probe(const Tensor& m, std::size_t xi, std::size_t yi) const {
        Tensor col = inner(m, Tensor::from_vector(space_->dual(yi)), {{1, 0}});
        return Tensor::dot_vec(space_->dual(xi), col.to_vector());
    }

    void close(Tensor& slot, std::size_t max_iters) {
        for (std::size_t iter = 0; iter < max_iters; ++iter) {
            Tensor composed = simplified_transitive(slot, slot);
            bool added = false;
            for (std::size_t xi = 0; xi < space_->size(); ++xi)
                for (std::size_t zi = 0; zi < space_->size(); ++zi) {
                    if (probe(composed, xi, zi) <= 0.5) continue;
                    if (probe(slot, xi, zi) >= 0.5) continue;
                    slot += outer(Tensor::from_vector(space_->vec(xi)),
                                  Tensor::from_vector(space_->vec(zi)));
                    added = true;
                }
            if (!added) return;
        }
    }

    std::shared_ptr<const SymbolSpace> space_;
    AxiomConfig cfg_;
    std::vector<Tensor> slots_;
};

/// Three-place binding by contracted roles. Built from one random
/// orthogonal d x d matrix: the first m = d/2 columns span range(R0), the
/// second m columns span range(R1), guaranteeing the two images of the
/// entity subspace stay linearly independent.
class Combiner {
public:
    static Combiner build(std::shared_ptr<const SymbolSpace> space,
                          const std::vector<std::string>& entity_names, std::uint64_t seed) {
        Combiner c;
        c.space_ = std::move(space);
        const std::size_t d = c.space_->d();
        if (d % 2 != 0) throw model_error("combiner needs an even dimension");
        const std::size_t m = d / 2;
        if (entity_names.empty() || entity_names.size() > m)
            throw model_error("combiner needs 1 <= entities <= d/2");
        c.entities_ = entity_names;
        detail::GaussianStream g(seed);
        auto q = detail::random_orthogonal_columns(g, d, d);

        std::vector<std::pair<const std::vector<double>*, const std::vector<double>*>> r0, r1,
            r0d, r1d;
        for (std::size_t l = 0; l < entity_names.size(); ++l) {
            const auto& evec = c.space_->vec(entity_names[l]);
            const auto& edual = c.space_->dual(entity_names[l]);
            r0.push_back({&q[l], &edual});
            r1.push_back({&q[m + l], &edual});
            r0d.push_back({&evec, &q[l]});
            r1d.push_back({&evec, &q[m + l]});
        }
        c.r0_ = detail::matrix_from_pairs(d, r0);
        c.r1_ = detail::matrix_from_pairs(d, r1);
        c.r0_dual_ = detail::matrix_from_pairs(d, r0d);
        c.r1_dual_ = detail::matrix_from_pairs(d, r1d);

        // generic-case assertion: the union of the two role images of the
        // entity basis must be linearly independent
        std::vector<const std::vector<double>*> image;
        for (std::size_t l = 0; l < entity_names.size(); ++l) image.push_back(&q[l]);
        for (std::size_t l = 0; l < entity_names.size(); ++l) image.push_back(&q[m + l]);
        std::vector<std::vector<double>> gram(image.size(), std::vector<double>(image.size()));
        for (std::size_t i = 0; i < image.size(); ++i)
            for (std::size_t j = 0; j < image.size(); ++j)
                gram[i][j] = Tensor::dot_vec(*image[i], *image[j]);
        if (!detail::invert_matrix(gram))
            throw model_error("combiner role images are degenerate");
        return c;
    }

    std::vector<double> combine(const std::vector<double>& g, const std::vector<double>& k) const {
        auto a = detail::mat_vec(r0_, g);
        auto b = detail::mat_vec(r1_, k);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    }

    std::pair<std::vector<double>, std::vector<double>> split(const std::vector<double>& v) const {
        return {detail::mat_vec(r0_dual_, v), detail::mat_vec(r1_dual_, v)};
    }

    /// actor (x) (g o k): the contracted-TPR encoding of "actor moved to g
    /// from k" as a d x d matrix.
    Tensor bind_actor(const std::vector<double>& actor, const std::vector<double>& g,
                      const std::vector<double>& k) const {
        return outer(Tensor::from_vector(actor), Tensor::from_vector(combine(g, k)));
    }

    /// Left-multiplying by a probe actor recovers (a . m)(g o k).
    std::vector<double> unbind_actor(const Tensor& bound, const std::vector<double>& actor) const {
        return inner(Tensor::from_vector(actor), bound, {{0, 0}}).to_vector();
    }

    const Tensor& r0() const { return r0_; }
    const Tensor& r1() const { return r1_; }
    const Tensor& r0_dual() const { return r0_dual_; }
    const Tensor& r1_dual() const { return r1_dual_; }
    const SymbolSpace& space() const { return *space_; }

private:
    std::shared_ptr<const SymbolSpace> space_;
    std::vector<std::string> entities_;
    Tensor r0_, r1_, r0_dual_, r1_dual_;
};

/// Vectorial model of the path axioms. Directions are seeded random
/// orthogonal matrices (exactly invertible by transpose); locations are
/// placed by propagating the stated relations from a random root per
/// connected component.
class PathModel {
public:
    struct Check {
        bool valid;
        double residual;
    };

    static PathModel build(const std::vector<DirectionFact>& facts, std::size_t dim,
                           std::uint64_t seed) {
        PathModel pm;
        pm.facts_ = facts;
        pm.d_ = dim;
        detail::GaussianStream g(seed);
        auto n_cols = detail::random_orthogonal_columns(g, dim, dim);
        auto e_cols = detail::random_orthogonal_columns(g, dim, dim);
        auto to_matrix = [&](const std::vector<std::vector<double>>& cols) {
            std::vector<double> vals(dim * dim);
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t c = 0; c < dim; ++c) vals[r * dim + c] = cols[c][r];
            return Tensor::dense({dim, dim}, std::move(vals));
        };
        std::vector<std::size_t> transpose{1, 0};
        pm.mats_[idx(Direction::north)] = to_matrix(n_cols);
        pm.mats_[idx(Direction::east)] = to_matrix(e_cols);
        pm.mats_[idx(Direction::south)] = pm.mats_[idx(Direction::north)].permuted(transpose);
        pm.mats_[idx(Direction::west)] = pm.mats_[idx(Direction::east)].permuted(transpose);

        // locations in first-appearance order
        std::vector<std::string> order;
        for (const auto& f : facts)
            for (const auto& name : {f.x, f.y})
                if (!pm.locs_.count(name)) {
                    pm.locs_[name] = {};
                    order.push_back(name);
                }
        if (2 * order.size() > dim)
            throw model_error("dimension too small: need 2 * locations <= d");

        std::set<std::string> placed;
        for (const auto& root : order) {
            if (placed.count(root)) continue;
            std::vector<double> rv = g.vec(dim);
            detail::normalize(rv);
            pm.locs_[root] = std::move(rv);
            placed.insert(root);
            // propagate across the component until stable
            bool changed = true;
            while (changed) {
                changed = false;
                for (const auto& f : facts) {
                    bool have_x = placed.count(f.x), have_y = placed.count(f.y);
                    if (have_x && have_y) {
                        auto expect = detail::mat_vec(pm.matrix(f.dir), pm.locs_[f.y]);
                        double err = 0.0;
                        for (std::size_t c = 0; c < dim; ++c)
                            err += (expect[c] - pm.locs_[f.x][c]) * (expect[c] - pm.locs_[f.x][c]);
                        if (std::sqrt(err) > 1e-6)
                            throw model_error("inconsistent facts: " + f.x + " cannot be " +
                                              std::string(1, direction_char(f.dir)) + " of " +
                                              f.y);
                    } else if (have_y) {
                        pm.locs_[f.x] = detail::mat_vec(pm.matrix(f.dir), pm.locs_[f.y]);
                        placed.insert(f.x);
                        changed = true;
                    } else if (have_x) {
                        pm.locs_[f.y] = detail::mat_vec(pm.matrix(direction_inverse(f.dir)),
                                                        pm.locs_[f.x]);
                        placed.insert(f.y);
                        changed = true;
                    }
                }
            }
        }

        // range-independence of the direction images over the placed set
        if (!order.empty()) {
            std::vector<std::vector<double>> image;
            for (const auto& name : order) {
                image.push_back(detail::mat_vec(pm.matrix(Direction::north), pm.locs_[name]));
                image.push_back(detail::mat_vec(pm.matrix(Direction::east), pm.locs_[name]));
            }
            std::vector<std::vector<double>> gram(image.size(),
                                                  std::vector<double>(image.size()));
            for (std::size_t i = 0; i < image.size(); ++i)
                for (std::size_t j = 0; j < image.size(); ++j)
                    gram[i][j] = Tensor::dot_vec(image[i], image[j]);
            if (!detail::invert_matrix(gram))
                throw model_error("direction images of the locations are degenerate");
        }
        return pm;
    }

    bool has_location(const std::string& name) const { return locs_.count(name) != 0; }

    const std::vector<double>& location(const std::string& name) const {
        auto it = locs_.find(name);
        if (it == locs_.end()) throw model_error("unknown location: " + name);
        return it->second;
    }

    const Tensor& matrix(Direction d) const { return mats_[idx(d)]; }
    const std::vector<DirectionFact>& facts() const { return facts_; }

    /// Applies the path's direction matrices in travel order (path[0]
    /// first) to `from` and measures the residual against `to`.
    Check test_path(const Path& path, const std::string& from, const std::string& to) const {
        std::vector<double> w = location(from);
        for (Direction d : path) w = detail::mat_vec(matrix(d), w);
        const auto& goal = location(to);
        double err = 0.0;
        for (std::size_t c = 0; c < d_; ++c) err += (goal[c] - w[c]) * (goal[c] - w[c]);
        err = std::sqrt(err);
        return {err < 1e-6, err};
    }

    /// All valid paths up to max_len, shortest first, ties enumerated in
    /// n < s < e < w order. The empty path is reported for from == to.
    std::vector<Path> find_paths(const std::string& from, const std::string& to,
                                 std::size_t max_len = 2) const {
        std::vector<Path> out;
        std::vector<Path> layer{{}};
        for (std::size_t len = 0; len <= max_len; ++len) {
            for (const auto& p : layer)
                if (test_path(p, from, to).valid) out.push_back(p);
            if (len == max_len) break;
            std::vector<Path> next_layer;
            next_layer.reserve(layer.size() * 4);
            for (const auto& p : layer)
                for (Direction d : kDirections) {
                    Path np = p;
                    np.push_back(d);
                    next_layer.push_back(std::move(np));
                }
            layer = std::move(next_layer);
        }
        return out;
    }

private:
    static std::size_t idx(Direction d) { return static_cast<std::size_t>(d); }

    std::vector<DirectionFact> facts_;
    std::size_t d_ = 0;
    std::map<std::string, std::vector<double>> locs_;
    Tensor mats_[4];
};

}  // namespace tpr

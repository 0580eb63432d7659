#include "sparsegal/lattice.hpp"

#include "sparsegal/check.hpp"

namespace sparsegal {

Sublattice::Sublattice(int ambient, IntMatrix gens) : ambient_(ambient), gens_(std::move(gens)) {
    require(gens_.rows() == ambient_ || gens_.cols() == 0, "sublattice generators have wrong ambient rank");
    if (gens_.cols() == 0) gens_ = IntMatrix(ambient_, 0);
}

Sublattice Sublattice::from_vectors(int ambient, const std::vector<std::vector<Int>>& vs) {
    if (vs.empty()) return zero(ambient);
    return Sublattice(ambient, IntMatrix::from_columns(vs));
}

const SmithDecomposition& Sublattice::smith() const {
    if (!smith_) smith_ = smith_normal_form(gens_);
    return *smith_;
}

const std::vector<Int>& Sublattice::invariants() const {
    if (!invariants_) {
        std::vector<Int> inv;
        for (const Int& x : smith().diagonal())
            if (x != 0) inv.push_back(x);
        invariants_ = std::move(inv);
    }
    return *invariants_;
}

IntMatrix Sublattice::basis() const {
    const SmithDecomposition& d = smith();
    const int r = rank();
    IntMatrix b(ambient_, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < ambient_; ++i) b.at(i, j) = d.u_inv.at(i, j) * d.s.at(j, j);
    return b;
}

bool Sublattice::contains(const std::vector<Int>& v) const {
    require(static_cast<int>(v.size()) == ambient_, "vector has wrong ambient rank");
    return solve_exact(gens_, v).has_value();
}

bool Sublattice::is_full() const {
    if (rank() != ambient_) return false;
    for (const Int& s : invariants())
        if (s != 1) return false;
    return true;
}

Index Sublattice::index() const {
    if (rank() < ambient_) return Index::infinite();
    Index ix;
    for (const Int& s : invariants()) ix.value *= s;
    return ix;
}

Sublattice Sublattice::saturation() const {
    const SmithDecomposition& d = smith();
    const int r = rank();
    IntMatrix b(ambient_, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < ambient_; ++i) b.at(i, j) = d.u_inv.at(i, j);
    return Sublattice(ambient_, b);
}

Index sublattice_index(const Sublattice& l) { return l.index(); }

Sublattice saturation(const Sublattice& l) { return l.saturation(); }

bool generates_with(const std::vector<std::vector<Int>>& vectors, const Sublattice& l) {
    IntMatrix vs = vectors.empty() ? IntMatrix(l.ambient(), 0) : IntMatrix::from_columns(vectors);
    return Sublattice(l.ambient(), vs.hstack(l.gens())).is_full();
}

bool surjects_onto(const IntMatrix& gens, const AbelianPresentation& p) {
    require(gens.cols() == 0 || gens.rows() == p.generator_count, "generator images have wrong rank");
    IntMatrix g = gens.rows() == 0 ? IntMatrix(p.generator_count, 0) : gens;
    IntMatrix stacked = g.hstack(p.relations);
    std::vector<Int> inv = invariant_factors(stacked);
    if (static_cast<int>(inv.size()) != p.generator_count) return false;
    for (const Int& s : inv)
        if (s != 1) return false;
    return true;
}

bool inductive_connectivity(const IntMatrix& cover_image, const IntMatrix& subset_image,
                            const AbelianPresentation& ambient) {
    IntMatrix c = cover_image.rows() == 0 ? IntMatrix(ambient.generator_count, 0) : cover_image;
    IntMatrix s = subset_image.rows() == 0 ? IntMatrix(ambient.generator_count, 0) : subset_image;
    return surjects_onto(c.hstack(s), ambient);
}

IntMatrix quotient_projection(const Sublattice& saturated) {
    for (const Int& s : saturated.invariants())
        require(s == 1, "quotient projection needs a saturated sublattice");
    SmithDecomposition d = smith_normal_form(saturated.gens());
    const int n = saturated.ambient();
    const int r = saturated.rank();
    IntMatrix proj(n - r, n);
    for (int i = r; i < n; ++i)
        for (int j = 0; j < n; ++j) proj.at(i - r, j) = d.u.at(i, j);
    return proj;
}

}  // namespace sparsegal

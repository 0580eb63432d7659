#pragma once

#include <optional>
#include <vector>

#include "sparsegal/intmatrix.hpp"

namespace sparsegal {

// Index of a sublattice in its ambient lattice.
struct Index {
    bool finite = true;
    Int value = 1;  // meaningful only when finite

    static Index infinite() { return Index{false, 0}; }
    bool operator==(const Index&) const = default;
};

// Sublattice of Z^n given by a generator matrix (one generator per column).
class Sublattice {
public:
    Sublattice() : ambient_(0), gens_(0, 0) {}
    Sublattice(int ambient, IntMatrix gens);

    static Sublattice zero(int ambient) { return Sublattice(ambient, IntMatrix(ambient, 0)); }
    static Sublattice full(int ambient) { return Sublattice(ambient, IntMatrix::identity(ambient)); }
    static Sublattice from_vectors(int ambient, const std::vector<std::vector<Int>>& vs);

    int ambient() const { return ambient_; }
    const IntMatrix& gens() const { return gens_; }

    // Invariant factors of the generator matrix (the nonzero Smith diagonal).
    const std::vector<Int>& invariants() const;
    int rank() const { return static_cast<int>(invariants().size()); }

    // Canonical basis: columns u_inv[:,i] * s_i from the Smith decomposition
    // of the generator matrix; deterministic because the pivot rule is.
    IntMatrix basis() const;

    bool contains(const std::vector<Int>& v) const;
    bool is_full() const;

    Index index() const;
    Sublattice saturation() const;

private:
    int ambient_;
    IntMatrix gens_;
    mutable std::optional<std::vector<Int>> invariants_;
    mutable std::optional<SmithDecomposition> smith_;

    const SmithDecomposition& smith() const;
};

Index sublattice_index(const Sublattice& l);
Sublattice saturation(const Sublattice& l);

// Do the vectors together with l generate the full ambient lattice?
bool generates_with(const std::vector<std::vector<Int>>& vectors, const Sublattice& l);

// Finitely generated abelian group Z^k / (column span of relations).
struct AbelianPresentation {
    int generator_count = 0;
    IntMatrix relations;  // k x r, one relation per column

    static AbelianPresentation free(int k) { return {k, IntMatrix(k, 0)}; }
};

// Do the images of the given columns generate the presented group?
bool surjects_onto(const IntMatrix& gens, const AbelianPresentation& p);

// Connectivity test for an induced cover: the preimage of a path-connected
// subset stays path-connected iff the pushed-forward cover classes together
// with the subset classes generate the target group.
bool inductive_connectivity(const IntMatrix& cover_image, const IntMatrix& subset_image,
                            const AbelianPresentation& ambient);

// Projection Z^n -> Z^(n-r) with kernel exactly the (saturated) sublattice.
// Rows r..n-1 of the Smith left transform of the basis.
IntMatrix quotient_projection(const Sublattice& saturated);

}  // namespace sparsegal

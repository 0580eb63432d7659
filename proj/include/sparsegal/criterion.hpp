#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsegal/tuples.hpp"

namespace sparsegal {

// Size data of the wreath product that bounds the Galois group of a system
// supported at a tuple: deck group D = Z^n / (dual image of the embedding),
// block count d, and the order |D|^d * d! of the full wreath product D wr S_d.
struct GroupDescriptor {
    std::vector<Int> abelian_invariants;  // cyclic decomposition of the deck group
    Int deck_order = 1;                   // |D|
    Int block_count = 1;                  // d, the root count of the reduced system
    Int root_count = 1;                   // deck_order * block_count roots in all
    Int order = 1;                        // deck_order^d * d!

    bool operator==(const GroupDescriptor&) const = default;
};

enum class VerdictKind { ExpectedWreath, StrictlySmaller, Inconclusive };

// Which sufficient test settled an ExpectedWreath verdict.
enum class FiredCondition {
    None,
    EdgeVectors,       // scaled outer normals of the full-tuple facet data generate
    SimplexEmbedding,  // every reduced set holds the standard simplex vertices
    CycleVectors,      // explicit symmetric closure of the resultant cycle vectors
};

// Certificate that the group is strictly smaller than the wreath product:
// a monomial direction b and a prime p > 1 dividing d_g * (g . b) for every
// essential covector g of the reduced tuple and l . b for the whole kernel
// sublattice, so every product of roots along a loop is a perfect p-th power.
struct Witness {
    std::vector<Int> b;
    Int p = 0;
};

struct Verdict {
    VerdictKind kind = VerdictKind::Inconclusive;
    GroupDescriptor group;
    FiredCondition fired = FiredCondition::None;
    std::optional<Witness> witness;  // present iff StrictlySmaller
    // Present iff Inconclusive: the sublattice certainly reached by monodromy
    // (proven generators plus the kernel sublattice) and the necessary-condition
    // sublattice that is full, whose gap the combinatorics cannot close.
    std::optional<Sublattice> proven;
    std::optional<Sublattice> necessary;
    std::string note;
};

// Wreath-product size data for an arbitrary full-rank tuple.
GroupDescriptor expected_group(const SupportTuple& t);

// Decide whether the Galois group of the system supported at t equals the
// expected wreath product.  Requires a normalized, irreducible tuple of
// dimension at most 3 whose sets span a full-rank lattice.
Verdict criterion(const SupportTuple& t);

// Exact group for one equation in one variable: necklaces of length m = gcd
// of the nonzero exponents, permuted freely.  Always the full wreath product.
GroupDescriptor univariate_group(const std::vector<Point>& a_set);

// A homogeneous element of H^(+d): all nonzero entries equal `value`,
// `support_size` of them, the rest zero.
struct HomogeneousGenerator {
    std::vector<Int> value;
    int support_size = 0;
    bool has_zero_entry = false;
};

// Raised when neither half of the homogeneous generation test applies and the
// caller must fall back to explicit vector accumulation.
struct UndecidedError : std::runtime_error {
    explicit UndecidedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Does the symmetric-group orbit of the given homogeneous elements, together
// with the d-fold copy of l, generate the d-fold copy of Z^h_rank?  Decided
// by the entry sums alone: if the sums fail to generate Z^h_rank with l, the
// answer is no; if they generate and every entry value also occurs in a
// generator with a zero entry, the answer is yes; otherwise UndecidedError.
bool homogeneous_generation(int h_rank, int d, const std::vector<HomogeneousGenerator>& gens,
                            const Sublattice& l);

}  // namespace sparsegal

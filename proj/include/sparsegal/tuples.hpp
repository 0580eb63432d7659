#pragma once

#include <optional>
#include <vector>

#include "sparsegal/lattice.hpp"
#include "sparsegal/polytope.hpp"

namespace sparsegal {

// A square system's combinatorial data: n finite subsets of Z^n.
struct SupportTuple {
    int n = 0;
    std::vector<std::vector<Point>> sets;
    bool operator==(const SupportTuple&) const = default;
};

// Every set contains the origin (the normal form used throughout).
bool is_normalized(const SupportTuple& t);

// Translate each set by the negation of its lexicographically smallest point.
SupportTuple normalize(const SupportTuple& t);

// Change of coordinates onto the lattice generated by all support points.
struct ReductionData {
    Sublattice lambda;                    // full-rank lattice spanned by the points
    IntMatrix embedding;                  // basis of lambda as columns
    IntMatrix dual_embedding;             // transpose: pullback on covectors
    Int index_m = 1;                      // how many cosets the points miss
    std::vector<Int> abelian_invariants;  // cyclic factors of the coset group
    Sublattice dual_image;                // covector lattice spanned by dual_embedding
    SupportTuple reduced;                 // the tuple in lambda coordinates
};

ReductionData reduction(const SupportTuple& t);

// The points of all sets together span the whole ambient lattice.
bool is_reduced(const SupportTuple& t);

// No k < n of the sets fit, after per-set translation, in a rank <= k sublattice.
bool is_irreducible(const SupportTuple& t);

// The smallest offending index set when the tuple is reducible: k < n set
// indices whose supports are confined to a sublattice of rank at most k.
std::optional<std::vector<int>> reducible_subset(const SupportTuple& t);

// At every cone of the common normal-fan refinement, the faces of all sets
// span translates of one common subspace.  Ambient dimension <= 3.
bool is_analogous(const SupportTuple& t);

// The scaled essential covectors of the reduction, together with the pulled
// back covector lattice, span the full dual lattice.  Requires analogous.
bool is_ample(const SupportTuple& t);

struct EssentialRecord {
    Covector gamma;              // primitive outward facet normal of the total sum
    std::vector<int> k_set;      // unique minimal degenerating index set, ascending
    Sublattice l_gamma;          // lattice spanned by face differences over k_set
    Int d_prime = 1;             // index of l_gamma in its saturation
    Int d_double = 1;            // mixed volume of the residual face images
    Int d = 1;                   // d_prime * d_double
    int tuple_id = 0;            // equal face tuples (empty outside k_set) share ids
    bool fully_degenerate = false;          // k_set full and every face of full facet dimension
};

struct EssentialData {
    std::vector<EssentialRecord> records;     // ordered by gamma
    std::vector<std::vector<int>> groups;     // record indices per tuple_id
};

// All essential covectors of the tuple as given (candidates: facet normals
// of the hull of the Minkowski sum of all sets), with their multiplicities
// and the grouping into essential tuples.
EssentialData essential_vectors(const SupportTuple& t);

struct ResultantMultiplicity {
    Int d_prime, d_double, d;
};

// Multiplicities for one essential covector of the tuple as given.
ResultantMultiplicity resultant_multiplicity(const SupportTuple& t, const Covector& gamma);

}  // namespace sparsegal

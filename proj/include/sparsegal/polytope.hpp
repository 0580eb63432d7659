#pragma once

#include <vector>

#include "sparsegal/intmatrix.hpp"
#include "sparsegal/lattice.hpp"

namespace sparsegal {

using Point = std::vector<Int>;
using Covector = std::vector<Int>;

Int dot(const Covector& a, const Point& b);
Covector primitive(Covector v);

// Outward supporting hyperplane: normal . x <= offset, normal primitive.
struct Facet {
    Covector normal;
    Int offset;
    bool operator==(const Facet&) const = default;
};

struct Polytope {
    int ambient = 0;
    int affine_rank = 0;
    std::vector<Point> vertices;  // minimal generating set, lex sorted
    std::vector<Facet> facets;    // populated only when affine_rank == ambient
};

// Exact hull for ambient dimension <= 4.  Lower-dimensional hulls get their
// vertex set and rank; facet lists are only produced for full-dimensional ones.
Polytope convex_hull(const std::vector<Point>& pts);

// Subset of the points where gamma attains its maximum.
std::vector<Point> support_face(const std::vector<Point>& pts, const Covector& gamma);

// Volume normalized to the ambient lattice: n! times the Euclidean volume,
// always an integer; 0 for lower-dimensional hulls.
Int normalized_volume(const std::vector<Point>& pts);
Rat euclidean_volume(const std::vector<Point>& pts);

std::vector<Point> minkowski_sum(const std::vector<Point>& a, const std::vector<Point>& b);

// Mixed volume of n polytopes in Z^n, normalized so that n copies of the
// standard simplex give 1.  Inclusion-exclusion over Minkowski sums.
Int lattice_mixed_volume(const std::vector<std::vector<Point>>& sets);

// One primitive covector in the relative interior of every cone of the
// common refinement of the normal fans (the normal fan of the Minkowski
// sum).  Ambient dimension <= 3.
std::vector<Covector> refined_cone_representatives(const std::vector<std::vector<Point>>& sets);

// Rank of the affine span of the points.
int affine_rank_of(const std::vector<Point>& pts);

// Lattice generated by all within-set differences.
Sublattice direction_lattice(const std::vector<Point>& pts);

std::vector<Point> dedupe_points(std::vector<Point> pts);

}  // namespace sparsegal

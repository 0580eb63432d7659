#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sparsegal/criterion.hpp"
#include "sparsegal/numerics.hpp"
#include "sparsegal/tuples.hpp"

namespace sparsegal {

// A tracked loop produced a permutation or winding unlike the one its
// construction guarantees; the loop is unusable (numerics or genericity).
struct SignatureMismatch : NumericalError {
    explicit SignatureMismatch(const std::string& msg) : NumericalError(msg) {}
};

// The fiber does not decompose into deck blocks, or a group element fails to
// act blockwise; the whole run is contaminated.
struct BlockStructureViolated : NumericalError {
    explicit BlockStructureViolated(const std::string& msg) : NumericalError(msg) {}
};

// An identity-permutation loop's total winding escaped the divisibility that
// every true loop satisfies; flags a tracking error.
struct DivisibilityViolated : NumericalError {
    explicit DivisibilityViolated(const std::string& msg) : NumericalError(msg) {}
};

// Bijection of {0, ..., degree-1}; map[i] is the image of i.
struct Permutation {
    std::vector<int> map;

    static Permutation identity(int degree);
    int degree() const { return static_cast<int>(map.size()); }
    int apply(int i) const { return map[static_cast<size_t>(i)]; }
    bool is_identity() const;
    bool is_even() const;
    long order() const;
    // Cycles of length >= 2, each starting at its smallest member, sorted.
    std::vector<std::vector<int>> cycles() const;
    // (a * b)(i) = a(b(i)).
    Permutation operator*(const Permutation& other) const;
    Permutation inverse() const;
    bool operator==(const Permutation&) const = default;
};

// Permutation group with an incrementally maintained base and strong
// generating set; exact orders for degrees up to 24.
class PermutationGroup {
public:
    PermutationGroup() = default;
    explicit PermutationGroup(int degree);

    int degree() const { return degree_; }
    // Adds the element; returns whether the group grew.
    bool add(const Permutation& g);
    bool contains(const Permutation& g) const;
    Int order() const;
    // The added elements that each enlarged the group, in insertion order.
    const std::vector<Permutation>& generators() const { return generators_; }
    std::vector<int> base() const;
    std::vector<Permutation> strong_generators() const;

private:
    struct Level {
        int point = 0;
        std::vector<Permutation> gens;
        std::vector<int> orbit;                              // discovery order
        std::vector<std::optional<Permutation>> transversal;  // point -> rep
    };

    int degree_ = 0;
    std::vector<Permutation> generators_;
    std::vector<Level> chain_;

    std::pair<Permutation, size_t> strip(Permutation g, size_t from_level) const;
    void incorporate(const Permutation& g);
    void recompute_orbit(Level& level) const;
};

Int group_order(const PermutationGroup& g);

enum class LoopKind { RandomTriangle, CoefficientCircle, Trinomial, FacetResultant };

// Expected outcome of a loop whose construction pins it down: the permutation
// is the identity and exactly `count` sheets carry the winding `row` (the
// remaining sheets wind zero).
struct LoopSignature {
    std::vector<Int> row;
    int count = 0;
};

// A closed path in coefficient space: the legs concatenate, the last leg ends
// where the first began.
struct Loop {
    LoopKind kind = LoopKind::RandomTriangle;
    std::vector<CoefficientFamily> legs;
    SparseSystem base;  // legs.front().at(0)
    double eps = 0.0;
    double t0 = 0.0;
    long turns = 0;
    std::string description;
    std::optional<LoopSignature> expected;
};

// Tracked outcome of a loop on a given start fiber.
struct LoopResult {
    Permutation permutation;
    std::vector<std::vector<double>> winding;  // sheet-by-variable, real
    double max_residual = 0.0;
};

// Base -> waypoint -> waypoint -> base along straight coefficient segments.
Loop random_loop(const SparseSystem& base, std::mt19937& rng);

// One coefficient multiplied by a full turn phase, `turns` times around.
Loop coefficient_circle_loop(const SparseSystem& base, int set, int point, long turns);

// Univariate three-term family: the constant coefficient circles eps while
// x^{a_j} and the top monomial stay pinned at one.  With turns equal to a_j
// the loop fixes every root and winds the a_j small roots once each.
Loop trinomial_loop(const std::vector<Point>& a_set, int j, long turns, double eps = 1e-3);

// Bivariate family pinned near the facet-resultant divisor of the essential
// covector: the edge-restricted polynomials share a root, off-edge terms are
// damped by t0, the monomial `a` enters equation j at unit size, and one edge
// coefficient circles the divisor at radius eps.  With turns equal to the
// height h_a = gamma(B_j) - gamma(a) the loop fixes every root and exactly
// d_gamma * h_a sheets wind by gamma.
Loop facet_resultant_loop(const SupportTuple& t, const EssentialRecord& record, int j,
                          const Point& a, std::mt19937& rng, long turns, double eps = 1e-2,
                          double t0 = 1e-5);

// Tracks every sheet of the fiber around the loop, matches the ends back to
// the fiber, and checks the expected signature when the loop carries one.
LoopResult track_loop(const Loop& loop, const std::vector<Root>& fiber,
                      const TrackOptions& topts = {}, const MatchOptions& mopts = {});

// Winding of the loop concatenated order(sigma) times: every sheet closes up,
// so the totals are integers (within tol).  Concatenation of sheet i passes
// through sigma(i), sigma^2(i), ...; entries are sheet-major.
std::vector<Int> raw_identity_vector(const LoopResult& r, double tol = 1e-3);

// Partition of the fiber into deck blocks: sheets whose pushforward through
// the reduction's embedding agree within tol.  Blocks are sorted by smallest
// member.  Throws BlockStructureViolated if sizes disagree with the reduction.
std::vector<std::vector<int>> fiber_blocks(const std::vector<Root>& fiber,
                                           const ReductionData& reduction, double tol = 1e-6);

// Induced permutation of blocks; nullopt when sigma splits a block.
std::optional<Permutation> block_action(const Permutation& sigma,
                                        const std::vector<std::vector<int>>& blocks);

// Winding of the loop concatenated until its block action closes up, pushed
// through the embedding: one integer vector per block, block-major.  All
// sheets of a block must agree (within tol) after pushing.
std::vector<Int> reduced_block_vector(const LoopResult& r,
                                      const std::vector<std::vector<int>>& blocks,
                                      const ReductionData& reduction, double tol = 1e-3);

enum class LatticeStatus { Full, Undecided };

struct ExecutedLoop {
    LoopKind kind = LoopKind::RandomTriangle;
    std::string description;
    Permutation permutation;
    std::vector<std::vector<double>> winding;  // sheet-by-variable, real
};

struct MonodromyOptions {
    unsigned seed = 0;
    int budget = 400;
    int stable_window = 25;
    int base_attempts = 8;
    SolveOptions solve;
    TrackOptions track;
    MatchOptions match;
};

struct MonodromyRun {
    SupportTuple tuple;
    ReductionData reduction;
    GroupDescriptor expected;
    SparseSystem base;
    std::vector<Root> fiber;  // the ranking: sheet i is fiber[i]
    std::vector<std::vector<int>> blocks;
    std::vector<ExecutedLoop> loops;
    PermutationGroup group;
    Int order = 1;
    // Raw identity-permutation winding vectors, sheet-major in Z^(n*sheets).
    std::vector<std::vector<Int>> lattice_generators;
    // Pushforwards of block-identity loops, block-major in Z^(n*blocks).
    std::vector<std::vector<Int>> reduced_lattice_generators;
    LatticeStatus lattice_status = LatticeStatus::Undecided;
    bool budget_exhausted = false;
    int loops_attempted = 0;
    int loops_accepted = 0;
    int loops_discarded = 0;
    int signature_failures = 0;
    unsigned seed = 0;
    int stable_window = 25;
};

// Solves a random base system and reconstructs the monodromy group and the
// solution lattice from tracked loops, alternating loop kinds, until the
// group order is stable and the lattice is decided or the budget runs out.
MonodromyRun run_monodromy(const SupportTuple& t, const MonodromyOptions& options = {});

struct WreathReport {
    std::vector<std::vector<int>> blocks;
    Int deck_order = 1;
    Int block_count = 1;
    Int full_order = 1;  // deck_order^blocks * blocks!
    Int order = 1;       // the run's group order
    Int index = 1;       // full_order / order
};

// Checks that every group generator permutes the deck blocks and acts on each
// block by one fixed deck translation; reports the index of the reconstructed
// group inside the full wreath product.  Throws BlockStructureViolated.
WreathReport verify_wreath_structure(const MonodromyRun& run, const ReductionData& reduction);

struct PoissonReport {
    Int modulus = 0;  // gcd over essential covectors of d_gamma * (gamma . b)
    int loops_checked = 0;
};

// Every identity-permutation loop must have total b-winding divisible by the
// modulus determined by the essential covectors.  Throws DivisibilityViolated.
PoissonReport poisson_divisibility_check(const MonodromyRun& run, const Covector& b);

}  // namespace sparsegal

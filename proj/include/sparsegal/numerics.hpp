#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "sparsegal/check.hpp"
#include "sparsegal/tuples.hpp"

namespace sparsegal {

using Cx = std::complex<double>;

struct ZeroCoordinate : NumericalError {
    explicit ZeroCoordinate(const std::string& msg) : NumericalError(msg) {}
};
struct DegenerateLeadingCoefficient : NumericalError {
    explicit DegenerateLeadingCoefficient(const std::string& msg) : NumericalError(msg) {}
};
struct ConvergenceFailure : NumericalError {
    explicit ConvergenceFailure(const std::string& msg) : NumericalError(msg) {}
};
struct DegenerateResultant : NumericalError {
    explicit DegenerateResultant(const std::string& msg) : NumericalError(msg) {}
};
struct CountMismatch : NumericalError {
    explicit CountMismatch(const std::string& msg) : NumericalError(msg) {}
};
struct StepUnderflow : NumericalError {
    explicit StepUnderflow(const std::string& msg) : NumericalError(msg) {}
};

// A polynomial system over the torus: one coefficient per support point,
// index-aligned with the tuple's sets.  Exponents are cached as machine
// integers for evaluation.
struct SparseSystem {
    SupportTuple tuple;
    std::vector<std::vector<Cx>> coefficients;
    std::vector<std::vector<std::vector<long>>> exponents;
};

SparseSystem make_system(const SupportTuple& t, std::vector<std::vector<Cx>> coefficients);
SparseSystem random_system(const SupportTuple& t, std::mt19937& rng);

// Values of the component polynomials at a point with nonzero coordinates.
std::vector<Cx> evaluate(const SparseSystem& f, const std::vector<Cx>& x);
// Partial derivatives, row i = gradient of component i.
std::vector<std::vector<Cx>> jacobian(const SparseSystem& f, const std::vector<Cx>& x);
// Per-component sum of |coefficient| * |monomial|: the natural residual scale.
std::vector<double> residual_scale(const SparseSystem& f, const std::vector<Cx>& x);

struct Root {
    std::vector<Cx> x;
    double residual = 0.0;   // max over components of |f_i| / scale_i
    double rcond = 0.0;      // reciprocal condition estimate of the Jacobian
};

struct SolveOptions {
    double newton_tol = 1e-12;
    int max_newton = 64;
    double dedupe_tol = 1e-8;  // log-coordinate distance below which roots merge
    double zero_tol = 1e-10;   // coordinates this close to zero are rejected
    int max_iterations = 2000; // simultaneous-iteration budget per polynomial
};

// Newton iteration on the square system from the given start; empty when it
// does not converge to the requested residual.
std::optional<Root> newton_refine(const SparseSystem& f, std::vector<Cx> x,
                                  const SolveOptions& opts = {});

// All torus roots of a univariate system with nonzero constant and leading
// coefficients; exactly max-exponent many, pairwise distinct.
std::vector<Root> solve_univariate(const SparseSystem& f, const SolveOptions& opts = {});

// All torus roots of a bivariate system via a hidden-variable resultant;
// the count is checked against the lattice mixed volume.
std::vector<Root> solve_system_2d(const SparseSystem& f, const SolveOptions& opts = {});

// Dispatch on dimension (n <= 2).
std::vector<Root> solve_system(const SparseSystem& f, const SolveOptions& opts = {});

// One coefficient along a family: value and derivative in the parameter.
struct CoefficientPath {
    std::function<Cx(double)> value;
    std::function<Cx(double)> derivative;
};

// A one-parameter family of systems on a fixed support, s in [0, 1].
struct CoefficientFamily {
    SupportTuple tuple;
    std::vector<std::vector<CoefficientPath>> paths;
    std::vector<std::vector<std::vector<long>>> exponents;

    SparseSystem at(double s) const;
};

CoefficientFamily constant_family(const SparseSystem& f);
// Linear interpolation between two systems on the same support.
CoefficientFamily segment_family(const SparseSystem& from, const SparseSystem& to);
// Multiplies the chosen coefficient by exp(2 pi i turns s), the rest constant.
CoefficientFamily circle_family(const SparseSystem& base, int set, int point, int turns);

struct TrackOptions {
    double newton_tol = 1e-12;
    int max_newton = 16;
    double min_step = 1e-12;
    double initial_step = 1.0 / 16.0;
    double max_step = 1.0 / 8.0;
    bool record_trajectory = false;
};

struct TrackedPath {
    std::vector<Cx> start;
    std::vector<Cx> end;
    std::vector<double> winding;  // per-coordinate argument increment / 2 pi
    int steps = 0;
    double max_residual = 0.0;
    std::vector<std::pair<double, std::vector<Cx>>> trajectory;  // on request
};

// Continues a root of family.at(0) to family.at(1), fourth-order predictor
// plus Newton corrector, accumulating principal-branch argument increments.
TrackedPath track_path(const CoefficientFamily& family, const std::vector<Cx>& start,
                       const TrackOptions& opts = {});

// Rounded winding of a path whose accumulated turns are near-integer.
std::vector<Int> integer_winding(const TrackedPath& path, double tol = 1e-3);

// Total winding of the product of x^b over all paths of one fiber transport.
Int product_winding(const std::vector<TrackedPath>& paths, const Covector& b,
                    double tol = 1e-3);

struct MatchOptions {
    double tol = 1e-4;        // log-coordinate acceptance distance
    double gap_factor = 10.0; // second-nearest must be this many times farther
};

// Distance between torus points in log coordinates.
double log_distance(const std::vector<Cx>& x, const std::vector<Cx>& y);

// match[i] = index of the fiber root the i-th point lands on; a certified
// bijection, ambiguity is an error rather than a guess.
std::vector<int> match_to_fiber(const std::vector<Root>& fiber,
                                const std::vector<std::vector<Cx>>& points,
                                const MatchOptions& opts = {});

}  // namespace sparsegal

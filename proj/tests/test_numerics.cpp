#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "sparsegal/check.hpp"
#include "sparsegal/numerics.hpp"
#include "sparsegal/tuples.hpp"

using namespace sparsegal;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

Point pt(std::vector<long> c) {
    Point p;
    for (long x : c) p.push_back(Int(x));
    return p;
}

std::vector<Point> pts(std::vector<std::vector<long>> cs) {
    std::vector<Point> out;
    for (auto& c : cs) out.push_back(pt(c));
    return out;
}

SupportTuple tuple1(std::vector<long> exponents) {
    SupportTuple t;
    t.n = 1;
    std::vector<Point> s;
    for (long e : exponents) s.push_back(pt({e}));
    t.sets = {dedupe_points(s)};
    return t;
}

SupportTuple tuple2(std::vector<std::vector<long>> a, std::vector<std::vector<long>> b) {
    SupportTuple t;
    t.n = 2;
    t.sets = {dedupe_points(pts(a)), dedupe_points(pts(b))};
    return t;
}

std::mt19937 rng_for(unsigned seed) { return std::mt19937(4200u + seed); }

Cx unit_phase(double phi) { return {std::cos(phi), std::sin(phi)}; }

std::vector<Cx> random_point(int n, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, kTau);
    std::vector<Cx> x(static_cast<size_t>(n));
    for (Cx& v : x) v = std::exp(0.4 * gauss(rng)) * unit_phase(angle(rng));
    return x;
}

std::vector<Point> random_set(int n, int lo, int hi, int count, std::mt19937& rng) {
    std::uniform_int_distribution<int> coord(lo, hi);
    std::vector<Point> s;
    for (int k = 0; k < count; ++k) {
        std::vector<long> c(static_cast<size_t>(n));
        for (long& v : c) v = coord(rng);
        s.push_back(pt(c));
    }
    return dedupe_points(s);
}

// Independent derivative oracle: symmetric difference quotient with a real
// step, valid for holomorphic functions.
Cx fd_derivative(const SparseSystem& f, const std::vector<Cx>& x, size_t i, size_t v) {
    const double h = 1e-6 * std::max(0.1, std::abs(x[v]));
    std::vector<Cx> hi = x, lo = x;
    hi[v] += h;
    lo[v] -= h;
    return (evaluate(f, hi)[i] - evaluate(f, lo)[i]) / (2.0 * h);
}

}  // namespace

TEST_CASE("evaluation matches hand computations") {
    // x^2 + 1 at 2 and at i.
    SparseSystem f = make_system(tuple1({0, 2}), {{Cx(1.0), Cx(1.0)}});
    CHECK(std::abs(evaluate(f, {Cx(2.0)})[0] - Cx(5.0)) < 1e-12);
    CHECK(std::abs(evaluate(f, {Cx(0.0, 1.0)})[0]) < 1e-12);
    CHECK(std::abs(jacobian(f, {Cx(2.0)})[0][0] - Cx(4.0)) < 1e-12);

    // Negative exponents: x^{-1} + x at 2 -> 2.5, derivative 1 - 1/4.
    SupportTuple laurent;
    laurent.n = 1;
    laurent.sets = {pts({{-1}, {1}})};
    SparseSystem g = make_system(laurent, {{Cx(1.0), Cx(1.0)}});
    CHECK(std::abs(evaluate(g, {Cx(2.0)})[0] - Cx(2.5)) < 1e-12);
    CHECK(std::abs(jacobian(g, {Cx(2.0)})[0][0] - Cx(0.75)) < 1e-12);

    // A bivariate system and its gradient; points listed in normalized order.
    SparseSystem h = make_system(tuple2({{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}),
                                 {{Cx(3.0), Cx(2.0)}, {Cx(-1.0), Cx(1.0)}});
    const std::vector<Cx> at = {Cx(2.0), Cx(0.5)};
    CHECK(std::abs(evaluate(h, at)[0] - Cx(5.0)) < 1e-12);
    CHECK(std::abs(evaluate(h, at)[1] - Cx(1.5)) < 1e-12);
    CHECK(std::abs(jacobian(h, at)[0][0] - Cx(1.0)) < 1e-12);
    CHECK(std::abs(jacobian(h, at)[0][1] - Cx(4.0)) < 1e-12);

    CHECK_THROWS_AS((void)evaluate(f, {Cx(0.0)}), ZeroCoordinate);
    CHECK_THROWS_AS((void)jacobian(g, {Cx(0.0)}), ZeroCoordinate);
}

TEST_CASE("jacobian agrees with finite differences on random systems") {
    for (unsigned trial = 0; trial < 100; ++trial) {
        auto rng = rng_for(trial);
        const int n = 1 + static_cast<int>(trial % 2);
        SupportTuple t;
        t.n = n;
        for (int i = 0; i < n; ++i) t.sets.push_back(random_set(n, -3, 4, 4, rng));
        const SparseSystem f = random_system(t, rng);
        const std::vector<Cx> x = random_point(n, rng);
        const auto jac = jacobian(f, x);
        const auto scales = residual_scale(f, x);
        for (size_t i = 0; i < static_cast<size_t>(n); ++i)
            for (size_t v = 0; v < static_cast<size_t>(n); ++v) {
                const Cx fd = fd_derivative(f, x, i, v);
                const double denom =
                    std::max({std::abs(jac[i][v]), scales[i] / std::abs(x[v]) * 1e-4, 1e-9});
                CHECK(std::abs(fd - jac[i][v]) / denom < 1e-6);
            }
    }
}

TEST_CASE("univariate roots of pinned polynomials") {
    // x^2 + 1 -> the two imaginary units.
    auto roots = solve_univariate(make_system(tuple1({0, 2}), {{Cx(1.0), Cx(1.0)}}));
    REQUIRE(roots.size() == 2);
    for (const Root& r : roots) {
        CHECK(std::abs(std::abs(r.x[0]) - 1.0) < 1e-12);
        CHECK(std::abs(r.x[0].real()) < 1e-12);
        CHECK(r.residual < 1e-12);
    }

    // 1 + x + x^2 -> the primitive cube roots of unity.
    roots = solve_univariate(make_system(tuple1({0, 1, 2}), {{Cx(1.0), Cx(1.0), Cx(1.0)}}));
    REQUIRE(roots.size() == 2);
    for (const Root& r : roots) {
        CHECK(std::abs(std::abs(r.x[0]) - 1.0) < 1e-12);
        CHECK(std::abs(r.x[0].real() + 0.5) < 1e-12);
    }

    // Two scales: eps + x^2 + x^3 has two roots near sqrt(eps) and one near -1.
    const double eps = 1e-6;
    roots = solve_univariate(make_system(tuple1({0, 2, 3}), {{Cx(eps), Cx(1.0), Cx(1.0)}}));
    REQUIRE(roots.size() == 3);
    CHECK(std::abs(roots[0].x[0]) < 2e-3);
    CHECK(std::abs(roots[1].x[0]) < 2e-3);
    CHECK(std::abs(roots[0].x[0]) > 0.5e-3);
    CHECK(std::abs(roots[1].x[0]) > 0.5e-3);
    CHECK(std::abs(roots[2].x[0] + 1.0) < 1e-2);

    // Gaps in the support are fine; the count is the top exponent.
    auto rng = rng_for(901);
    const SparseSystem f = random_system(tuple1({0, 4, 8}), rng);
    roots = solve_univariate(f);
    CHECK(roots.size() == 8);
    for (const Root& r : roots) CHECK(r.residual < 1e-12);

    CHECK_THROWS_AS((void)solve_univariate(
                        make_system(tuple1({0, 2}), {{Cx(0.0), Cx(1.0)}})),
                    DegenerateLeadingCoefficient);
    CHECK_THROWS_AS((void)solve_univariate(
                        make_system(tuple1({0, 2}), {{Cx(1.0), Cx(0.0)}})),
                    DegenerateLeadingCoefficient);
}

TEST_CASE("bivariate solver on pinned systems") {
    // Two generic lines meet once.
    auto roots = solve_system_2d(make_system(
        tuple2({{0, 0}, {1, 0}, {0, 1}}, {{0, 0}, {1, 0}, {0, 1}}),
        {{Cx(-2.0), Cx(1.0), Cx(1.0)}, {Cx(0.0), Cx(1.0), Cx(-1.0)}}));
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0].x[0] - Cx(1.0)) < 1e-10);
    CHECK(std::abs(roots[0].x[1] - Cx(1.0)) < 1e-10);

    // Unit-square supports: 1 - xy = 0, x - y = 0 has the two torus solutions
    // (1,1) and (-1,-1).
    const SupportTuple squares = tuple2({{0, 0}, {1, 0}, {0, 1}, {1, 1}},
                                        {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    roots = solve_system_2d(make_system(
        squares, {{Cx(1.0), Cx(0.0), Cx(0.0), Cx(-1.0)}, {Cx(0.0), Cx(1.0), Cx(-1.0), Cx(0.0)}}));
    REQUIRE(roots.size() == 2);
    CHECK(std::abs(roots[0].x[0] - 1.0) < 1e-10);
    CHECK(std::abs(roots[0].x[1] - 1.0) < 1e-10);
    CHECK(std::abs(roots[1].x[0] + 1.0) < 1e-10);
    CHECK(std::abs(roots[1].x[1] + 1.0) < 1e-10);

    // Parallel segments have mixed volume zero and no isolated torus roots.
    CHECK(solve_system_2d(make_system(tuple2({{0, 0}, {1, 0}}, {{0, 0}, {1, 0}}),
                                      {{Cx(1.0), Cx(2.0)}, {Cx(2.0), Cx(1.0)}}))
              .empty());

    // Deterministic ordering: solving twice gives identical output.
    auto rng = rng_for(77);
    const SparseSystem f = random_system(squares, rng);
    const auto a = solve_system_2d(f);
    const auto b = solve_system_2d(f);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x[0] == b[i].x[0]);
        CHECK(a[i].x[1] == b[i].x[1]);
    }
}

TEST_CASE("random bivariate root counts match the mixed volume") {
    int done = 0;
    unsigned trial = 0;
    while (done < 50) {
        auto rng = rng_for(3000u + trial++);
        REQUIRE(trial < 500);
        SupportTuple t;
        t.n = 2;
        t.sets = {random_set(2, -2, 3, 4, rng), random_set(2, -2, 3, 4, rng)};
        if (t.sets[0].size() < 2 || t.sets[1].size() < 2) continue;
        const Int mv = lattice_mixed_volume(t.sets);
        if (mv < 1 || mv > 10) continue;
        const SparseSystem f = random_system(t, rng);
        const auto roots = solve_system_2d(f);
        CHECK(Int(static_cast<long>(roots.size())) == mv);
        for (const Root& r : roots) {
            CHECK(r.residual < 1e-12);
            CHECK(std::abs(r.x[0]) > 1e-10);
            CHECK(std::abs(r.x[1]) > 1e-10);
        }
        ++done;
    }
}

TEST_CASE("tracking the square-root swap loop") {
    // x^2 - e^{2 pi i s}: one turn of the constant swaps the two roots, each
    // root gaining half a turn.
    const SparseSystem base = make_system(tuple1({0, 2}), {{Cx(-1.0), Cx(1.0)}});
    const CoefficientFamily loop = circle_family(base, 0, 0, 1);
    const TrackedPath plus = track_path(loop, {Cx(1.0)});
    const TrackedPath minus = track_path(loop, {Cx(-1.0)});
    CHECK(std::abs(plus.end[0] + 1.0) < 1e-10);
    CHECK(std::abs(minus.end[0] - 1.0) < 1e-10);
    CHECK(std::abs(plus.winding[0] - 0.5) < 1e-9);
    CHECK(std::abs(minus.winding[0] - 0.5) < 1e-9);
    CHECK(plus.max_residual < 1e-11);
    CHECK_THROWS_AS((void)integer_winding(plus), NumericalError);
    CHECK(product_winding({plus, minus}, pt({1})) == 1);

    // Two turns bring each root home with winding one.
    const CoefficientFamily doubled = circle_family(base, 0, 0, 2);
    const TrackedPath whole = track_path(doubled, {Cx(1.0)});
    CHECK(std::abs(whole.end[0] - 1.0) < 1e-10);
    const auto w = integer_winding(whole);
    CHECK(w[0] == 1);
}

TEST_CASE("tracking a bivariate circle permutes the fiber consistently") {
    const SupportTuple squares = tuple2({{0, 0}, {1, 0}, {0, 1}, {1, 1}},
                                        {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    auto rng = rng_for(55);
    const SparseSystem base = random_system(squares, rng);
    const auto fiber = solve_system_2d(base);
    REQUIRE(fiber.size() == 2);
    const CoefficientFamily loop = circle_family(base, 0, 0, 1);
    std::vector<std::vector<Cx>> ends;
    std::vector<TrackedPath> paths;
    for (const Root& r : fiber) {
        paths.push_back(track_path(loop, r.x));
        ends.push_back(paths.back().end);
    }
    const std::vector<int> match = match_to_fiber(fiber, ends);
    std::vector<bool> hit(fiber.size(), false);
    for (int j : match) hit[static_cast<size_t>(j)] = true;
    CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));

    // The total winding against any covector equals the winding of the
    // product of the monomials, recomputed from the recorded trajectories.
    TrackOptions record;
    record.record_trajectory = true;
    std::vector<TrackedPath> recorded;
    for (const Root& r : fiber) recorded.push_back(track_path(loop, r.x, record));
    for (const std::vector<long>& b : {std::vector<long>{1, 0}, {0, 1}, {2, -1}}) {
        double direct = 0.0;
        for (const TrackedPath& p : recorded) {
            for (size_t k = 1; k < p.trajectory.size(); ++k) {
                Cx ratio = 1.0;
                for (size_t v = 0; v < 2; ++v)
                    ratio *= std::pow(p.trajectory[k].second[v] / p.trajectory[k - 1].second[v],
                                      Cx(static_cast<double>(b[v])));
                direct += std::arg(ratio) / kTau;
            }
        }
        const Int claimed = product_winding(recorded, pt(b));
        CHECK(std::abs(static_cast<double>(claimed.get_si()) - direct) < 1e-6);
    }
}

TEST_CASE("reversed segments cancel winding and return to the start") {
    for (unsigned trial = 0; trial < 20; ++trial) {
        auto rng = rng_for(600u + trial);
        const SupportTuple t = tuple1({0, 1, 3});
        const SparseSystem from = random_system(t, rng);
        const SparseSystem to = random_system(t, rng);
        const auto fiber = solve_univariate(from);
        REQUIRE(fiber.size() == 3);
        const CoefficientFamily fwd = segment_family(from, to);
        const CoefficientFamily bwd = segment_family(to, from);
        for (const Root& r : fiber) {
            const TrackedPath out = track_path(fwd, r.x);
            const TrackedPath back = track_path(bwd, out.end);
            CHECK(log_distance(back.end, r.x) < 1e-8);
            CHECK(std::abs(out.winding[0] + back.winding[0]) < 1e-9);
        }
    }
}

TEST_CASE("closed random loops produce certified permutations") {
    int checked = 0;
    for (unsigned trial = 0; trial < 100; ++trial) {
        auto rng = rng_for(7000u + trial);
        const bool univariate = trial % 2 == 0;
        SupportTuple t;
        if (univariate) {
            t = tuple1({0, 2, 3});
        } else {
            t = tuple2({{0, 0}, {1, 0}, {0, 1}}, {{0, 0}, {1, 1}, {1, 0}});
        }
        const SparseSystem base = random_system(t, rng);
        const auto fiber = univariate ? solve_univariate(base) : solve_system_2d(base);
        const SparseSystem w1 = random_system(t, rng);
        const SparseSystem w2 = random_system(t, rng);
        const CoefficientFamily legs[3] = {segment_family(base, w1), segment_family(w1, w2),
                                           segment_family(w2, base)};
        std::vector<std::vector<Cx>> ends;
        bool rejected = false;
        std::vector<double> total_turns;
        for (const Root& r : fiber) {
            std::vector<Cx> x = r.x;
            double turns0 = 0.0;
            try {
                for (const CoefficientFamily& leg : legs) {
                    const TrackedPath p = track_path(leg, x);
                    x = p.end;
                    turns0 += p.winding[0];
                }
            } catch (const NumericalError&) {
                rejected = true;
                break;
            }
            ends.push_back(x);
            total_turns.push_back(turns0);
        }
        if (rejected) continue;
        // The matcher certifies a bijection with a tenfold margin or throws;
        // a throw means the tracked loop is unusable and is discarded.
        std::vector<int> match;
        try {
            match = match_to_fiber(fiber, ends);
        } catch (const NumericalError&) {
            continue;
        }
        std::vector<bool> hit(fiber.size(), false);
        for (int j : match) {
            CHECK(!hit[static_cast<size_t>(j)]);
            hit[static_cast<size_t>(j)] = true;
        }
        // Fixed points of the permutation closed a loop: near-integer turns.
        for (size_t i = 0; i < match.size(); ++i)
            if (match[i] == static_cast<int>(i))
                CHECK(std::abs(total_turns[i] - std::round(total_turns[i])) < 1e-6);
        ++checked;
    }
    CHECK(checked >= 90);
}

TEST_CASE("newton refinement reports scale-aware residuals and conditioning") {
    const SparseSystem f = make_system(tuple1({0, 2}), {{Cx(-4.0), Cx(1.0)}});
    const auto r = newton_refine(f, {Cx(2.1)});
    REQUIRE(r.has_value());
    CHECK(std::abs(r->x[0] - 2.0) < 1e-12);
    CHECK(r->residual < 1e-12);
    CHECK(r->rcond == 1.0);
    // A start far outside the basin need not converge to a torus root.
    const auto miss = newton_refine(f, {Cx(1e-9)});
    if (miss.has_value()) CHECK(std::abs(miss->x[0]) > 1e-10);
}

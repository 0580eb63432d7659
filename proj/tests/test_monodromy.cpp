#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sparsegal/check.hpp"
#include "sparsegal/monodromy.hpp"

using namespace sparsegal;

namespace {

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

Permutation perm(std::vector<int> map) {
    Permutation p;
    p.map = std::move(map);
    return p;
}

// Independent oracle: closure of the generators under composition.
Int explicit_closure_order(int degree, const std::vector<Permutation>& gens) {
    std::set<std::vector<int>> seen;
    std::vector<Permutation> frontier{Permutation::identity(degree)};
    seen.insert(frontier.front().map);
    while (!frontier.empty()) {
        std::vector<Permutation> next;
        for (const Permutation& g : frontier)
            for (const Permutation& s : gens) {
                Permutation h = s * g;
                if (seen.insert(h.map).second) next.push_back(std::move(h));
            }
        frontier = std::move(next);
    }
    return Int(static_cast<long>(seen.size()));
}

Permutation random_permutation(int degree, std::mt19937& rng) {
    Permutation p = Permutation::identity(degree);
    std::shuffle(p.map.begin(), p.map.end(), rng);
    return p;
}

Int factorial(int d) {
    Int out = 1;
    for (int i = 2; i <= d; ++i) out *= i;
    return out;
}

std::vector<Int> sorted_copy(std::vector<Int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

SupportTuple checkerboard_square() {
    return tuple2({{0, 0}, {2, 0}, {0, 2}, {2, 2}, {1, 1}},
                  {{0, 0}, {2, 0}, {0, 2}, {2, 2}, {1, 1}});
}

SupportTuple diamond_pair() {
    return tuple2({{0, 0}, {1, -1}, {1, 1}, {2, 0}}, {{0, 0}, {1, -1}, {1, 1}, {2, 0}});
}

const EssentialRecord& record_for(const EssentialData& data, std::vector<long> gamma) {
    const Point g = pt(gamma);
    for (const EssentialRecord& r : data.records)
        if (r.gamma == g) return r;
    throw InternalError("no record for the requested covector");
}

}  // namespace

TEST_CASE("permutation algebra matches hand calculations") {
    const Permutation id4 = Permutation::identity(4);
    CHECK(id4.is_identity());
    CHECK(id4.order() == 1);
    CHECK(id4.is_even());
    CHECK(id4.cycles().empty());

    const Permutation three = perm({1, 2, 0, 3});
    CHECK(!three.is_identity());
    CHECK(three.apply(0) == 1);
    CHECK(three.order() == 3);
    CHECK(three.is_even());
    CHECK(three.cycles() == std::vector<std::vector<int>>{{0, 1, 2}});

    const Permutation swap01 = perm({1, 0, 2, 3});
    CHECK(!swap01.is_even());
    CHECK(swap01.order() == 2);

    // (a * b)(i) = a(b(i)): a = (0 1), b = (1 2) compose to the 3-cycle (0 1 2).
    const Permutation b = perm({0, 2, 1, 3});
    CHECK(swap01 * b == three);
    CHECK(three * three.inverse() == id4);
    CHECK(three.inverse() == perm({2, 0, 1, 3}));

    // 2-cycle with a 3-cycle: order is the least common multiple.
    const Permutation mixed = perm({3, 4, 1, 0, 2});
    CHECK(mixed.order() == 6);
    CHECK(mixed.cycles() == std::vector<std::vector<int>>{{0, 3}, {1, 4, 2}});
    CHECK(!mixed.is_even());
}

TEST_CASE("group reconstruction agrees with the explicit closure") {
    CHECK(PermutationGroup(5).order() == 1);
    CHECK(group_order(PermutationGroup(3)) == 1);

    for (int d = 3; d <= 7; ++d) {
        PermutationGroup g(d);
        Permutation cycle = Permutation::identity(d);
        std::rotate(cycle.map.begin(), cycle.map.begin() + 1, cycle.map.end());
        Permutation swap = Permutation::identity(d);
        std::swap(swap.map[0], swap.map[1]);
        CHECK(g.add(swap));
        CHECK(g.add(cycle));
        CHECK(g.order() == factorial(d));
        CHECK(g.order() == explicit_closure_order(d, g.generators()));
        CHECK(g.contains(swap * cycle));
    }

    // Cyclic group of order 6.
    {
        PermutationGroup g(6);
        g.add(perm({1, 2, 3, 4, 5, 0}));
        CHECK(g.order() == 6);
    }
    // Dihedral group of the hexagon.
    {
        PermutationGroup g(6);
        g.add(perm({1, 2, 3, 4, 5, 0}));
        g.add(perm({0, 5, 4, 3, 2, 1}));
        CHECK(g.order() == 12);
        CHECK(g.order() == explicit_closure_order(6, g.generators()));
    }
    // Alternating group on four points contains no transposition.
    {
        PermutationGroup g(4);
        g.add(perm({1, 2, 0, 3}));
        g.add(perm({0, 2, 3, 1}));
        CHECK(g.order() == 12);
        CHECK(!g.contains(perm({1, 0, 2, 3})));
        CHECK(g.contains(perm({1, 0, 3, 2})));
    }
    // The wreath product of Z/2 by the swap of two pairs has order 8.
    {
        PermutationGroup g(4);
        g.add(perm({1, 0, 2, 3}));
        g.add(perm({0, 1, 3, 2}));
        g.add(perm({2, 3, 0, 1}));
        CHECK(g.order() == 8);
        CHECK(g.order() == explicit_closure_order(4, g.generators()));
    }

    // Random two-generator subgroups of the degree-7 symmetric group.
    std::mt19937 rng(2026);
    for (int trial = 0; trial < 50; ++trial) {
        const Permutation a = random_permutation(7, rng);
        const Permutation b = random_permutation(7, rng);
        PermutationGroup g(7);
        Int before = g.order();
        for (const Permutation& x : {a, b}) {
            const bool grew = g.add(x);
            CHECK(grew == (g.order() != before));
            CHECK(g.order() >= before);
            before = g.order();
        }
        CHECK(g.order() == explicit_closure_order(7, {a, b}));
        for (const Permutation& x : g.generators()) CHECK(g.contains(x));
        for (const Permutation& x : g.strong_generators()) CHECK(g.contains(x));
        CHECK(g.contains(a * b * a.inverse()));
    }
}

TEST_CASE("tracked loops recover the pinned univariate behavior") {
    // Two pinned small roots out of three.
    {
        Loop loop = trinomial_loop(tuple1({0, 2, 3}).sets[0], 1, 2);
        REQUIRE(loop.expected.has_value());
        CHECK(loop.expected->count == 2);
        const std::vector<Root> fiber = solve_system(loop.base);
        LoopResult res;
        CHECK_NOTHROW(res = track_loop(loop, fiber));
        CHECK(res.permutation.is_identity());
        CHECK(sorted_copy(raw_identity_vector(res)) == std::vector<Int>{0, 1, 1});
    }
    // Full circle of the constant coefficient winds every root once.
    {
        Loop loop = trinomial_loop(tuple1({0, 2, 3}).sets[0], 2, 3);
        const std::vector<Root> fiber = solve_system(loop.base);
        const LoopResult res = track_loop(loop, fiber);
        const std::vector<Int> raw = raw_identity_vector(res);
        CHECK(raw == std::vector<Int>{1, 1, 1});
        Int total = 0;
        for (const Int& w : raw) total += w;
        CHECK(total == 3);
    }
    // A single turn cycles the four small roots.
    {
        Loop loop = trinomial_loop(tuple1({0, 4, 8}).sets[0], 1, 1);
        CHECK(!loop.expected.has_value());
        const std::vector<Root> fiber = solve_system(loop.base);
        const LoopResult res = track_loop(loop, fiber);
        const auto cycles = res.permutation.cycles();
        REQUIRE(cycles.size() == 1);
        CHECK(cycles[0].size() == 4);
        // The cycle lives on the four roots of smallest modulus.
        std::vector<std::pair<double, int>> by_modulus;
        for (size_t i = 0; i < fiber.size(); ++i)
            by_modulus.emplace_back(std::abs(fiber[i].x[0]), static_cast<int>(i));
        std::sort(by_modulus.begin(), by_modulus.end());
        std::vector<int> small;
        for (int i = 0; i < 4; ++i) small.push_back(by_modulus[static_cast<size_t>(i)].second);
        std::sort(small.begin(), small.end());
        std::vector<int> moved = cycles[0];
        std::sort(moved.begin(), moved.end());
        CHECK(moved == small);
        for (int i : moved) CHECK(std::abs(res.winding[static_cast<size_t>(i)][0] - 0.25) < 1e-6);
    }
    // Four turns close the cycle and wind each small root once.
    {
        Loop loop = trinomial_loop(tuple1({0, 4, 8}).sets[0], 1, 4);
        REQUIRE(loop.expected.has_value());
        const std::vector<Root> fiber = solve_system(loop.base);
        LoopResult res;
        CHECK_NOTHROW(res = track_loop(loop, fiber));
        CHECK(sorted_copy(raw_identity_vector(res)) ==
              std::vector<Int>{0, 0, 0, 0, 1, 1, 1, 1});
    }
    // A tampered signature is caught rather than reported.
    {
        Loop loop = trinomial_loop(tuple1({0, 2, 3}).sets[0], 1, 2);
        const std::vector<Root> fiber = solve_system(loop.base);
        loop.expected->count = 3;
        CHECK_THROWS_AS(track_loop(loop, fiber), SignatureMismatch);
        loop.expected->count = 2;
        loop.expected->row = {Int(2)};
        CHECK_THROWS_AS(track_loop(loop, fiber), SignatureMismatch);
    }
    // A loop that never moves is the identity with zero winding.
    {
        std::mt19937 rng(5);
        const SparseSystem base = random_system(tuple1({0, 2, 3}), rng);
        Loop still;
        still.legs = {constant_family(base)};
        still.base = base;
        const std::vector<Root> fiber = solve_system(base);
        const LoopResult res = track_loop(still, fiber);
        CHECK(res.permutation.is_identity());
        for (const auto& row : res.winding)
            for (double w : row) CHECK(std::abs(w) < 1e-9);
    }
    // Retraced segments cancel their winding exactly.
    {
        std::mt19937 rng(6);
        const SupportTuple t = tuple2({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{0, 0}, {1, 0}, {0, 1}});
        const SparseSystem base = random_system(t, rng);
        const SparseSystem waypoint = random_system(t, rng);
        Loop there_and_back;
        there_and_back.legs = {segment_family(base, waypoint), segment_family(waypoint, base)};
        there_and_back.base = base;
        const std::vector<Root> fiber = solve_system(base);
        const LoopResult res = track_loop(there_and_back, fiber);
        CHECK(res.permutation.is_identity());
        for (const auto& row : res.winding)
            for (double w : row) CHECK(std::abs(w) < 1e-6);
    }
}

TEST_CASE("facet loops pin the escape along their covector") {
    // Diamond: every edge degenerates both equations at multiplicity one.
    {
        const SupportTuple t = diamond_pair();
        const EssentialData essential = essential_vectors(t);
        const EssentialRecord& rec = record_for(essential, {1, 1});
        CHECK(rec.fully_degenerate);
        CHECK(rec.d == 1);
        CHECK(resultant_multiplicity(t, rec.gamma).d == 1);

        std::mt19937 rng(11);
        Loop loop = facet_resultant_loop(t, rec, 0, pt({0, 0}), rng, 2);
        REQUIRE(loop.expected.has_value());
        CHECK(loop.expected->count == 2);
        const std::vector<Root> fiber = solve_system(loop.base);
        REQUIRE(fiber.size() == 4);
        LoopResult res;
        CHECK_NOTHROW(res = track_loop(loop, fiber));
        int escaped = 0;
        for (const auto& row : res.winding) {
            const bool winds = std::abs(row[0] - 1.0) < 1e-3 && std::abs(row[1] - 1.0) < 1e-3;
            const bool still = std::abs(row[0]) < 1e-3 && std::abs(row[1]) < 1e-3;
            CHECK((winds || still));
            escaped += winds;
        }
        CHECK(escaped == 2);

        // One turn around the divisor: one cycle of length two, half windings.
        std::mt19937 rng2(11);
        const Loop single = facet_resultant_loop(t, rec, 0, pt({0, 0}), rng2, 1);
        CHECK(!single.expected.has_value());
        const LoopResult once = track_loop(single, fiber);
        const auto cycles = once.permutation.cycles();
        REQUIRE(cycles.size() == 1);
        CHECK(cycles[0].size() == 2);
        for (int i : cycles[0]) {
            CHECK(std::abs(once.winding[static_cast<size_t>(i)][0] - 0.5) < 1e-3);
            CHECK(std::abs(once.winding[static_cast<size_t>(i)][1] - 0.5) < 1e-3);
        }
    }
    // The interior point of the checkerboard square under the bottom edge.
    {
        const SupportTuple t = checkerboard_square();
        const EssentialData essential = essential_vectors(t);
        const EssentialRecord& rec = record_for(essential, {0, -1});
        CHECK(rec.fully_degenerate);
        CHECK(rec.d == 2);
        CHECK(resultant_multiplicity(t, rec.gamma).d == 2);

        std::mt19937 rng(13);
        Loop loop = facet_resultant_loop(t, rec, 0, pt({1, 1}), rng, 1);
        REQUIRE(loop.expected.has_value());
        CHECK(loop.expected->count == 2);
        CHECK(loop.expected->row == pt({0, -1}));
        const std::vector<Root> fiber = solve_system(loop.base);
        REQUIRE(fiber.size() == 8);
        LoopResult res;
        CHECK_NOTHROW(res = track_loop(loop, fiber));
        int escaped = 0;
        for (const auto& row : res.winding)
            escaped += std::abs(row[0]) < 1e-3 && std::abs(row[1] + 1.0) < 1e-3;
        CHECK(escaped == 2);
    }
    // Construction preconditions.
    {
        const SupportTuple t = diamond_pair();
        const EssentialData essential = essential_vectors(t);
        const EssentialRecord& rec = record_for(essential, {1, 1});
        std::mt19937 rng(1);
        CHECK_THROWS_AS(facet_resultant_loop(t, rec, 0, pt({2, 0}), rng, 2), InternalError);
        CHECK_THROWS_AS(facet_resultant_loop(t, rec, 2, pt({0, 0}), rng, 2), InternalError);
        CHECK_THROWS_AS(facet_resultant_loop(t, rec, 0, pt({5, 5}), rng, 2), InternalError);
    }
}

TEST_CASE("fibers split into deck fibers of the covering") {
    // Necklaces of length four: members share the same fourth power.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        const ReductionData red = reduction(t);
        std::mt19937 rng(3);
        const SparseSystem f = random_system(t, rng);
        const std::vector<Root> fiber = solve_system(f);
        const auto blocks = fiber_blocks(fiber, red);
        REQUIRE(blocks.size() == 2);
        for (const auto& block : blocks) {
            REQUIRE(block.size() == 4);
            CHECK(std::is_sorted(block.begin(), block.end()));
            const Cx y0 = std::pow(fiber[static_cast<size_t>(block[0])].x[0], 4);
            for (int i : block)
                CHECK(std::abs(std::pow(fiber[static_cast<size_t>(i)].x[0], 4) - y0) <
                      1e-6 * std::abs(y0));
        }
        CHECK(blocks[0].front() < blocks[1].front());
        const Cx ya = std::pow(fiber[static_cast<size_t>(blocks[0][0])].x[0], 4);
        const Cx yb = std::pow(fiber[static_cast<size_t>(blocks[1][0])].x[0], 4);
        CHECK(std::abs(ya - yb) > 1e-3 * (std::abs(ya) + std::abs(yb)));
    }
    // A reduced tuple gets singleton blocks.
    {
        const SupportTuple t = tuple1({0, 2, 3});
        std::mt19937 rng(4);
        const std::vector<Root> fiber = solve_system(random_system(t, rng));
        const auto blocks = fiber_blocks(fiber, reduction(t));
        CHECK(blocks == std::vector<std::vector<int>>{{0}, {1}, {2}});
    }
    // A fiber of the wrong cardinality cannot split.
    {
        std::mt19937 rng(5);
        const std::vector<Root> fiber = solve_system(random_system(tuple1({0, 2, 3}), rng));
        CHECK_THROWS_AS(fiber_blocks(fiber, reduction(tuple1({0, 4, 8}))),
                        BlockStructureViolated);
    }
    // Doubled squares: pairs of sign flips in both coordinates.
    {
        const SupportTuple t = tuple2({{0, 0}, {2, 0}, {0, 2}, {2, 2}},
                                      {{0, 0}, {2, 0}, {0, 2}, {2, 2}});
        const ReductionData red = reduction(t);
        CHECK(red.index_m == 4);
        std::mt19937 rng(6);
        const std::vector<Root> fiber = solve_system(random_system(t, rng));
        const auto blocks = fiber_blocks(fiber, red);
        REQUIRE(blocks.size() == 2);
        for (const auto& block : blocks) {
            REQUIRE(block.size() == 4);
            const std::vector<Cx>& x0 = fiber[static_cast<size_t>(block[0])].x;
            for (int i : block) {
                const std::vector<Cx>& xi = fiber[static_cast<size_t>(i)].x;
                CHECK(std::abs(xi[0] * xi[0] - x0[0] * x0[0]) < 1e-6 * std::abs(x0[0] * x0[0]));
                CHECK(std::abs(xi[1] * xi[1] - x0[1] * x0[1]) < 1e-6 * std::abs(x0[1] * x0[1]));
            }
        }
    }
}

TEST_CASE("block actions and winding pushforwards follow the covering") {
    const std::vector<std::vector<int>> blocks{{0, 1}, {2, 3}};
    CHECK(*block_action(perm({1, 0, 2, 3}), blocks) == Permutation::identity(2));
    CHECK(*block_action(perm({2, 3, 0, 1}), blocks) == perm({1, 0}));
    CHECK(!block_action(perm({2, 1, 0, 3}), blocks).has_value());

    const ReductionData red = reduction(tuple1({0, 2, 4}));
    REQUIRE(red.index_m == 2);
    REQUIRE(red.embedding.at(0, 0) == 2);

    // A swap inside one necklace: both members carry a half winding.
    LoopResult swap_inside;
    swap_inside.permutation = perm({1, 0, 2, 3});
    swap_inside.winding = {{0.5}, {0.5}, {1.0}, {1.0}};
    CHECK(raw_identity_vector(swap_inside) == std::vector<Int>{1, 1, 2, 2});
    CHECK(reduced_block_vector(swap_inside, blocks, red) == std::vector<Int>{1, 2});

    // Members of one necklace cannot disagree after pushing.
    LoopResult skewed = swap_inside;
    skewed.winding = {{0.5}, {0.7}, {1.0}, {1.0}};
    CHECK_THROWS_AS(reduced_block_vector(skewed, blocks, red), NumericalError);

    // A loop splitting a necklace invalidates the block structure.
    LoopResult split;
    split.permutation = perm({0, 2, 1, 3});
    split.winding = {{0.0}, {0.0}, {0.0}, {0.0}};
    CHECK_THROWS_AS(reduced_block_vector(split, blocks, red), BlockStructureViolated);

    // Identity-power windings must close up to integers.
    LoopResult open_path;
    open_path.permutation = Permutation::identity(4);
    open_path.winding = {{0.5}, {0.0}, {0.0}, {0.0}};
    CHECK_THROWS_AS(raw_identity_vector(open_path), NumericalError);
}

TEST_CASE("runs reconstruct the known groups") {
    // Necklaces of length four over a quadratic: the full wreath product.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        const MonodromyRun run = run_monodromy(t, {.seed = 1});
        CHECK(run.order == 32);
        CHECK(run.order == explicit_closure_order(8, run.group.generators()));
        REQUIRE(run.blocks.size() == 2);
        CHECK(run.blocks[0].size() == 4);
        CHECK(run.blocks[1].size() == 4);
        CHECK(run.lattice_status == LatticeStatus::Full);
        CHECK(!run.budget_exhausted);
        CHECK(run.loops_accepted > 0);
        CHECK(run.fiber.size() == 8);

        // Wreath bound assembled independently from the reduction data.
        CHECK(run.reduction.index_m == 4);
        Int bound = run.reduction.index_m * run.reduction.index_m * factorial(2);
        CHECK(run.order == bound);
        CHECK(bound % run.order == 0);

        // Every solution-lattice generator came from an identity-power loop.
        CHECK(!run.lattice_generators.empty());
        for (const auto& v : run.lattice_generators) CHECK(v.size() == 8);
        for (const auto& v : run.reduced_lattice_generators) CHECK(v.size() == 2);
    }
    // The reduced trinomial gives the symmetric group on three roots.
    {
        const SupportTuple t = tuple1({0, 2, 3});
        const MonodromyRun run = run_monodromy(t, {.seed = 1});
        CHECK(run.order == 6);
        CHECK(run.order == explicit_closure_order(3, run.group.generators()));
        CHECK(run.blocks == std::vector<std::vector<int>>{{0}, {1}, {2}});
        CHECK(run.lattice_status == LatticeStatus::Full);
        CHECK(!run.budget_exhausted);
    }
    // Fixed seeds resolve to identical runs.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        const MonodromyRun a = run_monodromy(t, {.seed = 42});
        const MonodromyRun b = run_monodromy(t, {.seed = 42});
        CHECK(a.order == b.order);
        CHECK(a.loops_attempted == b.loops_attempted);
        CHECK(a.lattice_generators == b.lattice_generators);
        REQUIRE(!a.loops.empty());
        CHECK(a.loops.front().permutation == b.loops.front().permutation);
        CHECK(a.loops.front().description == b.loops.front().description);
    }
    // A tiny budget is exhausted and flagged, never thrown.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        MonodromyOptions options;
        options.seed = 7;
        options.budget = 3;
        const MonodromyRun run = run_monodromy(t, options);
        CHECK(run.budget_exhausted);
        CHECK(run.loops_attempted == 3);
    }
    // Group growth is monotone under replay of the recorded loops.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        const MonodromyRun run = run_monodromy(t, {.seed = 9});
        PermutationGroup replay(8);
        Int last = replay.order();
        for (const ExecutedLoop& loop : run.loops) {
            replay.add(loop.permutation);
            CHECK(replay.order() >= last);
            last = replay.order();
        }
        CHECK(replay.order() == run.order);
    }
    // Input validation.
    {
        SupportTuple bad;
        bad.n = 3;
        bad.sets = {pts({{0, 0, 0}}), pts({{0, 0, 0}}), pts({{0, 0, 0}})};
        CHECK_THROWS_AS(run_monodromy(bad), InputError);
        SupportTuple shifted = tuple1({1, 3});
        CHECK_THROWS_AS(run_monodromy(shifted), InputError);
    }
}

TEST_CASE("wreath reports certify the block structure") {
    const SupportTuple t = tuple1({0, 4, 8});
    const MonodromyRun run = run_monodromy(t, {.seed = 1});
    const WreathReport report = verify_wreath_structure(run, run.reduction);
    CHECK(report.deck_order == 4);
    CHECK(report.block_count == 2);
    CHECK(report.full_order == 32);
    CHECK(report.order == 32);
    CHECK(report.index == 1);
    CHECK(report.blocks == run.blocks);

    // The reduced run has singleton blocks and the symmetric group.
    {
        const SupportTuple r = tuple1({0, 2, 3});
        const MonodromyRun reduced_run = run_monodromy(r, {.seed = 2});
        const WreathReport w = verify_wreath_structure(reduced_run, reduced_run.reduction);
        CHECK(w.deck_order == 1);
        CHECK(w.block_count == 3);
        CHECK(w.full_order == 6);
        CHECK(w.index == 1);
        for (const auto& block : w.blocks) CHECK(block.size() == 1);
    }
    // An element mixing necklaces is flagged as contamination.
    {
        MonodromyRun corrupt = run;
        corrupt.group.add(perm({4, 1, 2, 3, 0, 5, 6, 7}));
        corrupt.order = corrupt.group.order();
        CHECK_THROWS_AS(verify_wreath_structure(corrupt, corrupt.reduction),
                        BlockStructureViolated);
    }
    // A drifted root breaks the fiber partition itself.
    {
        MonodromyRun corrupt = run;
        corrupt.fiber[1].x[0] *= 1.1;
        CHECK_THROWS_AS(verify_wreath_structure(corrupt, corrupt.reduction),
                        BlockStructureViolated);
    }
}

TEST_CASE("identity loops satisfy the resultant divisibility") {
    // Necklace tuple: both outer normals carry multiplicity one.
    {
        const SupportTuple t = tuple1({0, 4, 8});
        const MonodromyRun run = run_monodromy(t, {.seed = 1});
        Int expected_modulus;
        {
            const Int left = resultant_multiplicity(t, {Int(-1)}).d * Int(-1);
            const Int right = resultant_multiplicity(t, {Int(1)}).d * Int(1);
            mpz_gcd(expected_modulus.get_mpz_t(), left.get_mpz_t(), right.get_mpz_t());
        }
        const PoissonReport one = poisson_divisibility_check(run, {Int(1)});
        CHECK(one.modulus == expected_modulus);
        CHECK(one.modulus == 1);
        CHECK(one.loops_checked > 0);

        const PoissonReport two = poisson_divisibility_check(run, {Int(2)});
        CHECK(two.modulus == 2);

        const PoissonReport zero = poisson_divisibility_check(run, {Int(0)});
        CHECK(zero.modulus == 0);
        CHECK(zero.loops_checked == one.loops_checked);
    }
    // The checkerboard square keeps its modulus-two relation on every loop.
    {
        const SupportTuple t = checkerboard_square();
        MonodromyOptions options;
        options.seed = 3;
        options.budget = 36;
        const MonodromyRun run = run_monodromy(t, options);
        Int expected_modulus = 0;
        for (const auto& gamma :
             {pt({-1, 0}), pt({1, 0}), pt({0, -1}), pt({0, 1})}) {
            const Int term = resultant_multiplicity(t, gamma).d * gamma[0];
            mpz_gcd(expected_modulus.get_mpz_t(), expected_modulus.get_mpz_t(),
                    term.get_mpz_t());
        }
        CHECK(expected_modulus == 2);
        const PoissonReport report = poisson_divisibility_check(run, {Int(1), Int(0)});
        CHECK(report.modulus == 2);
        CHECK(report.loops_checked > 0);

        // Tampered windings break either integrality or the divisibility.
        MonodromyRun corrupt = run;
        bool tampered = false;
        for (ExecutedLoop& loop : corrupt.loops) {
            if (!loop.permutation.is_identity()) continue;
            loop.winding[0][0] += 1.0;
            tampered = true;
            break;
        }
        REQUIRE(tampered);
        CHECK_THROWS_AS(poisson_divisibility_check(corrupt, {Int(1), Int(0)}),
                        DivisibilityViolated);

        MonodromyRun drifted = run;
        for (ExecutedLoop& loop : drifted.loops) {
            if (!loop.permutation.is_identity()) continue;
            loop.winding[0][0] += 0.4;
            break;
        }
        CHECK_THROWS_AS(poisson_divisibility_check(drifted, {Int(1), Int(0)}),
                        DivisibilityViolated);
    }
}

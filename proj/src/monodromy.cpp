#include "sparsegal/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>
#include <thread>

#include "sparsegal/check.hpp"

namespace sparsegal {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Circling the facet-resultant divisor clockwise makes the escaping sheets
// wind by +gamma; counterclockwise gives -gamma, as for the small roots of a
// univariate trinomial whose constant coefficient circles the origin.
constexpr double kFacetTurnSign = -1.0;

Cx unit_phase(std::mt19937& rng) {
    std::uniform_real_distribution<double> angle(0.0, kTau);
    const double phi = angle(rng);
    return Cx(std::cos(phi), std::sin(phi));
}

Cx random_scale(std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double mod = std::exp(0.3 * gauss(rng));
    return mod * unit_phase(rng);
}

std::optional<Int> round_to_int(double v, double tol) {
    if (!std::isfinite(v)) return std::nullopt;
    const double nearest = std::nearbyint(v);
    if (std::abs(v - nearest) > tol) return std::nullopt;
    return Int(static_cast<long>(nearest));
}

size_t index_of_point(const std::vector<Point>& set, const Point& p) {
    for (size_t i = 0; i < set.size(); ++i)
        if (set[i] == p) return i;
    throw InternalError("point is not in the support set");
}

std::string point_str(const Point& p) {
    std::string out = "(";
    for (size_t i = 0; i < p.size(); ++i) {
        if (i) out += ",";
        out += p[i].get_str();
    }
    return out + ")";
}

bool all_zero(const std::vector<Int>& v) {
    return std::all_of(v.begin(), v.end(), [](const Int& x) { return x == 0; });
}

long to_small(const Int& v) {
    require(v.fits_slong_p(), "value exceeds machine range");
    return v.get_si();
}

}  // namespace

Permutation Permutation::identity(int degree) {
    Permutation p;
    p.map.resize(static_cast<size_t>(degree));
    std::iota(p.map.begin(), p.map.end(), 0);
    return p;
}

bool Permutation::is_identity() const {
    for (size_t i = 0; i < map.size(); ++i)
        if (map[i] != static_cast<int>(i)) return false;
    return true;
}

bool Permutation::is_even() const {
    std::vector<char> seen(map.size(), 0);
    long swaps = 0;
    for (size_t i = 0; i < map.size(); ++i) {
        if (seen[i]) continue;
        long len = 0;
        size_t j = i;
        while (!seen[j]) {
            seen[j] = 1;
            j = static_cast<size_t>(map[j]);
            ++len;
        }
        swaps += len - 1;
    }
    return swaps % 2 == 0;
}

long Permutation::order() const {
    std::vector<char> seen(map.size(), 0);
    long result = 1;
    for (size_t i = 0; i < map.size(); ++i) {
        if (seen[i]) continue;
        long len = 0;
        size_t j = i;
        while (!seen[j]) {
            seen[j] = 1;
            j = static_cast<size_t>(map[j]);
            ++len;
        }
        result = std::lcm(result, len);
    }
    return result;
}

std::vector<std::vector<int>> Permutation::cycles() const {
    std::vector<char> seen(map.size(), 0);
    std::vector<std::vector<int>> out;
    for (size_t i = 0; i < map.size(); ++i) {
        if (seen[i]) continue;
        std::vector<int> cycle;
        size_t j = i;
        while (!seen[j]) {
            seen[j] = 1;
            cycle.push_back(static_cast<int>(j));
            j = static_cast<size_t>(map[j]);
        }
        if (cycle.size() >= 2) out.push_back(std::move(cycle));
    }
    return out;
}

Permutation Permutation::operator*(const Permutation& other) const {
    require(degree() == other.degree(), "permutation degrees differ");
    Permutation r;
    r.map.resize(map.size());
    for (size_t i = 0; i < map.size(); ++i)
        r.map[i] = map[static_cast<size_t>(other.map[i])];
    return r;
}

Permutation Permutation::inverse() const {
    Permutation r;
    r.map.resize(map.size());
    for (size_t i = 0; i < map.size(); ++i)
        r.map[static_cast<size_t>(map[i])] = static_cast<int>(i);
    return r;
}

PermutationGroup::PermutationGroup(int degree) : degree_(degree) {
    require(degree >= 0, "negative degree");
}

std::pair<Permutation, size_t> PermutationGroup::strip(Permutation g, size_t from_level) const {
    for (size_t lev = from_level; lev < chain_.size(); ++lev) {
        const Level& level = chain_[lev];
        const int image = g.apply(level.point);
        const auto& rep = level.transversal[static_cast<size_t>(image)];
        if (!rep) return {std::move(g), lev};
        g = rep->inverse() * g;
    }
    return {std::move(g), chain_.size()};
}

void PermutationGroup::recompute_orbit(Level& level) const {
    level.orbit.clear();
    level.transversal.assign(static_cast<size_t>(degree_), std::nullopt);
    level.orbit.push_back(level.point);
    level.transversal[static_cast<size_t>(level.point)] = Permutation::identity(degree_);
    for (size_t head = 0; head < level.orbit.size(); ++head) {
        const int p = level.orbit[head];
        for (const Permutation& s : level.gens) {
            const int q = s.apply(p);
            if (!level.transversal[static_cast<size_t>(q)]) {
                level.transversal[static_cast<size_t>(q)] =
                    s * *level.transversal[static_cast<size_t>(p)];
                level.orbit.push_back(q);
            }
        }
    }
}

void PermutationGroup::incorporate(const Permutation& g) {
    std::vector<Permutation> work{g};
    while (!work.empty()) {
        Permutation w = std::move(work.back());
        work.pop_back();
        auto stripped = strip(std::move(w), 0);
        Permutation& residue = stripped.first;
        const size_t lev = stripped.second;
        if (residue.is_identity()) continue;
        if (lev == chain_.size()) {
            int point = 0;
            while (residue.apply(point) == point) ++point;
            Level fresh;
            fresh.point = point;
            fresh.transversal.assign(static_cast<size_t>(degree_), std::nullopt);
            chain_.push_back(std::move(fresh));
        }
        // The residue fixes every earlier base point, so it belongs to the
        // generating set of each level down to where it landed.
        for (size_t i = 0; i <= lev; ++i) chain_[i].gens.push_back(residue);
        for (size_t i = lev + 1; i-- > 0;) {
            Level& level = chain_[i];
            recompute_orbit(level);
            for (const int p : level.orbit) {
                const Permutation& u_p = *level.transversal[static_cast<size_t>(p)];
                for (const Permutation& s : level.gens) {
                    const int q = s.apply(p);
                    Permutation schreier =
                        level.transversal[static_cast<size_t>(q)]->inverse() * (s * u_p);
                    if (!schreier.is_identity()) work.push_back(std::move(schreier));
                }
            }
        }
    }
}

bool PermutationGroup::add(const Permutation& g) {
    require(g.degree() == degree_, "permutation degree differs from the group degree");
    if (g.is_identity() || contains(g)) return false;
    generators_.push_back(g);
    incorporate(g);
    return true;
}

bool PermutationGroup::contains(const Permutation& g) const {
    require(g.degree() == degree_, "permutation degree differs from the group degree");
    auto stripped = strip(g, 0);
    return stripped.second == chain_.size() && stripped.first.is_identity();
}

Int PermutationGroup::order() const {
    Int result = 1;
    for (const Level& level : chain_) result *= static_cast<long>(level.orbit.size());
    return result;
}

std::vector<int> PermutationGroup::base() const {
    std::vector<int> out;
    out.reserve(chain_.size());
    for (const Level& level : chain_) out.push_back(level.point);
    return out;
}

std::vector<Permutation> PermutationGroup::strong_generators() const {
    if (chain_.empty()) return {};
    return chain_.front().gens;
}

Int group_order(const PermutationGroup& g) { return g.order(); }

Loop random_loop(const SparseSystem& base, std::mt19937& rng) {
    SparseSystem w1 = random_system(base.tuple, rng);
    SparseSystem w2 = random_system(base.tuple, rng);
    Loop loop;
    loop.kind = LoopKind::RandomTriangle;
    loop.legs.push_back(segment_family(base, w1));
    loop.legs.push_back(segment_family(w1, w2));
    loop.legs.push_back(segment_family(w2, base));
    loop.base = base;
    loop.description = "random triangle";
    return loop;
}

Loop coefficient_circle_loop(const SparseSystem& base, int set, int point, long turns) {
    Loop loop;
    loop.kind = LoopKind::CoefficientCircle;
    loop.legs.push_back(circle_family(base, set, point, static_cast<int>(turns)));
    loop.base = base;
    loop.turns = turns;
    loop.description = "coefficient circle set " + std::to_string(set) + " point " +
                       std::to_string(point) + " turns " + std::to_string(turns);
    return loop;
}

Loop trinomial_loop(const std::vector<Point>& a_set, int j, long turns, double eps) {
    std::vector<Point> pts = dedupe_points(a_set);
    require(!pts.empty() && pts[0].size() == 1, "trinomial loops are univariate");
    const int top = static_cast<int>(pts.size()) - 1;
    require(top >= 1, "trinomial support needs at least two exponents");
    require(pts[0][0] == 0, "trinomial support must be normalized");
    require(j >= 1 && j <= top, "pinned exponent index out of range");
    SupportTuple t;
    t.n = 1;
    t.sets = {pts};
    std::vector<std::vector<Cx>> coeffs(1, std::vector<Cx>(pts.size(), Cx(0.0)));
    coeffs[0][0] = Cx(eps, 0.0);
    coeffs[0][static_cast<size_t>(j)] += Cx(1.0, 0.0);
    coeffs[0][static_cast<size_t>(top)] += Cx(1.0, 0.0);
    SparseSystem sys = make_system(t, std::move(coeffs));
    Loop loop;
    loop.kind = LoopKind::Trinomial;
    loop.legs.push_back(circle_family(sys, 0, 0, static_cast<int>(turns)));
    loop.base = std::move(sys);
    loop.eps = eps;
    loop.turns = turns;
    const Int small = pts[static_cast<size_t>(j)][0];
    loop.description =
        "trinomial exponent " + small.get_str() + " turns " + std::to_string(turns);
    if (Int(turns) == small)
        loop.expected = LoopSignature{{Int(1)}, static_cast<int>(to_small(small))};
    return loop;
}

Loop facet_resultant_loop(const SupportTuple& t, const EssentialRecord& record, int j,
                          const Point& a, std::mt19937& rng, long turns, double eps,
                          double t0) {
    require(t.n == 2, "facet-resultant loops are bivariate");
    require(record.fully_degenerate, "covector does not degenerate both edges fully");
    require(j == 0 || j == 1, "equation index out of range");
    const Covector& gamma = record.gamma;
    const std::vector<std::vector<Point>> faces{support_face(t.sets[0], gamma),
                                               support_face(t.sets[1], gamma)};
    const std::vector<Point>& own = t.sets[static_cast<size_t>(j)];
    require(std::find(own.begin(), own.end(), a) != own.end(), "monomial outside the support");
    require(std::find(faces[static_cast<size_t>(j)].begin(), faces[static_cast<size_t>(j)].end(),
                      a) == faces[static_cast<size_t>(j)].end(),
            "monomial lies on the edge");
    const Int h_a = dot(gamma, faces[static_cast<size_t>(j)][0]) - dot(gamma, a);
    require(h_a >= 1, "monomial is not below the edge");

    // Integer coordinate along the edge: phi(u) = 1 for the edge direction u.
    const Covector u = primitive({-gamma[1], gamma[0]});
    Int c0, c1, g;
    mpz_gcdext(g.get_mpz_t(), c0.get_mpz_t(), c1.get_mpz_t(), u[0].get_mpz_t(),
               u[1].get_mpz_t());
    require(g == 1, "edge direction is not primitive");
    const auto phi = [&](const Point& p) { return Int(c0 * p[0] + c1 * p[1]); };

    std::vector<std::vector<Cx>> coeffs(2);
    coeffs[0].assign(t.sets[0].size(), Cx(0.0));
    coeffs[1].assign(t.sets[1].size(), Cx(0.0));

    // Both edge polynomials vanish at a common random point of the edge torus.
    const Cx xi = random_scale(rng);
    size_t circled = 0;
    for (int i = 0; i < 2; ++i) {
        const std::vector<Point>& face = faces[static_cast<size_t>(i)];
        require(face.size() >= 2, "edge with fewer than two points");
        Int low = phi(face[0]);
        for (const Point& p : face) low = std::min(low, phi(p));
        std::vector<long> pos(face.size());
        size_t pivot = 0, lowest = 0;
        for (size_t l = 0; l < face.size(); ++l) {
            pos[l] = to_small(phi(face[l]) - low);
            if (pos[l] > pos[pivot]) pivot = l;
            if (pos[l] < pos[lowest]) lowest = l;
        }
        for (size_t l = 0; l < face.size(); ++l) {
            if (l == pivot) continue;
            coeffs[static_cast<size_t>(i)][index_of_point(t.sets[static_cast<size_t>(i)],
                                                          face[l])] = unit_phase(rng);
        }
        Cx acc(0.0);
        for (size_t l = 0; l < face.size(); ++l) {
            if (l == pivot) continue;
            acc += coeffs[static_cast<size_t>(i)]
                         [index_of_point(t.sets[static_cast<size_t>(i)], face[l])] *
                   std::pow(xi, static_cast<int>(pos[l]));
        }
        coeffs[static_cast<size_t>(i)][index_of_point(t.sets[static_cast<size_t>(i)],
                                                      face[pivot])] =
            -acc / std::pow(xi, static_cast<int>(pos[pivot]));
        if (i == 0) circled = index_of_point(t.sets[0], face[lowest]);
    }
    // The distinguished monomial enters its equation at unit size.
    coeffs[static_cast<size_t>(j)][index_of_point(own, a)] += Cx(1.0, 0.0);
    // Generic tail on the whole support keeps the system off deeper strata.
    for (size_t i = 0; i < coeffs.size(); ++i)
        for (Cx& c : coeffs[i]) c += t0 * random_scale(rng);

    SparseSystem sys = make_system(t, std::move(coeffs));
    CoefficientFamily family = constant_family(sys);
    // Circle the lowest edge coefficient of the first equation around its
    // degenerate value; the divisor sits within O(t0) of the centre.
    const Cx centre = sys.coefficients[0][circled];
    const double omega = kFacetTurnSign * kTau * static_cast<double>(turns);
    family.paths[0][circled] = CoefficientPath{
        [centre, eps, omega](double s) { return centre + eps * std::exp(Cx(0.0, omega * s)); },
        [eps, omega](double s) {
            return eps * Cx(0.0, omega) * std::exp(Cx(0.0, omega * s));
        }};

    Loop loop;
    loop.kind = LoopKind::FacetResultant;
    loop.base = family.at(0.0);
    loop.legs.push_back(std::move(family));
    loop.eps = eps;
    loop.t0 = t0;
    loop.turns = turns;
    loop.description = "facet resultant gamma " + point_str(gamma) + " equation " +
                       std::to_string(j) + " monomial " + point_str(a) + " turns " +
                       std::to_string(turns);
    if (Int(turns) == h_a)
        loop.expected = LoopSignature{gamma, static_cast<int>(to_small(record.d * h_a))};
    return loop;
}

LoopResult track_loop(const Loop& loop, const std::vector<Root>& fiber,
                      const TrackOptions& topts, const MatchOptions& mopts) {
    require(!loop.legs.empty(), "loop without legs");
    require(!fiber.empty(), "loop tracking needs a fiber");
    const size_t n = fiber[0].x.size();
    LoopResult out;
    out.winding.assign(fiber.size(), std::vector<double>(n, 0.0));
    std::vector<std::vector<Cx>> ends;
    ends.reserve(fiber.size());
    double worst = 0.0;
    for (size_t i = 0; i < fiber.size(); ++i) {
        std::vector<Cx> x = fiber[i].x;
        for (const CoefficientFamily& leg : loop.legs) {
            TrackedPath path = track_path(leg, x, topts);
            for (size_t v = 0; v < n; ++v) out.winding[i][v] += path.winding[v];
            worst = std::max(worst, path.max_residual);
            x = std::move(path.end);
        }
        ends.push_back(std::move(x));
    }
    out.max_residual = worst;
    out.permutation.map = match_to_fiber(fiber, ends, mopts);

    if (loop.expected) {
        const LoopSignature& sig = *loop.expected;
        if (!out.permutation.is_identity())
            throw SignatureMismatch("pinned loop permuted the fiber");
        int hits = 0;
        for (const std::vector<double>& row : out.winding) {
            std::vector<Int> rounded(row.size());
            for (size_t v = 0; v < row.size(); ++v) {
                auto r = round_to_int(row[v], 1e-3);
                if (!r) throw SignatureMismatch("pinned loop winding is not integral");
                rounded[v] = *r;
            }
            if (rounded == sig.row)
                ++hits;
            else if (!all_zero(rounded))
                throw SignatureMismatch("pinned loop wound an unexpected class");
        }
        if (hits != sig.count)
            throw SignatureMismatch("pinned loop wound " + std::to_string(hits) +
                                    " sheets instead of " + std::to_string(sig.count));
    }
    return out;
}

std::vector<Int> raw_identity_vector(const LoopResult& r, double tol) {
    const int sheets = r.permutation.degree();
    require(static_cast<size_t>(sheets) == r.winding.size(), "winding row count mismatch");
    const size_t n = sheets ? r.winding[0].size() : 0;
    const long k = r.permutation.order();
    std::vector<Int> out;
    out.reserve(static_cast<size_t>(sheets) * n);
    for (int i = 0; i < sheets; ++i) {
        std::vector<double> total(n, 0.0);
        int cur = i;
        for (long l = 0; l < k; ++l) {
            for (size_t v = 0; v < n; ++v) total[v] += r.winding[static_cast<size_t>(cur)][v];
            cur = r.permutation.apply(cur);
        }
        for (size_t v = 0; v < n; ++v) {
            auto rounded = round_to_int(total[v], tol);
            if (!rounded) throw NumericalError("identity-power winding is not integral");
            out.push_back(*rounded);
        }
    }
    return out;
}

std::vector<std::vector<int>> fiber_blocks(const std::vector<Root>& fiber,
                                           const ReductionData& reduction, double tol) {
    const int count = static_cast<int>(fiber.size());
    require(count > 0, "empty fiber");
    const int n = reduction.embedding.rows();
    const int cols = reduction.embedding.cols();
    // Coordinates of each root on the reduced torus, in log form.
    std::vector<std::vector<double>> mag(static_cast<size_t>(count)),
        arg(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        mag[static_cast<size_t>(i)].resize(static_cast<size_t>(cols));
        arg[static_cast<size_t>(i)].resize(static_cast<size_t>(cols));
        for (int j = 0; j < cols; ++j) {
            double lm = 0.0, la = 0.0;
            for (int v = 0; v < n; ++v) {
                const double e = reduction.embedding.at(v, j).get_d();
                const Cx& x = fiber[static_cast<size_t>(i)].x[static_cast<size_t>(v)];
                lm += e * std::log(std::abs(x));
                la += e * std::arg(x);
            }
            mag[static_cast<size_t>(i)][static_cast<size_t>(j)] = lm;
            arg[static_cast<size_t>(i)][static_cast<size_t>(j)] = la;
        }
    }
    const auto same = [&](int i, int l) {
        for (int j = 0; j < cols; ++j) {
            const double dm = mag[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                              mag[static_cast<size_t>(l)][static_cast<size_t>(j)];
            double da = arg[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                        arg[static_cast<size_t>(l)][static_cast<size_t>(j)];
            da -= kTau * std::nearbyint(da / kTau);
            if (std::abs(dm) > tol || std::abs(da) > tol) return false;
        }
        return true;
    };
    std::vector<int> parent(static_cast<size_t>(count));
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int i) {
        while (parent[static_cast<size_t>(i)] != i) i = parent[static_cast<size_t>(i)];
        return i;
    };
    for (int i = 0; i < count; ++i)
        for (int l = i + 1; l < count; ++l)
            if (same(i, l)) parent[static_cast<size_t>(find(l))] = find(i);
    std::vector<std::vector<int>> blocks;
    std::vector<int> slot(static_cast<size_t>(count), -1);
    for (int i = 0; i < count; ++i) {
        const int root = find(i);
        if (slot[static_cast<size_t>(root)] < 0) {
            slot[static_cast<size_t>(root)] = static_cast<int>(blocks.size());
            blocks.emplace_back();
        }
        blocks[static_cast<size_t>(slot[static_cast<size_t>(root)])].push_back(i);
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  return a.front() < b.front();
              });
    const Int m = reduction.index_m;
    if (Int(count) % m != 0 || Int(static_cast<long>(blocks.size())) * m != count)
        throw BlockStructureViolated("fiber does not split into deck fibers");
    for (const std::vector<int>& block : blocks)
        if (Int(static_cast<long>(block.size())) != m)
            throw BlockStructureViolated("deck fiber of the wrong size");
    return blocks;
}

std::optional<Permutation> block_action(const Permutation& sigma,
                                        const std::vector<std::vector<int>>& blocks) {
    std::vector<int> owner(static_cast<size_t>(sigma.degree()), -1);
    for (size_t b = 0; b < blocks.size(); ++b)
        for (int member : blocks[b]) owner[static_cast<size_t>(member)] = static_cast<int>(b);
    Permutation pi;
    pi.map.assign(blocks.size(), -1);
    for (size_t b = 0; b < blocks.size(); ++b) {
        int image = -1;
        for (int member : blocks[b]) {
            const int target = owner[static_cast<size_t>(sigma.apply(member))];
            if (image < 0) image = target;
            if (target != image) return std::nullopt;
        }
        pi.map[b] = image;
    }
    std::vector<char> hit(blocks.size(), 0);
    for (int image : pi.map) {
        if (hit[static_cast<size_t>(image)]) return std::nullopt;
        hit[static_cast<size_t>(image)] = 1;
    }
    return pi;
}

std::vector<Int> reduced_block_vector(const LoopResult& r,
                                      const std::vector<std::vector<int>>& blocks,
                                      const ReductionData& reduction, double tol) {
    auto pi = block_action(r.permutation, blocks);
    if (!pi) throw BlockStructureViolated("loop does not respect the deck fibers");
    const long k = pi->order();
    const int sheets = r.permutation.degree();
    const int n = reduction.embedding.rows();
    const int cols = reduction.embedding.cols();
    // Winding of each sheet over the concatenation that closes the block action.
    std::vector<std::vector<double>> total(static_cast<size_t>(sheets),
                                           std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < sheets; ++i) {
        int cur = i;
        for (long l = 0; l < k; ++l) {
            for (int v = 0; v < n; ++v)
                total[static_cast<size_t>(i)][static_cast<size_t>(v)] +=
                    r.winding[static_cast<size_t>(cur)][static_cast<size_t>(v)];
            cur = r.permutation.apply(cur);
        }
    }
    std::vector<Int> out;
    out.reserve(blocks.size() * static_cast<size_t>(cols));
    for (const std::vector<int>& block : blocks) {
        std::optional<std::vector<Int>> agreed;
        for (int member : block) {
            std::vector<Int> pushed(static_cast<size_t>(cols));
            for (int j = 0; j < cols; ++j) {
                double value = 0.0;
                for (int v = 0; v < n; ++v)
                    value += reduction.embedding.at(v, j).get_d() *
                             total[static_cast<size_t>(member)][static_cast<size_t>(v)];
                auto rounded = round_to_int(value, tol);
                if (!rounded) throw NumericalError("pushed winding is not integral");
                pushed[static_cast<size_t>(j)] = *rounded;
            }
            if (!agreed)
                agreed = std::move(pushed);
            else if (*agreed != pushed)
                throw NumericalError("deck fiber members disagree on the pushed winding");
        }
        out.insert(out.end(), agreed->begin(), agreed->end());
    }
    return out;
}

MonodromyRun run_monodromy(const SupportTuple& t, const MonodromyOptions& options) {
    require_input(t.n == 1 || t.n == 2, "monodromy runs support one or two variables");
    require_input(is_normalized(t), "tuple must be normalized");
    for (const std::vector<Point>& set : t.sets)
        require_input(dedupe_points(set) == set, "support sets must be sorted without repeats");

    MonodromyRun run;
    run.tuple = t;
    run.seed = options.seed;
    run.stable_window = options.stable_window;
    run.reduction = reduction(t);
    run.expected = expected_group(t);
    require_input(run.expected.root_count >= 1 && run.expected.root_count <= 20,
                  "root count outside the tracked range");
    const int degree = static_cast<int>(to_small(run.expected.root_count));
    const int n = t.n;

    std::mt19937 rng(options.seed);

    // A base system whose fiber solves cleanly and splits into deck fibers.
    {
        std::string last = "no attempts made";
        bool ok = false;
        for (int attempt = 0; attempt < options.base_attempts && !ok; ++attempt) {
            SparseSystem candidate = random_system(t, rng);
            try {
                std::vector<Root> fiber = solve_system(candidate, options.solve);
                std::vector<std::vector<int>> blocks = fiber_blocks(fiber, run.reduction);
                run.base = std::move(candidate);
                run.fiber = std::move(fiber);
                run.blocks = std::move(blocks);
                ok = true;
            } catch (const NumericalError& e) {
                last = e.what();
            }
        }
        if (!ok) throw ConvergenceFailure("no usable base system: " + last);
    }
    require(static_cast<int>(run.fiber.size()) == degree, "fiber size disagrees with the bound");

    run.group = PermutationGroup(degree);

    // Decision lattice: pushed loop classes must fill the reduced winding
    // lattice modulo one copy of the pulled-back covector lattice per block.
    const int d = static_cast<int>(run.blocks.size());
    const IntMatrix& dual = run.reduction.dual_image.gens();
    IntMatrix decision_base(n * d, d * dual.cols());
    for (int b = 0; b < d; ++b)
        for (int c = 0; c < dual.cols(); ++c)
            for (int v = 0; v < n; ++v)
                decision_base.at(b * n + v, b * dual.cols() + c) = dual.at(v, c);
    std::vector<std::vector<Int>> novel;
    const auto rebuild = [&]() {
        IntMatrix gens = decision_base;
        if (!novel.empty()) gens = gens.hstack(IntMatrix::from_columns(novel));
        return Sublattice(n * d, std::move(gens));
    };
    Sublattice decided = rebuild();
    run.lattice_status = decided.is_full() ? LatticeStatus::Full : LatticeStatus::Undecided;

    // Loop recipes, cycled in a fixed order.
    struct FacetCombo {
        EssentialRecord record;
        int j;
        Point a;
        long turns;
    };
    std::vector<FacetCombo> facet_combos;
    if (n == 2) {
        const EssentialData essential = essential_vectors(t);
        for (const EssentialRecord& record : essential.records) {
            if (!record.fully_degenerate) continue;
            for (int j = 0; j < 2; ++j) {
                const std::vector<Point> face = support_face(t.sets[static_cast<size_t>(j)],
                                                             record.gamma);
                for (const Point& a : t.sets[static_cast<size_t>(j)]) {
                    if (std::find(face.begin(), face.end(), a) != face.end()) continue;
                    const Int h = dot(record.gamma, face[0]) - dot(record.gamma, a);
                    facet_combos.push_back({record, j, a, to_small(h)});
                }
            }
        }
    }
    std::vector<std::pair<int, int>> circle_combos;
    for (size_t i = 0; i < t.sets.size(); ++i)
        for (size_t p = 0; p < t.sets[i].size(); ++p)
            circle_combos.emplace_back(static_cast<int>(i), static_cast<int>(p));
    std::vector<int> trinomial_js;
    if (n == 1)
        for (size_t j = 1; j < t.sets[0].size(); ++j) trinomial_js.push_back(static_cast<int>(j));

    const auto conjugate = [&](Loop inner) {
        // A fresh waypoint keeps the transfer segments generic; the return
        // segments retrace them, so their windings cancel exactly.
        SparseSystem waypoint = random_system(t, rng);
        std::vector<CoefficientFamily> legs;
        legs.push_back(segment_family(run.base, waypoint));
        legs.push_back(segment_family(waypoint, inner.base));
        for (CoefficientFamily& leg : inner.legs) legs.push_back(std::move(leg));
        legs.push_back(segment_family(inner.base, waypoint));
        legs.push_back(segment_family(waypoint, run.base));
        inner.legs = std::move(legs);
        inner.base = run.base;
        return inner;
    };

    size_t kind_cursor = 0, circle_cursor = 0, trinomial_cursor = 0, facet_cursor = 0;
    const auto next_loop = [&]() -> Loop {
        const size_t slot = kind_cursor++ % 3;
        if (slot == 1) {
            const auto [set, point] = circle_combos[circle_cursor++ % circle_combos.size()];
            return coefficient_circle_loop(run.base, set, point, 1);
        }
        if (slot == 2) {
            if (n == 1) {
                const int j = trinomial_js[trinomial_cursor++ % trinomial_js.size()];
                const long small = to_small(t.sets[0][static_cast<size_t>(j)][0]);
                return conjugate(trinomial_loop(t.sets[0], j, small));
            }
            if (!facet_combos.empty()) {
                const FacetCombo& combo = facet_combos[facet_cursor++ % facet_combos.size()];
                return conjugate(
                    facet_resultant_loop(t, combo.record, combo.j, combo.a, rng, combo.turns));
            }
        }
        return random_loop(run.base, rng);
    };

    const unsigned hardware = std::thread::hardware_concurrency();
    const int batch = static_cast<int>(std::min(8u, std::max(1u, hardware)));
    int stable = 0;
    bool settled = false;
    while (!settled && run.loops_attempted < options.budget) {
        const int want = std::min(batch, options.budget - run.loops_attempted);
        std::vector<Loop> specs;
        specs.reserve(static_cast<size_t>(want));
        for (int b = 0; b < want; ++b) specs.push_back(next_loop());
        std::vector<std::future<LoopResult>> results;
        results.reserve(static_cast<size_t>(want));
        for (int b = 0; b < want; ++b)
            results.push_back(std::async(std::launch::async, [&, b] {
                return track_loop(specs[static_cast<size_t>(b)], run.fiber, options.track,
                                  options.match);
            }));
        for (int b = 0; b < want && !settled; ++b) {
            ++run.loops_attempted;
            try {
                LoopResult result = results[static_cast<size_t>(b)].get();
                if (!block_action(result.permutation, run.blocks))
                    throw BlockStructureViolated("loop does not respect the deck fibers");
                std::vector<Int> raw = raw_identity_vector(result);
                std::vector<Int> reduced_vec =
                    reduced_block_vector(result, run.blocks, run.reduction);

                const bool grew = run.group.add(result.permutation);
                stable = grew ? 0 : stable + 1;
                if (!all_zero(raw)) run.lattice_generators.push_back(std::move(raw));
                if (!all_zero(reduced_vec)) {
                    run.reduced_lattice_generators.push_back(reduced_vec);
                    if (run.lattice_status == LatticeStatus::Undecided &&
                        !decided.contains(reduced_vec)) {
                        novel.push_back(std::move(reduced_vec));
                        decided = rebuild();
                        if (decided.is_full()) run.lattice_status = LatticeStatus::Full;
                    }
                }
                run.loops.push_back(ExecutedLoop{specs[static_cast<size_t>(b)].kind,
                                                 specs[static_cast<size_t>(b)].description,
                                                 result.permutation,
                                                 std::move(result.winding)});
                ++run.loops_accepted;
                if (stable >= options.stable_window && run.lattice_status == LatticeStatus::Full)
                    settled = true;
            } catch (const SignatureMismatch&) {
                ++run.signature_failures;
            } catch (const NumericalError&) {
                ++run.loops_discarded;
            }
        }
    }
    run.budget_exhausted = !settled;
    run.order = run.group.order();
    return run;
}

WreathReport verify_wreath_structure(const MonodromyRun& run, const ReductionData& reduction) {
    WreathReport report;
    report.blocks = fiber_blocks(run.fiber, reduction);
    const int n = reduction.embedding.rows();
    const int cols = reduction.embedding.cols();
    const size_t d = report.blocks.size();
    report.deck_order = reduction.index_m;
    report.block_count = static_cast<long>(d);
    Int power;
    mpz_pow_ui(power.get_mpz_t(), reduction.index_m.get_mpz_t(), d);
    Int factorial;
    mpz_fac_ui(factorial.get_mpz_t(), d);
    report.full_order = power * factorial;
    report.order = run.order;

    const double tol = 1e-6;
    for (const Permutation& g : run.group.generators()) {
        const auto pi = block_action(g, report.blocks);
        if (!pi) throw BlockStructureViolated("generator splits a deck fiber");
        for (size_t b = 0; b < d; ++b) {
            const std::vector<int>& members = report.blocks[b];
            std::vector<std::vector<Cx>> ratios;
            ratios.reserve(members.size());
            for (int member : members) {
                std::vector<Cx> q(static_cast<size_t>(n));
                for (int v = 0; v < n; ++v)
                    q[static_cast<size_t>(v)] =
                        run.fiber[static_cast<size_t>(g.apply(member))].x[static_cast<size_t>(v)] /
                        run.fiber[static_cast<size_t>(member)].x[static_cast<size_t>(v)];
                ratios.push_back(std::move(q));
            }
            for (size_t l = 1; l < ratios.size(); ++l)
                if (log_distance(ratios[0], ratios[l]) > tol)
                    throw BlockStructureViolated(
                        "generator is not a single translation on a deck fiber");
            if (pi->apply(static_cast<int>(b)) == static_cast<int>(b)) {
                // A translation fixing the block must act trivially downstairs.
                for (int j = 0; j < cols; ++j) {
                    double lm = 0.0, la = 0.0;
                    for (int v = 0; v < n; ++v) {
                        const double e = reduction.embedding.at(v, j).get_d();
                        lm += e * std::log(std::abs(ratios[0][static_cast<size_t>(v)]));
                        la += e * std::arg(ratios[0][static_cast<size_t>(v)]);
                    }
                    la -= kTau * std::nearbyint(la / kTau);
                    if (std::abs(lm) > tol || std::abs(la) > tol)
                        throw BlockStructureViolated(
                            "fixed-fiber translation is not a deck translation");
                }
            }
        }
    }
    if (report.order <= 0 || report.full_order % report.order != 0)
        throw BlockStructureViolated("group order does not divide the wreath order");
    report.index = report.full_order / report.order;
    return report;
}

PoissonReport poisson_divisibility_check(const MonodromyRun& run, const Covector& b) {
    require(static_cast<int>(b.size()) == run.tuple.n, "direction dimension mismatch");
    const EssentialData essential = essential_vectors(run.tuple);
    Int modulus = 0;
    std::vector<Covector> seen;
    for (const EssentialRecord& record : essential.records) {
        if (std::find(seen.begin(), seen.end(), record.gamma) != seen.end()) continue;
        seen.push_back(record.gamma);
        const Int term = resultant_multiplicity(run.tuple, record.gamma).d * dot(record.gamma, b);
        mpz_gcd(modulus.get_mpz_t(), modulus.get_mpz_t(), term.get_mpz_t());
    }
    PoissonReport report;
    report.modulus = modulus;
    for (const ExecutedLoop& loop : run.loops) {
        if (!loop.permutation.is_identity()) continue;
        Int total = 0;
        for (const std::vector<double>& row : loop.winding) {
            for (size_t v = 0; v < row.size(); ++v) {
                auto rounded = round_to_int(row[v], 1e-3);
                if (!rounded)
                    throw DivisibilityViolated("identity loop winding is not integral");
                total += *rounded * b[v];
            }
        }
        const bool fine = modulus == 0 ? total == 0 : total % modulus == 0;
        if (!fine)
            throw DivisibilityViolated("loop winding escapes the resultant divisibility");
        ++report.loops_checked;
    }
    return report;
}

}  // namespace sparsegal

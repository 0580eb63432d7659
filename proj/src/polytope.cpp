#include "sparsegal/polytope.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_set>

#include "sparsegal/check.hpp"

namespace sparsegal {

Int dot(const Covector& a, const Point& b) {
    require(a.size() == b.size(), "dot of mismatched lengths");
    Int s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Covector primitive(Covector v) {
    Int g = 0;
    for (const Int& x : v) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1)
        for (Int& x : v) x /= g;
    return v;
}

std::vector<Point> dedupe_points(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

int affine_rank_of(const std::vector<Point>& pts) {
    if (pts.size() <= 1) return 0;
    std::vector<std::vector<Int>> diffs;
    for (size_t i = 1; i < pts.size(); ++i) {
        std::vector<Int> d(pts[0].size());
        for (size_t j = 0; j < d.size(); ++j) d[j] = pts[i][j] - pts[0][j];
        diffs.push_back(std::move(d));
    }
    return rank_of(IntMatrix::from_columns(diffs));
}

Sublattice direction_lattice(const std::vector<Point>& pts) {
    require(!pts.empty(), "direction lattice of empty set");
    const int n = static_cast<int>(pts[0].size());
    std::vector<std::vector<Int>> diffs;
    for (size_t i = 1; i < pts.size(); ++i) {
        std::vector<Int> d(n);
        for (int j = 0; j < n; ++j) d[j] = pts[i][j] - pts[0][j];
        diffs.push_back(std::move(d));
    }
    return Sublattice::from_vectors(n, diffs);
}

namespace {

// ---- pruning ------------------------------------------------------------

struct PointHash {
    size_t operator()(const std::vector<int64_t>& p) const {
        size_t h = 1469598103934665603ull;
        for (int64_t x : p) h = (h ^ static_cast<size_t>(x)) * 1099511628211ull;
        return h;
    }
};

bool fits_small(const std::vector<Point>& pts, std::vector<std::vector<int64_t>>& out) {
    out.clear();
    out.reserve(pts.size());
    for (const Point& p : pts) {
        std::vector<int64_t> q(p.size());
        for (size_t j = 0; j < p.size(); ++j) {
            if (!p[j].fits_slong_p() || abs(p[j]) > 100000) return false;
            q[j] = p[j].get_si();
        }
        out.push_back(std::move(q));
    }
    return true;
}

// Drop points that are midpoints of two others; never removes a vertex.
// Iterated to a fixed point.  Only a heuristic reduction: leftover interior
// points are harmless for the hull search.
void midpoint_prune(std::vector<Point>& pts) {
    std::vector<std::vector<int64_t>> small;
    if (!fits_small(pts, small)) return;
    bool changed = true;
    while (changed && pts.size() > 24) {
        changed = false;
        std::unordered_set<std::vector<int64_t>, PointHash> present(small.begin(), small.end());
        std::vector<char> dead(small.size(), 0);
        for (size_t i = 0; i < small.size(); ++i) {
            for (size_t j = 0; j < small.size(); ++j) {
                if (i == j || dead[j]) continue;
                std::vector<int64_t> mirror(small[i].size());
                for (size_t k = 0; k < mirror.size(); ++k) mirror[k] = 2 * small[i][k] - small[j][k];
                if (mirror == small[i]) continue;
                auto it = present.find(mirror);
                if (it != present.end() && *it != small[i]) {
                    dead[i] = 1;
                    changed = true;
                    break;
                }
            }
        }
        std::vector<Point> keep_pts;
        std::vector<std::vector<int64_t>> keep_small;
        for (size_t i = 0; i < small.size(); ++i)
            if (!dead[i]) {
                keep_pts.push_back(pts[i]);
                keep_small.push_back(small[i]);
            }
        pts = std::move(keep_pts);
        small = std::move(keep_small);
    }
}

// Full collinearity prune: drop any point strictly inside a segment between
// two others.  Cubic, used only when the cheap prune was not enough.
void segment_prune(std::vector<Point>& pts) {
    std::vector<std::vector<int64_t>> small;
    if (!fits_small(pts, small)) return;
    const size_t m = small.size();
    const size_t dim = small.empty() ? 0 : small[0].size();
    std::vector<char> dead(m, 0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t a = 0; a < m && !dead[i]; ++a) {
            if (a == i || dead[a]) continue;
            for (size_t b = a + 1; b < m; ++b) {
                if (b == i || dead[b]) continue;
                // is pts[i] strictly inside [pts[a], pts[b]]?
                __int128 cross_ok = 1, dpq = 0, dqq = 0;
                for (size_t k = 0; k < dim && cross_ok; ++k)
                    for (size_t l = k + 1; l < dim; ++l) {
                        __int128 c = static_cast<__int128>(small[i][k] - small[a][k]) * (small[b][l] - small[a][l]) -
                                     static_cast<__int128>(small[i][l] - small[a][l]) * (small[b][k] - small[a][k]);
                        if (c != 0) {
                            cross_ok = 0;
                            break;
                        }
                    }
                if (!cross_ok) continue;
                for (size_t k = 0; k < dim; ++k) {
                    dpq += static_cast<__int128>(small[i][k] - small[a][k]) * (small[b][k] - small[a][k]);
                    dqq += static_cast<__int128>(small[b][k] - small[a][k]) * (small[b][k] - small[a][k]);
                }
                if (dpq > 0 && dpq < dqq) {
                    dead[i] = 1;
                    break;
                }
            }
        }
    }
    std::vector<Point> keep;
    for (size_t i = 0; i < m; ++i)
        if (!dead[i]) keep.push_back(pts[i]);
    pts = std::move(keep);
}

// ---- exact hull core ----------------------------------------------------

// The facet search enumerates hyperplanes through n affinely independent
// input points; every facet of the hull is such a hyperplane.  Runs on
// int64 with 128-bit accumulation when coordinates are small (the usual
// case) and on arbitrary precision otherwise.

struct FacetRaw {
    Covector normal;
    Int offset;
};

template <class V, class W>
struct HullCore {
    int n;
    std::vector<std::vector<V>> pts;

    static V det2(V a, V b, V c, V d) { return a * d - b * c; }
    static V det3(const V m[3][3]) {
        return m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2]) -
               m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2]) +
               m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1]);
    }

    // Normal of the hyperplane through the points with the given indices
    // (n of them); zero vector if they are affinely dependent.
    std::vector<V> normal_of(const std::vector<int>& idx) const {
        std::vector<std::vector<V>> d(n - 1, std::vector<V>(n));
        for (int i = 0; i + 1 < n; ++i)
            for (int j = 0; j < n; ++j) d[i][j] = pts[idx[i + 1]][j] - pts[idx[0]][j];
        std::vector<V> nor(n, 0);
        if (n == 1) {
            nor[0] = 1;
        } else if (n == 2) {
            nor[0] = -d[0][1];
            nor[1] = d[0][0];
        } else if (n == 3) {
            nor[0] = det2(d[0][1], d[0][2], d[1][1], d[1][2]);
            nor[1] = -det2(d[0][0], d[0][2], d[1][0], d[1][2]);
            nor[2] = det2(d[0][0], d[0][1], d[1][0], d[1][1]);
        } else {
            V m[3][3];
            for (int drop = 0; drop < 4; ++drop) {
                for (int i = 0; i < 3; ++i) {
                    int cc = 0;
                    for (int j = 0; j < 4; ++j) {
                        if (j == drop) continue;
                        m[i][cc++] = d[i][j];
                    }
                }
                nor[drop] = (drop % 2 == 0 ? 1 : -1) * det3(m);
            }
        }
        return nor;
    }

    W dotw(const std::vector<V>& a, const std::vector<V>& b) const {
        W s = 0;
        for (int j = 0; j < n; ++j) s += static_cast<W>(a[j]) * b[j];
        return s;
    }

    std::vector<FacetRaw> facets() const {
        const int m = static_cast<int>(pts.size());
        std::vector<FacetRaw> out;

        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        auto advance = [&]() {
            for (int i = n - 1; i >= 0; --i) {
                if (idx[i] < m - (n - i)) {
                    ++idx[i];
                    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
                    return true;
                }
            }
            return false;
        };
        if (m < n) return out;
        do {
            std::vector<V> nor = normal_of(idx);
            bool zero = true;
            for (const V& x : nor)
                if (x != 0) zero = false;
            if (zero) continue;

            Covector nz(n);
            for (int j = 0; j < n; ++j) nz[j] = to_int(nor[j]);
            nz = primitive(std::move(nz));

            std::vector<V> nv(n);
            bool small_ok = to_small(nz, nv);
            require(small_ok, "primitive normal exceeds small-integer range");
            W c = dotw(nv, pts[idx[0]]);

            bool above = false, below = false;
            for (int i = 0; i < m && !(above && below); ++i) {
                W s = dotw(nv, pts[i]);
                if (s > c) above = true;
                if (s < c) below = true;
            }
            if (above && below) continue;

            // thin duplicates: keep only combinations whose smallest index is
            // the first point on this plane (residual dupes removed by the
            // caller's sort+unique)
            bool first_on_plane = true;
            for (int i = 0; i < idx[0] && first_on_plane; ++i)
                if (dotw(nv, pts[i]) == c) first_on_plane = false;
            if (!first_on_plane) continue;

            FacetRaw f;
            if (!above) {
                f.normal = nz;
                f.offset = to_int_w(c);
            } else {
                for (Int& x : nz) x = -x;
                f.normal = nz;
                f.offset = to_int_w(-c);
            }
            out.push_back(std::move(f));
        } while (advance());
        return out;
    }

    static Int to_int(const V& x);
    static Int to_int_w(const W& x);
    static bool to_small(const Covector& src, std::vector<V>& dst);
};

template <>
Int HullCore<int64_t, __int128>::to_int(const int64_t& x) {
    Int r;
    mpz_set_si(r.get_mpz_t(), static_cast<long>(x));
    return r;
}
template <>
Int HullCore<int64_t, __int128>::to_int_w(const __int128& x) {
    bool neg = x < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(x) : x;
    Int hi = static_cast<unsigned long>(u >> 64);
    Int lo = static_cast<unsigned long>(u & 0xffffffffffffffffull);
    Int r = (hi << 64) + lo;
    return neg ? -r : r;
}
template <>
bool HullCore<int64_t, __int128>::to_small(const Covector& src, std::vector<int64_t>& dst) {
    for (size_t j = 0; j < src.size(); ++j) {
        if (!src[j].fits_slong_p()) return false;
        dst[j] = src[j].get_si();
    }
    return true;
}
template <>
Int HullCore<Int, Int>::to_int(const Int& x) {
    return x;
}
template <>
Int HullCore<Int, Int>::to_int_w(const Int& x) {
    return x;
}
template <>
bool HullCore<Int, Int>::to_small(const Covector& src, std::vector<Int>& dst) {
    dst = src;
    return true;
}

std::vector<FacetRaw> enumerate_facets(const std::vector<Point>& pts, int n) {
    std::vector<std::vector<int64_t>> small;
    if (fits_small(pts, small)) {
        HullCore<int64_t, __int128> core{n, std::move(small)};
        return core.facets();
    }
    HullCore<Int, Int> core{n, pts};
    return core.facets();
}

// Solve basis * c = p - base for many points at once.
struct AffineChart {
    Point base;
    IntMatrix basis;  // n x r, basis of the saturated direction lattice
    SmithDecomposition dec;

    explicit AffineChart(const std::vector<Point>& pts) {
        base = pts[0];
        for (const Point& p : pts)
            if (p < base) base = p;
        basis = saturation(direction_lattice(pts)).gens();
        dec = smith_normal_form(basis);
    }

    int down_rank() const { return basis.cols(); }

    Point down(const Point& p) const {
        const int n = basis.rows(), r = basis.cols();
        std::vector<Int> d(n);
        for (int i = 0; i < n; ++i) d[i] = p[i] - base[i];
        std::vector<Int> ud(n, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ud[i] += dec.u.at(i, j) * d[j];
        std::vector<Int> y(r, 0);
        for (int i = 0; i < n; ++i) {
            if (i < r && dec.s.at(i, i) != 0) {
                require(ud[i] % dec.s.at(i, i) == 0, "point outside affine chart lattice");
                y[i] = ud[i] / dec.s.at(i, i);
            } else {
                require(ud[i] == 0, "point outside affine span");
            }
        }
        Point c(r, Int(0));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) c[i] += dec.v.at(i, j) * y[j];
        return c;
    }

    Point up(const Point& c) const {
        const int n = basis.rows(), r = basis.cols();
        Point p = base;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < r; ++j) p[i] += basis.at(i, j) * c[j];
        return p;
    }
};

}  // namespace

Polytope convex_hull(const std::vector<Point>& input) {
    require(!input.empty(), "hull of empty point set");
    const int n = static_cast<int>(input[0].size());
    if (n < 1 || n > 4) throw InputError("convex hull supported in dimensions 1 through 4");
    for (const Point& p : input) require(static_cast<int>(p.size()) == n, "mixed point dimensions");

    std::vector<Point> pts = dedupe_points(input);
    Polytope out;
    out.ambient = n;

    if (pts.size() == 1) {
        out.affine_rank = 0;
        out.vertices = pts;
        return out;
    }

    if (pts.size() > 24) midpoint_prune(pts);
    const size_t cap = n <= 2 ? 4000 : (n == 3 ? 220 : 110);
    if (pts.size() > cap) segment_prune(pts);
    require(pts.size() <= static_cast<size_t>(6000 / n), "point set too large for exact hull");

    const int r = affine_rank_of(pts);
    out.affine_rank = r;

    if (r < n) {
        AffineChart chart(pts);
        std::vector<Point> mapped;
        mapped.reserve(pts.size());
        for (const Point& p : pts) mapped.push_back(chart.down(p));
        if (r == 0) {
            out.vertices = {pts[0]};
            return out;
        }
        Polytope low = convex_hull(mapped);
        for (const Point& v : low.vertices) out.vertices.push_back(chart.up(v));
        std::sort(out.vertices.begin(), out.vertices.end());
        return out;
    }

    std::vector<FacetRaw> raw = enumerate_facets(pts, n);
    require(!raw.empty(), "full-dimensional hull produced no facets");
    for (FacetRaw& f : raw) out.facets.push_back({std::move(f.normal), std::move(f.offset)});
    std::sort(out.facets.begin(), out.facets.end(), [](const Facet& a, const Facet& b) {
        return a.normal != b.normal ? a.normal < b.normal : a.offset < b.offset;
    });
    out.facets.erase(std::unique(out.facets.begin(), out.facets.end()), out.facets.end());

    // vertices: points whose tight facet normals span the whole space
    for (const Point& p : pts) {
        std::vector<std::vector<Int>> tight;
        for (const Facet& f : out.facets)
            if (dot(f.normal, p) == f.offset) tight.push_back(f.normal);
        if (static_cast<int>(tight.size()) >= n && rank_of(IntMatrix::from_columns(tight)) == n)
            out.vertices.push_back(p);
    }
    std::sort(out.vertices.begin(), out.vertices.end());
    require(!out.vertices.empty(), "hull without vertices");
    return out;
}

std::vector<Point> support_face(const std::vector<Point>& pts, const Covector& gamma) {
    require(!pts.empty(), "support face of empty set");
    Int best = dot(gamma, pts[0]);
    for (const Point& p : pts) best = std::max(best, dot(gamma, p));
    std::vector<Point> face;
    for (const Point& p : pts)
        if (dot(gamma, p) == best) face.push_back(p);
    return dedupe_points(std::move(face));
}

Int normalized_volume(const std::vector<Point>& pts) {
    require(!pts.empty(), "volume of empty set");
    const int n = static_cast<int>(pts[0].size());
    if (n == 0) return 1;
    Polytope hull = convex_hull(pts);
    if (hull.affine_rank < n) return 0;
    if (n == 1) {
        return hull.vertices.back()[0] - hull.vertices.front()[0];
    }
    const Point& apex = hull.vertices.front();  // lex smallest vertex
    Int total = 0;
    for (const Facet& f : hull.facets) {
        Int h = f.offset - dot(f.normal, apex);
        if (h == 0) continue;
        std::vector<Point> fpts;
        for (const Point& v : hull.vertices)
            if (dot(f.normal, v) == f.offset) fpts.push_back(v);
        AffineChart chart(fpts);
        require(chart.down_rank() == n - 1, "facet has wrong affine rank");
        std::vector<Point> mapped;
        for (const Point& v : fpts) mapped.push_back(chart.down(v));
        total += h * normalized_volume(mapped);
    }
    return total;
}

Rat euclidean_volume(const std::vector<Point>& pts) {
    require(!pts.empty(), "volume of empty set");
    const int n = static_cast<int>(pts[0].size());
    Int fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    Rat v(normalized_volume(pts), fact);
    v.canonicalize();
    return v;
}

std::vector<Point> minkowski_sum(const std::vector<Point>& a, const std::vector<Point>& b) {
    require(!a.empty() && !b.empty(), "minkowski sum of empty set");
    std::vector<Point> out;
    out.reserve(a.size() * b.size());
    for (const Point& p : a)
        for (const Point& q : b) {
            Point s(p.size());
            for (size_t j = 0; j < p.size(); ++j) s[j] = p[j] + q[j];
            out.push_back(std::move(s));
        }
    return dedupe_points(std::move(out));
}

Int lattice_mixed_volume(const std::vector<std::vector<Point>>& sets) {
    require(!sets.empty(), "mixed volume of no sets");
    const int n = static_cast<int>(sets[0][0].size());
    if (static_cast<int>(sets.size()) != n) throw InputError("mixed volume needs n sets in dimension n");
    if (n < 1 || n > 4) throw InputError("mixed volume supported in dimensions 1 through 4");

    std::vector<std::vector<Point>> verts;
    for (const auto& s : sets) verts.push_back(convex_hull(s).vertices);

    Int total = 0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Point> sum;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i))
                sum = sum.empty() ? verts[i] : convex_hull(minkowski_sum(sum, verts[i])).vertices;
        int sign = (n - __builtin_popcount(mask)) % 2 == 0 ? 1 : -1;
        total += sign * normalized_volume(sum);
    }
    Int fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    require(total % fact == 0, "mixed volume inclusion-exclusion not divisible by n!");
    Int mv = total / fact;
    require(mv >= 0, "negative mixed volume");
    return mv;
}

namespace {

// Representatives for a full-dimensional polytope given by vertices+facets:
// one per facet (the normal), one per edge in dimension 3 (sum of the two
// adjacent facet normals), one per vertex (sum of all tight facet normals).
std::vector<Covector> representatives_full_dim(const Polytope& p) {
    const int n = p.ambient;
    std::vector<Covector> reps;
    if (n == 1) {
        reps.push_back({Int(1)});
        reps.push_back({Int(-1)});
        return reps;
    }
    for (const Facet& f : p.facets) reps.push_back(f.normal);

    auto tight_of = [&](const Point& v) {
        std::vector<int> t;
        for (size_t k = 0; k < p.facets.size(); ++k)
            if (dot(p.facets[k].normal, v) == p.facets[k].offset) t.push_back(static_cast<int>(k));
        return t;
    };

    if (n == 3) {
        std::set<std::vector<int>> edges_seen;
        for (size_t a = 0; a < p.vertices.size(); ++a)
            for (size_t b = a + 1; b < p.vertices.size(); ++b) {
                std::vector<int> ta = tight_of(p.vertices[a]), tb = tight_of(p.vertices[b]);
                std::vector<int> common;
                std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
                if (common.size() < 2) continue;
                std::vector<std::vector<Int>> normals;
                for (int k : common) normals.push_back(p.facets[k].normal);
                if (rank_of(IntMatrix::from_columns(normals)) != 2) continue;
                if (!edges_seen.insert(common).second) continue;
                require(common.size() == 2, "edge of a 3-polytope lies on exactly two facets");
                Covector s(n, Int(0));
                for (int k : common)
                    for (int j = 0; j < n; ++j) s[j] += p.facets[k].normal[j];
                reps.push_back(primitive(std::move(s)));
            }
    }

    for (const Point& v : p.vertices) {
        std::vector<int> t = tight_of(v);
        Covector s(n, Int(0));
        for (int k : t)
            for (int j = 0; j < n; ++j) s[j] += p.facets[k].normal[j];
        reps.push_back(primitive(std::move(s)));
    }
    return reps;
}

std::vector<Covector> representatives_of_points(const std::vector<Point>& pts) {
    const int n = static_cast<int>(pts[0].size());
    Polytope hull = convex_hull(pts);

    if (hull.affine_rank == n) return representatives_full_dim(hull);

    // Lower-dimensional hull: every cone of the fan contains the annihilator
    // of the direction space.  Reduce to chart coordinates, lift the reduced
    // representatives, and add one primitive covector from the annihilator.
    AffineChart chart(pts);
    const int r = chart.down_rank();
    IntMatrix bt = chart.basis.transpose();  // r x n, surjective on Z^r

    std::vector<Covector> reps;
    if (r > 0) {
        std::vector<Point> mapped;
        for (const Point& p : pts) mapped.push_back(chart.down(p));
        for (const Covector& w : representatives_of_points(mapped)) {
            auto lift = solve_exact(bt, w);
            require(lift.has_value(), "covector lift failed on saturated basis");
            reps.push_back(primitive(std::move(*lift)));
        }
    }
    // kernel of bt = annihilator of the direction space
    SmithDecomposition d = smith_normal_form(bt);
    int rk = 0;
    for (const Int& s : d.diagonal())
        if (s != 0) ++rk;
    require(rk == r, "saturated basis transpose must have full rank");
    require(n - rk >= 1, "expected nontrivial annihilator");
    Covector ann = d.v.column(rk);
    reps.push_back(primitive(std::move(ann)));
    return reps;
}

}  // namespace

std::vector<Covector> refined_cone_representatives(const std::vector<std::vector<Point>>& sets) {
    require(!sets.empty(), "no sets given");
    const int n = static_cast<int>(sets[0][0].size());
    if (n < 1 || n > 3) throw InputError("refined fan representatives supported in dimensions 1 through 3");
    std::vector<Point> sum;
    for (const auto& s : sets) {
        std::vector<Point> v = convex_hull(s).vertices;
        sum = sum.empty() ? v : minkowski_sum(sum, v);
    }
    return representatives_of_points(sum);
}

}  // namespace sparsegal

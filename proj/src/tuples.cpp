#include "sparsegal/tuples.hpp"

#include <algorithm>
#include <map>

#include "sparsegal/check.hpp"

namespace sparsegal {

namespace {

void validate(const SupportTuple& t) {
    if (t.n < 1) throw InputError("support tuple needs positive dimension");
    if (static_cast<int>(t.sets.size()) != t.n)
        throw InputError("support tuple needs exactly n sets in dimension n");
    for (const auto& s : t.sets) {
        if (s.empty()) throw InputError("empty support set");
        for (const Point& p : s)
            if (static_cast<int>(p.size()) != t.n) throw InputError("support point of wrong dimension");
    }
}

std::vector<std::vector<Int>> all_points(const SupportTuple& t) {
    std::vector<std::vector<Int>> out;
    for (const auto& s : t.sets)
        for (const Point& p : s) out.push_back(p);
    return out;
}

// Differences within one set, relative to its first point.
std::vector<std::vector<Int>> differences(const std::vector<Point>& s) {
    std::vector<std::vector<Int>> out;
    for (size_t i = 1; i < s.size(); ++i) {
        std::vector<Int> d(s[0].size());
        for (size_t j = 0; j < d.size(); ++j) d[j] = s[i][j] - s[0][j];
        out.push_back(std::move(d));
    }
    return out;
}

int joint_direction_rank(const std::vector<std::vector<Point>>& faces, unsigned mask) {
    std::vector<std::vector<Int>> vecs;
    for (size_t i = 0; i < faces.size(); ++i)
        if (mask & (1u << i))
            for (auto& d : differences(faces[i])) vecs.push_back(std::move(d));
    if (vecs.empty()) return 0;
    return rank_of(IntMatrix::from_columns(vecs));
}

// Integer basis of the annihilated hyperplane of a primitive covector.
std::vector<std::vector<Int>> kernel_basis(const Covector& gamma) {
    const int n = static_cast<int>(gamma.size());
    SmithDecomposition d = smith_normal_form(IntMatrix::from_rows({gamma}));
    require(d.s.at(0, 0) == 1, "kernel basis expects a primitive covector");
    std::vector<std::vector<Int>> out;
    for (int j = 1; j < n; ++j) out.push_back(d.v.column(j));
    return out;
}

}  // namespace

bool is_normalized(const SupportTuple& t) {
    validate(t);
    Point zero(t.n, Int(0));
    for (const auto& s : t.sets)
        if (std::count(s.begin(), s.end(), zero) == 0) return false;
    return true;
}

SupportTuple normalize(const SupportTuple& t) {
    validate(t);
    SupportTuple out;
    out.n = t.n;
    for (const auto& s : t.sets) {
        Point low = s[0];
        for (const Point& p : s) low = std::min(low, p);
        std::vector<Point> moved;
        for (const Point& p : s) {
            Point q(t.n);
            for (int j = 0; j < t.n; ++j) q[j] = p[j] - low[j];
            moved.push_back(std::move(q));
        }
        out.sets.push_back(dedupe_points(std::move(moved)));
    }
    return out;
}

ReductionData reduction(const SupportTuple& t) {
    require(is_normalized(t), "reduction requires a normalized tuple");
    ReductionData r;
    r.lambda = Sublattice::from_vectors(t.n, all_points(t));
    if (r.lambda.rank() < t.n)
        throw InputError("support points span a rank-deficient lattice; no finite root set");
    r.embedding = hermite_basis(r.lambda.basis());
    r.dual_embedding = r.embedding.transpose();
    r.dual_image = Sublattice(t.n, r.dual_embedding);
    r.index_m = 1;
    for (const Int& s : r.lambda.invariants()) {
        r.index_m *= s;
        if (s != 1) r.abelian_invariants.push_back(s);
    }
    r.reduced.n = t.n;
    for (const auto& s : t.sets) {
        std::vector<Point> mapped;
        for (const Point& p : s) {
            auto c = solve_exact(r.embedding, p);
            require(c.has_value(), "support point outside its own point lattice");
            mapped.push_back(std::move(*c));
        }
        r.reduced.sets.push_back(dedupe_points(std::move(mapped)));
    }
    return r;
}

bool is_reduced(const SupportTuple& t) {
    require(is_normalized(t), "reducedness test requires a normalized tuple");
    return Sublattice::from_vectors(t.n, all_points(t)).is_full();
}

std::optional<std::vector<int>> reducible_subset(const SupportTuple& t) {
    require(is_normalized(t), "irreducibility test requires a normalized tuple");
    const int n = t.n;
    std::optional<std::vector<int>> best;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<std::vector<Int>> vecs;
        std::vector<int> subset;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                subset.push_back(i);
                for (const Point& p : t.sets[i]) vecs.push_back(p);
            }
        if (rank_of(IntMatrix::from_columns(vecs)) <=
                static_cast<int>(subset.size()) &&
            (!best || subset.size() < best->size()))
            best = std::move(subset);
    }
    return best;
}

bool is_irreducible(const SupportTuple& t) { return !reducible_subset(t).has_value(); }

bool is_analogous(const SupportTuple& t) {
    require(is_normalized(t), "analogy test requires a normalized tuple");
    if (t.n > 3) throw InputError("analogy test supported in dimensions 1 through 3");
    std::vector<Covector> reps = refined_cone_representatives(t.sets);
    for (const Covector& g : reps) {
        std::vector<std::vector<Point>> faces;
        for (const auto& s : t.sets) faces.push_back(support_face(s, g));
        Sublattice sat0 = direction_lattice(faces[0]).saturation();
        for (const auto& f : faces) {
            Sublattice d = direction_lattice(f);
            if (d.rank() != sat0.rank()) return false;
            for (auto& v : differences(f))
                if (!sat0.contains(v)) return false;
        }
    }
    return true;
}

EssentialData essential_vectors(const SupportTuple& t) {
    require(is_normalized(t), "essential vectors require a normalized tuple");
    const int n = t.n;
    if (n > 4) throw InputError("essential vectors supported in dimensions 1 through 4");

    std::vector<Point> sum;
    for (const auto& s : t.sets)
        sum = sum.empty() ? convex_hull(s).vertices
                          : convex_hull(minkowski_sum(sum, convex_hull(s).vertices)).vertices;
    Polytope hull = convex_hull(sum);
    if (hull.affine_rank < n)
        throw InputError("support points span a rank-deficient lattice; no essential vectors");

    EssentialData out;
    std::map<std::vector<std::vector<Point>>, int> group_of;

    for (const Facet& facet : hull.facets) {
        const Covector& gamma = facet.normal;
        std::vector<std::vector<Point>> faces;
        for (const auto& s : t.sets) faces.push_back(support_face(s, gamma));

        // essential: no two or more faces fit together in a (k-2)-dim lattice
        bool essential = true;
        for (unsigned mask = 1; mask < (1u << n) && essential; ++mask) {
            int k = __builtin_popcount(mask);
            if (k < 2) continue;
            if (joint_direction_rank(faces, mask) <= k - 2) essential = false;
        }
        if (!essential) continue;

        // the unique minimal index set whose faces drop one dimension
        std::vector<unsigned> degenerating;
        for (unsigned mask = 1; mask < (1u << n); ++mask)
            if (joint_direction_rank(faces, mask) <= __builtin_popcount(mask) - 1)
                degenerating.push_back(mask);
        require(!degenerating.empty(), "full index set always degenerates on a face");
        unsigned kmask = degenerating[0];
        for (unsigned mask : degenerating)
            if (__builtin_popcount(mask) < __builtin_popcount(kmask)) kmask = mask;
        int minimal_size = __builtin_popcount(kmask);
        for (unsigned mask : degenerating) {
            require(__builtin_popcount(mask) != minimal_size || mask == kmask,
                    "minimal degenerating index set is not unique");
            require((kmask & mask) == kmask, "minimal degenerating index set not contained in all");
        }

        EssentialRecord rec;
        rec.gamma = gamma;
        for (int i = 0; i < n; ++i)
            if (kmask & (1u << i)) rec.k_set.push_back(i);

        std::vector<std::vector<Int>> lvecs;
        for (int i : rec.k_set)
            for (auto& d : differences(faces[i])) lvecs.push_back(std::move(d));
        rec.l_gamma = Sublattice::from_vectors(n, lvecs);
        require(rec.l_gamma.rank() == minimal_size - 1,
                "degenerating faces must have rank exactly one less than the set size");
        rec.d_prime = 1;
        for (const Int& s : rec.l_gamma.invariants()) rec.d_prime *= s;

        if (minimal_size == n) {
            rec.d_double = 1;
        } else {
            // residual faces, projected along the saturated face lattice and
            // charted onto the image of the annihilated hyperplane
            const int r = rec.l_gamma.rank();
            IntMatrix proj = r == 0 ? IntMatrix::identity(n)
                                    : quotient_projection(rec.l_gamma.saturation());
            auto project = [&](const Point& p) {
                std::vector<Int> q(proj.rows(), Int(0));
                for (int i = 0; i < proj.rows(); ++i)
                    for (int j = 0; j < n; ++j) q[i] += proj.at(i, j) * p[j];
                return q;
            };
            std::vector<std::vector<Int>> image_gens;
            for (const auto& v : kernel_basis(gamma)) image_gens.push_back(project(v));
            Sublattice image = Sublattice::from_vectors(n - r, image_gens);
            for (const Int& s : image.invariants())
                require(s == 1, "image of the annihilated hyperplane must be saturated");
            IntMatrix chart = image.basis();
            require(chart.cols() == n - minimal_size, "residual image lattice has wrong rank");

            std::vector<std::vector<Point>> charted;
            for (int i = 0; i < n; ++i) {
                if (kmask & (1u << i)) continue;
                std::vector<Int> base = project(faces[i][0]);
                std::vector<Point> cset;
                for (const Point& p : faces[i]) {
                    std::vector<Int> q = project(p);
                    for (size_t j = 0; j < q.size(); ++j) q[j] -= base[j];
                    auto c = solve_exact(chart, q);
                    require(c.has_value(), "projected face point outside the image lattice");
                    cset.push_back(std::move(*c));
                }
                charted.push_back(dedupe_points(std::move(cset)));
            }
            rec.d_double = lattice_mixed_volume(charted);
        }
        rec.d = rec.d_prime * rec.d_double;

        rec.fully_degenerate = minimal_size == n;
        for (const auto& f : faces)
            if (affine_rank_of(f) != n - 1) rec.fully_degenerate = false;

        std::vector<std::vector<Point>> key(n);
        for (int i : rec.k_set) key[i] = faces[i];
        auto it = group_of.find(key);
        if (it == group_of.end()) {
            rec.tuple_id = static_cast<int>(out.groups.size());
            group_of.emplace(std::move(key), rec.tuple_id);
            out.groups.emplace_back();
        } else {
            rec.tuple_id = it->second;
        }
        out.groups[rec.tuple_id].push_back(static_cast<int>(out.records.size()));
        out.records.push_back(std::move(rec));
    }

    for (const auto& g : out.groups)
        if (g.size() > 1)
            for (int idx : g)
                require(!out.records[idx].fully_degenerate,
                        "full-dimensional essential tuples must come from a unique covector");
    return out;
}

ResultantMultiplicity resultant_multiplicity(const SupportTuple& t, const Covector& gamma) {
    Covector g = primitive(gamma);
    EssentialData data = essential_vectors(t);
    for (const EssentialRecord& rec : data.records)
        if (rec.gamma == g) return {rec.d_prime, rec.d_double, rec.d};
    throw InputError("covector is not an essential vector of the tuple");
}

bool is_ample(const SupportTuple& t) {
    if (!is_analogous(t)) throw InputError("ampleness is only defined for analogous tuples");
    ReductionData red = reduction(t);
    EssentialData ess = essential_vectors(red.reduced);
    std::vector<std::vector<Int>> scaled;
    for (const EssentialRecord& rec : ess.records) {
        std::vector<Int> v(rec.gamma.size());
        for (size_t j = 0; j < v.size(); ++j) v[j] = rec.d * rec.gamma[j];
        scaled.push_back(std::move(v));
    }
    return generates_with(scaled, red.dual_image);
}

}  // namespace sparsegal

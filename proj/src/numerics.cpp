#include "sparsegal/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "sparsegal/check.hpp"

namespace sparsegal {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;
constexpr double kHardZero = 1e-280;

long to_long(const Int& v) {
    require(v.fits_slong_p(), "exponent does not fit a machine integer");
    return v.get_si();
}

Cx cpow(Cx x, long e) {
    if (e < 0) {
        x = 1.0 / x;
        e = -e;
    }
    Cx r = 1.0;
    while (e > 0) {
        if (e & 1) r *= x;
        x *= x;
        e >>= 1;
    }
    return r;
}

double wrapped_angle(double a) {
    a = std::fmod(a, kTau);
    if (a > std::numbers::pi) a -= kTau;
    if (a < -std::numbers::pi) a += kTau;
    return a;
}

using Exponents = std::vector<std::vector<std::vector<long>>>;
using Coefficients = std::vector<std::vector<Cx>>;

void check_torus_point(const std::vector<Cx>& x) {
    for (const Cx& v : x) {
        if (std::abs(v) < kHardZero) throw ZeroCoordinate("evaluation at a zero coordinate");
    }
}

Cx monomial_value(const std::vector<long>& a, const std::vector<Cx>& x) {
    Cx r = 1.0;
    for (size_t v = 0; v < a.size(); ++v) r *= cpow(x[v], a[v]);
    return r;
}

std::vector<Cx> eval_core(const Exponents& exps, const Coefficients& coeffs,
                          const std::vector<Cx>& x) {
    check_torus_point(x);
    std::vector<Cx> out(exps.size(), 0.0);
    for (size_t i = 0; i < exps.size(); ++i)
        for (size_t k = 0; k < exps[i].size(); ++k)
            out[i] += coeffs[i][k] * monomial_value(exps[i][k], x);
    return out;
}

std::vector<std::vector<Cx>> jac_core(const Exponents& exps, const Coefficients& coeffs,
                                      const std::vector<Cx>& x) {
    check_torus_point(x);
    const size_t n = x.size();
    std::vector<std::vector<Cx>> out(exps.size(), std::vector<Cx>(n, 0.0));
    for (size_t i = 0; i < exps.size(); ++i)
        for (size_t k = 0; k < exps[i].size(); ++k) {
            const Cx mono = coeffs[i][k] * monomial_value(exps[i][k], x);
            for (size_t v = 0; v < n; ++v)
                if (exps[i][k][v] != 0)
                    out[i][v] += mono * static_cast<double>(exps[i][k][v]) / x[v];
        }
    return out;
}

std::vector<double> scale_core(const Exponents& exps, const Coefficients& coeffs,
                               const std::vector<Cx>& x) {
    check_torus_point(x);
    std::vector<double> out(exps.size(), 0.0);
    for (size_t i = 0; i < exps.size(); ++i)
        for (size_t k = 0; k < exps[i].size(); ++k) {
            double m = std::abs(coeffs[i][k]);
            for (size_t v = 0; v < x.size(); ++v)
                m *= std::pow(std::abs(x[v]), static_cast<double>(exps[i][k][v]));
            out[i] += m;
        }
    return out;
}

// Gaussian elimination with partial pivoting; false on a vanishing pivot.
bool solve_linear(std::vector<std::vector<Cx>> a, std::vector<Cx> b, std::vector<Cx>& out) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < kHardZero) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            const Cx m = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    out.assign(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        Cx acc = b[r];
        for (size_t c = r + 1; c < n; ++c) acc -= a[r][c] * out[c];
        out[r] = acc / a[r][r];
    }
    return true;
}

Cx determinant(std::vector<std::vector<Cx>> a) {
    const size_t n = a.size();
    Cx det = 1.0;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) == 0.0) return 0.0;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            const Cx m = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
        }
    }
    return det;
}

double hadamard_rcond(const std::vector<std::vector<Cx>>& j) {
    double denom = 1.0;
    for (const auto& row : j) {
        double s = 0.0;
        for (const Cx& v : row) s += std::norm(v);
        denom *= std::sqrt(s);
    }
    if (denom < kHardZero) return 0.0;
    return std::abs(determinant(j)) / denom;
}

double relative_residual(const Exponents& exps, const Coefficients& coeffs,
                         const std::vector<Cx>& x) {
    const std::vector<Cx> f = eval_core(exps, coeffs, x);
    const std::vector<double> sc = scale_core(exps, coeffs, x);
    double worst = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double r = std::abs(f[i]) / std::max(sc[i], kHardZero);
        if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, r);
    }
    return worst;
}

// Newton on prepared data; returns the final point when the relative residual
// reaches tol, otherwise nothing.
std::optional<std::vector<Cx>> newton_core(const Exponents& exps, const Coefficients& coeffs,
                                           std::vector<Cx> x, double tol, int max_iter) {
    const auto unusable = [](const std::vector<Cx>& p) {
        for (const Cx& v : p)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) < kHardZero)
                return true;
        return false;
    };
    if (unusable(x)) return std::nullopt;
    for (int it = 0; it < max_iter; ++it) {
        if (relative_residual(exps, coeffs, x) < tol) return x;
        std::vector<Cx> f = eval_core(exps, coeffs, x);
        for (Cx& v : f) v = -v;
        std::vector<Cx> delta;
        if (!solve_linear(jac_core(exps, coeffs, x), f, delta)) return std::nullopt;
        for (size_t v = 0; v < x.size(); ++v) x[v] += delta[v];
        if (unusable(x)) return std::nullopt;
    }
    if (relative_residual(exps, coeffs, x) < tol) return x;
    return std::nullopt;
}

Root make_root(const Exponents& exps, const Coefficients& coeffs, std::vector<Cx> x) {
    Root r;
    r.residual = relative_residual(exps, coeffs, x);
    r.rcond = hadamard_rcond(jac_core(exps, coeffs, x));
    r.x = std::move(x);
    return r;
}

// Simultaneous iteration for all roots of a dense polynomial with nonzero
// constant and leading coefficients, refined per root by Newton.
std::vector<Cx> dense_roots(const std::vector<Cx>& c, const SolveOptions& opts) {
    const size_t deg = c.size() - 1;
    require(deg >= 1 && std::abs(c[0]) > 0 && std::abs(c[deg]) > 0, "trimmed polynomial expected");
    const auto horner = [&](Cx z) {
        Cx p = c[deg];
        for (size_t k = deg; k-- > 0;) p = p * z + c[k];
        return p;
    };
    const auto scale_at = [&](Cx z) {
        double az = std::abs(z), p = 1.0, s = 0.0;
        for (size_t k = 0; k <= deg; ++k) {
            s += std::abs(c[k]) * p;
            p *= az;
        }
        return s;
    };
    const double r0 = std::pow(std::abs(c[0] / c[deg]), 1.0 / static_cast<double>(deg));
    std::vector<Cx> z(deg);
    for (size_t k = 0; k < deg; ++k) {
        const double phi = kTau * static_cast<double>(k) / static_cast<double>(deg) + 0.41;
        z[k] = r0 * Cx(std::cos(phi), std::sin(phi));
    }
    for (int it = 0; it < opts.max_iterations; ++it) {
        bool settled = true;
        for (size_t k = 0; k < deg; ++k) {
            Cx denom = c[deg];
            for (size_t j = 0; j < deg; ++j) {
                if (j == k) continue;
                Cx diff = z[k] - z[j];
                if (std::abs(diff) < 1e-200) diff = Cx(1e-200, 1e-200);
                denom *= diff;
            }
            const Cx value = horner(z[k]);
            const Cx step = value / denom;
            z[k] -= step;
            // A root is done when its step is tiny or its value has hit the
            // evaluation noise floor; clusters at multiple roots stall on the
            // step criterion alone.
            if (std::abs(step) >= 1e-14 * (1.0 + std::abs(z[k])) &&
                std::abs(value) >= 1e-13 * scale_at(z[k]))
                settled = false;
        }
        if (settled) break;
        if (it + 1 == opts.max_iterations)
            throw ConvergenceFailure("simultaneous iteration did not settle");
    }
    // Per-root Newton cleanup against the dense polynomial.
    const auto dhorner = [&](Cx zz) {
        Cx p = c[deg] * static_cast<double>(deg);
        for (size_t k = deg; k-- > 1;) p = p * zz + c[k] * static_cast<double>(k);
        return p;
    };
    for (Cx& zz : z) {
        for (int it = 0; it < 8; ++it) {
            const Cx d = dhorner(zz);
            if (std::abs(d) < kHardZero) break;
            const Cx step = horner(zz) / d;
            zz -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(zz))) break;
        }
        if (std::abs(horner(zz)) > 1e-8 * scale_at(zz))
            throw ConvergenceFailure("a polynomial root did not converge");
    }
    return z;
}

void sort_roots(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        for (size_t v = 0; v < a.x.size(); ++v) {
            const double ma = std::abs(a.x[v]), mb = std::abs(b.x[v]);
            if (ma != mb) return ma < mb;
            const double pa = std::arg(a.x[v]), pb = std::arg(b.x[v]);
            if (pa != pb) return pa < pb;
        }
        return false;
    });
}

std::vector<Root> dedupe_roots(std::vector<Root> roots, double tol) {
    std::vector<Root> out;
    for (Root& r : roots) {
        bool fresh = true;
        for (const Root& kept : out)
            if (log_distance(r.x, kept.x) < tol) {
                fresh = false;
                break;
            }
        if (fresh) out.push_back(std::move(r));
    }
    return out;
}

Int mixed_volume_of(const SupportTuple& t) {
    return lattice_mixed_volume(t.sets);
}

// Dense coefficient rows of f_i in the second variable, entries evaluated at
// the first variable: row[k] = sum of c * t^(first exponent) over points with
// second exponent k.  Exponents must be nonnegative.
std::vector<Cx> slice_second(const std::vector<std::vector<long>>& exps,
                             const std::vector<Cx>& coeffs, long e_second, Cx t) {
    std::vector<Cx> row(static_cast<size_t>(e_second) + 1, 0.0);
    for (size_t k = 0; k < exps.size(); ++k)
        row[static_cast<size_t>(exps[k][1])] += coeffs[k] * cpow(t, exps[k][0]);
    return row;
}

// Roots of a dense polynomial away from zero: trims the trailing and leading
// near-vanishing coefficients first.  Empty when the trimmed degree is zero.
std::vector<Cx> nonzero_roots(std::vector<Cx> c, const SolveOptions& opts) {
    double top = 0.0;
    for (const Cx& v : c) top = std::max(top, std::abs(v));
    if (top <= 0.0) return {};
    size_t hi = c.size();
    while (hi > 0 && std::abs(c[hi - 1]) < 1e-10 * top) --hi;
    size_t lo = 0;
    while (lo < hi && std::abs(c[lo]) < 1e-10 * top) ++lo;
    if (hi == 0 || hi - lo <= 1) return {};
    return dense_roots(std::vector<Cx>(c.begin() + static_cast<long>(lo),
                                       c.begin() + static_cast<long>(hi)),
                       opts);
}

std::vector<Root> solve_2d_once(const SparseSystem& f, const SolveOptions& opts, double theta,
                                Int expected) {
    // Shift exponents to be nonnegative per set and variable; torus roots are
    // unchanged.
    Exponents shifted = f.exponents;
    for (auto& set : shifted) {
        long m0 = set[0][0], m1 = set[0][1];
        for (const auto& a : set) {
            m0 = std::min(m0, a[0]);
            m1 = std::min(m1, a[1]);
        }
        for (auto& a : set) {
            a[0] -= m0;
            a[1] -= m1;
        }
    }
    long d1 = 0, e1 = 0, d2 = 0, e2 = 0;
    for (const auto& a : shifted[0]) {
        d1 = std::max(d1, a[0]);
        e1 = std::max(e1, a[1]);
    }
    for (const auto& a : shifted[1]) {
        d2 = std::max(d2, a[0]);
        e2 = std::max(e2, a[1]);
    }

    std::vector<Cx> first_candidates;
    if (e1 == 0 || e2 == 0) {
        // One equation is univariate in the first variable: use it directly.
        const size_t which = (e1 == 0) ? 0 : 1;
        std::vector<Cx> dense(static_cast<size_t>(which == 0 ? d1 : d2) + 1, 0.0);
        for (size_t k = 0; k < shifted[which].size(); ++k)
            dense[static_cast<size_t>(shifted[which][k][0])] += f.coefficients[which][k];
        first_candidates = nonzero_roots(dense, opts);
    } else {
        const long bound = d1 * e2 + d2 * e1;
        if (bound == 0) {
            if (expected == 0) return {};
            throw DegenerateResultant("resultant degree bound is zero");
        }
        const size_t nodes = static_cast<size_t>(bound) + 1;
        const Cx u(std::cos(theta), std::sin(theta));
        const Cx omega(std::cos(kTau / static_cast<double>(nodes)),
                       std::sin(kTau / static_cast<double>(nodes)));
        std::vector<Cx> values(nodes);
        const size_t dim = static_cast<size_t>(e1 + e2);
        for (size_t l = 0; l < nodes; ++l) {
            const Cx t = u * cpow(omega, static_cast<long>(l));
            const std::vector<Cx> row1 = slice_second(shifted[0], f.coefficients[0], e1, t);
            const std::vector<Cx> row2 = slice_second(shifted[1], f.coefficients[1], e2, t);
            std::vector<std::vector<Cx>> syl(dim, std::vector<Cx>(dim, 0.0));
            for (long r = 0; r < e2; ++r)
                for (long k = 0; k <= e1; ++k) syl[static_cast<size_t>(r)][static_cast<size_t>(r + k)] = row1[static_cast<size_t>(e1 - k)];
            for (long r = 0; r < e1; ++r)
                for (long k = 0; k <= e2; ++k) syl[static_cast<size_t>(e2 + r)][static_cast<size_t>(r + k)] = row2[static_cast<size_t>(e2 - k)];
            values[l] = determinant(syl);
        }
        // Inverse discrete Fourier transform recovers the coefficients.
        std::vector<Cx> rc(nodes, 0.0);
        for (size_t k = 0; k < nodes; ++k) {
            Cx acc = 0.0;
            for (size_t l = 0; l < nodes; ++l)
                acc += values[l] * cpow(omega, -static_cast<long>(k * l % nodes));
            rc[k] = acc / static_cast<double>(nodes) / cpow(u, static_cast<long>(k));
        }
        double top = 0.0;
        for (const Cx& v : rc) top = std::max(top, std::abs(v));
        if (top < kHardZero) throw DegenerateResultant("resultant vanishes identically");
        first_candidates = nonzero_roots(rc, opts);
    }

    // Recover the second coordinate from both equations and keep what Newton
    // certifies on the full system.
    std::vector<Root> found;
    for (const Cx& x1 : first_candidates) {
        if (std::abs(x1) < opts.zero_tol) continue;
        std::vector<Cx> seconds;
        for (size_t which = 0; which < 2; ++which) {
            const long es = (which == 0) ? e1 : e2;
            if (es == 0) continue;
            const std::vector<Cx> row =
                slice_second(shifted[which], f.coefficients[which], es, x1);
            for (const Cx& x2 : nonzero_roots(row, opts)) seconds.push_back(x2);
        }
        for (const Cx& x2 : seconds) {
            if (std::abs(x2) < opts.zero_tol) continue;
            auto polished =
                newton_core(f.exponents, f.coefficients, {x1, x2}, opts.newton_tol, opts.max_newton);
            if (!polished) continue;
            const std::vector<Cx>& p = *polished;
            if (std::abs(p[0]) < opts.zero_tol || std::abs(p[1]) < opts.zero_tol) continue;
            found.push_back(make_root(f.exponents, f.coefficients, p));
        }
    }
    found = dedupe_roots(std::move(found), opts.dedupe_tol);
    sort_roots(found);
    return found;
}

}  // namespace

SparseSystem make_system(const SupportTuple& t, std::vector<std::vector<Cx>> coefficients) {
    require_input(t.n >= 1 && !t.sets.empty(), "system needs a nonempty tuple");
    require_input(coefficients.size() == t.sets.size(), "one coefficient row per set");
    SparseSystem f;
    f.tuple = t;
    f.coefficients = std::move(coefficients);
    f.exponents.resize(t.sets.size());
    for (size_t i = 0; i < t.sets.size(); ++i) {
        require_input(f.coefficients[i].size() == t.sets[i].size(),
                      "one coefficient per support point");
        f.exponents[i].reserve(t.sets[i].size());
        for (const Point& p : t.sets[i]) {
            std::vector<long> a;
            a.reserve(p.size());
            for (const Int& v : p) a.push_back(to_long(v));
            f.exponents[i].push_back(std::move(a));
        }
    }
    return f;
}

SparseSystem random_system(const SupportTuple& t, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, kTau);
    std::vector<std::vector<Cx>> coeffs(t.sets.size());
    for (size_t i = 0; i < t.sets.size(); ++i) {
        coeffs[i].resize(t.sets[i].size());
        for (Cx& c : coeffs[i]) {
            const double mod = std::exp(0.3 * gauss(rng));
            const double phi = angle(rng);
            c = mod * Cx(std::cos(phi), std::sin(phi));
        }
    }
    return make_system(t, std::move(coeffs));
}

std::vector<Cx> evaluate(const SparseSystem& f, const std::vector<Cx>& x) {
    require_input(static_cast<int>(x.size()) == f.tuple.n, "point dimension mismatch");
    return eval_core(f.exponents, f.coefficients, x);
}

std::vector<std::vector<Cx>> jacobian(const SparseSystem& f, const std::vector<Cx>& x) {
    require_input(static_cast<int>(x.size()) == f.tuple.n, "point dimension mismatch");
    return jac_core(f.exponents, f.coefficients, x);
}

std::vector<double> residual_scale(const SparseSystem& f, const std::vector<Cx>& x) {
    require_input(static_cast<int>(x.size()) == f.tuple.n, "point dimension mismatch");
    return scale_core(f.exponents, f.coefficients, x);
}

std::optional<Root> newton_refine(const SparseSystem& f, std::vector<Cx> x,
                                  const SolveOptions& opts) {
    auto polished = newton_core(f.exponents, f.coefficients, std::move(x), opts.newton_tol,
                                opts.max_newton);
    if (!polished) return std::nullopt;
    for (const Cx& v : *polished)
        if (std::abs(v) < opts.zero_tol) return std::nullopt;
    return make_root(f.exponents, f.coefficients, *polished);
}

std::vector<Root> solve_univariate(const SparseSystem& f, const SolveOptions& opts) {
    require_input(f.tuple.n == 1, "univariate solver needs n = 1");
    require_input(is_normalized(f.tuple), "univariate solver needs a normalized support");
    long deg = 0;
    for (const auto& a : f.exponents[0]) deg = std::max(deg, a[0]);
    require_input(deg >= 1, "univariate support needs a positive exponent");
    std::vector<Cx> dense(static_cast<size_t>(deg) + 1, 0.0);
    for (size_t k = 0; k < f.exponents[0].size(); ++k)
        dense[static_cast<size_t>(f.exponents[0][k][0])] += f.coefficients[0][k];
    double top = 0.0;
    for (const Cx& c : dense) top = std::max(top, std::abs(c));
    if (std::abs(dense[0]) < 1e-14 * top)
        throw DegenerateLeadingCoefficient("constant coefficient vanishes");
    if (std::abs(dense[static_cast<size_t>(deg)]) < 1e-14 * top)
        throw DegenerateLeadingCoefficient("leading coefficient vanishes");
    std::vector<Root> roots;
    for (const Cx& z : dense_roots(dense, opts)) {
        auto polished = newton_core(f.exponents, f.coefficients, {z}, opts.newton_tol,
                                    opts.max_newton);
        if (!polished) throw ConvergenceFailure("root polish failed");
        if (std::abs((*polished)[0]) < opts.zero_tol)
            throw ConvergenceFailure("a root collapsed into zero");
        roots.push_back(make_root(f.exponents, f.coefficients, *polished));
    }
    roots = dedupe_roots(std::move(roots), opts.dedupe_tol);
    if (static_cast<long>(roots.size()) != deg)
        throw ConvergenceFailure("coincident or lost univariate roots");
    sort_roots(roots);
    return roots;
}

std::vector<Root> solve_system_2d(const SparseSystem& f, const SolveOptions& opts) {
    require_input(f.tuple.n == 2 && f.tuple.sets.size() == 2, "bivariate solver needs n = 2");
    const Int expected = mixed_volume_of(f.tuple);
    if (expected == 0) return {};
    static constexpr double kThetas[] = {2.399963, 3.176499, 0.628319, 4.523893};
    std::vector<Root> best;
    for (double theta : kThetas) {
        std::vector<Root> found = solve_2d_once(f, opts, theta, expected);
        if (Int(static_cast<long>(found.size())) == expected) return found;
        if (found.size() > best.size()) best = std::move(found);
    }
    throw CountMismatch("found " + std::to_string(best.size()) + " torus roots, expected " +
                        expected.get_str());
}

std::vector<Root> solve_system(const SparseSystem& f, const SolveOptions& opts) {
    require_input(f.tuple.n <= 2, "numerical solving covers n <= 2");
    if (f.tuple.n == 1) return solve_univariate(f, opts);
    return solve_system_2d(f, opts);
}

SparseSystem CoefficientFamily::at(double s) const {
    std::vector<std::vector<Cx>> coeffs(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        coeffs[i].reserve(paths[i].size());
        for (const CoefficientPath& p : paths[i]) coeffs[i].push_back(p.value(s));
    }
    SparseSystem f;
    f.tuple = tuple;
    f.coefficients = std::move(coeffs);
    f.exponents = exponents;
    return f;
}

CoefficientFamily constant_family(const SparseSystem& f) {
    CoefficientFamily fam;
    fam.tuple = f.tuple;
    fam.exponents = f.exponents;
    fam.paths.resize(f.coefficients.size());
    for (size_t i = 0; i < f.coefficients.size(); ++i)
        for (const Cx c : f.coefficients[i])
            fam.paths[i].push_back({[c](double) { return c; }, [](double) { return Cx(0.0); }});
    return fam;
}

CoefficientFamily segment_family(const SparseSystem& from, const SparseSystem& to) {
    require_input(from.tuple == to.tuple, "segment endpoints share a support");
    CoefficientFamily fam;
    fam.tuple = from.tuple;
    fam.exponents = from.exponents;
    fam.paths.resize(from.coefficients.size());
    for (size_t i = 0; i < from.coefficients.size(); ++i)
        for (size_t k = 0; k < from.coefficients[i].size(); ++k) {
            const Cx a = from.coefficients[i][k];
            const Cx b = to.coefficients[i][k];
            fam.paths[i].push_back({[a, b](double s) { return a + (b - a) * s; },
                                    [a, b](double) { return b - a; }});
        }
    return fam;
}

CoefficientFamily circle_family(const SparseSystem& base, int set, int point, int turns) {
    require_input(set >= 0 && set < static_cast<int>(base.coefficients.size()), "set index");
    require_input(point >= 0 && point < static_cast<int>(base.coefficients[static_cast<size_t>(set)].size()),
                  "point index");
    CoefficientFamily fam = constant_family(base);
    const Cx c = base.coefficients[static_cast<size_t>(set)][static_cast<size_t>(point)];
    const double rate = kTau * static_cast<double>(turns);
    fam.paths[static_cast<size_t>(set)][static_cast<size_t>(point)] = {
        [c, rate](double s) { return c * Cx(std::cos(rate * s), std::sin(rate * s)); },
        [c, rate](double s) {
            return c * Cx(std::cos(rate * s), std::sin(rate * s)) * Cx(0.0, rate);
        }};
    return fam;
}

namespace {

Coefficients family_coeffs(const CoefficientFamily& fam, double s) {
    Coefficients c(fam.paths.size());
    for (size_t i = 0; i < fam.paths.size(); ++i) {
        c[i].reserve(fam.paths[i].size());
        for (const CoefficientPath& p : fam.paths[i]) c[i].push_back(p.value(s));
    }
    return c;
}

Coefficients family_velocity(const CoefficientFamily& fam, double s) {
    Coefficients c(fam.paths.size());
    for (size_t i = 0; i < fam.paths.size(); ++i) {
        c[i].reserve(fam.paths[i].size());
        for (const CoefficientPath& p : fam.paths[i]) c[i].push_back(p.derivative(s));
    }
    return c;
}

// Davidenko right-hand side dx/ds = -J(x)^{-1} (df/ds)(x); false when the
// Jacobian solve fails.
bool velocity(const CoefficientFamily& fam, double s, const std::vector<Cx>& x,
              std::vector<Cx>& out) {
    for (const Cx& v : x)
        if (std::abs(v) < kHardZero) return false;
    const Coefficients cs = family_coeffs(fam, s);
    const Coefficients dcs = family_velocity(fam, s);
    std::vector<Cx> rhs = eval_core(fam.exponents, dcs, x);
    for (Cx& v : rhs) v = -v;
    return solve_linear(jac_core(fam.exponents, cs, x), std::move(rhs), out);
}

}  // namespace

TrackedPath track_path(const CoefficientFamily& family, const std::vector<Cx>& start,
                       const TrackOptions& opts) {
    const size_t n = static_cast<size_t>(family.tuple.n);
    require_input(start.size() == n, "start point dimension mismatch");
    auto at0 = newton_core(family.exponents, family_coeffs(family, 0.0), start, opts.newton_tol,
                           opts.max_newton);
    if (!at0) throw ConvergenceFailure("start is not a root of the family at s = 0");

    TrackedPath path;
    path.start = *at0;
    path.winding.assign(n, 0.0);
    std::vector<Cx> x = *at0;
    double s = 0.0;
    double h = opts.initial_step;
    int successes = 0;
    if (opts.record_trajectory) path.trajectory.push_back({0.0, x});

    while (s < 1.0 - 1e-15) {
        const double hs = std::min(h, 1.0 - s);
        bool ok = true;
        std::vector<Cx> xn = x;
        std::vector<Cx> k1, k2, k3, k4;
        std::vector<Cx> probe(n);
        ok = velocity(family, s, x, k1);
        if (ok) {
            for (size_t v = 0; v < n; ++v) probe[v] = x[v] + 0.5 * hs * k1[v];
            ok = velocity(family, s + 0.5 * hs, probe, k2);
        }
        if (ok) {
            for (size_t v = 0; v < n; ++v) probe[v] = x[v] + 0.5 * hs * k2[v];
            ok = velocity(family, s + 0.5 * hs, probe, k3);
        }
        if (ok) {
            for (size_t v = 0; v < n; ++v) probe[v] = x[v] + hs * k3[v];
            ok = velocity(family, s + hs, probe, k4);
        }
        if (ok) {
            std::vector<Cx> pred(n);
            for (size_t v = 0; v < n; ++v)
                pred[v] = x[v] + hs / 6.0 * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
            auto corrected = newton_core(family.exponents, family_coeffs(family, s + hs),
                                         pred, opts.newton_tol, opts.max_newton);
            if (corrected) {
                // A correction much larger than the predicted motion means the
                // corrector pulled toward a different solution sheet; retry the
                // step at a finer resolution instead of accepting the jump.
                for (size_t v = 0; v < n; ++v) {
                    const double shift = std::abs((*corrected)[v] - pred[v]);
                    const double moved = std::abs(pred[v] - x[v]);
                    if (shift > 0.3 * moved + 0.02 * hs * std::abs(x[v])) {
                        ok = false;
                        break;
                    }
                }
                if (ok) xn = *corrected;
            } else {
                ok = false;
            }
        }
        std::vector<double> dphi(n, 0.0);
        if (ok) {
            for (size_t v = 0; v < n; ++v) {
                if (std::abs(xn[v]) < kHardZero) {
                    ok = false;
                    break;
                }
                dphi[v] = wrapped_angle(std::arg(xn[v]) - std::arg(x[v]));
                if (std::abs(dphi[v]) >= 0.5 * std::numbers::pi) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            for (size_t v = 0; v < n; ++v) path.winding[v] += dphi[v] / kTau;
            x = std::move(xn);
            s += hs;
            ++path.steps;
            path.max_residual = std::max(
                path.max_residual, relative_residual(family.exponents, family_coeffs(family, s), x));
            if (opts.record_trajectory) path.trajectory.push_back({s, x});
            if (++successes >= 5) {
                h = std::min(2.0 * h, opts.max_step);
                successes = 0;
            }
        } else {
            h = 0.5 * hs;
            successes = 0;
            if (h < opts.min_step) throw StepUnderflow("tracking step underflow");
        }
    }
    path.end = std::move(x);
    return path;
}

std::vector<Int> integer_winding(const TrackedPath& path, double tol) {
    std::vector<Int> out;
    out.reserve(path.winding.size());
    for (double w : path.winding) {
        const double r = std::round(w);
        if (std::abs(w - r) > tol)
            throw NumericalError("winding is not integral: " + std::to_string(w));
        out.push_back(Int(static_cast<long>(r)));
    }
    return out;
}

Int product_winding(const std::vector<TrackedPath>& paths, const Covector& b, double tol) {
    double total = 0.0;
    for (const TrackedPath& p : paths) {
        require_input(b.size() == p.winding.size(), "covector dimension mismatch");
        for (size_t v = 0; v < b.size(); ++v) total += b[v].get_d() * p.winding[v];
    }
    const double r = std::round(total);
    if (std::abs(total - r) > tol)
        throw NumericalError("product winding is not integral: " + std::to_string(total));
    return Int(static_cast<long>(r));
}

double log_distance(const std::vector<Cx>& x, const std::vector<Cx>& y) {
    require(x.size() == y.size(), "dimension mismatch");
    double worst = 0.0;
    for (size_t v = 0; v < x.size(); ++v) {
        const double dm = std::abs(std::log(std::abs(x[v])) - std::log(std::abs(y[v])));
        const double da = std::abs(wrapped_angle(std::arg(x[v]) - std::arg(y[v])));
        if (!std::isfinite(dm + da)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, dm + da);
    }
    return worst;
}

std::vector<int> match_to_fiber(const std::vector<Root>& fiber,
                                const std::vector<std::vector<Cx>>& points,
                                const MatchOptions& opts) {
    require_input(fiber.size() == points.size(), "fiber and point counts differ");
    const size_t m = fiber.size();
    std::vector<int> match(m, -1);
    std::vector<bool> taken(m, false);
    for (size_t i = 0; i < m; ++i) {
        double best = 1e300, second = 1e300;
        int arg = -1;
        for (size_t j = 0; j < m; ++j) {
            const double d = log_distance(points[i], fiber[j].x);
            if (d < best) {
                second = best;
                best = d;
                arg = static_cast<int>(j);
            } else if (d < second) {
                second = d;
            }
        }
        if (best >= opts.tol || (m > 1 && second < opts.gap_factor * opts.tol))
            throw NumericalError("ambiguous root matching");
        match[i] = arg;
        if (taken[static_cast<size_t>(arg)])
            throw NumericalError("two paths matched the same root");
        taken[static_cast<size_t>(arg)] = true;
    }
    return match;
}

}  // namespace sparsegal

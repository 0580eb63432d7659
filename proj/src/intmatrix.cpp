#include "sparsegal/intmatrix.hpp"

#include <sstream>
#include <stdexcept>

#include "sparsegal/check.hpp"

namespace sparsegal {

IntMatrix IntMatrix::identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<Int>>& rows) {
    if (rows.empty()) return IntMatrix();
    IntMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        assert(rows[i].size() == rows[0].size());
        for (int j = 0; j < m.cols(); ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::from_columns(const std::vector<std::vector<Int>>& cols) {
    if (cols.empty()) return IntMatrix();
    IntMatrix m(static_cast<int>(cols[0].size()), static_cast<int>(cols.size()));
    for (int j = 0; j < m.cols(); ++j) {
        assert(cols[j].size() == cols[0].size());
        for (int i = 0; i < m.rows(); ++i) m.at(i, j) = cols[j][i];
    }
    return m;
}

std::vector<Int> IntMatrix::row(int i) const {
    std::vector<Int> r(cols_);
    for (int j = 0; j < cols_; ++j) r[j] = at(i, j);
    return r;
}

std::vector<Int> IntMatrix::column(int j) const {
    std::vector<Int> c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

IntMatrix IntMatrix::operator*(const IntMatrix& other) const {
    assert(cols_ == other.rows_);
    IntMatrix p(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const Int& a = at(i, k);
            if (a == 0) continue;
            for (int j = 0; j < other.cols_; ++j) p.at(i, j) += a * other.at(k, j);
        }
    return p;
}

IntMatrix IntMatrix::hstack(const IntMatrix& other) const {
    if (rows_ == 0 && cols_ == 0) return other;
    if (other.rows_ == 0 && other.cols_ == 0) return *this;
    assert(rows_ == other.rows_);
    IntMatrix m(rows_, cols_ + other.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) m.at(i, j) = at(i, j);
        for (int j = 0; j < other.cols_; ++j) m.at(i, cols_ + j) = other.at(i, j);
    }
    return m;
}

void IntMatrix::swap_rows(int a, int b) {
    if (a == b) return;
    for (int j = 0; j < cols_; ++j) std::swap(at(a, j), at(b, j));
}

void IntMatrix::swap_cols(int a, int b) {
    if (a == b) return;
    for (int i = 0; i < rows_; ++i) std::swap(at(i, a), at(i, b));
}

void IntMatrix::add_row(int a, int b, const Int& c) {
    for (int j = 0; j < cols_; ++j) at(a, j) += c * at(b, j);
}

void IntMatrix::add_col(int a, int b, const Int& c) {
    for (int i = 0; i < rows_; ++i) at(i, a) += c * at(i, b);
}

void IntMatrix::negate_row(int a) {
    for (int j = 0; j < cols_; ++j) at(a, j) = -at(a, j);
}

void IntMatrix::negate_col(int a) {
    for (int i = 0; i < rows_; ++i) at(i, a) = -at(i, a);
}

bool IntMatrix::is_zero() const {
    for (const Int& x : data_)
        if (x != 0) return false;
    return true;
}

std::string IntMatrix::str() const {
    std::ostringstream os;
    for (int i = 0; i < rows_; ++i) {
        os << (i == 0 ? "[" : " ");
        for (int j = 0; j < cols_; ++j) os << at(i, j) << (j + 1 < cols_ ? " " : "");
        os << (i + 1 < rows_ ? ";\n" : "]");
    }
    return os.str();
}

std::vector<Int> SmithDecomposition::diagonal() const {
    int k = std::min(s.rows(), s.cols());
    std::vector<Int> d(k);
    for (int i = 0; i < k; ++i) d[i] = s.at(i, i);
    return d;
}

namespace {

struct SmithWork {
    IntMatrix s, u, v, u_inv, v_inv;

    // Elementary operations applied to s together with the transforms.
    // Row operations multiply u on the left; the inverse operation is
    // applied to u_inv on the right so u * u_inv stays the identity.
    void swap_rows(int a, int b) {
        s.swap_rows(a, b);
        u.swap_rows(a, b);
        u_inv.swap_cols(a, b);
    }
    void swap_cols(int a, int b) {
        s.swap_cols(a, b);
        v.swap_cols(a, b);
        v_inv.swap_rows(a, b);
    }
    void add_row(int a, int b, const Int& c) {
        s.add_row(a, b, c);
        u.add_row(a, b, c);
        u_inv.add_col(b, a, -c);
    }
    void add_col(int a, int b, const Int& c) {
        s.add_col(a, b, c);
        v.add_col(a, b, c);
        v_inv.add_row(b, a, -c);
    }
    void negate_row(int a) {
        s.negate_row(a);
        u.negate_row(a);
        u_inv.negate_col(a);
    }

    // Smallest nonzero |entry| in the submatrix starting at (t, t),
    // scanning row-major so ties resolve deterministically.
    bool find_pivot(int t, int& pi, int& pj) const {
        bool found = false;
        Int best;
        for (int i = t; i < s.rows(); ++i)
            for (int j = t; j < s.cols(); ++j) {
                const Int& x = s.at(i, j);
                if (x == 0) continue;
                Int ax = abs(x);
                if (!found || ax < best) {
                    found = true;
                    best = ax;
                    pi = i;
                    pj = j;
                }
            }
        return found;
    }
};

}  // namespace

SmithDecomposition smith_normal_form(const IntMatrix& a) {
    SmithWork w;
    w.s = a;
    w.u = IntMatrix::identity(a.rows());
    w.u_inv = IntMatrix::identity(a.rows());
    w.v = IntMatrix::identity(a.cols());
    w.v_inv = IntMatrix::identity(a.cols());

    int t = 0;
    const int tmax = std::min(a.rows(), a.cols());
    while (t < tmax) {
        int pi, pj;
        if (!w.find_pivot(t, pi, pj)) break;
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);

        bool clean = true;
        for (int i = t + 1; i < w.s.rows(); ++i) {
            if (w.s.at(i, t) == 0) continue;
            Int q = w.s.at(i, t) / w.s.at(t, t);
            if (q != 0) w.add_row(i, t, -q);
            if (w.s.at(i, t) != 0) clean = false;
        }
        for (int j = t + 1; j < w.s.cols(); ++j) {
            if (w.s.at(t, j) == 0) continue;
            Int q = w.s.at(t, j) / w.s.at(t, t);
            if (q != 0) w.add_col(j, t, -q);
            if (w.s.at(t, j) != 0) clean = false;
        }
        if (!clean) continue;  // smaller remainders exist; pick a new pivot

        // Pivot divides its whole row and column; make sure it also divides
        // the rest of the submatrix before moving on.
        bool divides = true;
        for (int i = t + 1; i < w.s.rows() && divides; ++i)
            for (int j = t + 1; j < w.s.cols() && divides; ++j)
                if (w.s.at(i, j) % w.s.at(t, t) != 0) {
                    w.add_row(t, i, 1);
                    divides = false;
                }
        if (!divides) continue;

        if (w.s.at(t, t) < 0) w.negate_row(t);
        ++t;
    }

    SmithDecomposition d;
    d.s = std::move(w.s);
    d.u = std::move(w.u);
    d.v = std::move(w.v);
    d.u_inv = std::move(w.u_inv);
    d.v_inv = std::move(w.v_inv);
    assert(d.u * a * d.v == d.s);
    return d;
}

std::vector<Int> invariant_factors(const IntMatrix& a) {
    std::vector<Int> out;
    for (const Int& x : smith_normal_form(a).diagonal())
        if (x != 0) out.push_back(x);
    return out;
}

int rank_of(const IntMatrix& a) { return static_cast<int>(invariant_factors(a).size()); }

IntMatrix hermite_basis(const IntMatrix& a) {
    const int n = a.cols();
    if (a.rows() != n) throw InternalError("hermite basis expects a square matrix");
    IntMatrix h = a;
    for (int i = 0; i < n; ++i) {
        // fold columns i..n-1 until only column i is nonzero in row i
        while (true) {
            int jmin = -1;
            for (int j = i; j < n; ++j) {
                if (h.at(i, j) == 0) continue;
                if (jmin < 0 || mpz_cmpabs(h.at(i, j).get_mpz_t(), h.at(i, jmin).get_mpz_t()) < 0) jmin = j;
            }
            if (jmin < 0) throw InternalError("hermite basis expects full column rank");
            h.swap_cols(i, jmin);
            bool clean = true;
            for (int j = i + 1; j < n; ++j) {
                if (h.at(i, j) == 0) continue;
                Int q;
                mpz_tdiv_q(q.get_mpz_t(), h.at(i, j).get_mpz_t(), h.at(i, i).get_mpz_t());
                h.add_col(j, i, -q);
                if (h.at(i, j) != 0) clean = false;
            }
            if (clean) break;
        }
        if (h.at(i, i) < 0) h.negate_col(i);
        // reduce the earlier columns so 0 <= h(i,j) < h(i,i)
        for (int j = 0; j < i; ++j) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), h.at(i, j).get_mpz_t(), h.at(i, i).get_mpz_t());
            if (q != 0) h.add_col(j, i, -q);
        }
    }
    return h;
}

std::optional<std::vector<Int>> solve_exact(const IntMatrix& a, const std::vector<Int>& b) {
    assert(static_cast<int>(b.size()) == a.rows());
    SmithDecomposition d = smith_normal_form(a);
    // A x = b  <=>  S y = U b with x = V y.
    std::vector<Int> ub(a.rows(), 0);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.rows(); ++j) ub[i] += d.u.at(i, j) * b[j];
    std::vector<Int> y(a.cols(), 0);
    int k = std::min(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        const Int s = i < k ? d.s.at(i, i) : Int(0);
        if (s == 0) {
            if (ub[i] != 0) return std::nullopt;
        } else {
            if (ub[i] % s != 0) return std::nullopt;
            y[i] = ub[i] / s;
        }
    }
    std::vector<Int> x(a.cols(), 0);
    for (int i = 0; i < a.cols(); ++i)
        for (int j = 0; j < a.cols(); ++j) x[i] += d.v.at(i, j) * y[j];
    return x;
}

Int determinant(const IntMatrix& a) {
    assert(a.rows() == a.cols());
    const int n = a.rows();
    if (n == 0) return 1;
    // Fraction-free Gaussian elimination (Bareiss).
    IntMatrix m = a;
    Int sign = 1, prev = 1;
    for (int t = 0; t < n - 1; ++t) {
        int p = -1;
        for (int i = t; i < n; ++i)
            if (m.at(i, t) != 0) {
                p = i;
                break;
            }
        if (p < 0) return 0;
        if (p != t) {
            m.swap_rows(p, t);
            sign = -sign;
        }
        for (int i = t + 1; i < n; ++i) {
            for (int j = t + 1; j < n; ++j) {
                Int num = m.at(i, j) * m.at(t, t) - m.at(i, t) * m.at(t, j);
                assert(num % prev == 0);
                m.at(i, j) = num / prev;
            }
            m.at(i, t) = 0;
        }
        prev = m.at(t, t);
    }
    return sign * m.at(n - 1, n - 1);
}

}  // namespace sparsegal

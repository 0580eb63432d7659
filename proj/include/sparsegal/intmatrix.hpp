#pragma once

#include <gmpxx.h>

#include <cassert>
#include <optional>
#include <string>
#include <vector>

namespace sparsegal {

using Int = mpz_class;
using Rat = mpq_class;

// Dense matrix of arbitrary-precision integers, row-major.
class IntMatrix {
public:
    IntMatrix() : rows_(0), cols_(0) {}
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}

    static IntMatrix identity(int n);
    static IntMatrix from_rows(const std::vector<std::vector<Int>>& rows);
    static IntMatrix from_columns(const std::vector<std::vector<Int>>& cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Int& at(int i, int j) {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<size_t>(i) * cols_ + j];
    }
    const Int& at(int i, int j) const {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<size_t>(i) * cols_ + j];
    }

    std::vector<Int> row(int i) const;
    std::vector<Int> column(int j) const;

    IntMatrix transpose() const;
    IntMatrix operator*(const IntMatrix& other) const;
    bool operator==(const IntMatrix& other) const = default;

    // Concatenate columns: [this | other]. Row counts must agree.
    IntMatrix hstack(const IntMatrix& other) const;

    void swap_rows(int a, int b);
    void swap_cols(int a, int b);
    // row a += c * row b
    void add_row(int a, int b, const Int& c);
    // col a += c * col b
    void add_col(int a, int b, const Int& c);
    void negate_row(int a);
    void negate_col(int a);

    bool is_zero() const;
    std::string str() const;

private:
    int rows_, cols_;
    std::vector<Int> data_;
};

// U * A * V = S with U, V unimodular and S diagonal, diagonal entries
// nonnegative and each dividing the next.  u_inv and v_inv are the exact
// inverses of u and v, tracked alongside the elimination.
struct SmithDecomposition {
    IntMatrix u, v, s;
    IntMatrix u_inv, v_inv;
    std::vector<Int> diagonal() const;
};

// Pivot choice: smallest nonzero absolute value in the working submatrix,
// ties broken in row-major order, so the decomposition is deterministic.
SmithDecomposition smith_normal_form(const IntMatrix& a);

// Invariant factors: the nonzero diagonal entries of the Smith form.
std::vector<Int> invariant_factors(const IntMatrix& a);

int rank_of(const IntMatrix& a);

// Canonical column form of a nonsingular square basis: lower triangular,
// positive diagonal, each row's earlier entries reduced modulo the pivot.
// Two bases of the same lattice always map to the same matrix.
IntMatrix hermite_basis(const IntMatrix& a);

// Exact integer solution of A x = b, if one exists.
std::optional<std::vector<Int>> solve_exact(const IntMatrix& a, const std::vector<Int>& b);

Int determinant(const IntMatrix& a);

}  // namespace sparsegal

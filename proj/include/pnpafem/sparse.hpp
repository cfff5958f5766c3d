#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnpafem {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row and duplicates are summed at construction.
class SparseMatrix {
public:
    SparseMatrix() = default;
    static SparseMatrix from_triplets(int n_rows, int n_cols, std::span<const Triplet> triplets);

    int rows() const { return n_rows_; }
    int cols() const { return n_cols_; }
    std::int64_t nonzeros() const { return static_cast<std::int64_t>(values_.size()); }

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& column_indices() const { return column_indices_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    std::vector<double> multiply(std::span<const double> x) const;
    void multiply_into(std::span<const double> x, std::span<double> y) const;
    SparseMatrix transposed() const;
    std::vector<double> diagonal() const;
    bool is_symmetric(double rel_tol = 1e-12) const;

    /// Sets row r to a unit row (single 1.0 on the diagonal). Keeps the
    /// stored pattern; off-diagonal entries are zeroed in place.
    void set_unit_row(int r);
    /// Zeroes every stored entry in column c except the diagonal.
    void zero_column_keep_diag(int c);

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> column_indices_;
    std::vector<double> values_;
};

struct SolveOptions {
    enum class Method { automatic, direct, iterative };
    Method method = Method::automatic;
    double rel_tol = 1e-10;
    int max_iter = 0;  // 0: derived from problem size
};

/// Raised when a linear solve cannot meet its residual contract. Carries the
/// achieved relative residual and a context tag naming the sub-problem.
class SolveFailure : public std::runtime_error {
public:
    SolveFailure(std::string what, double achieved_rel_residual)
        : std::runtime_error(std::move(what)), achieved_rel_residual(achieved_rel_residual) {}
    double achieved_rel_residual;
};

/// Solves A x = b so that ||Ax-b|| <= rel_tol * ||b||. Method "automatic"
/// uses Jacobi-preconditioned CG for symmetric matrices and BiCGSTAB
/// otherwise, falling back to sparse LU when the Krylov solver stalls.
std::vector<double> solve(const SparseMatrix& A, std::span<const double> b,
                          const SolveOptions& options = {});

double norm2(std::span<const double> v);

}  // namespace pnpafem

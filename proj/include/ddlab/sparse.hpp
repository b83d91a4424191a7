#pragma once

#include <cstdint>
#include <memory>
#include <iosfwd>
#include <vector>

namespace ddlab {

struct Triplet {
    std::int32_t row = 0;
    std::int32_t col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix (square, zero-based indices).
class SparseCsr {
public:
    SparseCsr() = default;

    /// Builds by summing duplicate (row, col) entries. Duplicates are summed
    /// in their input order, so equal triplet streams give bit-equal results.
    static SparseCsr from_triplets(std::int32_t n, std::vector<Triplet> triplets);

    std::int32_t rows() const { return n_; }
    std::int64_t nonzeros() const { return static_cast<std::int64_t>(values_.size()); }

    const std::vector<std::int64_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::int32_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    double coeff(std::int32_t i, std::int32_t j) const;

    /// y = A x (parallel over row blocks, deterministic).
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;

    std::vector<double> diagonal() const;

    /// Largest relative asymmetry |a_ij - a_ji| / max|a| over stored entries.
    double symmetry_defect() const;

    /// Matrix-market coordinate text dump (1-based indices).
    void dump_matrix_market(std::ostream& out) const;

private:
    std::int32_t n_ = 0;
    std::vector<std::int64_t> row_offsets_;
    std::vector<std::int32_t> cols_;
    std::vector<double> values_;
};

struct CgOptions {
    double tol = 1e-10;   // relative residual target
    std::int64_t max_iter = 0; // 0 -> 50 * sqrt(n)
};

struct CgResult {
    std::vector<double> x;
    std::int64_t iterations = 0;
    double relative_residual = 0.0;
};

/// Zero-fill incomplete Cholesky factor with an escalating diagonal shift on
/// breakdown. Deterministic; reusable across solves with the same matrix.
class IncompleteCholesky {
public:
    explicit IncompleteCholesky(const SparseCsr& a);
    ~IncompleteCholesky();
    IncompleteCholesky(IncompleteCholesky&&) noexcept;
    IncompleteCholesky& operator=(IncompleteCholesky&&) noexcept;

    /// z = (L L^T)^-1 r via the two triangular sweeps.
    void apply(const std::vector<double>& r, std::vector<double>& z) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. When a
/// constraint vector m is given the iteration runs in the hyperplane
/// m.x = 0 (projected residuals and directions), which solves the bordered
/// saddle system with the single constraint row. Passing a prebuilt
/// incomplete-Cholesky factor swaps the preconditioner for iteration-heavy
/// inner solves. Throws NoConvergence with the final residual after
/// max_iter.
CgResult solve_cg(const SparseCsr& A, const std::vector<double>& rhs,
                  const CgOptions& opts = {}, const std::vector<double>* constraint = nullptr,
                  const std::vector<double>* initial_guess = nullptr,
                  const IncompleteCholesky* precond = nullptr);

} // namespace ddlab

#include "ddlab/sparse.hpp"

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <ostream>

namespace ddlab {

SparseCsr SparseCsr::from_triplets(std::int32_t n, std::vector<Triplet> triplets) {
    // stable_sort keeps duplicates in insertion order; their summation order
    // is therefore independent of how the triplet list was produced chunkwise.
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseCsr m;
    m.n_ = n;
    m.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    m.cols_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t i = 0;
    while (i < triplets.size()) {
        const std::int32_t r = triplets[i].row;
        const std::int32_t c = triplets[i].col;
        double v = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
            v += triplets[i++].value;
        m.cols_.push_back(c);
        m.values_.push_back(v);
        m.row_offsets_[static_cast<std::size_t>(r) + 1]++;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r)
        m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
}

double SparseCsr::coeff(std::int32_t i, std::int32_t j) const {
    for (std::int64_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (cols_[static_cast<std::size_t>(k)] == j)
            return values_[static_cast<std::size_t>(k)];
    return 0.0;
}

void SparseCsr::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(static_cast<std::size_t>(n_));
    par::for_chunks(n_, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t r = lo; r < hi; ++r) {
            double acc = 0.0;
            for (std::int64_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
                acc += values_[static_cast<std::size_t>(k)] * x[cols_[static_cast<std::size_t>(k)]];
            y[static_cast<std::size_t>(r)] = acc;
        }
    });
}

std::vector<double> SparseCsr::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
    for (std::int32_t r = 0; r < n_; ++r)
        d[static_cast<std::size_t>(r)] = coeff(r, r);
    return d;
}

double SparseCsr::symmetry_defect() const {
    double amax = 0.0;
    for (double v : values_)
        amax = std::max(amax, std::abs(v));
    if (amax == 0.0)
        return 0.0;
    double defect = 0.0;
    for (std::int32_t r = 0; r < n_; ++r)
        for (std::int64_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            defect = std::max(defect, std::abs(values_[static_cast<std::size_t>(k)] -
                                               coeff(cols_[static_cast<std::size_t>(k)], r)));
    return defect / amax;
}

void SparseCsr::dump_matrix_market(std::ostream& out) const {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << n_ << ' ' << n_ << ' ' << nonzeros() << '\n';
    for (std::int32_t r = 0; r < n_; ++r)
        for (std::int64_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            out << r + 1 << ' ' << cols_[static_cast<std::size_t>(k)] + 1 << ' '
                << values_[static_cast<std::size_t>(k)] << '\n';
}

namespace {

double dot_det(const std::vector<double>& a, const std::vector<double>& b) {
    return par::sum_chunks(static_cast<std::int64_t>(a.size()),
                           [&](std::int64_t i) { return a[static_cast<std::size_t>(i)] *
                                                        b[static_cast<std::size_t>(i)]; });
}

} // namespace

/// Factor on the lower-triangular pattern of A, with a diagonal Manteuffel
/// shift escalated on breakdown. Stores the factor and its transpose for the
/// two triangular sweeps.
struct IncompleteCholesky::Impl {
    explicit Impl(const SparseCsr& a) {
        for (double shift : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
            if (factor(a, shift))
                return;
        }
        throw NoConvergence("incomplete Cholesky broke down at every diagonal shift (matrix"
                            " not positive definite?)");
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        const std::size_t n = diag_.size();
        y_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            for (std::int64_t k = lrow_[i]; k < lrow_[i + 1]; ++k)
                s -= lval_[static_cast<std::size_t>(k)] *
                     y_[static_cast<std::size_t>(lcol_[static_cast<std::size_t>(k)])];
            y_[i] = s / diag_[i];
        }
        z.resize(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y_[ii];
            for (std::int64_t k = urow_[ii]; k < urow_[ii + 1]; ++k)
                s -= uval_[static_cast<std::size_t>(k)] *
                     z[static_cast<std::size_t>(ucol_[static_cast<std::size_t>(k)])];
            z[ii] = s / diag_[ii];
        }
    }

    bool factor(const SparseCsr& a, double rel_shift) {
        const std::int32_t n = a.rows();
        lrow_.assign(static_cast<std::size_t>(n) + 1, 0);
        lcol_.clear();
        lval_.clear();
        diag_.assign(static_cast<std::size_t>(n), 0.0);
        for (std::int32_t i = 0; i < n; ++i) {
            for (std::int64_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
                const std::int32_t j = a.cols()[static_cast<std::size_t>(k)];
                if (j >= i)
                    continue;
                double s = a.values()[static_cast<std::size_t>(k)];
                // Subtract the overlap of rows i and j of the factor.
                std::int64_t pi = lrow_[static_cast<std::size_t>(i)];
                std::int64_t pj = lrow_[static_cast<std::size_t>(j)];
                const std::int64_t ei = static_cast<std::int64_t>(lcol_.size());
                const std::int64_t ej = lrow_[static_cast<std::size_t>(j) + 1];
                while (pi < ei && pj < ej) {
                    const std::int32_t ci = lcol_[static_cast<std::size_t>(pi)];
                    const std::int32_t cj = lcol_[static_cast<std::size_t>(pj)];
                    if (ci == cj) {
                        s -= lval_[static_cast<std::size_t>(pi)] *
                             lval_[static_cast<std::size_t>(pj)];
                        ++pi;
                        ++pj;
                    } else if (ci < cj) {
                        ++pi;
                    } else {
                        ++pj;
                    }
                }
                lcol_.push_back(j);
                lval_.push_back(s / diag_[static_cast<std::size_t>(j)]);
            }
            double d = a.coeff(i, i) * (1.0 + rel_shift);
            for (std::int64_t k = lrow_[static_cast<std::size_t>(i)];
                 k < static_cast<std::int64_t>(lcol_.size()); ++k)
                d -= lval_[static_cast<std::size_t>(k)] * lval_[static_cast<std::size_t>(k)];
            if (!(d > 0.0))
                return false;
            diag_[static_cast<std::size_t>(i)] = std::sqrt(d);
            lrow_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(lcol_.size());
        }
        // Transpose pattern for the backward sweep (strictly upper part).
        urow_.assign(static_cast<std::size_t>(n) + 1, 0);
        ucol_.assign(lcol_.size(), 0);
        uval_.assign(lval_.size(), 0.0);
        for (std::int32_t c : lcol_)
            urow_[static_cast<std::size_t>(c) + 1]++;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
            urow_[i + 1] += urow_[i];
        std::vector<std::int64_t> cursor(urow_.begin(), urow_.end() - 1);
        for (std::int32_t i = 0; i < n; ++i) {
            for (std::int64_t k = lrow_[static_cast<std::size_t>(i)];
                 k < lrow_[static_cast<std::size_t>(i) + 1]; ++k) {
                const std::int32_t j = lcol_[static_cast<std::size_t>(k)];
                const std::int64_t pos = cursor[static_cast<std::size_t>(j)]++;
                ucol_[static_cast<std::size_t>(pos)] = i;
                uval_[static_cast<std::size_t>(pos)] = lval_[static_cast<std::size_t>(k)];
            }
        }
        return true;
    }

    std::vector<std::int64_t> lrow_, urow_;
    std::vector<std::int32_t> lcol_, ucol_;
    std::vector<double> lval_, uval_, diag_;
    mutable std::vector<double> y_;
};

IncompleteCholesky::IncompleteCholesky(const SparseCsr& a) : impl_(std::make_unique<Impl>(a)) {}
IncompleteCholesky::~IncompleteCholesky() = default;
IncompleteCholesky::IncompleteCholesky(IncompleteCholesky&&) noexcept = default;
IncompleteCholesky& IncompleteCholesky::operator=(IncompleteCholesky&&) noexcept = default;

void IncompleteCholesky::apply(const std::vector<double>& r, std::vector<double>& z) const {
    impl_->apply(r, z);
}

namespace {

/// Removes the component along m (orthogonal projection onto m-perp).
void project_out(const std::vector<double>* m, double m_dot_m, std::vector<double>& v) {
    if (m == nullptr || m_dot_m == 0.0)
        return;
    const double c = dot_det(v, *m) / m_dot_m;
    par::for_chunks(static_cast<std::int64_t>(v.size()), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            v[static_cast<std::size_t>(i)] -= c * (*m)[static_cast<std::size_t>(i)];
    });
}

} // namespace

CgResult solve_cg(const SparseCsr& A, const std::vector<double>& rhs, const CgOptions& opts,
                  const std::vector<double>* constraint,
                  const std::vector<double>* initial_guess,
                  const IncompleteCholesky* precond) {
    const std::size_t n = static_cast<std::size_t>(A.rows());
    if (rhs.size() != n)
        throw ConfigError("cg: rhs size does not match the matrix");
    if (n == 0)
        throw EmptySystem("cg: empty system");

    const std::int64_t max_iter =
        opts.max_iter > 0 ? opts.max_iter
                          : static_cast<std::int64_t>(50.0 * std::sqrt(static_cast<double>(n))) + 10;

    std::vector<double> inv_diag;
    if (precond == nullptr) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag)
            d = d > 0.0 ? 1.0 / d : 1.0;
    }

    const double m_dot_m = constraint ? dot_det(*constraint, *constraint) : 0.0;

    CgResult res;
    res.x.assign(n, 0.0);
    if (initial_guess != nullptr) {
        if (initial_guess->size() != n)
            throw ConfigError("cg: initial guess size does not match the matrix");
        res.x = *initial_guess;
        project_out(constraint, m_dot_m, res.x);
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    A.multiply(res.x, q);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = rhs[i] - q[i];
    project_out(constraint, m_dot_m, r);

    std::vector<double> b_proj = rhs;
    project_out(constraint, m_dot_m, b_proj);
    const double bnorm = std::sqrt(dot_det(b_proj, b_proj));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    double rho = 0.0;
    for (std::int64_t it = 0; it < max_iter; ++it) {
        const double rnorm = std::sqrt(dot_det(r, r));
        res.relative_residual = rnorm / bnorm;
        res.iterations = it;
        if (res.relative_residual <= opts.tol)
            return res;

        if (precond) {
            precond->apply(r, z);
        } else {
            par::for_chunks(static_cast<std::int64_t>(n), [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t i = lo; i < hi; ++i)
                    z[static_cast<std::size_t>(i)] =
                        inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
            });
        }
        project_out(constraint, m_dot_m, z);

        const double rho_new = dot_det(r, z);
        if (it == 0) {
            p = z;
        } else {
            const double beta = rho_new / rho;
            par::for_chunks(static_cast<std::int64_t>(n), [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t i = lo; i < hi; ++i)
                    p[static_cast<std::size_t>(i)] =
                        z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
            });
        }
        rho = rho_new;

        A.multiply(p, q);
        project_out(constraint, m_dot_m, q);
        const double pq = dot_det(p, q);
        if (pq <= 0.0)
            throw NoConvergence("cg: search direction with nonpositive curvature (matrix not SPD"
                                " on the feasible subspace)");
        const double alpha = rho / pq;
        par::for_chunks(static_cast<std::int64_t>(n), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                res.x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
                r[static_cast<std::size_t>(i)] -= alpha * q[static_cast<std::size_t>(i)];
            }
        });
    }
    const double rnorm = std::sqrt(dot_det(r, r));
    throw NoConvergence("cg: no convergence after " + std::to_string(max_iter) +
                        " iterations, relative residual " + std::to_string(rnorm / bnorm));
}

} // namespace ddlab

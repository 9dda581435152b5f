#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "ccim/types.hpp"

namespace ccim {

/// Symmetric coupling matrix stored as the strictly-upper triangle (row major)
/// plus a separate diagonal. The diagonal is kept because Jacobi SOR needs
/// 1/J_ii, but local-field and energy sums always skip j = i.
template <typename Scalar>
class PackedSymmetricMatrix {
public:
    PackedSymmetricMatrix() = default;

    explicit PackedSymmetricMatrix(Index n)
        : n_(n), upper_(static_cast<std::size_t>(n) * (n - 1) / 2, Scalar(0)), diag_(Vec<Scalar>::Zero(n)) {
        if (n < 1) fail_validation("PackedSymmetricMatrix: n must be >= 1");
    }

    Index size() const { return n_; }
    const std::vector<Scalar>& upper() const { return upper_; }
    std::vector<Scalar>& upper() { return upper_; }
    const Vec<Scalar>& diag() const { return diag_; }
    Vec<Scalar>& diag() { return diag_; }

    // offset of (i,j) with i < j in the packed strictly-upper storage
    std::size_t upper_index(Index i, Index j) const {
        return static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    Scalar read(Index i, Index j) const {
        if (i == j) return diag_[i];
        if (i > j) std::swap(i, j);
        return upper_[upper_index(i, j)];
    }

    void set(Index i, Index j, Scalar v) {
        if (i == j) {
            diag_[i] = v;
        } else {
            if (i > j) std::swap(i, j);
            upper_[upper_index(i, j)] = v;
        }
    }

    Mat<Scalar> unpack() const {
        Mat<Scalar> m(n_, n_);
        for (Index i = 0; i < n_; ++i) {
            m(i, i) = diag_[i];
            for (Index j = i + 1; j < n_; ++j) {
                m(i, j) = upper_[upper_index(i, j)];
                m(j, i) = m(i, j);
            }
        }
        return m;
    }

private:
    Index n_ = 0;
    std::vector<Scalar> upper_;
    Vec<Scalar> diag_;
};

/// Packs a dense symmetric matrix; rejects inputs asymmetric beyond a 1e-6
/// relative tolerance, naming the worst offending pair.
template <typename Scalar, typename Derived>
PackedSymmetricMatrix<Scalar> pack(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-6) {
    if (m.rows() != m.cols()) fail_validation("pack: matrix is not square");
    const Index n = m.rows();
    const double scale = std::max(1.0, static_cast<double>(m.template lpNorm<Eigen::Infinity>()));
    double worst = 0.0;
    Index wi = 0, wj = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double d = std::abs(static_cast<double>(m(i, j)) - static_cast<double>(m(j, i)));
            if (d > worst) {
                worst = d;
                wi = i;
                wj = j;
            }
        }
    }
    if (worst > rel_tol * scale) {
        std::ostringstream os;
        os << "pack: input asymmetric at (" << wi << "," << wj << "): |" << m(wi, wj) << " - " << m(wj, wi)
           << "| = " << worst;
        fail_validation(os.str());
    }
    PackedSymmetricMatrix<Scalar> p(n);
    for (Index i = 0; i < n; ++i) {
        p.diag()[i] = static_cast<Scalar>(m(i, i));
        for (Index j = i + 1; j < n; ++j) {
            // average the two halves so near-symmetric inputs pack symmetrically
            p.upper()[p.upper_index(i, j)] =
                static_cast<Scalar>((static_cast<double>(m(i, j)) + static_cast<double>(m(j, i))) / 2.0);
        }
    }
    return p;
}

}  // namespace ccim

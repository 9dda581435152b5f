#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ccim/problems.hpp"

namespace ccim {

/// Orthonormal 1-D Haar transform matrix, n a power of two.
inline Eigen::MatrixXd haar_matrix(Index n) {
    if (n < 1 || (n & (n - 1)) != 0) fail_validation("haar_matrix: n must be a power of two");
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = 1.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Index m = 1; m < n; m *= 2) {
        Eigen::MatrixXd next(2 * m, 2 * m);
        next.setZero();
        for (Index r = 0; r < m; ++r) {
            for (Index c = 0; c < m; ++c) {
                next(r, 2 * c) = h(r, c) * inv_sqrt2;
                next(r, 2 * c + 1) = h(r, c) * inv_sqrt2;
            }
            next(m + r, 2 * r) = inv_sqrt2;
            next(m + r, 2 * r + 1) = -inv_sqrt2;
        }
        h = next;
    }
    return h;
}

/// 2-D orthonormal Haar matrix on column-major vectorized w x w images.
inline Eigen::MatrixXd haar_matrix_2d(Index w) {
    const Eigen::MatrixXd h = haar_matrix(w);
    const Index n = w * w;
    Eigen::MatrixXd psi(n, n);
    // vec(H X H^T) = (H (x) H) vec(X), column-major
    for (Index i = 0; i < n; ++i) {
        const Index ri = i % w, ci = i / w;
        for (Index j = 0; j < n; ++j) {
            const Index rj = j % w, cj = j / w;
            psi(i, j) = h(ri, rj) * h(ci, cj);
        }
    }
    return psi;
}

/// Unitary 2-D DFT row for frequency (u, v), over column-major pixels.
inline Eigen::RowVectorXcd dft_row_2d(Index w, Index u, Index v) {
    Eigen::RowVectorXcd row(w * w);
    const double scale = 1.0 / static_cast<double>(w);
    for (Index j = 0; j < w * w; ++j) {
        const Index r = j % w, c = j / w;
        const double phase = -2.0 * M_PI * (static_cast<double>(u * r) + static_cast<double>(v * c)) /
                             static_cast<double>(w);
        row[j] = scale * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return row;
}

/// Full realified 2-D DFT: rows [Re; Im] per frequency, unscaled, so that
/// ||F_real v|| = ||v|| (Parseval) for the unitary transform.
inline Eigen::MatrixXd realified_dft_2d(Index w) {
    const Index n = w * w;
    Eigen::MatrixXd f(2 * n, n);
    Index k = 0;
    for (Index u = 0; u < w; ++u)
        for (Index v = 0; v < w; ++v) {
            const Eigen::RowVectorXcd row = dft_row_2d(w, u, v);
            f.row(2 * k) = row.real();
            f.row(2 * k + 1) = row.imag();
            ++k;
        }
    return f;
}

/// Second-difference operator with zero (Dirichlet) boundaries along image
/// rows (horizontal) or columns (vertical), on column-major vec(X).
inline Eigen::MatrixXd second_difference_2d(Index w, bool horizontal) {
    const Index n = w * w;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        const Index r = j % w, c = j / w;
        d(j, j) = -2.0;
        if (horizontal) {
            if (c > 0) d(j, j - w) = 1.0;
            if (c + 1 < w) d(j, j + w) = 1.0;
        } else {
            if (r > 0) d(j, j - 1) = 1.0;
            if (r + 1 < w) d(j, j + 1) = 1.0;
        }
    }
    return d;
}

namespace detail {

// Weighted sampling without replacement of k-space points, density a 2-D
// normal centered at DC (wraparound distance), std = w/4. DC always kept.
inline std::vector<std::pair<Index, Index>> sample_kspace(Index w, Index count, std::uint64_t seed) {
    const Index n = w * w;
    if (count < 1 || count > n) fail_validation("sample_kspace: count out of range");
    const double sd = static_cast<double>(w) / 4.0;
    std::vector<double> weight(n);
    for (Index u = 0; u < w; ++u)
        for (Index v = 0; v < w; ++v) {
            const double du = std::min<double>(u, w - u);
            const double dv = std::min<double>(v, w - v);
            weight[u * w + v] = std::exp(-(du * du + dv * dv) / (2.0 * sd * sd));
        }
    std::vector<std::pair<Index, Index>> picked;
    picked.reserve(count);
    picked.emplace_back(0, 0);
    weight[0] = 0.0;
    std::uint64_t draw = 0;
    while (static_cast<Index>(picked.size()) < count) {
        double total = 0.0;
        for (double x : weight) total += x;
        const double target = uniform_from_word(noise_word(seed, 7, draw++)) * total;
        double acc = 0.0;
        Index chosen = n - 1;
        for (Index idx = 0; idx < n; ++idx) {
            acc += weight[idx];
            if (weight[idx] > 0 && acc >= target) {
                chosen = idx;
                break;
            }
        }
        if (weight[chosen] == 0.0) continue;
        picked.emplace_back(chosen / w, chosen % w);
        weight[chosen] = 0.0;
    }
    return picked;
}

}  // namespace detail

/// MRI-style instance in Haar space: A = S F Psi^T realified (each selected
/// complex sample contributes Re and Im rows, scaled 1/sqrt(2)),
/// Gamma_1 = D_h Psi^T, Gamma_2 = D_v Psi^T.
template <typename Scalar>
CsInstance<Scalar> gen_cs_image(const Eigen::MatrixXd& image, double alpha, double gamma, double zeta,
                                std::uint64_t seed) {
    const Index w = image.rows();
    if (image.cols() != w || w < 2 || (w & (w - 1)) != 0)
        fail_validation("gen_cs_image: image must be square with power-of-two side");
    if (!(alpha > 0 && alpha <= 1)) fail_validation("gen_cs_image: require 0 < alpha <= 1");
    const Index n = w * w;
    const Index m = static_cast<Index>(std::llround(alpha * static_cast<double>(n)));
    if (m < 1) fail_validation("gen_cs_image: round(alpha*n) < 1");

    const Eigen::MatrixXd psi = haar_matrix_2d(w);
    const Eigen::VectorXd pix = Eigen::Map<const Eigen::VectorXd>(image.data(), n);
    const Eigen::VectorXd x_true = psi * pix;  // Haar coefficients

    const auto samples = detail::sample_kspace(w, m, seed);
    const double s2 = std::sqrt(0.5);
    Eigen::MatrixXd a(2 * m, n);
    for (Index k = 0; k < m; ++k) {
        const Eigen::RowVectorXcd frow = dft_row_2d(w, samples[k].first, samples[k].second);
        const Eigen::RowVectorXcd arow = frow * psi.transpose();
        a.row(2 * k) = s2 * arow.real();
        a.row(2 * k + 1) = s2 * arow.imag();
    }

    Eigen::VectorXd y = a * x_true;
    if (zeta > 0)
        for (Index mu = 0; mu < y.size(); ++mu)
            y[mu] += zeta * normal_at(seed, 8, static_cast<std::uint64_t>(mu));

    std::vector<double> gammas;
    std::vector<Eigen::MatrixXd> ops;
    if (gamma > 0) {
        gammas = {gamma, gamma};
        ops = {second_difference_2d(w, true) * psi.transpose(),
               second_difference_2d(w, false) * psi.transpose()};
    }
    CsInstance<Scalar> out = cs_instance_from<Scalar>(a, y, gammas, ops);
    out.truth_x = x_true;
    out.alpha = alpha;
    out.sparseness = static_cast<double>((x_true.array().abs() > 1e-12).count()) / static_cast<double>(n);
    return out;
}

/// Keep the top fraction of Haar coefficients by magnitude and reconstruct.
inline Eigen::MatrixXd sparsify_haar(const Eigen::MatrixXd& image, double a) {
    const Index w = image.rows();
    if (image.cols() != w || (w & (w - 1)) != 0) fail_validation("sparsify_haar: square power-of-two input");
    const Index n = w * w;
    const Index keep = std::max<Index>(1, static_cast<Index>(std::llround(a * static_cast<double>(n))));
    const Eigen::MatrixXd psi = haar_matrix_2d(w);
    Eigen::VectorXd coef = psi * Eigen::Map<const Eigen::VectorXd>(image.data(), n);
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index(0));
    std::nth_element(order.begin(), order.begin() + keep - 1, order.end(),
                     [&](Index l, Index r) { return std::abs(coef[l]) > std::abs(coef[r]); });
    Eigen::VectorXd kept = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i < keep; ++i) kept[order[i]] = coef[order[i]];
    const Eigen::VectorXd rec = psi.transpose() * kept;
    return Eigen::Map<const Eigen::MatrixXd>(rec.data(), w, w);
}

/// Bundled synthetic phantom: a few nested ellipses, values in [0, 1].
inline Eigen::MatrixXd phantom_image(Index w) {
    Eigen::MatrixXd img = Eigen::MatrixXd::Zero(w, w);
    struct Ellipse {
        double cx, cy, ax, ay, angle, value;
    };
    const Ellipse shapes[] = {
        {0.0, 0.0, 0.72, 0.92, 0.0, 0.8},   {0.0, -0.02, 0.66, 0.87, 0.0, -0.3},
        {0.22, 0.0, 0.11, 0.31, -0.3, 0.25}, {-0.22, 0.0, 0.16, 0.41, 0.3, 0.25},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.3},  {0.0, -0.45, 0.046, 0.046, 0.0, 0.3},
    };
    for (Index r = 0; r < w; ++r) {
        for (Index c = 0; c < w; ++c) {
            const double x = 2.0 * (c + 0.5) / w - 1.0;
            const double y = 2.0 * (r + 0.5) / w - 1.0;
            double v = 0.0;
            for (const auto& e : shapes) {
                const double ca = std::cos(e.angle), sa = std::sin(e.angle);
                const double xr = ca * (x - e.cx) + sa * (y - e.cy);
                const double yr = -sa * (x - e.cx) + ca * (y - e.cy);
                if (xr * xr / (e.ax * e.ax) + yr * yr / (e.ay * e.ay) <= 1.0) v += e.value;
            }
            img(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

}  // namespace ccim

#pragma once

// Shared helpers for the test suites: seeded random matrix families and the
// independent oracles the expected values are frozen against.

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include "odecert/matrix.hpp"

namespace testsupport {

using odecert::Matrix;
using odecert::Vec;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Matrix random_matrix(std::mt19937_64& g, std::size_t n, double scale = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(g, -scale, scale);
    return m;
}

/// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::mt19937_64& g, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix q(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = normal(g);
        for (std::size_t prev = 0; prev < col; ++prev) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += v[i] * q(i, prev);
            for (std::size_t i = 0; i < n; ++i) v[i] -= proj * q(i, prev);
        }
        const double nv = odecert::norm2(v);
        for (std::size_t i = 0; i < n; ++i) q(i, col) = v[i] / nv;
    }
    return q;
}

/// Random Hurwitz matrix with a mix of real eigenvalues and complex pairs,
/// conjugated by a random orthogonal similarity.
inline Matrix random_hurwitz(std::mt19937_64& g, std::size_t n) {
    Matrix d(n, n);
    std::size_t i = 0;
    while (i < n) {
        const double re = uniform(g, -3.0, -0.3);
        if (i + 1 < n && uniform(g, 0.0, 1.0) < 0.5) {
            const double im = uniform(g, 0.2, 2.0);
            d(i, i) = re;
            d(i, i + 1) = im;
            d(i + 1, i) = -im;
            d(i + 1, i + 1) = re;
            i += 2;
        } else {
            d(i, i) = re;
            i += 1;
        }
    }
    const Matrix q = random_orthogonal(g, n);
    return q * d * q.transpose();
}

/// Random symmetric negative definite matrix (spectrum in [-2, -0.5]).
inline Matrix random_symmetric_nd(std::mt19937_64& g, std::size_t n) {
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = uniform(g, -2.0, -0.5);
    const Matrix q = random_orthogonal(g, n);
    Matrix f = q * d * q.transpose();
    // exact symmetry for downstream checks
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (f(i, j) + f(j, i));
            f(i, j) = v;
            f(j, i) = v;
        }
    return f;
}

/// Brute-force definiteness oracle: sample unit vectors and test x' A x < 0.
/// May under-reject, so callers assert only "definite implies all negative".
inline bool sampled_negative_definite(std::mt19937_64& g, const Matrix& a, int samples = 10000) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = a.rows();
    for (int s = 0; s < samples; ++s) {
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = normal(g);
        const double nx = odecert::norm2(x);
        if (nx < 1e-12) continue;
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) q += x[i] * a(i, j) * x[j];
        if (q / (nx * nx) >= 0.0) return false;
    }
    return true;
}

/// Multiset distance between two spectra by greedy nearest matching; robust
/// against the arbitrary ordering of conjugate pairs.
inline double spectrum_distance(const std::vector<std::complex<double>>& a,
                                std::vector<std::complex<double>> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (const auto& z : a) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < b.size(); ++i)
            if (std::abs(b[i] - z) < std::abs(b[best] - z)) best = i;
        d = std::max(d, std::abs(b[best] - z));
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return d;
}

/// Central finite-difference Jacobian with per-coordinate step 1e-6 (1+|x_i|).
template <typename Field>
inline Matrix fd_jacobian(const Field& f, const Vec& x) {
    const std::size_t n = x.size();
    Matrix j(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const double h = 1e-6 * (1.0 + std::abs(x[c]));
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Vec fp = f(xp), fm = f(xm);
        for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    }
    return j;
}

} // namespace testsupport

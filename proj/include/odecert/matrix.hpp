#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "odecert/errors.hpp"

namespace odecert {

using Vec = std::vector<double>;

/// Dense real matrix with row-major storage. Sized for the small systems this
/// library works with (n of order 10); no attempt is made at cache blocking.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("matrix data size does not match shape");
        check_finite();
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw DimensionError("ragged initializer for matrix");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        check_finite();
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator+(const Matrix& o) const {
        require_same_shape(o);
        Matrix r(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] + o.data_[k];
        return r;
    }

    Matrix operator-(const Matrix& o) const {
        require_same_shape(o);
        Matrix r(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] - o.data_[k];
        return r;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw DimensionError("matrix product shape mismatch");
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    Matrix operator*(double s) const {
        Matrix r(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] * s;
        return r;
    }

    Vec operator*(const Vec& x) const {
        if (cols_ != x.size()) throw DimensionError("matrix-vector shape mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void require_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError("matrix shape mismatch");
    }

    void check_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) throw InputError("non-finite matrix entry");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(double s, const Matrix& m) { return m * s; }

/// Entrywise absolute value, shape preserved.
inline Matrix abs_entrywise(const Matrix& m) {
    Matrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = std::abs(m(i, j));
    return r;
}

inline Vec abs_entrywise(const Vec& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::abs(v[i]);
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Solve A X = B for possibly many right-hand sides by Gaussian elimination
/// with partial pivoting. A is consumed by value.
inline Matrix solve_linear_multi(Matrix a, Matrix b) {
    if (!a.square()) throw DimensionError("solve: coefficient matrix must be square");
    if (a.rows() != b.rows()) throw DimensionError("solve: rhs row count mismatch");
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-300)
            throw ConvergenceError("solve: matrix is numerically singular");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
        }
        const double d = a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / d;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
        }
    }
    Matrix x(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = n; i-- > 0;) {
            double s = b(i, j);
            for (std::size_t k = i + 1; k < n; ++k) s -= a(i, k) * x(k, j);
            x(i, j) = s / a(i, i);
        }
    }
    return x;
}

inline Vec solve_linear(const Matrix& a, const Vec& rhs) {
    Matrix b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    Matrix x = solve_linear_multi(a, b);
    Vec out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

/// Spectrum of a square real matrix.
struct EigenResult {
    std::vector<std::complex<double>> eigenvalues; // sorted by (re, im)
    double max_real_part = 0.0;
};

namespace detail {

using CMat = std::vector<std::complex<double>>; // row-major n x n

inline std::complex<double>& at(CMat& h, std::size_t n, std::size_t i, std::size_t j) {
    return h[i * n + j];
}

// Householder reduction to upper Hessenberg form (unitary similarity).
inline void hessenberg(CMat& h, std::size_t n) {
    using C = std::complex<double>;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double colnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(at(h, n, i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm < 1e-300) continue;
        C x0 = at(h, n, k + 1, k);
        C phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : C(1.0, 0.0);
        C alpha = -phase * colnorm;
        std::vector<C> v(n, C(0.0, 0.0));
        for (std::size_t i = k + 1; i < n; ++i) v[i] = at(h, n, i, k);
        v[k + 1] -= alpha;
        double vn2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vn2 += std::norm(v[i]);
        if (vn2 < 1e-300) continue;
        const double tau = 2.0 / vn2;
        // H := P H with P = I - tau v v^H
        for (std::size_t j = 0; j < n; ++j) {
            C s(0.0, 0.0);
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * at(h, n, i, j);
            s *= tau;
            for (std::size_t i = k + 1; i < n; ++i) at(h, n, i, j) -= v[i] * s;
        }
        // H := H P
        for (std::size_t i = 0; i < n; ++i) {
            C s(0.0, 0.0);
            for (std::size_t j = k + 1; j < n; ++j) s += at(h, n, i, j) * v[j];
            s *= tau;
            for (std::size_t j = k + 1; j < n; ++j) at(h, n, i, j) -= s * std::conj(v[j]);
        }
    }
    // clear entries below the first subdiagonal
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) at(h, n, i, j) = 0.0;
}

// Eigenvalues of a complex 2x2 block.
inline std::pair<std::complex<double>, std::complex<double>>
eig2x2(std::complex<double> a, std::complex<double> b, std::complex<double> c,
       std::complex<double> d) {
    const std::complex<double> tr = a + d;
    const std::complex<double> disc = std::sqrt((a - d) * (a - d) * 0.25 + b * c);
    return {tr * 0.5 + disc, tr * 0.5 - disc};
}

} // namespace detail

/// All eigenvalues of a square real matrix via Hessenberg reduction followed
/// by shifted QR iteration in complex arithmetic. Iteration cap 100*n^2.
inline EigenResult eig_general(const Matrix& m) {
    using C = std::complex<double>;
    if (!m.square()) throw DimensionError("eig_general: matrix must be square");
    const std::size_t n = m.rows();
    EigenResult out;
    if (n == 0) throw DimensionError("eig_general: empty matrix");
    detail::CMat h(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h[i * n + j] = C(m(i, j), 0.0);
    detail::hessenberg(h, n);

    const double eps = std::numeric_limits<double>::epsilon();
    const std::size_t max_iter = 100 * n * n;
    std::size_t iter = 0;
    std::size_t stagnant = 0;
    std::vector<C> eig;
    std::size_t hi = n - 1;
    auto H = [&](std::size_t i, std::size_t j) -> C& { return h[i * n + j]; };

    while (true) {
        // deflate converged trailing entries
        while (hi > 0) {
            const double sub = std::abs(H(hi, hi - 1));
            const double scale = std::abs(H(hi, hi)) + std::abs(H(hi - 1, hi - 1));
            if (sub <= eps * std::max(scale, 1e-300)) {
                H(hi, hi - 1) = 0.0;
                eig.push_back(H(hi, hi));
                --hi;
                stagnant = 0;
            } else {
                break;
            }
        }
        if (hi == 0) {
            eig.push_back(H(0, 0));
            break;
        }
        // find the start of the active unreduced block
        std::size_t lo = hi;
        while (lo > 0) {
            const double sub = std::abs(H(lo, lo - 1));
            const double scale = std::abs(H(lo, lo)) + std::abs(H(lo - 1, lo - 1));
            if (sub <= eps * std::max(scale, 1e-300)) {
                H(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) continue; // became 1x1, deflated on the next pass

        if (++iter > max_iter)
            throw ConvergenceError("eig_general: QR iteration did not converge");

        // Wilkinson shift from the trailing 2x2; exceptional shift when stalled
        C sigma;
        if (++stagnant % 16 == 0) {
            sigma = C(0.75 * std::abs(H(hi, hi - 1)), 0.0) + H(hi, hi);
        } else {
            auto [e1, e2] = detail::eig2x2(H(hi - 1, hi - 1), H(hi - 1, hi),
                                           H(hi, hi - 1), H(hi, hi));
            sigma = (std::abs(e1 - H(hi, hi)) < std::abs(e2 - H(hi, hi))) ? e1 : e2;
        }

        // explicit QR step on the active block via complex Givens rotations:
        // (H - sigma I) = Q R, then H := R Q + sigma I
        const std::size_t mdim = hi - lo + 1;
        for (std::size_t i = lo; i <= hi; ++i) H(i, i) -= sigma;
        std::vector<double> cs(mdim - 1);
        std::vector<C> sn(mdim - 1);
        for (std::size_t k = lo; k < hi; ++k) {
            C a = H(k, k);
            C b = H(k + 1, k);
            double r = std::sqrt(std::norm(a) + std::norm(b));
            double c;
            C s;
            if (r < 1e-300) {
                c = 1.0;
                s = C(0.0, 0.0);
            } else {
                c = std::abs(a) / r;
                C phase = (std::abs(a) > 0.0) ? a / std::abs(a) : C(1.0, 0.0);
                s = phase * std::conj(b) / r;
            }
            cs[k - lo] = c;
            sn[k - lo] = s;
            // apply G^H from the left to rows k, k+1; columns run to the full
            // right edge so the coupling block past hi stays consistent
            for (std::size_t j = k; j < n; ++j) {
                C t1 = H(k, j);
                C t2 = H(k + 1, j);
                H(k, j) = c * t1 + s * t2;
                H(k + 1, j) = -std::conj(s) * t1 + c * t2;
            }
        }
        for (std::size_t k = lo; k < hi; ++k) {
            const double c = cs[k - lo];
            const C s = sn[k - lo];
            // apply G from the right to columns k, k+1; rows start at the top
            // of the matrix so the coupling block above lo stays consistent
            for (std::size_t i = 0; i <= std::min(hi, k + 1); ++i) {
                C t1 = H(i, k);
                C t2 = H(i, k + 1);
                H(i, k) = c * t1 + std::conj(s) * t2;
                H(i, k + 1) = -s * t1 + c * t2;
            }
        }
        for (std::size_t i = lo; i <= hi; ++i) H(i, i) += sigma;
    }

    std::sort(eig.begin(), eig.end(), [](const C& a, const C& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    out.eigenvalues = std::move(eig);
    out.max_real_part = out.eigenvalues.front().real();
    for (const auto& e : out.eigenvalues)
        out.max_real_part = std::max(out.max_real_part, e.real());
    return out;
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
/// The input must be symmetric within 1e-12 (relative to its magnitude);
/// it is symmetrized before iterating.
inline double eig_symmetric_max(const Matrix& m) {
    if (!m.square()) throw DimensionError("eig_symmetric_max: matrix must be square");
    const std::size_t n = m.rows();
    const double scale = std::max(m.max_abs(), 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                throw ContractError("eig_symmetric_max: matrix is not symmetric");
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= 1e-15 * std::max(a.max_abs(), 1e-300)) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double mx = a(0, 0);
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, a(i, i));
    return mx;
}

inline double eig_symmetric_min(const Matrix& m) { return -eig_symmetric_max(m * -1.0); }

/// Threshold shared by the Hurwitz test and the definiteness test.
inline constexpr double kDefiniteTol = 1e-9;

/// True iff x' A x < 0 for all x != 0, decided through the symmetric part.
inline bool is_negative_definite(const Matrix& a) {
    if (!a.square()) throw DimensionError("is_negative_definite: matrix must be square");
    const std::size_t n = a.rows();
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return eig_symmetric_max(s) < -kDefiniteTol;
}

inline bool is_hurwitz(const Matrix& a) {
    return eig_general(a).max_real_part < -kDefiniteTol;
}

/// Solve F' P + P F = -I for the symmetric positive definite P that exists
/// exactly when F is Hurwitz. Uses the Kronecker vectorization
/// (I (x) F' + F' (x) I) vec(P) = -vec(I); at the sizes this library handles
/// the O(n^6) cost is irrelevant and no Schur factorization is needed.
inline Matrix solve_lyapunov(const Matrix& f) {
    if (!f.square()) throw DimensionError("solve_lyapunov: matrix must be square");
    const std::size_t n = f.rows();
    if (!is_hurwitz(f))
        throw NotApplicableError("solve_lyapunov: F is not Hurwitz, no certificate exists");

    Matrix k(n * n, n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = i + j * n; // vec index of P(i, j)
            for (std::size_t kk = 0; kk < n; ++kk)
                for (std::size_t l = 0; l < n; ++l) {
                    const std::size_t col = l + kk * n;
                    double v = 0.0;
                    if (j == kk) v += f(l, i); // (I (x) F')
                    if (i == l) v += f(kk, j); // (F' (x) I)
                    if (v != 0.0) k(row, col) = v;
                }
        }
    Vec rhs(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rhs[i + i * n] = -1.0;
    const Vec vec_p = solve_linear(k, rhs);

    Matrix p(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) p(i, j) = vec_p[i + j * n];
    // symmetrize and verify
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = v;
            p(j, i) = v;
        }
    const Matrix residual = f.transpose() * p + p * f + Matrix::identity(n);
    if (residual.max_abs() > 1e-9)
        throw ConvergenceError("solve_lyapunov: residual exceeds 1e-9");
    if (eig_symmetric_min(p) <= 0.0)
        throw ConvergenceError("solve_lyapunov: computed P is not positive definite");
    return p;
}

} // namespace odecert

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "odecert/errors.hpp"
#include "odecert/matrix.hpp"
#include "odecert/system.hpp"

namespace odecert {

/// Strictness margin for every "lambda_R < 1" test.
inline constexpr double kRayleighTol = 1e-9;

/// Nonnegative bound matrix whose entries may individually be marked
/// unbounded. Unbounded entries drop the corresponding constraint and are
/// excluded from row minima and from the Rayleigh matrix R, matching the
/// worked examples that send off-diagonal bounds to infinity.
class BoundMatrix {
public:
    BoundMatrix() = default;

    explicit BoundMatrix(Matrix values)
        : values_(std::move(values)),
          unbounded_(values_.rows() * values_.cols(), 0) {
        validate();
    }

    BoundMatrix(Matrix values, std::vector<std::uint8_t> unbounded)
        : values_(std::move(values)), unbounded_(std::move(unbounded)) {
        if (unbounded_.size() != values_.rows() * values_.cols())
            throw DimensionError("BoundMatrix: flag size mismatch");
        validate();
    }

    /// Diagonal bound s with all off-diagonal entries unbounded; the pattern
    /// used by the tuning heuristic.
    static BoundMatrix diagonal_pattern(std::size_t n, double s) {
        Matrix v(n, n);
        std::vector<std::uint8_t> ub(n * n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            v(i, i) = s;
            ub[i * n + i] = 0;
        }
        return BoundMatrix(std::move(v), std::move(ub));
    }

    std::size_t rows() const { return values_.rows(); }
    std::size_t cols() const { return values_.cols(); }

    bool unbounded(std::size_t i, std::size_t j) const {
        return unbounded_[i * values_.cols() + j] != 0;
    }
    double value(std::size_t i, std::size_t j) const { return values_(i, j); }

    /// Bound usable in comparisons: +inf for unbounded entries.
    double bound(std::size_t i, std::size_t j) const {
        return unbounded(i, j) ? std::numeric_limits<double>::infinity() : values_(i, j);
    }

    /// Minimum over the finite entries of row i; +inf for an all-unbounded row.
    double row_min_finite(std::size_t i) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cols(); ++j)
            if (!unbounded(i, j)) m = std::min(m, values_(i, j));
        return m;
    }

    bool all_finite() const {
        for (auto u : unbounded_)
            if (u) return false;
        return true;
    }

private:
    void validate() const {
        if (!values_.square()) throw DimensionError("BoundMatrix: must be square");
        for (std::size_t i = 0; i < values_.rows(); ++i)
            for (std::size_t j = 0; j < values_.cols(); ++j)
                if (!unbounded(i, j) && values_(i, j) < 0.0)
                    throw ContractError("BoundMatrix: bounds must be nonnegative");
    }

    Matrix values_;
    std::vector<std::uint8_t> unbounded_;
};

/// Rayleigh test value: the largest eigenvalue of
///   R = |P| (lb + lt) + (lb + lt)' |P|
/// assembled over the finite entries of the bound sum (unbounded entries are
/// excluded by the rank-collapse argument of the worked examples).
inline double rayleigh_lambda(const Matrix& p, const BoundMatrix& lambda_bar,
                              const BoundMatrix& lambda_tilde) {
    const std::size_t n = p.rows();
    if (lambda_bar.rows() != n || lambda_tilde.rows() != n)
        throw DimensionError("rayleigh_lambda: shape mismatch");
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (lambda_bar.unbounded(i, j) || lambda_tilde.unbounded(i, j)) continue;
            s(i, j) = lambda_bar.value(i, j) + lambda_tilde.value(i, j);
        }
    const Matrix ap = abs_entrywise(p);
    Matrix r = ap * s + s.transpose() * ap;
    // R is symmetric by construction; symmetrize anyway before the eigensolve
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (r(i, j) + r(j, i));
            r(i, j) = v;
            r(j, i) = v;
        }
    return eig_symmetric_max(r);
}

enum class CertificateMode { fixed_F, jacobian_origin, jacobian_pointwise };

/// The triple (F, lambda_bar, lambda_tilde) plus the solved Lyapunov matrix P
/// and the global Rayleigh value. Immutable once built.
struct CertificateParams {
    CertificateMode mode = CertificateMode::fixed_F;
    Matrix F;
    BoundMatrix lambda_bar;
    BoundMatrix lambda_tilde;
    Matrix P;
    double lambda_R = 0.0;

    bool rayleigh_ok() const { return lambda_R < 1.0 - kRayleighTol; }
};

/// Build certificate parameters for a fixed F (or F = J(0) in origin mode).
/// Throws NotApplicableError when F is not Hurwitz. Enforces the entrywise
/// ordering lambda_bar >= lambda_tilde (an unbounded lambda_tilde entry
/// requires the matching lambda_bar entry to be unbounded as well).
inline CertificateParams make_certificate(Matrix f, BoundMatrix lambda_bar,
                                          BoundMatrix lambda_tilde,
                                          CertificateMode mode = CertificateMode::fixed_F) {
    const std::size_t n = f.rows();
    if (lambda_bar.rows() != n || lambda_tilde.rows() != n)
        throw DimensionError("make_certificate: bound shape mismatch");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (lambda_tilde.unbounded(i, j)) {
                if (!lambda_bar.unbounded(i, j))
                    throw ContractError(
                        "make_certificate: unbounded lambda_tilde entry requires unbounded "
                        "lambda_bar entry");
                continue;
            }
            if (!lambda_bar.unbounded(i, j) &&
                lambda_bar.value(i, j) < lambda_tilde.value(i, j))
                throw ContractError("make_certificate: lambda_bar must dominate lambda_tilde");
        }
    CertificateParams params;
    params.mode = mode;
    params.P = solve_lyapunov(f); // throws NotApplicableError if F not Hurwitz
    params.F = std::move(f);
    params.lambda_bar = std::move(lambda_bar);
    params.lambda_tilde = std::move(lambda_tilde);
    params.lambda_R = rayleigh_lambda(params.P, params.lambda_bar, params.lambda_tilde);
    return params;
}

inline CertificateParams make_origin_certificate(const VectorField& vf,
                                                 BoundMatrix lambda_bar,
                                                 BoundMatrix lambda_tilde) {
    Vec zero(static_cast<std::size_t>(vf.dimension()), 0.0);
    CertificateParams p = make_certificate(vf.jacobian(zero), std::move(lambda_bar),
                                           std::move(lambda_tilde),
                                           CertificateMode::jacobian_origin);
    return p;
}

enum class FailedCondition { none, jac_x_bound, jac_F_bound, rayleigh, hurwitz, domain_error };

inline const char* to_string(FailedCondition c) {
    switch (c) {
    case FailedCondition::none: return "none";
    case FailedCondition::jac_x_bound: return "jac_x_bound";
    case FailedCondition::jac_F_bound: return "jac_F_bound";
    case FailedCondition::rayleigh: return "rayleigh";
    case FailedCondition::hurwitz: return "hurwitz";
    case FailedCondition::domain_error: return "domain_error";
    }
    return "?";
}

struct PointVerdict {
    Vec x;
    bool in_omega = false;
    double lambda_R = std::numeric_limits<double>::infinity();
    bool hurwitz_ok = false;
    FailedCondition failed = FailedCondition::none;

    /// True when the pointwise inequalities hold regardless of the global
    /// Rayleigh gate (failed is then none or rayleigh).
    bool pointwise_ok() const {
        return failed == FailedCondition::none || failed == FailedCondition::rayleigh;
    }
};

struct LemmaVerdict {
    bool certified = false;
    FailedCondition failed = FailedCondition::none;
    std::string reason;
    double lambda_R = 0.0;
    Matrix P;
};

/// Linear-system test: for x' = A x + B under a Hurwitz F with
///   |{-F + A} + B 1'| <= lambda_bar  (entrywise, B broadcast along rows)
///   |B_j| <= min_k lambda_tilde_{jk}
///   lambda_R(R) < 1 with R = |P|(lb+lt) + (lb+lt)'|P|, F'P + PF = -I,
/// A is negative definite. Checks run in that order and the verdict names
/// the first failure.
inline LemmaVerdict lemma1_test(const Matrix& f, const Matrix& a, const Vec& b,
                                const BoundMatrix& lambda_bar,
                                const BoundMatrix& lambda_tilde) {
    const std::size_t n = f.rows();
    if (!f.square() || !a.square() || a.rows() != n || b.size() != n)
        throw DimensionError("lemma1_test: shape mismatch");
    LemmaVerdict v;
    v.P = solve_lyapunov(f); // NotApplicableError when F is not Hurwitz

    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(-f(j, k) + a(j, k) + b[j]) > lambda_bar.bound(j, k)) {
                v.failed = FailedCondition::jac_F_bound;
                v.reason = "|-F + A + B| exceeds lambda_bar at (" + std::to_string(j) + "," +
                           std::to_string(k) + ")";
                return v;
            }
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(b[j]) > lambda_tilde.row_min_finite(j)) {
            v.failed = FailedCondition::jac_x_bound;
            v.reason = "|B| exceeds lambda_tilde row minimum at row " + std::to_string(j);
            return v;
        }
    v.lambda_R = rayleigh_lambda(v.P, lambda_bar, lambda_tilde);
    if (!(v.lambda_R < 1.0 - kRayleighTol)) {
        v.failed = FailedCondition::rayleigh;
        v.reason = "lambda_R = " + std::to_string(v.lambda_R) + " >= 1";
        return v;
    }
    v.certified = true;
    return v;
}

/// Quadratic Lyapunov function for the linear system certified by lemma1_test;
/// V(x) = x' P x with the P of the lemma. Not applicable when the lemma fails.
inline Matrix corollary1_lyapunov(const Matrix& f, const Matrix& a, const Vec& b,
                                  const BoundMatrix& lambda_bar,
                                  const BoundMatrix& lambda_tilde) {
    const LemmaVerdict v = lemma1_test(f, a, b, lambda_bar, lambda_tilde);
    if (!v.certified)
        throw NotApplicableError("corollary1_lyapunov: lemma conditions fail (" + v.reason + ")");
    return v.P;
}

/// Membership of x in the certified region Omega of the main attraction
/// theorem, for fixed or origin-Jacobian F:
///   condition 1: |(J(x) x)_j| <= min over finite lambda_tilde row j
///   condition 2: |J(x) - F| <= lambda_bar - lambda_tilde entrywise (finite
///                entries only)
///   condition 3: the params' global Rayleigh value is < 1
inline PointVerdict omega_membership(const VectorField& vf, const CertificateParams& params,
                                     const Vec& x) {
    const std::size_t n = static_cast<std::size_t>(vf.dimension());
    PointVerdict v;
    v.x = x;
    v.hurwitz_ok = true; // params exist only for Hurwitz F
    v.lambda_R = params.lambda_R;

    const Matrix jac = vf.jacobian(x);
    const Vec jx = jac * x;
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(jx[j]) > params.lambda_tilde.row_min_finite(j)) {
            v.failed = FailedCondition::jac_x_bound;
            return v;
        }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            if (params.lambda_bar.unbounded(j, k)) continue;
            const double gap = params.lambda_bar.value(j, k) - params.lambda_tilde.value(j, k);
            if (std::abs(jac(j, k) - params.F(j, k)) > gap) {
                v.failed = FailedCondition::jac_F_bound;
                return v;
            }
        }
    if (!params.rayleigh_ok()) {
        v.failed = FailedCondition::rayleigh;
        return v;
    }
    v.in_omega = true;
    return v;
}

/// Systematic pointwise test (F = J(x)): J(x) must be Hurwitz, and with
/// P solving J'P + PJ = -I, w = |P| |J x|, H = w 1', R = 2 (H + H'),
/// the largest eigenvalue of R must be < 1.
inline PointVerdict systematic_test(const VectorField& vf, const Vec& x) {
    const std::size_t n = static_cast<std::size_t>(vf.dimension());
    PointVerdict v;
    v.x = x;
    const Matrix jac = vf.jacobian(x);
    if (!is_hurwitz(jac)) {
        v.hurwitz_ok = false;
        v.failed = FailedCondition::hurwitz;
        return v;
    }
    v.hurwitz_ok = true;
    const Matrix p = solve_lyapunov(jac);
    const Vec w = abs_entrywise(p) * abs_entrywise(jac * x);
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = 2.0 * (w[i] + w[j]);
    v.lambda_R = eig_symmetric_max(r);
    if (!(v.lambda_R < 1.0 - kRayleighTol)) {
        v.failed = FailedCondition::rayleigh;
        return v;
    }
    v.in_omega = true;
    return v;
}

/// Rank-2 closed form for the systematic test's Rayleigh value:
/// lambda_R = 2 (sum(w) + sqrt(n) ||w||_2) for w >= 0.
inline double rank2_lambda(const Vec& w) {
    double s = 0.0;
    for (double z : w) s += z;
    return 2.0 * (s + std::sqrt(static_cast<double>(w.size())) * norm2(w));
}

} // namespace odecert

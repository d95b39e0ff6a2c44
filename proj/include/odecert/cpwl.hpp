#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "odecert/errors.hpp"
#include "odecert/matrix.hpp"
#include "odecert/ode.hpp"
#include "odecert/partition.hpp"
#include "odecert/system.hpp"

namespace odecert {

/// Affine interpolant A x + B of f on one simplex, with a componentwise bound
/// lambda on |f(x) - (A x + B)| over the simplex.
struct AffinePiece {
    std::size_t simplex_id = 0;
    Matrix A;
    Vec B;
    Vec lambda;
};

namespace detail {

// Iterate the barycentric sample grid with denominator `den`: for den = 4 this
// covers vertices, edge midpoints and two dyadic refinement levels.
inline void for_each_barycentric(std::size_t n_vertices, int den,
                                 const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> beta(n_vertices, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int remaining) {
        if (idx + 1 == n_vertices) {
            beta[idx] = remaining;
            fn(beta);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            beta[idx] = v;
            rec(idx + 1, remaining - v);
        }
    };
    rec(0, den);
}

} // namespace detail

/// Interpolation system for one simplex: rows [V_k' 1] against f_j(V_k).
/// The returned A, B reproduce f exactly at every vertex.
inline AffinePiece fit_piece(const VectorField& vf, const SimplicialPartition& part,
                             std::size_t simplex_id, double safety_factor = 1.25) {
    const Simplex& s = part.simplex(simplex_id);
    const std::size_t n = static_cast<std::size_t>(part.box().dim());
    Matrix m(n + 1, n + 1);
    Matrix rhs(n + 1, n);
    for (std::size_t k = 0; k <= n; ++k) {
        for (std::size_t j = 0; j < n; ++j) m(k, j) = s.vertices[k][j];
        m(k, n) = 1.0;
        const Vec fv = vf.eval(s.vertices[k]);
        for (std::size_t j = 0; j < n; ++j) rhs(k, j) = fv[j];
    }
    Matrix coef;
    try {
        coef = solve_linear_multi(m, rhs); // column j holds [A_j' ; B_j]
    } catch (const ConvergenceError&) {
        throw ContractError("fit_piece: singular vertex matrix (partition invariant breach)");
    }

    AffinePiece piece;
    piece.simplex_id = simplex_id;
    piece.A = Matrix(n, n);
    piece.B.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) piece.A(j, k) = coef(k, j);
        piece.B[j] = coef(n, j);
    }

    // lambda: sampled deviation (vertices, barycenter, two dyadic midpoint
    // refinement levels) inflated by the safety factor
    Vec lam(n, 0.0);
    auto probe = [&](const Vec& x) {
        const Vec fx = vf.eval(x);
        const Vec ax = piece.A * x;
        for (std::size_t j = 0; j < n; ++j)
            lam[j] = std::max(lam[j], std::abs(fx[j] - (ax[j] + piece.B[j])));
    };
    detail::for_each_barycentric(n + 1, 4, [&](const std::vector<int>& beta) {
        Vec x(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                x[j] += beta[k] * s.vertices[k][j] / 4.0;
        probe(x);
    });
    Vec bary(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            bary[j] += s.vertices[k][j] / static_cast<double>(n + 1);
    probe(bary);
    piece.lambda.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) piece.lambda[j] = safety_factor * lam[j];
    return piece;
}

inline std::vector<AffinePiece> fit_pieces(const VectorField& vf,
                                           const SimplicialPartition& part,
                                           double safety_factor = 1.25) {
    std::vector<AffinePiece> pieces;
    pieces.reserve(part.size());
    for (std::size_t id = 0; id < part.size(); ++id)
        pieces.push_back(fit_piece(vf, part, id, safety_factor));
    return pieces;
}

/// Worst-case planes sandwiching f on a simplex: the slopes coincide with the
/// interpolant's and only the offsets move by +/- lambda, so
///   A x + B_minus <= f(x) - lambda  and  f(x) + lambda <= A x + B_plus
/// hold with equality at the vertices.
struct WorstCasePlanes {
    Matrix A;
    Vec B_plus;
    Vec B_minus;
};

inline WorstCasePlanes worst_case_planes(const VectorField& vf, const SimplicialPartition& part,
                                         std::size_t simplex_id, const Vec& lambda) {
    for (double l : lambda)
        if (l < 0.0) throw ContractError("worst_case_planes: lambda must be nonnegative");
    AffinePiece p = fit_piece(vf, part, simplex_id);
    WorstCasePlanes w;
    w.A = p.A;
    w.B_plus = p.B;
    w.B_minus = p.B;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        w.B_plus[j] += lambda[j];
        w.B_minus[j] -= lambda[j];
    }
    return w;
}

/// Euclidean distance from vertex k of a simplex to the hyperplane spanned by
/// the other vertices. Computed as 1 / |grad beta_k|, the barycentric
/// coordinate gradient being constant over the simplex.
inline double facet_altitude(const SimplicialPartition& part, std::size_t simplex_id,
                             std::size_t vertex_k) {
    const Simplex& s = part.simplex(simplex_id);
    const std::size_t n = static_cast<std::size_t>(part.box().dim());
    Matrix m(n + 1, n + 1);
    for (std::size_t col = 0; col <= n; ++col) {
        for (std::size_t r = 0; r < n; ++r) m(r, col) = s.vertices[col][r];
        m(n, col) = 1.0;
    }
    Matrix rhs(n + 1, 1);
    rhs(vertex_k, 0) = 1.0;
    const Matrix g = solve_linear_multi(m.transpose(), rhs); // [grad beta_k ; offset]
    double g2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) g2 += g(j, 0) * g(j, 0);
    return 1.0 / std::sqrt(g2);
}

/// Attraction test for the CPWL ODE itself: every per-simplex A must be
/// negative definite and no per-piece equilibrium -A^{-1}B may lie on a
/// simplex frontier.
struct Theorem1Verdict {
    bool certified = false;
    std::optional<std::size_t> failing_simplex;
    std::string reason;
};

inline Theorem1Verdict check_theorem1(const SimplicialPartition& part,
                                      const std::vector<AffinePiece>& pieces,
                                      double frontier_tol = 1e-9) {
    Theorem1Verdict v;
    for (const AffinePiece& p : pieces) {
        if (!is_negative_definite(p.A)) {
            v.certified = false;
            v.failing_simplex = p.simplex_id;
            v.reason = "A is not negative definite";
            return v;
        }
    }
    const std::size_t n = static_cast<std::size_t>(part.box().dim());
    for (const AffinePiece& p : pieces) {
        // negative definiteness implies A is nonsingular
        Vec neg_b = p.B;
        for (double& z : neg_b) z = -z;
        const Vec eq = solve_linear(p.A, neg_b);
        const Vec beta = part.barycentric(p.simplex_id, eq);
        // signed Euclidean distance to facet k is beta_k * altitude_k; the
        // equilibrium sits on the frontier when it is inside (or within
        // tolerance of) the simplex and some facet distance vanishes
        bool near_or_inside = true;
        double min_face_dist = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= n; ++k) {
            const double d = beta[k] * facet_altitude(part, p.simplex_id, k);
            if (d < -frontier_tol) near_or_inside = false;
            min_face_dist = std::min(min_face_dist, std::abs(d));
        }
        if (near_or_inside && min_face_dist <= frontier_tol) {
            v.certified = false;
            v.failing_simplex = p.simplex_id;
            v.reason = "piece equilibrium lies on a simplex frontier";
            return v;
        }
    }
    v.certified = true;
    return v;
}

/// One recorded instant of the error-bound co-integration.
struct ErrorBoundSample {
    double t = 0.0;
    Vec x;        // nonlinear trajectory
    Vec x_cpwl;   // CPWL trajectory
    Vec E1, E2;   // bound trajectories
    Vec xi;       // simplex-mismatch correction, zero when the simplices agree
    std::size_t simplex_true = 0;
    std::size_t simplex_cpwl = 0;
    double violation = 0.0; // max componentwise excursion outside [min, max]
};

struct ErrorBoundRun {
    std::vector<ErrorBoundSample> samples;
    bool truncated = false;  // a trajectory left the box; bounds only claimed inside
    double max_violation = 0.0;
};

/// Co-integrate the nonlinear ODE, its CPWL approximation and the error-bound
/// dynamics
///   E1' = A^(i) E1 - xi^{ik} - lambda^(i)
///   E2' = A^(i) E2 - xi^{ik} + lambda^(i)
/// with i the simplex of the true trajectory, k the simplex of the CPWL one
/// and xi^{ik} = (A^(k) - A^(i)) x_cpwl + (B^(k) - B^(i)). The recorded
/// sandwich is min{E1,E2} <= x - x_cpwl <= max{E1,E2} componentwise. xi enters
/// with a minus sign: substituting f(x) = A^(i) x + B^(i) + d, |d| <= lambda,
/// into (x - x_cpwl)' gives exactly A^(i) E - xi^{ik} + d.
inline ErrorBoundRun integrate_error_bounds(const VectorField& vf,
                                            const SimplicialPartition& part,
                                            const std::vector<AffinePiece>& pieces,
                                            const Vec& x0, double horizon,
                                            double step_hint = 0.0) {
    if (!(horizon > 0.0)) throw InputError("integrate_error_bounds: horizon must be positive");
    if (!part.box().contains(x0))
        throw InputError("integrate_error_bounds: x0 outside the partition box");
    const std::size_t n = static_cast<std::size_t>(part.box().dim());

    // step small enough not to skip simplices: delta_min / (4 max||f||),
    // with max||f|| estimated over the partition vertices
    double fmax = 1e-12;
    for (std::size_t id = 0; id < part.size(); ++id)
        for (const Vec& v : part.simplex(id).vertices)
            fmax = std::max(fmax, norm_inf(vf.eval(v)));
    double h = std::min(1e-3 * part.box().diameter(), part.delta_min() / (4.0 * fmax));
    if (step_hint > 0.0) h = std::min(h, step_hint);

    ErrorBoundRun run;
    Vec x = x0, xc = x0, e1(n, 0.0), e2(n, 0.0);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / h));
    const FieldFn f = field_of(vf);

    for (std::size_t s = 0; s <= steps; ++s) {
        const double t = s * h;
        if (!part.box().contains(x) || !part.box().contains(xc)) {
            run.truncated = true;
            break;
        }
        const std::size_t i = part.locate(x);
        const std::size_t k = part.locate(xc);
        const AffinePiece& pi = pieces[i];
        const AffinePiece& pk = pieces[k];
        Vec xi(n, 0.0);
        if (i != k) {
            const Vec a = pk.A * xc;
            const Vec b = pi.A * xc;
            for (std::size_t j = 0; j < n; ++j)
                xi[j] = (a[j] - b[j]) + (pk.B[j] - pi.B[j]);
        }

        ErrorBoundSample sample;
        sample.t = t;
        sample.x = x;
        sample.x_cpwl = xc;
        sample.E1 = e1;
        sample.E2 = e2;
        sample.xi = xi;
        sample.simplex_true = i;
        sample.simplex_cpwl = k;
        double viol = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double err = x[j] - xc[j];
            const double lo = std::min(e1[j], e2[j]);
            const double hi = std::max(e1[j], e2[j]);
            viol = std::max(viol, std::max(lo - err, err - hi));
        }
        sample.violation = std::max(viol, 0.0);
        run.max_violation = std::max(run.max_violation, sample.violation);
        run.samples.push_back(std::move(sample));
        if (s == steps) break;

        // one RK4 step of the coupled system with the active pieces frozen
        auto rhs = [&](const Vec& st) {
            Vec d(4 * n);
            Vec xs(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(n));
            const Vec fx = f(xs);
            for (std::size_t j = 0; j < n; ++j) d[j] = fx[j];
            for (std::size_t j = 0; j < n; ++j) {
                double acc_c = pk.B[j];
                double acc_1 = -xi[j] - pi.lambda[j];
                double acc_2 = -xi[j] + pi.lambda[j];
                for (std::size_t l = 0; l < n; ++l) {
                    acc_c += pk.A(j, l) * st[n + l];
                    acc_1 += pi.A(j, l) * st[2 * n + l];
                    acc_2 += pi.A(j, l) * st[3 * n + l];
                }
                d[n + j] = acc_c;
                d[2 * n + j] = acc_1;
                d[3 * n + j] = acc_2;
            }
            return d;
        };
        Vec st(4 * n);
        for (std::size_t j = 0; j < n; ++j) {
            st[j] = x[j];
            st[n + j] = xc[j];
            st[2 * n + j] = e1[j];
            st[3 * n + j] = e2[j];
        }
        st = detail::rk4_step(rhs, st, h);
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = st[j];
            xc[j] = st[n + j];
            e1[j] = st[2 * n + j];
            e2[j] = st[3 * n + j];
        }
    }
    return run;
}

/// Block matrix of the error-bound dynamics for a simplex pair (i, k):
///   [ A^(i)   A^(k)-A^(i) ]
///   [   0        A^(k)    ]
/// Block triangularity makes its spectrum the union of the spectra of A^(i)
/// and A^(k).
inline Matrix error_block_matrix(const AffinePiece& pi, const AffinePiece& pk) {
    const std::size_t n = pi.A.rows();
    Matrix m(2 * n, 2 * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            m(r, c) = pi.A(r, c);
            m(r, n + c) = pk.A(r, c) - pi.A(r, c);
            m(n + r, n + c) = pk.A(r, c);
        }
    return m;
}

/// Multiset deviation between the block-matrix spectrum and the union of the
/// per-simplex spectra, matched greedily (conjugate pairs carry no canonical
/// order).
inline double block_spectrum_deviation(const AffinePiece& pi, const AffinePiece& pk) {
    auto block = eig_general(error_block_matrix(pi, pk)).eigenvalues;
    auto expected = eig_general(pi.A).eigenvalues;
    auto ek = eig_general(pk.A).eigenvalues;
    expected.insert(expected.end(), ek.begin(), ek.end());
    double dev = 0.0;
    for (const auto& z : block) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < expected.size(); ++i)
            if (std::abs(expected[i] - z) < std::abs(expected[best] - z)) best = i;
        dev = std::max(dev, std::abs(expected[best] - z));
        expected.erase(expected.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return dev;
}

} // namespace odecert

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "odecert/certificates.hpp"
#include "odecert/errors.hpp"
#include "odecert/partition.hpp"
#include "odecert/system.hpp"

namespace odecert {

/// Which membership test a region scan applies at each point.
struct Certificate {
    CertificateMode mode = CertificateMode::jacobian_pointwise;
    std::optional<CertificateParams> params; // required unless pointwise

    static Certificate systematic() { return Certificate{}; }
    static Certificate with_params(CertificateParams p) {
        Certificate c;
        c.mode = p.mode;
        c.params = std::move(p);
        return c;
    }
};

using Segment = std::array<std::array<double, 2>, 2>;

/// Grid of per-point verdicts over a box, sampled at cell centers.
struct RegionEstimate {
    Box box;
    std::vector<int> resolution;
    std::vector<PointVerdict> verdicts; // row-major, last axis fastest
    double certified_fraction = 0.0;
    std::vector<Segment> boundary; // 2D only, filled by extract_boundary_2d

    std::size_t index(const std::vector<int>& cell) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < cell.size(); ++i)
            idx = idx * static_cast<std::size_t>(resolution[i]) + static_cast<std::size_t>(cell[i]);
        return idx;
    }

    Vec cell_center(const std::vector<int>& cell) const {
        Vec x(cell.size());
        for (std::size_t i = 0; i < cell.size(); ++i) {
            const double w = (box.hi(static_cast<int>(i)) - box.lo(static_cast<int>(i))) /
                             resolution[i];
            x[i] = box.lo(static_cast<int>(i)) + (cell[i] + 0.5) * w;
        }
        return x;
    }
};

/// Evaluate the chosen certificate at every cell center. Deterministic and
/// independent of evaluation order; domain errors at individual points are
/// recorded as uncertified verdicts, not raised.
inline RegionEstimate scan_region(const VectorField& vf, const Certificate& cert,
                                  const Box& box, const std::vector<int>& resolution) {
    box.validate();
    if (static_cast<int>(resolution.size()) != box.dim())
        throw InputError("scan_region: resolution count must match box dimension");
    for (int r : resolution)
        if (r < 2) throw InputError("scan_region: resolution must be >= 2 per axis");
    if (cert.mode != CertificateMode::jacobian_pointwise && !cert.params)
        throw InputError("scan_region: certificate parameters required for this mode");

    RegionEstimate est;
    est.box = box;
    est.resolution = resolution;
    std::size_t total = 1;
    for (int r : resolution) total *= static_cast<std::size_t>(r);
    est.verdicts.resize(total);

    std::vector<int> cell(resolution.size(), 0);
    std::size_t certified = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        const Vec x = est.cell_center(cell);
        PointVerdict v;
        try {
            v = (cert.mode == CertificateMode::jacobian_pointwise)
                    ? systematic_test(vf, x)
                    : omega_membership(vf, *cert.params, x);
        } catch (const DomainError&) {
            v = PointVerdict{};
            v.x = x;
            v.failed = FailedCondition::domain_error;
        }
        if (v.in_omega) ++certified;
        est.verdicts[est.index(cell)] = std::move(v);
        for (int i = static_cast<int>(cell.size()) - 1; i >= 0; --i) {
            if (++cell[static_cast<std::size_t>(i)] < resolution[static_cast<std::size_t>(i)]) break;
            cell[static_cast<std::size_t>(i)] = 0;
        }
    }
    est.certified_fraction = static_cast<double>(certified) / static_cast<double>(total);
    return est;
}

using Polyline = std::vector<std::array<double, 2>>;

/// Marching squares over the 2D membership grid with midpoint interpolation
/// on crossed edges. Returns chained polylines and stores the raw segments in
/// the estimate's boundary field.
inline std::vector<Polyline> extract_boundary_2d(RegionEstimate& est) {
    if (est.box.dim() != 2)
        throw InputError("extract_boundary_2d: only 2D estimates are supported");
    const int nx = est.resolution[0];
    const int ny = est.resolution[1];
    auto member = [&](int i, int j) {
        return est.verdicts[est.index({i, j})].in_omega;
    };
    auto center = [&](int i, int j) {
        const Vec c = est.cell_center({i, j});
        return std::array<double, 2>{c[0], c[1]};
    };
    auto mid = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        return std::array<double, 2>{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    };

    est.boundary.clear();
    for (int i = 0; i + 1 < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j) {
            // corners of the dual cell: a=(i,j) b=(i+1,j) c=(i+1,j+1) d=(i,j+1)
            const bool a = member(i, j), b = member(i + 1, j), c = member(i + 1, j + 1),
                       d = member(i, j + 1);
            const int code = (a ? 1 : 0) | (b ? 2 : 0) | (c ? 4 : 0) | (d ? 8 : 0);
            if (code == 0 || code == 15) continue;
            const auto pa = center(i, j), pb = center(i + 1, j), pc = center(i + 1, j + 1),
                       pd = center(i, j + 1);
            const auto ab = mid(pa, pb), bc = mid(pb, pc), cd = mid(pc, pd), da = mid(pd, pa);
            auto add = [&](std::array<double, 2> p, std::array<double, 2> q) {
                est.boundary.push_back({p, q});
            };
            switch (code) {
            case 1: case 14: add(ab, da); break;
            case 2: case 13: add(ab, bc); break;
            case 4: case 11: add(bc, cd); break;
            case 8: case 7:  add(cd, da); break;
            case 3: case 12: add(bc, da); break;
            case 6: case 9:  add(ab, cd); break;
            case 5:  add(ab, da); add(bc, cd); break; // saddle, fixed resolution
            case 10: add(ab, bc); add(cd, da); break;
            default: break;
            }
        }
    }

    // chain segments into polylines by exact endpoint matching
    auto key = [](const std::array<double, 2>& p) {
        return std::pair<double, double>(p[0], p[1]);
    };
    std::multimap<std::pair<double, double>, std::size_t> by_endpoint;
    for (std::size_t s = 0; s < est.boundary.size(); ++s) {
        by_endpoint.emplace(key(est.boundary[s][0]), s);
        by_endpoint.emplace(key(est.boundary[s][1]), s);
    }
    std::vector<bool> used(est.boundary.size(), false);
    std::vector<Polyline> lines;
    for (std::size_t s = 0; s < est.boundary.size(); ++s) {
        if (used[s]) continue;
        used[s] = true;
        Polyline line{est.boundary[s][0], est.boundary[s][1]};
        auto grow_back = [&] {
            bool grew = true;
            while (grew) {
                grew = false;
                auto range = by_endpoint.equal_range(key(line.back()));
                for (auto it = range.first; it != range.second; ++it) {
                    const std::size_t t = it->second;
                    if (used[t]) continue;
                    const auto& seg = est.boundary[t];
                    if (seg[0] == line.back())
                        line.push_back(seg[1]);
                    else if (seg[1] == line.back())
                        line.push_back(seg[0]);
                    else
                        continue;
                    used[t] = true;
                    grew = true;
                    break;
                }
            }
        };
        grow_back();
        std::reverse(line.begin(), line.end());
        grow_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

/// Even-odd containment test of a point against boundary segments.
inline bool encloses_point(const std::vector<Segment>& segments, double x, double y) {
    int crossings = 0;
    for (const auto& s : segments) {
        const double y0 = s[0][1], y1 = s[1][1];
        if ((y0 > y) == (y1 > y)) continue;
        const double t = (y - y0) / (y1 - y0);
        const double xc = s[0][0] + t * (s[1][0] - s[0][0]);
        if (xc > x) ++crossings;
    }
    return (crossings % 2) == 1;
}

/// The asymptotic-stability sub-region: points satisfying only condition 1 of
/// the membership test (|J(x) x| within the lambda_tilde row minima), together
/// with the quadratic Lyapunov form P of the certificate.
struct AsymptoticStabilityRegion {
    RegionEstimate region;
    Matrix P;
};

inline AsymptoticStabilityRegion asymptotic_stability_set(const VectorField& vf,
                                                          const CertificateParams& params,
                                                          const Box& box,
                                                          const std::vector<int>& resolution) {
    if (!params.rayleigh_ok())
        throw ContractError("asymptotic_stability_set: params are not certified (lambda_R >= 1)");
    box.validate();
    const std::size_t n = static_cast<std::size_t>(vf.dimension());
    RegionEstimate est;
    est.box = box;
    est.resolution = resolution;
    std::size_t total = 1;
    for (int r : resolution) total *= static_cast<std::size_t>(r);
    est.verdicts.resize(total);
    std::vector<int> cell(resolution.size(), 0);
    std::size_t certified = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        const Vec x = est.cell_center(cell);
        PointVerdict v;
        v.x = x;
        v.hurwitz_ok = true;
        v.lambda_R = params.lambda_R;
        v.in_omega = true;
        try {
            const Vec jx = vf.jacobian(x) * x;
            for (std::size_t j = 0; j < n; ++j)
                if (std::abs(jx[j]) > params.lambda_tilde.row_min_finite(j)) {
                    v.in_omega = false;
                    v.failed = FailedCondition::jac_x_bound;
                    break;
                }
        } catch (const DomainError&) {
            v.in_omega = false;
            v.failed = FailedCondition::domain_error;
        }
        if (v.in_omega) ++certified;
        est.verdicts[est.index(cell)] = std::move(v);
        for (int i = static_cast<int>(cell.size()) - 1; i >= 0; --i) {
            if (++cell[static_cast<std::size_t>(i)] < resolution[static_cast<std::size_t>(i)]) break;
            cell[static_cast<std::size_t>(i)] = 0;
        }
    }
    est.certified_fraction = static_cast<double>(certified) / static_cast<double>(total);
    return AsymptoticStabilityRegion{std::move(est), params.P};
}

/// Parameter-selection heuristic from the worked Hopf example: scan the scalar
/// scale s over powers of two with the pattern lambda_bar = s I,
/// lambda_tilde = (s/2) I (off-diagonal entries unbounded), keep lambda_R < 1,
/// and pick the s whose certified fraction over a coarse scan of the box is
/// largest. Ties resolve to the larger s.
inline CertificateParams tune_parameters(const VectorField& vf, const Matrix& f,
                                         const Box& box, int coarse_resolution = 31) {
    const std::size_t n = f.rows();
    const Matrix p = solve_lyapunov(f); // NotApplicableError if F is not Hurwitz

    std::optional<CertificateParams> best;
    double best_fraction = -1.0;
    for (int k = -6; k <= 3; ++k) {
        const double s = std::ldexp(1.0, k);
        BoundMatrix lb = BoundMatrix::diagonal_pattern(n, s);
        BoundMatrix lt = BoundMatrix::diagonal_pattern(n, 0.5 * s);
        if (!(rayleigh_lambda(p, lb, lt) < 1.0 - kRayleighTol)) continue;
        CertificateParams cand = make_certificate(f, lb, lt, CertificateMode::fixed_F);
        const RegionEstimate est =
            scan_region(vf, Certificate::with_params(cand), box,
                        std::vector<int>(static_cast<std::size_t>(box.dim()), coarse_resolution));
        if (est.certified_fraction >= best_fraction) {
            best_fraction = est.certified_fraction;
            best = std::move(cand);
        }
    }
    if (!best)
        throw NotApplicableError("tune_parameters: no feasible scale keeps lambda_R < 1");
    return *best;
}

} // namespace odecert

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odecert/errors.hpp"
#include "odecert/matrix.hpp"
#include "odecert/partition.hpp"
#include "odecert/system.hpp"

namespace odecert {

enum class TerminalStatus { converged, escaped_box, horizon_reached, domain_error };

inline const char* to_string(TerminalStatus s) {
    switch (s) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::escaped_box: return "escaped_box";
    case TerminalStatus::horizon_reached: return "horizon_reached";
    case TerminalStatus::domain_error: return "domain_error";
    }
    return "?";
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    TerminalStatus status = TerminalStatus::horizon_reached;
};

using FieldFn = std::function<Vec(const Vec&)>;

struct IntegrationControls {
    enum class Method { rk4_fixed, rkf45_adaptive };
    Method method = Method::rk4_fixed;
    double step = 1e-3;       // fixed-step size (rk4)
    double rtol = 1e-8;       // adaptive tolerances (rkf45)
    double atol = 1e-10;
    double convergence_radius = 1e-4;
    double convergence_dwell = 1.0; // time the radius must be held
    std::optional<Box> escape_box;  // typically the analysis box scaled 10x
    double record_dt = 0.0;         // 0 records every accepted step
};

namespace detail {

inline Vec rk4_step(const FieldFn& f, const Vec& x, double h) {
    const std::size_t n = x.size();
    Vec k1 = f(x);
    Vec tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    Vec k2 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    Vec k3 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    Vec k4 = f(tmp);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Classical Fehlberg 4(5) embedded pair. Returns the 5th-order solution and
// the scaled error estimate.
inline bool rkf45_step(const FieldFn& f, const Vec& x, double h, double rtol, double atol,
                       Vec& out, double& err) {
    const std::size_t n = x.size();
    auto axpy = [&](const Vec& base, std::initializer_list<std::pair<double, const Vec*>> terms) {
        Vec r = base;
        for (const auto& [c, v] : terms)
            for (std::size_t i = 0; i < n; ++i) r[i] += h * c * (*v)[i];
        return r;
    };
    Vec k1 = f(x);
    Vec k2 = f(axpy(x, {{1.0 / 4.0, &k1}}));
    Vec k3 = f(axpy(x, {{3.0 / 32.0, &k1}, {9.0 / 32.0, &k2}}));
    Vec k4 = f(axpy(x, {{1932.0 / 2197.0, &k1}, {-7200.0 / 2197.0, &k2}, {7296.0 / 2197.0, &k3}}));
    Vec k5 = f(axpy(x, {{439.0 / 216.0, &k1}, {-8.0, &k2}, {3680.0 / 513.0, &k3}, {-845.0 / 4104.0, &k4}}));
    Vec k6 = f(axpy(x, {{-8.0 / 27.0, &k1}, {2.0, &k2}, {-3544.0 / 2565.0, &k3},
                        {1859.0 / 4104.0, &k4}, {-11.0 / 40.0, &k5}}));
    Vec x4(n), x5(n);
    err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x4[i] = x[i] + h * (25.0 / 216.0 * k1[i] + 1408.0 / 2565.0 * k3[i] +
                            2197.0 / 4104.0 * k4[i] - 1.0 / 5.0 * k5[i]);
        x5[i] = x[i] + h * (16.0 / 135.0 * k1[i] + 6656.0 / 12825.0 * k3[i] +
                            28561.0 / 56430.0 * k4[i] - 9.0 / 50.0 * k5[i] + 2.0 / 55.0 * k6[i]);
        const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
        err = std::max(err, std::abs(x5[i] - x4[i]) / sc);
    }
    out = std::move(x5);
    return err <= 1.0;
}

} // namespace detail

/// Integrate x' = field(x) from x0 over [0, horizon]. Convergence is declared
/// when ||x|| stays within convergence_radius for convergence_dwell time units;
/// leaving the escape box or a domain error terminates with the matching status.
inline Trajectory integrate(const FieldFn& field, const Vec& x0, double horizon,
                            const IntegrationControls& c) {
    if (!(horizon > 0.0)) throw InputError("integrate: horizon must be positive");
    Trajectory tr;
    Vec x = x0;
    double t = 0.0;
    double inside_since = -1.0;
    double last_recorded = -1.0;

    auto record = [&](double tt, const Vec& xx) {
        if (c.record_dt > 0.0 && last_recorded >= 0.0 && tt - last_recorded < c.record_dt &&
            tt < horizon)
            return;
        tr.times.push_back(tt);
        tr.states.push_back(xx);
        last_recorded = tt;
    };
    auto finite = [](const Vec& v) {
        for (double z : v)
            if (!std::isfinite(z)) return false;
        return true;
    };

    record(t, x);
    if (norm2(x) <= c.convergence_radius) inside_since = 0.0;

    double h = (c.method == IntegrationControls::Method::rk4_fixed) ? c.step
                                                                    : std::min(c.step, horizon);
    while (t < horizon) {
        const double step_h = std::min(h, horizon - t);
        Vec next;
        try {
            if (c.method == IntegrationControls::Method::rk4_fixed) {
                next = detail::rk4_step(field, x, step_h);
            } else {
                double err = 0.0;
                if (!detail::rkf45_step(field, x, step_h, c.rtol, c.atol, next, err)) {
                    h = std::max(0.2 * step_h, 0.9 * step_h * std::pow(1.0 / err, 0.2));
                    if (h < 1e-12) {
                        tr.status = TerminalStatus::domain_error;
                        record(t, x);
                        return tr;
                    }
                    continue; // rejected step
                }
                const double grow = (err > 1e-30) ? 0.9 * std::pow(1.0 / err, 0.2) : 5.0;
                h = step_h * std::clamp(grow, 0.2, 5.0);
            }
        } catch (const DomainError&) {
            tr.status = TerminalStatus::domain_error;
            return tr;
        }
        if (!finite(next)) {
            tr.status = TerminalStatus::domain_error;
            return tr;
        }
        t += step_h;
        x = std::move(next);
        record(t, x);

        if (c.escape_box && !c.escape_box->contains(x)) {
            tr.status = TerminalStatus::escaped_box;
            return tr;
        }
        if (norm2(x) <= c.convergence_radius) {
            if (inside_since < 0.0) inside_since = t;
            if (t - inside_since >= c.convergence_dwell) {
                tr.status = TerminalStatus::converged;
                return tr;
            }
        } else {
            inside_since = -1.0;
        }
    }
    tr.status = TerminalStatus::horizon_reached;
    return tr;
}

inline FieldFn field_of(const VectorField& vf) {
    return [&vf](const Vec& x) { return vf.eval(x); };
}

/// Simulation-based attraction check over a batch of initial points.
struct OracleReport {
    std::vector<bool> converged;         // per point
    std::vector<std::size_t> failures;   // indices of non-converged points
    int n_converged = 0;
    int n_escaped = 0;
    int n_horizon = 0;
    int n_domain_error = 0;

    double converged_fraction() const {
        return converged.empty() ? 0.0
                                 : static_cast<double>(n_converged) /
                                       static_cast<double>(converged.size());
    }
};

inline OracleReport attraction_oracle(const VectorField& vf, const std::vector<Vec>& points,
                                      double horizon, const IntegrationControls& controls) {
    OracleReport rep;
    rep.converged.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Trajectory tr = integrate(field_of(vf), points[i], horizon, controls);
        const bool ok = tr.status == TerminalStatus::converged;
        rep.converged.push_back(ok);
        switch (tr.status) {
        case TerminalStatus::converged: ++rep.n_converged; break;
        case TerminalStatus::escaped_box: ++rep.n_escaped; break;
        case TerminalStatus::horizon_reached: ++rep.n_horizon; break;
        case TerminalStatus::domain_error: ++rep.n_domain_error; break;
        }
        if (!ok) rep.failures.push_back(i);
    }
    return rep;
}

} // namespace odecert

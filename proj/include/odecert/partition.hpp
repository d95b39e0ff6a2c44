#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "odecert/errors.hpp"
#include "odecert/matrix.hpp"

namespace odecert {

/// Axis-aligned box in R^n.
struct Box {
    std::vector<std::array<double, 2>> axes; // [lo, hi] per axis

    int dim() const { return static_cast<int>(axes.size()); }

    double lo(int i) const { return axes[static_cast<std::size_t>(i)][0]; }
    double hi(int i) const { return axes[static_cast<std::size_t>(i)][1]; }

    bool contains(const Vec& x) const {
        for (int i = 0; i < dim(); ++i)
            if (x[static_cast<std::size_t>(i)] < lo(i) || x[static_cast<std::size_t>(i)] > hi(i))
                return false;
        return true;
    }

    double diameter() const {
        double s = 0.0;
        for (const auto& a : axes) s += (a[1] - a[0]) * (a[1] - a[0]);
        return std::sqrt(s);
    }

    Box scaled(double factor) const {
        Box b = *this;
        for (auto& a : b.axes) {
            const double c = 0.5 * (a[0] + a[1]);
            const double h = 0.5 * (a[1] - a[0]) * factor;
            a = {c - h, c + h};
        }
        return b;
    }

    void validate() const {
        if (axes.empty()) throw InputError("box must have at least one axis");
        for (const auto& a : axes) {
            if (!(a[0] < a[1])) throw InputError("degenerate box: lo >= hi");
            if (!std::isfinite(a[0]) || !std::isfinite(a[1]))
                throw InputError("box bounds must be finite");
        }
    }
};

struct Simplex {
    std::vector<Vec> vertices; // n+1 vertices, chain-ordered
};

/// Kuhn (permutation) triangulation of a divided box. Each grid cell is split
/// into n! simplices, one per permutation pi of the axes: the vertex chain
/// starts at the cell's low corner and adds one axis step delta_{pi(k)} at a
/// time, so consecutive vertex differences are single scaled unit vectors.
/// Simplex ids are cell-major with permutations in lexicographic order, which
/// fixes tie-breaking on shared faces.
class SimplicialPartition {
public:
    static SimplicialPartition build(const Box& box, const std::vector<int>& divisions) {
        box.validate();
        if (static_cast<int>(divisions.size()) != box.dim())
            throw InputError("divisions count must match box dimension");
        for (int d : divisions)
            if (d < 1) throw InputError("divisions must be >= 1 per axis");

        SimplicialPartition part;
        part.box_ = box;
        part.divisions_ = divisions;
        const int n = box.dim();
        part.delta_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            part.delta_[static_cast<std::size_t>(i)] =
                (box.hi(i) - box.lo(i)) / divisions[static_cast<std::size_t>(i)];

        std::vector<int> axes(static_cast<std::size_t>(n));
        std::iota(axes.begin(), axes.end(), 0);
        std::vector<std::vector<int>> perms;
        do {
            perms.push_back(axes);
        } while (std::next_permutation(axes.begin(), axes.end()));
        part.perms_ = std::move(perms);

        std::size_t n_cells = 1;
        for (int d : divisions) n_cells *= static_cast<std::size_t>(d);
        part.simplices_.reserve(n_cells * part.perms_.size());

        std::vector<int> cell(static_cast<std::size_t>(n), 0);
        for (std::size_t c = 0; c < n_cells; ++c) {
            Vec base(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                base[static_cast<std::size_t>(i)] =
                    box.lo(i) + cell[static_cast<std::size_t>(i)] * part.delta_[static_cast<std::size_t>(i)];
            for (const auto& p : part.perms_) {
                Simplex s;
                s.vertices.push_back(base);
                for (int k = 0; k < n; ++k) {
                    Vec v = s.vertices.back();
                    v[static_cast<std::size_t>(p[static_cast<std::size_t>(k)])] +=
                        part.delta_[static_cast<std::size_t>(p[static_cast<std::size_t>(k)])];
                    s.vertices.push_back(std::move(v));
                }
                part.simplices_.push_back(std::move(s));
            }
            // advance mixed-radix cell counter, last axis fastest
            for (int i = n - 1; i >= 0; --i) {
                if (++cell[static_cast<std::size_t>(i)] < divisions[static_cast<std::size_t>(i)]) break;
                cell[static_cast<std::size_t>(i)] = 0;
            }
        }
        return part;
    }

    const Box& box() const { return box_; }
    const std::vector<int>& divisions() const { return divisions_; }
    const std::vector<double>& delta() const { return delta_; }
    double delta_min() const {
        return *std::min_element(delta_.begin(), delta_.end());
    }
    std::size_t size() const { return simplices_.size(); }
    const Simplex& simplex(std::size_t id) const { return simplices_[id]; }

    /// Id of the simplex containing x (clamped into the box). Points on shared
    /// faces resolve to the lexicographically smallest permutation.
    std::size_t locate(const Vec& x) const {
        const int n = box_.dim();
        std::size_t cell_linear = 0;
        Vec u(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double t = (x[static_cast<std::size_t>(i)] - box_.lo(i)) / delta_[static_cast<std::size_t>(i)];
            int ci = static_cast<int>(std::floor(t));
            ci = std::clamp(ci, 0, divisions_[static_cast<std::size_t>(i)] - 1);
            u[static_cast<std::size_t>(i)] = t - ci;
            cell_linear = cell_linear * static_cast<std::size_t>(divisions_[static_cast<std::size_t>(i)]) +
                          static_cast<std::size_t>(ci);
        }
        // the containing simplex sorts local coordinates in descending order;
        // ties break toward the lower axis index (lexicographically smaller id)
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ua = u[static_cast<std::size_t>(a)];
            const double ub = u[static_cast<std::size_t>(b)];
            if (ua != ub) return ua > ub;
            return a < b;
        });
        const std::size_t pidx = static_cast<std::size_t>(
            std::lower_bound(perms_.begin(), perms_.end(), order) - perms_.begin());
        return cell_linear * perms_.size() + pidx;
    }

    /// Barycentric coordinates of x with respect to simplex `id`.
    Vec barycentric(std::size_t id, const Vec& x) const {
        const Simplex& s = simplices_[id];
        const std::size_t n = static_cast<std::size_t>(box_.dim());
        Matrix m(n + 1, n + 1);
        for (std::size_t col = 0; col <= n; ++col) {
            for (std::size_t r = 0; r < n; ++r) m(r, col) = s.vertices[col][r];
            m(n, col) = 1.0;
        }
        Vec rhs(n + 1);
        for (std::size_t r = 0; r < n; ++r) rhs[r] = x[r];
        rhs[n] = 1.0;
        return solve_linear(m, rhs);
    }

private:
    Box box_;
    std::vector<int> divisions_;
    std::vector<double> delta_;
    std::vector<std::vector<int>> perms_;
    std::vector<Simplex> simplices_;
};

} // namespace odecert

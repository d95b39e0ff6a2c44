#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "odecert/certificates.hpp"
#include "odecert/cpwl.hpp"
#include "odecert/errors.hpp"
#include "odecert/ode.hpp"
#include "odecert/region.hpp"

namespace odecert {

/// Shortest round-trip decimal form; keeps CSV output byte-stable across runs.
inline std::string fmt(double v) {
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Region CSV: x1,...,xn,in_omega,lambda_R,hurwitz_ok,reason
inline std::string region_csv(const RegionEstimate& est) {
    std::ostringstream out;
    const int n = est.box.dim();
    for (int i = 0; i < n; ++i) out << "x" << (i + 1) << ",";
    out << "in_omega,lambda_R,hurwitz_ok,reason\n";
    for (const PointVerdict& v : est.verdicts) {
        for (double c : v.x) out << fmt(c) << ",";
        out << (v.in_omega ? 1 : 0) << "," << fmt(v.lambda_R) << "," << (v.hurwitz_ok ? 1 : 0)
            << "," << to_string(v.failed) << "\n";
    }
    return out.str();
}

inline std::string boundary_csv(const std::vector<Polyline>& lines) {
    std::ostringstream out;
    out << "polyline,x1,x2\n";
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (const auto& p : lines[i])
            out << i << "," << fmt(p[0]) << "," << fmt(p[1]) << "\n";
    return out.str();
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream out;
    out << "t";
    if (!tr.states.empty())
        for (std::size_t i = 0; i < tr.states.front().size(); ++i) out << ",x" << (i + 1);
    out << "\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        out << fmt(tr.times[k]);
        for (double c : tr.states[k]) out << "," << fmt(c);
        out << "\n";
    }
    return out.str();
}

/// Pieces CSV: simplex id, vertex coordinates, flattened A, B, lambda.
inline std::string pieces_csv(const SimplicialPartition& part,
                              const std::vector<AffinePiece>& pieces) {
    std::ostringstream out;
    const std::size_t n = static_cast<std::size_t>(part.box().dim());
    out << "simplex";
    for (std::size_t v = 0; v <= n; ++v)
        for (std::size_t j = 0; j < n; ++j) out << ",v" << v << "x" << (j + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out << ",A" << (i + 1) << (j + 1);
    for (std::size_t j = 0; j < n; ++j) out << ",B" << (j + 1);
    for (std::size_t j = 0; j < n; ++j) out << ",lambda" << (j + 1);
    out << "\n";
    for (const AffinePiece& p : pieces) {
        out << p.simplex_id;
        const Simplex& s = part.simplex(p.simplex_id);
        for (const Vec& v : s.vertices)
            for (double c : v) out << "," << fmt(c);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out << "," << fmt(p.A(i, j));
        for (double c : p.B) out << "," << fmt(c);
        for (double c : p.lambda) out << "," << fmt(c);
        out << "\n";
    }
    return out.str();
}

/// Static SVG rendering of a 2D region: certified cells as filled rectangles,
/// boundary polylines as paths, unit-scaled viewBox.
inline std::string region_svg(const RegionEstimate& est, const std::vector<Polyline>& lines) {
    if (est.box.dim() != 2) throw InputError("region_svg: only 2D regions are rendered");
    const double x0 = est.box.lo(0), x1 = est.box.hi(0);
    const double y0 = est.box.lo(1), y1 = est.box.hi(1);
    const double w = x1 - x0, h = y1 - y0;
    auto sx = [&](double x) { return (x - x0) / w; };
    auto sy = [&](double y) { return (y1 - y) / h; }; // flip so x2 grows upward
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"#ffffff\" stroke=\"#888888\" "
           "stroke-width=\"0.002\"/>\n";
    const double cw = 1.0 / est.resolution[0];
    const double ch = 1.0 / est.resolution[1];
    std::vector<int> cell(2, 0);
    for (cell[0] = 0; cell[0] < est.resolution[0]; ++cell[0])
        for (cell[1] = 0; cell[1] < est.resolution[1]; ++cell[1]) {
            const PointVerdict& v = est.verdicts[est.index(cell)];
            if (!v.in_omega) continue;
            const Vec c = est.cell_center(cell);
            out << "<rect x=\"" << fmt(sx(c[0]) - 0.5 * cw) << "\" y=\"" << fmt(sy(c[1]) - 0.5 * ch)
                << "\" width=\"" << fmt(cw) << "\" height=\"" << fmt(ch)
                << "\" fill=\"#7db8e8\"/>\n";
        }
    for (const Polyline& line : lines) {
        out << "<path d=\"";
        for (std::size_t i = 0; i < line.size(); ++i)
            out << (i == 0 ? "M" : "L") << fmt(sx(line[i][0])) << " " << fmt(sy(line[i][1]));
        out << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"0.004\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

/// Matrix CSV: one row per line, comma-separated numbers.
inline Matrix read_matrix_csv_text(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cellv;
        while (std::getline(ls, cellv, ',')) {
            try {
                row.push_back(std::stod(cellv));
            } catch (...) {
                throw InputError("bad matrix entry '" + cellv + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("empty matrix file");
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw InputError("ragged matrix file");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

inline Matrix read_matrix_csv(const std::string& path) {
    return read_matrix_csv_text(read_file(path));
}

/// Bound-matrix pair file: n rows of lambda_bar, a blank line, n rows of
/// lambda_tilde. Entries are numbers or the token `inf` (unbounded).
inline std::pair<BoundMatrix, BoundMatrix> read_lambda_file(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<std::vector<std::string>> blocks(1);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string stripped = line;
        if (auto hash = stripped.find('#'); hash != std::string::npos)
            stripped = stripped.substr(0, hash);
        if (stripped.find_first_not_of(" \t\r") == std::string::npos) {
            if (!blocks.back().empty()) blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(stripped);
    }
    if (!blocks.empty() && blocks.back().empty()) blocks.pop_back();
    if (blocks.size() != 2)
        throw InputError("lambda file must hold two blocks separated by a blank line");

    auto parse_block = [](const std::vector<std::string>& lines) {
        const std::size_t n = lines.size();
        Matrix vals(n, n);
        std::vector<std::uint8_t> ub(n * n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::istringstream ls(lines[i]);
            std::string cellv;
            std::size_t j = 0;
            while (std::getline(ls, cellv, ',')) {
                const auto b = cellv.find_first_not_of(" \t");
                const auto e = cellv.find_last_not_of(" \t");
                const std::string tok =
                    b == std::string::npos ? "" : cellv.substr(b, e - b + 1);
                if (j >= n) throw InputError("too many columns in lambda block");
                if (tok == "inf" || tok == "unbounded") {
                    ub[i * n + j] = 1;
                } else {
                    try {
                        vals(i, j) = std::stod(tok);
                    } catch (...) {
                        throw InputError("bad lambda entry '" + tok + "'");
                    }
                }
                ++j;
            }
            if (j != n) throw InputError("lambda block must be square");
        }
        return BoundMatrix(std::move(vals), std::move(ub));
    };
    return {parse_block(blocks[0]), parse_block(blocks[1])};
}

/// Minimal region-CSV reader used by the validation command: returns the
/// points flagged in_omega. Columns before "in_omega" are coordinates.
inline std::vector<Vec> read_certified_points_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty region file");
    std::istringstream hs(line);
    std::string col;
    int n_coords = -1, idx = 0;
    while (std::getline(hs, col, ',')) {
        if (col == "in_omega") {
            n_coords = idx;
            break;
        }
        ++idx;
    }
    if (n_coords < 1) throw InputError("region file lacks an in_omega column");
    std::vector<Vec> points;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string cellv;
        Vec x;
        int flag = -1;
        for (int j = 0; std::getline(ls, cellv, ','); ++j) {
            if (j < n_coords) {
                try {
                    x.push_back(std::stod(cellv));
                } catch (...) {
                    throw InputError("bad coordinate in region file");
                }
            } else if (j == n_coords) {
                flag = (cellv == "1") ? 1 : 0;
                break;
            }
        }
        if (flag < 0 || static_cast<int>(x.size()) != n_coords)
            throw InputError("short row in region file");
        if (flag == 1) points.push_back(std::move(x));
    }
    return points;
}

inline std::string matrix_block(const std::string& name, const Matrix& m) {
    std::ostringstream out;
    out << name << " =\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << "  ";
        for (std::size_t j = 0; j < m.cols(); ++j)
            out << fmt(m(i, j)) << (j + 1 < m.cols() ? " " : "");
        out << "\n";
    }
    return out.str();
}

inline std::string bound_block(const std::string& name, const BoundMatrix& b) {
    std::ostringstream out;
    out << name << " =\n";
    for (std::size_t i = 0; i < b.rows(); ++i) {
        out << "  ";
        for (std::size_t j = 0; j < b.cols(); ++j) {
            if (b.unbounded(i, j))
                out << "inf";
            else
                out << fmt(b.value(i, j));
            out << (j + 1 < b.cols() ? " " : "");
        }
        out << "\n";
    }
    return out.str();
}

} // namespace odecert

#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "odecert/expr.hpp"
#include "odecert/matrix.hpp"

namespace odecert {

namespace detail {

// Recursive-descent expression parser over a single line.
// Precedence: ^  >  unary -  >  * /  >  + -, with ^ right-associative and its
// exponent restricted to constant subtrees.
class ExprParser {
public:
    ExprParser(std::string text, int line, int n_vars, const ParamMap& params)
        : s_(std::move(text)), line_(line), n_vars_(n_vars), params_(params) {}

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        while (true) {
            if (accept('+'))
                e = make_binary(ExprKind::add, e, parse_term());
            else if (accept('-'))
                e = make_binary(ExprKind::sub, e, parse_term());
            else
                return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        while (true) {
            if (accept('*'))
                e = make_binary(ExprKind::mul, e, parse_unary());
            else if (accept('/'))
                e = make_binary(ExprKind::div, e, parse_unary());
            else
                return e;
        }
    }

    ExprPtr parse_unary() {
        if (accept('-')) return make_unary(ExprKind::neg, parse_unary());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (accept('^')) {
            ExprPtr raw_exp = parse_unary(); // right-associative, allows x^-2
            ExprPtr exp = simplify(raw_exp);
            if (exp->kind != ExprKind::constant)
                fail("exponent must be a constant expression");
            return make_binary(ExprKind::pow, base, exp);
        }
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        const char* start = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - start);
        return make_const(v);
    }

    ExprPtr parse_identifier() {
        std::size_t begin = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(begin, pos_ - begin);

        if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt" ||
            name == "abs") {
            if (!accept('(')) fail("expected '(' after function name");
            ExprPtr arg = parse_sum();
            if (!accept(')')) fail("expected ')'");
            ExprKind k = name == "sin"    ? ExprKind::sin_fn
                         : name == "cos"  ? ExprKind::cos_fn
                         : name == "exp"  ? ExprKind::exp_fn
                         : name == "sqrt" ? ExprKind::sqrt_fn
                                          : ExprKind::abs_fn;
            return make_unary(k, arg);
        }
        if (name == "pi") return make_const(std::numbers::pi);
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                const int idx = std::stoi(name.substr(1));
                if (idx < 1 || idx > n_vars_)
                    fail("variable " + name + " out of range for dim " +
                         std::to_string(n_vars_));
                return make_var(idx);
            }
        }
        if (params_.count(name)) return make_param(name);
        fail("unknown identifier '" + name + "'");
    }

    std::string s_;
    std::size_t pos_ = 0;
    int line_;
    int n_vars_;
    const ParamMap& params_;
};

} // namespace detail

/// A parsed autonomous vector field f : R^n -> R^n together with its
/// symbolically differentiated Jacobian. Immutable after construction; safe
/// for concurrent evaluation.
class VectorField {
public:
    int dimension() const { return n_; }
    const ParamMap& parameters() const { return params_; }
    const ExprPtr& component(int j) const { return f_[static_cast<std::size_t>(j)]; }
    const ExprPtr& jacobian_entry(int i, int j) const {
        return jac_[static_cast<std::size_t>(i * n_ + j)];
    }

    Vec eval(const Vec& x) const {
        if (static_cast<int>(x.size()) != n_)
            throw DimensionError("eval_field: point dimension mismatch");
        Vec y(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) y[static_cast<std::size_t>(j)] = odecert::eval(f_[static_cast<std::size_t>(j)], x, params_);
        return y;
    }

    Matrix jacobian(const Vec& x) const {
        if (static_cast<int>(x.size()) != n_)
            throw DimensionError("eval_jacobian: point dimension mismatch");
        Matrix j(static_cast<std::size_t>(n_), static_cast<std::size_t>(n_));
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c)
                j(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                    odecert::eval(jac_[static_cast<std::size_t>(r * n_ + c)], x, params_);
        return j;
    }

    /// Parse a system-definition document:
    ///
    ///   dim = 2
    ///   param mu = -1.0
    ///   f1 = x2
    ///   f2 = -x1 + mu * x2 * (1 - x1^2)
    ///
    /// '#' starts a comment. The origin must be an equilibrium: f(0) = 0
    /// within 1e-12 is checked at load and rejected otherwise.
    static VectorField parse(const std::string& text) {
        VectorField vf;
        std::istringstream in(text);
        std::string raw;
        int line_no = 0;
        std::vector<std::string> f_lines;
        std::vector<int> f_line_nos;
        bool have_dim = false;

        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = raw;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line = line.substr(0, hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected '<key> = <value>'", line_no, 1);
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));

            if (key == "dim") {
                if (have_dim) throw ParseError("duplicate dim line", line_no, 1);
                try {
                    vf.n_ = std::stoi(value);
                } catch (...) {
                    throw ParseError("dim must be an integer", line_no, 1);
                }
                if (vf.n_ < 1) throw ParseError("dim must be >= 1", line_no, 1);
                have_dim = true;
                f_lines.assign(static_cast<std::size_t>(vf.n_), "");
                f_line_nos.assign(static_cast<std::size_t>(vf.n_), 0);
            } else if (key.rfind("param ", 0) == 0 || key.rfind("param\t", 0) == 0) {
                if (!have_dim) throw ParseError("dim must come first", line_no, 1);
                const std::string name = trim(key.substr(6));
                if (name.empty()) throw ParseError("missing parameter name", line_no, 1);
                try {
                    vf.params_[name] = std::stod(value);
                } catch (...) {
                    throw ParseError("parameter value must be a number", line_no, 1);
                }
            } else if (key.size() >= 2 && key[0] == 'f') {
                if (!have_dim) throw ParseError("dim must come first", line_no, 1);
                int k = 0;
                try {
                    k = std::stoi(key.substr(1));
                } catch (...) {
                    throw ParseError("bad component name '" + key + "'", line_no, 1);
                }
                if (k < 1 || k > vf.n_)
                    throw ParseError("component f" + std::to_string(k) +
                                         " out of range for dim " + std::to_string(vf.n_),
                                     line_no, 1);
                if (!f_lines[static_cast<std::size_t>(k - 1)].empty())
                    throw ParseError("duplicate component f" + std::to_string(k), line_no, 1);
                f_lines[static_cast<std::size_t>(k - 1)] = value;
                f_line_nos[static_cast<std::size_t>(k - 1)] = line_no;
            } else {
                throw ParseError("unrecognized line '" + key + "'", line_no, 1);
            }
        }
        if (!have_dim) throw ParseError("missing dim line", line_no == 0 ? 1 : line_no, 1);
        for (int k = 0; k < vf.n_; ++k)
            if (f_lines[static_cast<std::size_t>(k)].empty())
                throw ParseError("missing component f" + std::to_string(k + 1),
                                 line_no == 0 ? 1 : line_no, 1);

        for (int k = 0; k < vf.n_; ++k) {
            detail::ExprParser p(f_lines[static_cast<std::size_t>(k)],
                                 f_line_nos[static_cast<std::size_t>(k)], vf.n_, vf.params_);
            vf.f_.push_back(simplify(p.parse()));
        }

        // standing hypothesis: the origin is an equilibrium
        Vec zero(static_cast<std::size_t>(vf.n_), 0.0);
        for (int k = 0; k < vf.n_; ++k) {
            double v;
            try {
                v = odecert::eval(vf.f_[static_cast<std::size_t>(k)], zero, vf.params_);
            } catch (const DomainError& err) {
                throw EquilibriumError("f" + std::to_string(k + 1) +
                                       " cannot be evaluated at the origin: " + err.what());
            }
            if (std::abs(v) > 1e-12)
                throw EquilibriumError("f(0) != 0: component " + std::to_string(k + 1) +
                                       " evaluates to " + std::to_string(v));
        }

        // symbolic Jacobian, simplified
        vf.jac_.reserve(static_cast<std::size_t>(vf.n_ * vf.n_));
        for (int r = 0; r < vf.n_; ++r)
            for (int c = 0; c < vf.n_; ++c)
                vf.jac_.push_back(simplify(derivative(vf.f_[static_cast<std::size_t>(r)], c + 1)));
        return vf;
    }

    /// Canonical printed form; parse(print(vf)) is structurally identical.
    std::string print() const {
        std::ostringstream out;
        out << "dim = " << n_ << "\n";
        for (const auto& [name, val] : params_) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", val);
            out << "param " << name << " = " << buf << "\n";
        }
        for (int k = 0; k < n_; ++k)
            out << "f" << (k + 1) << " = " << to_string(f_[static_cast<std::size_t>(k)]) << "\n";
        return out.str();
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    int n_ = 0;
    std::vector<ExprPtr> f_;
    ParamMap params_;
    std::vector<ExprPtr> jac_; // row-major d f_i / d x_j
};

} // namespace odecert

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "odecert/errors.hpp"

namespace odecert {

enum class ExprKind {
    constant,
    variable,  // x1..xn, 1-based index
    parameter, // named, bound at evaluation time
    neg,
    sin_fn,
    cos_fn,
    exp_fn,
    sqrt_fn,
    abs_fn,
    add,
    sub,
    mul,
    div,
    pow // exponent restricted to a constant subtree
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    double value = 0.0;   // constant
    int var_index = 0;    // variable
    std::string param;    // parameter
    ExprPtr a, b;         // children; unary ops use a only
};

inline ExprPtr make_const(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::constant;
    e->value = v;
    return e;
}

inline ExprPtr make_var(int index) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::variable;
    e->var_index = index;
    return e;
}

inline ExprPtr make_param(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::parameter;
    e->param = std::move(name);
    return e;
}

inline ExprPtr make_unary(ExprKind k, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    return e;
}

inline ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " produced a non-finite value");
    return v;
}

} // namespace detail

/// Evaluate an expression at x with bound parameters. Division by zero,
/// sqrt of a negative number and overflow raise DomainError. A product with
/// one factor exactly zero absorbs a DomainError from the other factor; this
/// gives removable singularities like x2 * sin(pi/(x1^2+x2^2)) their limit
/// value at the origin.
inline double eval(const ExprPtr& e, const std::vector<double>& x, const ParamMap& params) {
    switch (e->kind) {
    case ExprKind::constant:
        return e->value;
    case ExprKind::variable: {
        const int i = e->var_index;
        if (i < 1 || static_cast<std::size_t>(i) > x.size())
            throw DomainError("variable index out of range at evaluation");
        return x[static_cast<std::size_t>(i - 1)];
    }
    case ExprKind::parameter: {
        auto it = params.find(e->param);
        if (it == params.end())
            throw DomainError("unbound parameter '" + e->param + "'");
        return it->second;
    }
    case ExprKind::neg:
        return -eval(e->a, x, params);
    case ExprKind::sin_fn:
        return std::sin(eval(e->a, x, params));
    case ExprKind::cos_fn:
        return std::cos(eval(e->a, x, params));
    case ExprKind::exp_fn:
        return detail::checked(std::exp(eval(e->a, x, params)), "exp");
    case ExprKind::sqrt_fn: {
        const double v = eval(e->a, x, params);
        if (v < 0.0) throw DomainError("sqrt of a negative value");
        return std::sqrt(v);
    }
    case ExprKind::abs_fn:
        return std::abs(eval(e->a, x, params));
    case ExprKind::add:
        return detail::checked(eval(e->a, x, params) + eval(e->b, x, params), "+");
    case ExprKind::sub:
        return detail::checked(eval(e->a, x, params) - eval(e->b, x, params), "-");
    case ExprKind::mul: {
        bool a_err = false, b_err = false;
        double a = 0.0, b = 0.0;
        try {
            a = eval(e->a, x, params);
        } catch (const DomainError&) {
            a_err = true;
        }
        try {
            b = eval(e->b, x, params);
        } catch (const DomainError&) {
            b_err = true;
        }
        if (a_err && b_err) throw DomainError("both factors of a product are undefined");
        if (a_err) {
            if (b == 0.0) return 0.0;
            throw DomainError("undefined factor in a product");
        }
        if (b_err) {
            if (a == 0.0) return 0.0;
            throw DomainError("undefined factor in a product");
        }
        return detail::checked(a * b, "*");
    }
    case ExprKind::div: {
        const double num = eval(e->a, x, params);
        const double den = eval(e->b, x, params);
        if (den == 0.0) throw DomainError("division by zero");
        return detail::checked(num / den, "/");
    }
    case ExprKind::pow: {
        const double base = eval(e->a, x, params);
        const double ex = eval(e->b, x, params); // constant subtree by construction
        if (base == 0.0 && ex < 0.0) throw DomainError("zero raised to a negative power");
        if (base < 0.0 && ex != std::floor(ex))
            throw DomainError("negative base with non-integer exponent");
        return detail::checked(std::pow(base, ex), "^");
    }
    }
    throw DomainError("unknown expression node");
}

inline bool is_const(const ExprPtr& e, double v) {
    return e->kind == ExprKind::constant && e->value == v;
}

/// Constant folding plus 0/1 identities and double-negation removal.
/// Deliberately not a CAS: rewrites never change where an expression is defined
/// except that multiplication by literal zero collapses (consistent with the
/// zero-factor rule in eval).
inline ExprPtr simplify(const ExprPtr& e) {
    auto fold = [](const ExprPtr& n) -> ExprPtr {
        // fold a node whose children are all constants, when evaluation succeeds
        bool all_const = true;
        if (n->a && n->a->kind != ExprKind::constant) all_const = false;
        if (n->b && n->b->kind != ExprKind::constant) all_const = false;
        if (n->kind == ExprKind::variable || n->kind == ExprKind::parameter) all_const = false;
        if (!all_const || n->kind == ExprKind::constant) return n;
        try {
            return make_const(eval(n, {}, {}));
        } catch (const DomainError&) {
            return n;
        }
    };

    switch (e->kind) {
    case ExprKind::constant:
    case ExprKind::variable:
    case ExprKind::parameter:
        return e;
    default:
        break;
    }
    ExprPtr a = e->a ? simplify(e->a) : nullptr;
    ExprPtr b = e->b ? simplify(e->b) : nullptr;

    switch (e->kind) {
    case ExprKind::neg:
        if (a->kind == ExprKind::neg) return a->a;
        break;
    case ExprKind::add:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
    case ExprKind::sub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return fold(make_unary(ExprKind::neg, b));
        break;
    case ExprKind::mul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        break;
    case ExprKind::div:
        if (is_const(b, 1.0)) return a;
        break;
    case ExprKind::pow:
        if (is_const(b, 1.0)) return a;
        if (is_const(b, 0.0)) return make_const(1.0);
        break;
    default:
        break;
    }
    ExprPtr n = e->b ? make_binary(e->kind, a, b)
                     : make_unary(e->kind, a);
    return fold(n);
}

/// Symbolic derivative with respect to variable index `var` (1-based).
inline ExprPtr derivative(const ExprPtr& e, int var) {
    using K = ExprKind;
    switch (e->kind) {
    case K::constant:
    case K::parameter:
        return make_const(0.0);
    case K::variable:
        return make_const(e->var_index == var ? 1.0 : 0.0);
    case K::neg:
        return make_unary(K::neg, derivative(e->a, var));
    case K::sin_fn:
        return make_binary(K::mul, make_unary(K::cos_fn, e->a), derivative(e->a, var));
    case K::cos_fn:
        return make_binary(K::mul,
                           make_unary(K::neg, make_unary(K::sin_fn, e->a)),
                           derivative(e->a, var));
    case K::exp_fn:
        return make_binary(K::mul, make_unary(K::exp_fn, e->a), derivative(e->a, var));
    case K::sqrt_fn:
        return make_binary(K::div, derivative(e->a, var),
                           make_binary(K::mul, make_const(2.0), make_unary(K::sqrt_fn, e->a)));
    case K::abs_fn:
        // d|u| = (u/|u|) u'; undefined at the kink, which eval reports as a
        // division by zero
        return make_binary(K::mul,
                           make_binary(K::div, e->a, make_unary(K::abs_fn, e->a)),
                           derivative(e->a, var));
    case K::add:
        return make_binary(K::add, derivative(e->a, var), derivative(e->b, var));
    case K::sub:
        return make_binary(K::sub, derivative(e->a, var), derivative(e->b, var));
    case K::mul:
        return make_binary(K::add,
                           make_binary(K::mul, derivative(e->a, var), e->b),
                           make_binary(K::mul, e->a, derivative(e->b, var)));
    case K::div:
        return make_binary(
            K::div,
            make_binary(K::sub,
                        make_binary(K::mul, derivative(e->a, var), e->b),
                        make_binary(K::mul, e->a, derivative(e->b, var))),
            make_binary(K::pow, e->b, make_const(2.0)));
    case K::pow: {
        // exponent is a constant subtree: d(u^c) = c u^(c-1) u'
        const double c = e->b->kind == ExprKind::constant ? e->b->value : eval(e->b, {}, {});
        return make_binary(
            K::mul, make_const(c),
            make_binary(K::mul,
                        make_binary(K::pow, e->a, make_const(c - 1.0)),
                        derivative(e->a, var)));
    }
    }
    throw ContractError("derivative: unknown expression node");
}

inline std::string to_string(const ExprPtr& e) {
    using K = ExprKind;
    switch (e->kind) {
    case K::constant: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", e->value);
        return e->value < 0.0 ? "(" + std::string(buf) + ")" : std::string(buf);
    }
    case K::variable:
        return "x" + std::to_string(e->var_index);
    case K::parameter:
        return e->param;
    case K::neg:
        return "(-" + to_string(e->a) + ")";
    case K::sin_fn:
        return "sin(" + to_string(e->a) + ")";
    case K::cos_fn:
        return "cos(" + to_string(e->a) + ")";
    case K::exp_fn:
        return "exp(" + to_string(e->a) + ")";
    case K::sqrt_fn:
        return "sqrt(" + to_string(e->a) + ")";
    case K::abs_fn:
        return "abs(" + to_string(e->a) + ")";
    case K::add:
        return "(" + to_string(e->a) + " + " + to_string(e->b) + ")";
    case K::sub:
        return "(" + to_string(e->a) + " - " + to_string(e->b) + ")";
    case K::mul:
        return "(" + to_string(e->a) + " * " + to_string(e->b) + ")";
    case K::div:
        return "(" + to_string(e->a) + " / " + to_string(e->b) + ")";
    case K::pow:
        return "(" + to_string(e->a) + " ^ " + to_string(e->b) + ")";
    }
    return "?";
}

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case ExprKind::constant:
        return a->value == b->value;
    case ExprKind::variable:
        return a->var_index == b->var_index;
    case ExprKind::parameter:
        return a->param == b->param;
    default:
        break;
    }
    if (static_cast<bool>(a->a) != static_cast<bool>(b->a)) return false;
    if (static_cast<bool>(a->b) != static_cast<bool>(b->b)) return false;
    if (a->a && !structurally_equal(a->a, b->a)) return false;
    if (a->b && !structurally_equal(a->b, b->b)) return false;
    return true;
}

} // namespace odecert

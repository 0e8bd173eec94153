#pragma once

// Nested differentiation: forward-mode tangents over network inputs composed
// with a reverse sweep over parameters.
//
//   BasicDual<T>   value plus up to kMaxDirections input tangents, generic in
//                  the scalar so it can carry doubles, ForwardGrad<N> numbers
//                  or taped Vars.
//   ForwardGrad<N> forward-mode gradient with N seeded directions; used for
//                  small local Jacobians (per-point PDE residual adjoints).
//   Tape / Var     append-only reverse-mode tape whose node values and local
//                  partials are DualPoints, so parameter gradients of input
//                  derivatives are available after one backward sweep.

#include "shockpinn/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace shockpinn::ad {

inline constexpr std::size_t kMaxDirections = 3;

inline double value_of(double x) noexcept { return x; }

// ---------------------------------------------------------------------------
// ForwardGrad<N>

template <std::size_t N>
struct ForwardGrad {
    double v = 0.0;
    std::array<double, N> g{};

    ForwardGrad() = default;
    ForwardGrad(double value) : v(value) {}  // NOLINT: implicit constants are the point

    static ForwardGrad variable(double value, std::size_t slot) {
        ForwardGrad r(value);
        r.g[slot] = 1.0;
        return r;
    }

    ForwardGrad& operator+=(const ForwardGrad& o) {
        v += o.v;
        for (std::size_t i = 0; i < N; ++i) g[i] += o.g[i];
        return *this;
    }
    ForwardGrad& operator-=(const ForwardGrad& o) {
        v -= o.v;
        for (std::size_t i = 0; i < N; ++i) g[i] -= o.g[i];
        return *this;
    }
    ForwardGrad& operator*=(const ForwardGrad& o) {
        for (std::size_t i = 0; i < N; ++i) g[i] = g[i] * o.v + v * o.g[i];
        v *= o.v;
        return *this;
    }
    ForwardGrad& operator/=(const ForwardGrad& o) {
        const double inv = 1.0 / o.v;
        const double q = v * inv;
        for (std::size_t i = 0; i < N; ++i) g[i] = (g[i] - q * o.g[i]) * inv;
        v = q;
        return *this;
    }
};

template <std::size_t N>
double value_of(const ForwardGrad<N>& x) noexcept { return x.v; }

template <std::size_t N>
ForwardGrad<N> operator-(ForwardGrad<N> a) {
    a.v = -a.v;
    for (auto& gi : a.g) gi = -gi;
    return a;
}
template <std::size_t N>
ForwardGrad<N> operator+(ForwardGrad<N> a, const ForwardGrad<N>& b) { return a += b; }
template <std::size_t N>
ForwardGrad<N> operator-(ForwardGrad<N> a, const ForwardGrad<N>& b) { return a -= b; }
template <std::size_t N>
ForwardGrad<N> operator*(ForwardGrad<N> a, const ForwardGrad<N>& b) { return a *= b; }
template <std::size_t N>
ForwardGrad<N> operator/(ForwardGrad<N> a, const ForwardGrad<N>& b) { return a /= b; }
template <std::size_t N>
ForwardGrad<N> operator+(ForwardGrad<N> a, double b) { a.v += b; return a; }
template <std::size_t N>
ForwardGrad<N> operator+(double b, ForwardGrad<N> a) { a.v += b; return a; }
template <std::size_t N>
ForwardGrad<N> operator-(ForwardGrad<N> a, double b) { a.v -= b; return a; }
template <std::size_t N>
ForwardGrad<N> operator-(double b, const ForwardGrad<N>& a) { return -a + b; }
template <std::size_t N>
ForwardGrad<N> operator*(ForwardGrad<N> a, double b) {
    a.v *= b;
    for (auto& gi : a.g) gi *= b;
    return a;
}
template <std::size_t N>
ForwardGrad<N> operator*(double b, ForwardGrad<N> a) { return a * b; }
template <std::size_t N>
ForwardGrad<N> operator/(ForwardGrad<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N>
ForwardGrad<N> operator/(double b, const ForwardGrad<N>& a) { return ForwardGrad<N>(b) / a; }

namespace detail {
template <std::size_t N>
ForwardGrad<N> chain(const ForwardGrad<N>& a, double value, double slope) {
    ForwardGrad<N> r(value);
    for (std::size_t i = 0; i < N; ++i) r.g[i] = slope * a.g[i];
    return r;
}
}  // namespace detail

template <std::size_t N>
ForwardGrad<N> exp(const ForwardGrad<N>& a) {
    const double e = std::exp(a.v);
    return detail::chain(a, e, e);
}
template <std::size_t N>
ForwardGrad<N> log(const ForwardGrad<N>& a) { return detail::chain(a, std::log(a.v), 1.0 / a.v); }
template <std::size_t N>
ForwardGrad<N> sqrt(const ForwardGrad<N>& a) {
    const double s = std::sqrt(a.v);
    return detail::chain(a, s, 0.5 / s);
}
template <std::size_t N>
ForwardGrad<N> tanh(const ForwardGrad<N>& a) {
    const double t = std::tanh(a.v);
    return detail::chain(a, t, 1.0 - t * t);
}
template <std::size_t N>
ForwardGrad<N> sin(const ForwardGrad<N>& a) { return detail::chain(a, std::sin(a.v), std::cos(a.v)); }
template <std::size_t N>
ForwardGrad<N> cos(const ForwardGrad<N>& a) { return detail::chain(a, std::cos(a.v), -std::sin(a.v)); }

// max(floor, x): the variable branch is active when x >= floor (ties included).
inline double max_with(double x, double floor) { return x >= floor ? x : floor; }
template <std::size_t N>
ForwardGrad<N> max_with(const ForwardGrad<N>& x, double floor) {
    return x.v >= floor ? x : ForwardGrad<N>(floor);
}

// ---------------------------------------------------------------------------
// BasicDual<T>

template <class T>
struct BasicDual {
    T value{};
    std::array<T, kMaxDirections> tangent{};
    std::uint8_t width = 0;  ///< 0 marks a constant compatible with any width

    BasicDual() = default;
    BasicDual(T v) : value(std::move(v)) {}  // NOLINT: implicit constants

    static BasicDual variable(T v, std::size_t width, std::size_t direction) {
        BasicDual d(std::move(v));
        d.width = static_cast<std::uint8_t>(width);
        for (std::size_t i = 0; i < width; ++i) d.tangent[i] = T(0.0);
        d.tangent[direction] = T(1.0);
        return d;
    }

    static BasicDual with_tangents(T v, std::span<const T> tangents) {
        if (tangents.size() > kMaxDirections) throw ContractError("too many tangent directions");
        BasicDual d(std::move(v));
        d.width = static_cast<std::uint8_t>(tangents.size());
        for (std::size_t i = 0; i < tangents.size(); ++i) d.tangent[i] = tangents[i];
        return d;
    }

    [[nodiscard]] std::size_t directions() const noexcept { return width; }
    [[nodiscard]] const T& d(std::size_t direction) const {
        if (direction >= width) throw ContractError("tangent direction not carried by this value");
        return tangent[direction];
    }
};

using DualPoint = BasicDual<double>;

namespace detail {
inline std::uint8_t joint_width(std::uint8_t a, std::uint8_t b) {
    if (a == 0) return b;
    if (b == 0 || a == b) return a;
    throw ContractError("combining duals with different tangent widths");
}
template <class T>
BasicDual<T> unary(const BasicDual<T>& a, T value, const T& slope) {
    BasicDual<T> r(std::move(value));
    r.width = a.width;
    for (std::size_t i = 0; i < a.width; ++i) r.tangent[i] = slope * a.tangent[i];
    return r;
}
}  // namespace detail

template <class T>
BasicDual<T> operator-(const BasicDual<T>& a) {
    BasicDual<T> r(-a.value);
    r.width = a.width;
    for (std::size_t i = 0; i < a.width; ++i) r.tangent[i] = -a.tangent[i];
    return r;
}

template <class T>
BasicDual<T> operator+(const BasicDual<T>& a, const BasicDual<T>& b) {
    BasicDual<T> r(a.value + b.value);
    r.width = detail::joint_width(a.width, b.width);
    for (std::size_t i = 0; i < r.width; ++i) {
        if (a.width && b.width) r.tangent[i] = a.tangent[i] + b.tangent[i];
        else r.tangent[i] = a.width ? a.tangent[i] : b.tangent[i];
    }
    return r;
}

template <class T>
BasicDual<T> operator-(const BasicDual<T>& a, const BasicDual<T>& b) {
    return a + (-b);
}

template <class T>
BasicDual<T> operator*(const BasicDual<T>& a, const BasicDual<T>& b) {
    BasicDual<T> r(a.value * b.value);
    r.width = detail::joint_width(a.width, b.width);
    for (std::size_t i = 0; i < r.width; ++i) {
        if (a.width && b.width) r.tangent[i] = a.value * b.tangent[i] + a.tangent[i] * b.value;
        else if (a.width) r.tangent[i] = a.tangent[i] * b.value;
        else r.tangent[i] = a.value * b.tangent[i];
    }
    return r;
}

template <class T>
BasicDual<T> operator/(const BasicDual<T>& a, const BasicDual<T>& b) {
    const T inv = T(1.0) / b.value;
    const T q = a.value * inv;
    BasicDual<T> r(q);
    r.width = detail::joint_width(a.width, b.width);
    for (std::size_t i = 0; i < r.width; ++i) {
        if (a.width && b.width) r.tangent[i] = (a.tangent[i] - q * b.tangent[i]) * inv;
        else if (a.width) r.tangent[i] = a.tangent[i] * inv;
        else r.tangent[i] = -(q * b.tangent[i]) * inv;
    }
    return r;
}

template <class T>
BasicDual<T> operator+(const BasicDual<T>& a, double b) { return a + BasicDual<T>(T(b)); }
template <class T>
BasicDual<T> operator+(double b, const BasicDual<T>& a) { return a + BasicDual<T>(T(b)); }
template <class T>
BasicDual<T> operator-(const BasicDual<T>& a, double b) { return a - BasicDual<T>(T(b)); }
template <class T>
BasicDual<T> operator-(double b, const BasicDual<T>& a) { return BasicDual<T>(T(b)) - a; }
template <class T>
BasicDual<T> operator*(const BasicDual<T>& a, double b) { return a * BasicDual<T>(T(b)); }
template <class T>
BasicDual<T> operator*(double b, const BasicDual<T>& a) { return a * BasicDual<T>(T(b)); }
template <class T>
BasicDual<T> operator/(const BasicDual<T>& a, double b) { return a * (1.0 / b); }
template <class T>
BasicDual<T> operator/(double b, const BasicDual<T>& a) { return BasicDual<T>(T(b)) / a; }

template <class T>
BasicDual<T> exp(const BasicDual<T>& a) {
    using std::exp;
    T e = exp(a.value);
    return detail::unary(a, e, e);
}
template <class T>
BasicDual<T> log(const BasicDual<T>& a) {
    using std::log;
    return detail::unary(a, log(a.value), T(1.0) / a.value);
}
template <class T>
BasicDual<T> sqrt(const BasicDual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.value);
    return detail::unary(a, s, T(0.5) / s);
}
template <class T>
BasicDual<T> tanh(const BasicDual<T>& a) {
    using std::tanh;
    T t = tanh(a.value);
    return detail::unary(a, t, T(1.0) - t * t);
}
template <class T>
BasicDual<T> sin(const BasicDual<T>& a) {
    using std::cos;
    using std::sin;
    return detail::unary(a, sin(a.value), cos(a.value));
}
template <class T>
BasicDual<T> max_with(const BasicDual<T>& x, double floor) {
    if (value_of(x.value) >= floor) return x;
    BasicDual<T> r{T(floor)};
    r.width = x.width;
    for (std::size_t i = 0; i < x.width; ++i) r.tangent[i] = T(0.0);
    return r;
}

// ---------------------------------------------------------------------------
// Reverse-mode tape

class Tape;

/// Handle to a node of a Tape. Cheap to copy; only valid while the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::int32_t index) : tape_(tape), index_(index) {}
    Var(double constant);  // NOLINT: lifts constants lazily onto the partner's tape

    [[nodiscard]] Tape* tape() const noexcept { return tape_; }
    [[nodiscard]] std::int32_t index() const noexcept { return index_; }
    [[nodiscard]] double value() const;
    [[nodiscard]] const DualPoint& dual() const;

private:
    friend class Tape;
    Tape* tape_ = nullptr;
    std::int32_t index_ = -1;
    double constant_ = 0.0;  ///< used while tape_ == nullptr
};

using GradientVector = std::vector<double>;

class Tape {
public:
    enum class Op : std::uint8_t {
        Constant, Parameter, Input, Add, Sub, Mul, Div, Neg, Exp, Log, Tanh, Sin, Cos, Sqrt,
        MaxConst, PowConst, TangentOf
    };

    explicit Tape(std::size_t directions);

    [[nodiscard]] std::size_t directions() const noexcept { return directions_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

    Var constant(double value);
    /// Trainable leaf; gradients are reported in creation order.
    Var parameter(double value);
    /// Independent input carrying a unit tangent in `direction`.
    Var input(double value, std::size_t direction);
    /// Real-valued node holding d(x)/d(input_direction). Its own tangents are
    /// not tracked, so it may only feed value-level expressions.
    Var tangent_of(const Var& x, std::size_t direction);

    Var unary(Op op, const Var& a, double parameter = 0.0);
    Var binary(Op op, const Var& a, const Var& b);

    [[nodiscard]] const DualPoint& dual(std::int32_t index) const { return nodes_.at(index).value; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return parameters_.size(); }

    /// d(loss)/d(parameter) for every parameter leaf, including contributions
    /// routed through input-derivative nodes.
    [[nodiscard]] GradientVector gradient(const Var& loss) const;

    static const char* op_name(Op op) noexcept;

private:
    struct Node {
        DualPoint value;
        DualPoint partial_a;
        DualPoint partial_b;
        std::int32_t a = -1;
        std::int32_t b = -1;
        Op op = Op::Constant;
        bool first_order_only = false;
        std::uint8_t direction = 0;
    };

    Var push(Node node);
    Var lift(const Var& v);
    [[noreturn]] void fail(const char* op, const std::string& why) const;

    std::size_t directions_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> parameters_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var sqrt(const Var& a);
Var pow(const Var& a, double exponent);
Var max_with(const Var& a, double floor);
inline double value_of(const Var& v) { return v.value(); }

// ---------------------------------------------------------------------------
// Operations

using RecordedFunction = std::function<Var(Tape&, std::span<const Var>)>;

struct ValueAndJacobian {
    double value = 0.0;
    std::vector<double> jacobian;  ///< d f / d x_i
};

/// Records f at x with forward tangents on every input and returns f(x) and
/// its input Jacobian row.
ValueAndJacobian evaluate_with_input_derivatives(const RecordedFunction& f, std::span<const double> x);

/// Reverse sweep from a scalar loss recorded on `tape`.
GradientVector parameter_gradient(const Tape& tape, const Var& loss);

/// Max over directions of |AD - central difference| / (|AD| + h), where the
/// point coordinates are treated as parameters of f. Non-finite comparisons
/// count as +infinity.
double finite_difference_check(const RecordedFunction& f, std::span<const double> point, double h);

}  // namespace shockpinn::ad

#include "shockpinn/autodiff.hpp"

#include <sstream>

namespace shockpinn::ad {

Var::Var(double constant) : constant_(constant) {}

double Var::value() const { return tape_ ? tape_->dual(index_).value : constant_; }

const DualPoint& Var::dual() const {
    if (!tape_) throw ContractError("constant Var has no recorded dual");
    return tape_->dual(index_);
}

Tape::Tape(std::size_t directions) : directions_(directions) {
    if (directions > kMaxDirections) throw ContractError("tape supports at most 3 input directions");
}

const char* Tape::op_name(Op op) noexcept {
    switch (op) {
        case Op::Constant: return "const";
        case Op::Parameter: return "param";
        case Op::Input: return "input";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Neg: return "neg";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Tanh: return "tanh";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Sqrt: return "sqrt";
        case Op::MaxConst: return "max";
        case Op::PowConst: return "pow";
        case Op::TangentOf: return "tangent";
    }
    return "?";
}

void Tape::fail(const char* op, const std::string& why) const {
    std::ostringstream os;
    os << "node " << nodes_.size() << " (" << op << "): " << why;
    throw EvaluationError(os.str());
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::lift(const Var& v) {
    if (v.tape_ == this) return v;
    if (v.tape_ != nullptr) throw ContractError("mixing Vars from different tapes");
    return constant(v.constant_);
}

Var Tape::constant(double value) {
    Node n;
    n.value = DualPoint(value);
    n.value.width = static_cast<std::uint8_t>(directions_);
    n.op = Op::Constant;
    return push(n);
}

Var Tape::parameter(double value) {
    Node n;
    n.value = DualPoint(value);
    n.value.width = static_cast<std::uint8_t>(directions_);
    n.op = Op::Parameter;
    parameters_.push_back(static_cast<std::int32_t>(nodes_.size()));
    return push(n);
}

Var Tape::input(double value, std::size_t direction) {
    if (direction >= directions_) throw ContractError("input direction out of range");
    Node n;
    n.value = DualPoint::variable(value, directions_, direction);
    n.op = Op::Input;
    return push(n);
}

Var Tape::tangent_of(const Var& x, std::size_t direction) {
    const Var a = lift(x);
    const Node& src = nodes_[a.index()];
    if (src.first_order_only) throw ContractError("second derivatives are not tracked by this tape");
    if (direction >= directions_) throw ContractError("tangent direction out of range");
    Node n;
    n.value = DualPoint(src.value.tangent[direction]);
    n.value.width = static_cast<std::uint8_t>(directions_);
    n.a = a.index();
    n.op = Op::TangentOf;
    n.first_order_only = true;
    n.direction = static_cast<std::uint8_t>(direction);
    return push(n);
}

Var Tape::unary(Op op, const Var& x, double parameter) {
    const Var a = lift(x);
    const DualPoint& av = nodes_[a.index()].value;
    Node n;
    n.a = a.index();
    n.op = op;
    n.first_order_only = nodes_[a.index()].first_order_only;
    switch (op) {
        case Op::Neg:
            n.value = -av;
            n.partial_a = DualPoint(-1.0);
            break;
        case Op::Exp:
            n.value = exp(av);
            n.partial_a = n.value;
            break;
        case Op::Log:
            if (!(av.value > 0.0)) fail("log", "log of non-positive value");
            n.value = log(av);
            n.partial_a = 1.0 / av;
            break;
        case Op::Tanh:
            n.value = tanh(av);
            n.partial_a = 1.0 - n.value * n.value;
            break;
        case Op::Sin:
            n.value = sin(av);
            n.partial_a = detail::unary(av, std::cos(av.value), -std::sin(av.value));
            break;
        case Op::Cos:
            n.value = detail::unary(av, std::cos(av.value), -std::sin(av.value));
            n.partial_a = detail::unary(av, -std::sin(av.value), -std::cos(av.value));
            break;
        case Op::Sqrt:
            if (!(av.value > 0.0)) fail("sqrt", "sqrt of non-positive value");
            n.value = sqrt(av);
            n.partial_a = 0.5 / n.value;
            break;
        case Op::MaxConst:
            n.value = max_with(av, parameter);
            n.partial_a = DualPoint(av.value >= parameter ? 1.0 : 0.0);
            break;
        case Op::PowConst: {
            if (av.value < 0.0 && parameter != std::floor(parameter)) fail("pow", "negative base with fractional exponent");
            if (av.value == 0.0 && parameter < 1.0) fail("pow", "derivative undefined at zero base");
            const double v = std::pow(av.value, parameter);
            const double d1 = parameter * std::pow(av.value, parameter - 1.0);
            const double d2 = parameter == 1.0 ? 0.0 : parameter * (parameter - 1.0) * std::pow(av.value, parameter - 2.0);
            n.value = detail::unary(av, v, d1);
            n.partial_a = detail::unary(av, d1, d2);
            break;
        }
        default:
            throw ContractError("not a unary op");
    }
    n.value.width = static_cast<std::uint8_t>(directions_);
    return push(n);
}

Var Tape::binary(Op op, const Var& x, const Var& y) {
    const Var a = lift(x);
    const Var b = lift(y);
    const DualPoint& av = nodes_[a.index()].value;
    const DualPoint& bv = nodes_[b.index()].value;
    Node n;
    n.a = a.index();
    n.b = b.index();
    n.op = op;
    n.first_order_only = nodes_[a.index()].first_order_only || nodes_[b.index()].first_order_only;
    switch (op) {
        case Op::Add:
            n.value = av + bv;
            n.partial_a = DualPoint(1.0);
            n.partial_b = DualPoint(1.0);
            break;
        case Op::Sub:
            n.value = av - bv;
            n.partial_a = DualPoint(1.0);
            n.partial_b = DualPoint(-1.0);
            break;
        case Op::Mul:
            n.value = av * bv;
            n.partial_a = bv;
            n.partial_b = av;
            break;
        case Op::Div:
            if (bv.value == 0.0) fail("div", "division by zero");
            n.value = av / bv;
            n.partial_a = 1.0 / bv;
            n.partial_b = -(n.value / bv);
            break;
        default:
            throw ContractError("not a binary op");
    }
    n.value.width = static_cast<std::uint8_t>(directions_);
    return push(n);
}

GradientVector Tape::gradient(const Var& loss) const {
    if (loss.tape() != this) throw ContractError("loss was not recorded on this tape");
    if (!std::isfinite(loss.value())) {
        std::ostringstream os;
        os << "node " << loss.index() << " (" << op_name(nodes_[loss.index()].op) << "): non-finite loss";
        throw EvaluationError(os.str());
    }
    const std::size_t count = static_cast<std::size_t>(loss.index()) + 1;
    std::vector<double> adj_v(count, 0.0);
    std::vector<std::array<double, kMaxDirections>> adj_t(count, std::array<double, kMaxDirections>{});
    adj_v[loss.index()] = 1.0;

    auto push_back = [&](std::int32_t target, const DualPoint& partial, std::size_t i) {
        double dv = adj_v[i] * partial.value;
        for (std::size_t d = 0; d < partial.width; ++d) dv += adj_t[i][d] * partial.tangent[d];
        adj_v[target] += dv;
        for (std::size_t d = 0; d < directions_; ++d) adj_t[target][d] += adj_t[i][d] * partial.value;
    };

    for (std::size_t k = count; k-- > 0;) {
        const Node& n = nodes_[k];
        bool finite = std::isfinite(adj_v[k]);
        for (std::size_t d = 0; d < directions_; ++d) finite = finite && std::isfinite(adj_t[k][d]);
        if (!finite) {
            std::ostringstream os;
            os << "node " << k << " (" << op_name(n.op) << "): non-finite adjoint in backward sweep";
            throw EvaluationError(os.str());
        }
        if (n.op == Op::TangentOf) {
            adj_t[n.a][n.direction] += adj_v[k];
            continue;
        }
        if (n.a >= 0) push_back(n.a, n.partial_a, k);
        if (n.b >= 0) push_back(n.b, n.partial_b, k);
    }

    GradientVector g;
    g.reserve(parameters_.size());
    for (std::int32_t p : parameters_) g.push_back(p < static_cast<std::int32_t>(count) ? adj_v[p] : 0.0);
    return g;
}

// ---------------------------------------------------------------------------

namespace {
template <class F>
Var apply_binary(Tape::Op op, const Var& a, const Var& b, F&& constant_fold) {
    if (a.tape()) return a.tape()->binary(op, a, b);
    if (b.tape()) return b.tape()->binary(op, a, b);
    return Var(constant_fold(a.value(), b.value()));
}
template <class F>
Var apply_unary(Tape::Op op, const Var& a, double parameter, F&& constant_fold) {
    if (a.tape()) return a.tape()->unary(op, a, parameter);
    return Var(constant_fold(a.value()));
}
}  // namespace

Var operator+(const Var& a, const Var& b) {
    return apply_binary(Tape::Op::Add, a, b, [](double x, double y) { return x + y; });
}
Var operator-(const Var& a, const Var& b) {
    return apply_binary(Tape::Op::Sub, a, b, [](double x, double y) { return x - y; });
}
Var operator*(const Var& a, const Var& b) {
    return apply_binary(Tape::Op::Mul, a, b, [](double x, double y) { return x * y; });
}
Var operator/(const Var& a, const Var& b) {
    return apply_binary(Tape::Op::Div, a, b, [](double x, double y) {
        if (y == 0.0) throw EvaluationError("constant division by zero");
        return x / y;
    });
}
Var operator-(const Var& a) {
    return apply_unary(Tape::Op::Neg, a, 0.0, [](double x) { return -x; });
}
Var exp(const Var& a) {
    return apply_unary(Tape::Op::Exp, a, 0.0, [](double x) { return std::exp(x); });
}
Var log(const Var& a) {
    return apply_unary(Tape::Op::Log, a, 0.0, [](double x) {
        if (!(x > 0.0)) throw EvaluationError("constant log of non-positive value");
        return std::log(x);
    });
}
Var tanh(const Var& a) {
    return apply_unary(Tape::Op::Tanh, a, 0.0, [](double x) { return std::tanh(x); });
}
Var sin(const Var& a) {
    return apply_unary(Tape::Op::Sin, a, 0.0, [](double x) { return std::sin(x); });
}
Var cos(const Var& a) {
    return apply_unary(Tape::Op::Cos, a, 0.0, [](double x) { return std::cos(x); });
}
Var sqrt(const Var& a) {
    return apply_unary(Tape::Op::Sqrt, a, 0.0, [](double x) { return std::sqrt(x); });
}
Var pow(const Var& a, double exponent) {
    return apply_unary(Tape::Op::PowConst, a, exponent, [exponent](double x) { return std::pow(x, exponent); });
}
Var max_with(const Var& a, double floor) {
    return apply_unary(Tape::Op::MaxConst, a, floor, [floor](double x) { return x >= floor ? x : floor; });
}

// ---------------------------------------------------------------------------

ValueAndJacobian evaluate_with_input_derivatives(const RecordedFunction& f, std::span<const double> x) {
    for (double xi : x)
        if (!std::isfinite(xi)) throw ContractError("non-finite input point");
    Tape tape(x.size());
    std::vector<Var> inputs;
    inputs.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) inputs.push_back(tape.input(x[i], i));
    const Var out = f(tape, inputs);
    ValueAndJacobian r;
    r.value = out.value();
    r.jacobian.assign(x.size(), 0.0);
    if (out.tape() == &tape) {
        const DualPoint& d = out.dual();
        for (std::size_t i = 0; i < x.size(); ++i) r.jacobian[i] = d.tangent[i];
    }
    return r;
}

GradientVector parameter_gradient(const Tape& tape, const Var& loss) { return tape.gradient(loss); }

double finite_difference_check(const RecordedFunction& f, std::span<const double> point, double h) {
    if (!(h > 0.0)) throw ContractError("finite-difference step must be positive");
    auto record = [&](std::span<const double> at, GradientVector* grad) {
        Tape tape(0);
        std::vector<Var> params;
        params.reserve(at.size());
        for (double v : at) params.push_back(tape.parameter(v));
        const Var out = f(tape, params);
        if (grad) {
            if (out.tape() == &tape) *grad = tape.gradient(out);
            else grad->assign(at.size(), 0.0);
        }
        return out.value();
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    GradientVector ad_grad;
    try {
        record(point, &ad_grad);
    } catch (const EvaluationError&) {
        return inf;
    }
    std::vector<double> shifted(point.begin(), point.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        double fp = 0.0;
        double fm = 0.0;
        try {
            shifted[i] = point[i] + h;
            fp = record(shifted, nullptr);
            shifted[i] = point[i] - h;
            fm = record(shifted, nullptr);
        } catch (const EvaluationError&) {
            return inf;
        }
        shifted[i] = point[i];
        const double fd = (fp - fm) / (2.0 * h);
        const double disc = std::abs(ad_grad[i] - fd) / (std::abs(ad_grad[i]) + h);
        if (!std::isfinite(disc)) return inf;
        worst = std::max(worst, disc);
    }
    return worst;
}

}  // namespace shockpinn::ad

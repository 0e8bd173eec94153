#include "shockpinn/optimize.hpp"

#include "shockpinn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

namespace shockpinn::opt {

void Schedule::validate() const {
    if (!(adam.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam.epsilon >= 0.0)) throw ConfigError("Adam epsilon must be non-negative");
    if (lbfgs.memory < 1) throw ConfigError("L-BFGS memory must be at least 1");
    if (!(lbfgs.c1 > 0.0 && lbfgs.c1 < lbfgs.c2 && lbfgs.c2 < 1.0))
        throw ConfigError("Wolfe constants need 0 < c1 < c2 < 1");
    if (!(lbfgs.tol_grad >= 0.0) || !(lbfgs.tol_change >= 0.0)) throw ConfigError("L-BFGS tolerances must be non-negative");
}

void adam_step(AdamState& state, const AdamOptions& o, std::span<double> theta, std::span<const double> grad) {
    if (grad.size() != theta.size()) throw ContractError("gradient and parameter sizes differ");
    for (std::size_t j = 0; j < grad.size(); ++j)
        if (!std::isfinite(grad[j])) throw DivergenceError("non-finite gradient entry " + std::to_string(j));
    if (state.m.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    if (state.m.size() != theta.size()) throw ContractError("Adam moments do not match the parameter count");
    ++state.step;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double g = grad[j];
        state.m[j] = o.beta1 * state.m[j] + (1.0 - o.beta1) * g;
        state.v[j] = o.beta2 * state.v[j] + (1.0 - o.beta2) * g * g;
        const double mhat = state.m[j] / c1;
        const double vhat = state.v[j] / c2;
        theta[j] -= o.learning_rate * mhat / (std::sqrt(vhat) + o.epsilon);
    }
}

std::string to_string(LbfgsStatus s) {
    switch (s) {
        case LbfgsStatus::GradientTolerance: return "gradient-tolerance";
        case LbfgsStatus::ChangeTolerance: return "change-tolerance";
        case LbfgsStatus::IterationLimit: return "iteration-limit";
        case LbfgsStatus::LineSearchFailure: return "line-search-failure";
    }
    return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Trial {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;
    std::vector<double> x;
    std::vector<double> g;
};

class LineSearch {
public:
    LineSearch(const Objective& f, const std::vector<double>& x0, double f0, const std::vector<double>& dir,
               double slope0, const LbfgsOptions& o, std::size_t& evaluations)
        : f_(f), x0_(x0), f0_(f0), dir_(dir), slope0_(slope0), o_(o), evals_(evaluations) {}

    /// Returns the accepted trial point, or nothing on failure.
    std::optional<Trial> run(double alpha) {
        Trial prev{0.0, f0_, slope0_, {}, {}};
        for (std::size_t i = 0; i < o_.max_line_search; ++i) {
            Trial t = evaluate(alpha);
            if (!std::isfinite(t.f) || t.f > f0_ + o_.c1 * alpha * slope0_ || (i > 0 && t.f >= prev.f))
                return zoom(std::move(prev), std::move(t));
            if (std::abs(t.slope) <= -o_.c2 * slope0_) return t;
            if (t.slope >= 0.0) return zoom(std::move(t), std::move(prev));
            prev = std::move(t);
            alpha *= 2.0;
        }
        return std::nullopt;
    }

private:
    Trial evaluate(double alpha) {
        Trial t;
        t.alpha = alpha;
        t.x.resize(x0_.size());
        t.g.assign(x0_.size(), 0.0);
        for (std::size_t j = 0; j < x0_.size(); ++j) t.x[j] = x0_[j] + alpha * dir_[j];
        ++evals_;
        t.f = f_(t.x, t.g);
        t.slope = std::isfinite(t.f) ? dot(t.g, dir_) : std::numeric_limits<double>::quiet_NaN();
        return t;
    }

    static double interpolate(const Trial& lo, const Trial& hi) {
        const double a = lo.alpha, b = hi.alpha;
        const double lo_b = std::min(a, b), hi_b = std::max(a, b);
        const double mid = 0.5 * (a + b);
        if (!std::isfinite(hi.f) || !std::isfinite(hi.slope)) return mid;
        // Minimizer of the cubic through (a, f_a, f'_a) and (b, f_b, f'_b).
        const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
        const double disc = d1 * d1 - lo.slope * hi.slope;
        if (disc < 0.0) return mid;
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        const double c = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
        const double margin = 0.1 * (hi_b - lo_b);
        if (!std::isfinite(c) || c < lo_b + margin || c > hi_b - margin) return mid;
        return c;
    }

    std::optional<Trial> zoom(Trial lo, Trial hi) {
        for (std::size_t i = 0; i < o_.max_line_search; ++i) {
            if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
            Trial t = evaluate(interpolate(lo, hi));
            if (!std::isfinite(t.f) || t.f > f0_ + o_.c1 * t.alpha * slope0_ || t.f >= lo.f) {
                hi = std::move(t);
                continue;
            }
            if (std::abs(t.slope) <= -o_.c2 * slope0_) return t;
            if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
            lo = std::move(t);
        }
        // Accept a point with sufficient decrease even if the curvature test failed.
        if (lo.alpha > 0.0 && !lo.x.empty() && lo.f <= f0_ + o_.c1 * lo.alpha * slope0_ && lo.f < f0_) return lo;
        return std::nullopt;
    }

    const Objective& f_;
    const std::vector<double>& x0_;
    double f0_;
    const std::vector<double>& dir_;
    double slope0_;
    const LbfgsOptions& o_;
    std::size_t& evals_;
};

std::vector<double> two_loop(const LbfgsState& st, const std::vector<double>& g) {
    std::vector<double> q = g;
    std::vector<double> alpha(st.pairs.size());
    for (std::size_t k = st.pairs.size(); k-- > 0;) {
        const auto& p = st.pairs[k];
        alpha[k] = p.rho * dot(p.s, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[k] * p.y[j];
    }
    if (!st.pairs.empty()) {
        const auto& p = st.pairs.back();
        const double gamma = dot(p.s, p.y) / dot(p.y, p.y);
        for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < st.pairs.size(); ++k) {
        const auto& p = st.pairs[k];
        const double beta = p.rho * dot(p.y, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[k] - beta) * p.s[j];
    }
    for (double& v : q) v = -v;
    return q;
}

}  // namespace

LbfgsResult lbfgs_run(const Objective& f, std::vector<double>& theta, const LbfgsOptions& o,
                      const IterationCallback& callback) {
    if (o.memory < 1) throw ConfigError("L-BFGS memory must be at least 1");
    LbfgsResult r;
    std::vector<double> g(theta.size(), 0.0);
    r.value = f(theta, g);
    r.evaluations = 1;
    if (!std::isfinite(r.value)) throw DivergenceError("non-finite loss at the start of L-BFGS");
    r.gradient_norm = norm2(g);
    if (callback) callback(0, theta, r.value);
    if (r.gradient_norm < o.tol_grad) {
        r.status = LbfgsStatus::GradientTolerance;
        return r;
    }
    r.status = LbfgsStatus::IterationLimit;
    while (r.iterations < o.iterations) {
        std::vector<double> dir = two_loop(r.state, g);
        double slope = dot(g, dir);
        if (!(slope < 0.0)) {
            r.state.pairs.clear();
            dir = two_loop(r.state, g);
            slope = dot(g, dir);
        }
        const double alpha0 = r.state.pairs.empty() ? std::min(1.0, 1.0 / r.gradient_norm) : 1.0;
        std::optional<Trial> step = LineSearch(f, theta, r.value, dir, slope, o, r.evaluations).run(alpha0);
        if (!step && !r.state.pairs.empty()) {
            r.state.pairs.clear();
            dir = two_loop(r.state, g);
            slope = dot(g, dir);
            step = LineSearch(f, theta, r.value, dir, slope, o, r.evaluations).run(std::min(1.0, 1.0 / r.gradient_norm));
        }
        if (!step) {
            r.status = LbfgsStatus::LineSearchFailure;
            break;
        }
        CurvaturePair pair;
        pair.s.resize(theta.size());
        pair.y.resize(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) {
            pair.s[j] = step->x[j] - theta[j];
            pair.y[j] = step->g[j] - g[j];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > 1e-10 * norm2(pair.s) * norm2(pair.y)) {
            pair.rho = 1.0 / sy;
            r.state.pairs.push_back(std::move(pair));
            if (r.state.pairs.size() > o.memory) r.state.pairs.pop_front();
        } else {
            ++r.state.skipped;
        }
        const double previous = r.value;
        theta = std::move(step->x);
        g = std::move(step->g);
        r.value = step->f;
        r.gradient_norm = norm2(g);
        ++r.iterations;
        if (callback) callback(r.iterations, theta, r.value);
        if (r.gradient_norm < o.tol_grad) {
            r.status = LbfgsStatus::GradientTolerance;
            break;
        }
        if (std::abs(previous - r.value) <= o.tol_change * std::max({std::abs(previous), std::abs(r.value), 1.0})) {
            r.status = LbfgsStatus::ChangeTolerance;
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

void check_finite(const loss::Evaluation& e) {
    const loss::LossBreakdown c = e.combined();
    for (std::size_t k = 0; k < loss::kComponentCount; ++k)
        if (c.active[k] && !std::isfinite(c.value[k]))
            throw DivergenceError(std::string("non-finite loss component ") +
                                  loss::name(static_cast<loss::Component>(k)));
    if (!std::isfinite(e.total)) throw DivergenceError("non-finite total loss");
    for (std::size_t g = 0; g < loss::kGroupCount; ++g) {
        const auto& v = e.group_gradient[g];
        if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) {
            std::string names;
            for (std::size_t k = 0; k < loss::kComponentCount; ++k) {
                const auto comp = static_cast<loss::Component>(k);
                if (loss::index(loss::group_of(comp)) == g && c.active[k])
                    names += (names.empty() ? "" : ", ") + std::string(loss::name(comp));
            }
            throw DivergenceError("non-finite gradient of loss component(s) " + names);
        }
    }
}

void write_history_header(std::ostream& out, const loss::LossBreakdown& layout, std::size_t subdomains) {
    out << "iteration,phase";
    for (std::size_t k = 0; k < loss::kComponentCount; ++k)
        if (layout.active[k]) out << ',' << loss::name(static_cast<loss::Component>(k));
    if (subdomains > 1)
        for (std::size_t q = 0; q < subdomains; ++q) out << ",J_" << q;
    for (std::size_t g = 0; g < loss::kGroupCount; ++g) out << ',' << loss::name(static_cast<loss::Group>(g));
    out << ",total,best\n";
}

void write_history_row(std::ostream& out, const HistoryRow& row) {
    char buf[40];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    out << row.iteration << ',' << row.phase;
    for (std::size_t k = 0; k < loss::kComponentCount; ++k)
        if (row.combined.active[k]) put(row.combined.value[k]);
    if (row.subdomain_totals.size() > 1)
        for (double v : row.subdomain_totals) put(v);
    for (double w : row.weights.w) put(w);
    put(row.total);
    put(row.best);
    out << '\n';
}

TrainResult train(const loss::Problem& problem, std::vector<double> theta, const TrainOptions& options) {
    options.schedule.validate();
    problem.validate();
    if (theta.size() != problem.parameter_count()) throw ContractError("initial parameters have the wrong length");

    const bool dynamic = options.dynamic.has_value();
    std::optional<loss::DynamicWeights> dw = options.dynamic;
    loss::Weights weights = dynamic ? dw->weights : options.weights;

    TrainResult result;
    result.theta = theta;
    result.best = std::numeric_limits<double>::infinity();
    bool header_written = false;
    std::size_t iteration = 0;

    const auto record = [&](const loss::Evaluation& e, const char* phase, std::span<const double> at, bool eligible) {
        check_finite(e);
        if (eligible && e.total < result.best) {
            result.best = e.total;
            result.best_iteration = iteration;
            result.theta.assign(at.begin(), at.end());
        }
        HistoryRow row;
        row.iteration = iteration;
        row.phase = phase;
        row.combined = e.combined();
        for (const auto& b : e.subdomains) row.subdomain_totals.push_back(b.total);
        row.weights = weights;
        row.total = e.total;
        row.best = result.best;
        if (options.history) {
            if (!header_written) write_history_header(*options.history, row.combined, e.subdomains.size());
            header_written = true;
            write_history_row(*options.history, row);
        }
        result.history.push_back(std::move(row));
        if (options.checkpoint && options.checkpoint_every > 0 && iteration % options.checkpoint_every == 0)
            options.checkpoint(iteration, at);
    };

    const AdamOptions& adam = options.schedule.adam;
    AdamState state;
    for (std::size_t k = 0; k < adam.iterations; ++k, ++iteration) {
        const loss::Evaluation e = loss::evaluate(problem, theta, weights, true);
        record(e, "adam", theta, !dynamic);
        if (dynamic && dw->period > 0 && k % dw->period == 0) {
            if (dw->adaptive.empty()) {
                const loss::LossBreakdown c = e.combined();
                for (std::size_t g = 1; g < loss::kGroupCount; ++g)
                    for (std::size_t j = 0; j < loss::kComponentCount; ++j)
                        if (c.active[j] && loss::index(loss::group_of(static_cast<loss::Component>(j))) == g) {
                            dw->adaptive.push_back(static_cast<loss::Group>(g));
                            break;
                        }
            }
            dw->weights = weights;
            dw = loss::update_dynamic_weights(*dw, e.group_gradient).next;
            weights = dw->weights;
        }
        adam_step(state, adam, theta, e.gradient);
    }

    // L-BFGS phase with frozen weights. The first callback records the point
    // reached by Adam (or the initialization).
    const loss::Weights frozen = weights;
    std::optional<loss::Evaluation> last;
    std::vector<double> last_theta;
    const Objective objective = [&](std::span<const double> x, std::span<double> grad) {
        loss::Evaluation e = loss::evaluate(problem, x, frozen, true);
        std::copy(e.gradient.begin(), e.gradient.end(), grad.begin());
        const double f = e.total;
        last = std::move(e);
        last_theta.assign(x.begin(), x.end());
        return f;
    };
    const IterationCallback callback = [&](std::size_t it, std::span<const double> x, double) {
        if (!last || !std::equal(x.begin(), x.end(), last_theta.begin(), last_theta.end()))
            last = loss::evaluate(problem, x, frozen, true);
        record(*last, it == 0 ? (adam.iterations == 0 ? "init" : "adam") : "lbfgs", x, true);
        ++iteration;
    };
    result.lbfgs = lbfgs_run(objective, theta, options.schedule.lbfgs, callback);
    result.final_weights = weights;
    return result;
}

}  // namespace shockpinn::opt

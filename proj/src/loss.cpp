#include "shockpinn/loss.hpp"

#include "shockpinn/error.hpp"
#include "shockpinn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shockpinn::loss {

using sampling::PointSet;
using sampling::Role;

const char* name(Component c) {
    static constexpr const char* names[kComponentCount] = {
        "F_mass", "F_momentum_x", "F_momentum_y", "F_energy", "entropy",
        "grad_rho", "inflow", "p_star",
        "global_mass", "global_momentum", "global_energy",
        "wall_slip",
        "interface_average", "interface_residual", "interface_flux"};
    return names[index(c)];
}

const char* name(Group g) {
    static constexpr const char* names[kGroupCount] = {"w_residual", "w_grad_rho", "w_inflow", "w_p_star",
                                                       "w_global", "w_wall_slip", "W_interface_average",
                                                       "W_interface_residual", "W_interface_flux"};
    return names[index(g)];
}

Group group_of(Component c) {
    switch (c) {
        case Component::FMass:
        case Component::FMomentumX:
        case Component::FMomentumY:
        case Component::FEnergy:
        case Component::Entropy: return Group::Residual;
        case Component::GradRho: return Group::Gradient;
        case Component::Inflow: return Group::Inflow;
        case Component::PStar: return Group::Pressure;
        case Component::GlobalMass:
        case Component::GlobalMomentum:
        case Component::GlobalEnergy: return Group::Global;
        case Component::WallSlip: return Group::WallSlip;
        case Component::InterfaceAverage: return Group::InterfaceAverage;
        case Component::InterfaceResidual: return Group::InterfaceResidual;
        case Component::InterfaceFlux: return Group::InterfaceFlux;
    }
    return Group::Residual;
}

double LossBreakdown::residual() const {
    double s = 0.0;
    for (Component c : {Component::FMass, Component::FMomentumX, Component::FMomentumY, Component::FEnergy,
                        Component::Entropy})
        s += value[index(c)];
    return s;
}

double LossBreakdown::unweighted() const {
    double s = 0.0;
    for (std::size_t k = 0; k < kComponentCount; ++k)
        if (active[k]) s += value[k];
    return s;
}

void LossBreakdown::recompute_total(const Weights& weights) {
    total = 0.0;
    for (std::size_t k = 0; k < kComponentCount; ++k)
        if (active[k]) total += weights[group_of(static_cast<Component>(k))] * value[k];
}

LossBreakdown Evaluation::combined() const {
    LossBreakdown c = global;
    for (const auto& b : subdomains) {
        for (std::size_t k = 0; k < kComponentCount; ++k) {
            c.value[k] += b.value[k];
            c.active[k] = c.active[k] || b.active[k];
        }
        c.total += b.total;
    }
    return c;
}

const PointSet* SubdomainData::find(Role role) const {
    for (const auto& s : sets)
        if (s.role == role) return &s;
    return nullptr;
}

GlobalQuadrature make_global_quadrature(const geom::Curve& loop, std::size_t panels, std::size_t order,
                                        const decomp::Decomposition* decomposition) {
    if (!loop.closed(1e-9)) throw ConfigError("global conservation needs a closed boundary loop");
    const geom::QuadratureRule rule = geom::boundary_quadrature(loop, panels, order);
    GlobalQuadrature q;
    const auto n = static_cast<Eigen::Index>(rule.points.size());
    q.points.resize(2, n);
    q.normals.resize(2, n);
    q.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        q.points.col(i) << rule.points[k].x, rule.points[k].y;
        q.normals.col(i) << rule.normals[k].x, rule.normals[k].y;
        q.weights(i) = rule.weights[k];
        q.owners.push_back(decomposition ? decomposition->classify(rule.points[k]) : decomp::Location{{0}});
    }
    return q;
}

// ---------------------------------------------------------------------------

std::size_t Problem::parameter_count() const {
    std::size_t n = 0;
    for (const auto& net : nets) n += net.size();
    return n;
}

std::size_t Problem::offset(std::size_t net) const {
    std::size_t n = 0;
    for (std::size_t q = 0; q < net; ++q) n += nets[q].size();
    return n;
}

std::vector<double> Problem::pack() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    for (const auto& net : nets) theta.insert(theta.end(), net.values().begin(), net.values().end());
    return theta;
}

void Problem::unpack(std::span<const double> theta) {
    if (theta.size() != parameter_count()) throw ContractError("parameter vector has the wrong length");
    std::size_t at = 0;
    for (auto& net : nets) {
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(at), net.size(), net.values().begin());
        at += net.size();
    }
}

std::vector<double> Problem::trainable_mask() const {
    std::vector<double> mask;
    mask.reserve(parameter_count());
    for (const auto& net : nets) {
        const auto m = net.trainable_mask();
        mask.insert(mask.end(), m.begin(), m.end());
    }
    return mask;
}

void Problem::validate() const {
    if (nets.empty()) throw ConfigError("no networks");
    if (nets.size() != subdomains.size()) throw ConfigError("one data set per subnet is required");
    const std::size_t dim = options.unsteady ? 3 : 2;
    for (std::size_t q = 0; q < nets.size(); ++q) {
        if (nets[q].input_width() != dim)
            throw ConfigError("network input width does not match the problem dimension");
        const PointSet* r = subdomains[q].find(Role::Residual);
        if (!r || r->size() == 0)
            throw ConfigError("subdomain " + std::to_string(q) + " has no residual points");
        for (const auto& s : subdomains[q].sets) {
            s.validate();
            if (s.dimension() != dim) throw ConfigError(sampling::to_string(s.role) + " points have the wrong dimension");
        }
    }
    for (Role role : options.required_roles) {
        const bool found = std::any_of(subdomains.begin(), subdomains.end(), [&](const SubdomainData& d) {
            const PointSet* s = d.find(role);
            return s && s->size() > 0;
        });
        if (!found) throw ConfigError("loss recipe needs " + sampling::to_string(role) + " data, none supplied");
    }
    for (const auto& i : interfaces) {
        if (i.a >= nets.size() || i.b >= nets.size() || i.a == i.b)
            throw ConfigError("interface references an invalid subdomain pair");
        if (i.points.dimension() != dim) throw ConfigError("interface points have the wrong dimension");
        if (i.flux && (i.normals.rows() != 2 || i.normals.cols() != i.points.coords.cols()))
            throw ConfigError("flux continuity needs interface normals");
    }
    if (quadrature && options.unsteady) throw ConfigError("global conservation terms are defined for steady problems");
}

// ---------------------------------------------------------------------------

namespace {

using FG = ad::ForwardGrad<16>;
using Jet = physics::PrimitiveJet<FG>;

constexpr std::size_t kNoOwner = static_cast<std::size_t>(-1);

Jet seed_jet(const nn::BatchEvaluator& ev, Eigen::Index i, std::size_t directions) {
    Jet q;
    for (std::size_t c = 0; c < 4; ++c) {
        auto& j = q[c];
        const auto r = static_cast<Eigen::Index>(c);
        j.value = FG::variable(ev.output()(r, i), c);
        j.width = static_cast<std::uint8_t>(directions);
        for (std::size_t d = 0; d < directions; ++d)
            j.tangent[d] = FG::variable(ev.output_tangent(d)(r, i), 4 + 4 * d + c);
    }
    return q;
}

/// Residual vector: four conservation laws, then the entropy term if enabled.
std::size_t residual_vector(const Jet& q, const TermOptions& o, std::array<FG, 5>& out) {
    const auto r = o.unsteady ? physics::unsteady_residual(q, o.gamma) : physics::steady_residual(q, o.gamma);
    for (std::size_t k = 0; k < 4; ++k) out[k] = r[k];
    if (!o.entropy) return 4;
    out[4] = physics::entropy_residual(q, o.entropy_mode, o.epsilon, o.unsteady, o.gamma);
    return 5;
}

void scatter(const FG& f, double scale, Eigen::Index i, std::size_t directions, Eigen::MatrixXd& out_adj,
             std::vector<Eigen::MatrixXd>& tan_adj) {
    for (std::size_t c = 0; c < 4; ++c) {
        const auto r = static_cast<Eigen::Index>(c);
        out_adj(r, i) += scale * f.g[c];
        for (std::size_t d = 0; d < directions; ++d) tan_adj[d](r, i) += scale * f.g[4 + 4 * d + c];
    }
}

struct TaskGrad {
    Group group;
    std::size_t net;
    std::vector<double> g;
};

struct TaskResult {
    std::size_t owner_a = kNoOwner;
    std::size_t owner_b = kNoOwner;
    std::array<double, kComponentCount> sums{};
    std::array<bool, kComponentCount> active{};
    std::vector<TaskGrad> grads;
};

struct Task {
    enum class Kind { Set, Interface, Global } kind = Kind::Set;
    std::size_t net = 0;
    const PointSet* set = nullptr;
    std::size_t iface = 0;
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
};

class Engine {
public:
    Engine(const Problem& p, std::span<const double> theta, bool want_gradient)
        : problem_(p), opts_(p.options), grad_(want_gradient) {
        nets_ = p.nets;
        std::size_t at = 0;
        for (auto& net : nets_) {
            std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(at), net.size(), net.values().begin());
            at += net.size();
        }
    }

    TaskResult run(const Task& t) const {
        switch (t.kind) {
            case Task::Kind::Set: return run_set(t);
            case Task::Kind::Interface: return run_interface(t);
            case Task::Kind::Global: return run_global();
        }
        return {};
    }

private:
    [[nodiscard]] std::vector<double> backward(const nn::BatchEvaluator& ev, std::size_t net,
                                               const Eigen::MatrixXd& out_adj,
                                               const std::vector<Eigen::MatrixXd>& tan_adj) const {
        std::vector<double> g(nets_[net].size(), 0.0);
        ev.backward(nets_[net], out_adj, tan_adj, g);
        return g;
    }

    TaskResult run_set(const Task& t) const {
        const PointSet& set = *t.set;
        const Eigen::Index n = t.end - t.begin;
        const double inv = 1.0 / static_cast<double>(set.size());
        const std::size_t dim = set.dimension();
        std::size_t dirs = 0;
        if (set.role == Role::Residual) dirs = dim;
        else if (set.role == Role::GradientData) dirs = 2;

        nn::BatchEvaluator ev;
        ev.forward(nets_[t.net], set.coords.middleCols(t.begin, n), dirs);
        Eigen::MatrixXd oadj = Eigen::MatrixXd::Zero(4, n);
        std::vector<Eigen::MatrixXd> tadj(dirs, Eigen::MatrixXd::Zero(4, n));
        TaskResult res;
        res.owner_a = t.net;
        const auto& O = ev.output();
        Group group = Group::Residual;

        switch (set.role) {
            case Role::Residual: {
                for (std::size_t k = 0; k < (opts_.entropy ? 5u : 4u); ++k) res.active[k] = true;
                std::array<FG, 5> r;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Jet q = seed_jet(ev, i, dirs);
                    const std::size_t m = residual_vector(q, opts_, r);
                    for (std::size_t k = 0; k < m; ++k) {
                        res.sums[k] += inv * r[k].v * r[k].v;
                        if (grad_) scatter(r[k], 2.0 * inv * r[k].v, i, dirs, oadj, tadj);
                    }
                }
                break;
            }
            case Role::GradientData: {
                group = Group::Gradient;
                res.active[index(Component::GradRho)] = true;
                for (Eigen::Index i = 0; i < n; ++i)
                    for (std::size_t d = 0; d < 2; ++d) {
                        const double e = ev.output_tangent(d)(0, i) - set.targets(static_cast<Eigen::Index>(d), t.begin + i);
                        res.sums[index(Component::GradRho)] += inv * e * e;
                        tadj[d](0, i) = 2.0 * inv * e;
                    }
                break;
            }
            case Role::Inflow: {
                group = Group::Inflow;
                res.active[index(Component::Inflow)] = true;
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index c = 0; c < 4; ++c) {
                        const double e = O(c, i) - set.targets(c, t.begin + i);
                        res.sums[index(Component::Inflow)] += inv * e * e;
                        oadj(c, i) = 2.0 * inv * e;
                    }
                break;
            }
            case Role::WallPressure: {
                group = Group::Pressure;
                res.active[index(Component::PStar)] = true;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double e = O(3, i) - set.targets(0, t.begin + i);
                    res.sums[index(Component::PStar)] += inv * e * e;
                    oadj(3, i) = 2.0 * inv * e;
                }
                break;
            }
            case Role::WallSlip: {
                group = Group::WallSlip;
                res.active[index(Component::WallSlip)] = true;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double nx = set.normals(0, t.begin + i), ny = set.normals(1, t.begin + i);
                    const double e = nx * O(1, i) + ny * O(2, i);
                    res.sums[index(Component::WallSlip)] += inv * e * e;
                    oadj(1, i) = 2.0 * inv * e * nx;
                    oadj(2, i) = 2.0 * inv * e * ny;
                }
                break;
            }
            case Role::Interface: throw ContractError("interface points belong in InterfaceData");
        }
        if (grad_) res.grads.push_back({group, t.net, backward(ev, t.net, oadj, tadj)});
        return res;
    }

    TaskResult run_interface(const Task& t) const {
        const InterfaceData& I = problem_.interfaces[t.iface];
        const PointSet& set = I.points;
        const Eigen::Index n = t.end - t.begin;
        const double inv = 1.0 / static_cast<double>(set.size());
        const std::size_t dirs = I.residual ? set.dimension() : 0;
        const auto pts = set.coords.middleCols(t.begin, n);

        nn::BatchEvaluator ea, eb;
        ea.forward(nets_[I.a], pts, dirs);
        eb.forward(nets_[I.b], pts, dirs);
        TaskResult res;
        res.owner_a = I.a;
        res.owner_b = I.b;

        struct Adj {
            Eigen::MatrixXd o;
            std::vector<Eigen::MatrixXd> t;
        };
        const auto zero = [&](std::size_t d) {
            return Adj{Eigen::MatrixXd::Zero(4, n), std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(4, n))};
        };
        Adj avg_a = zero(0), avg_b = zero(0), res_a = zero(dirs), res_b = zero(dirs), flx_a = zero(0), flx_b = zero(0);

        // Each interface term appears in both neighbours' objectives, so the
        // gradient of the summed objective carries a factor of two.
        if (I.average) {
            res.active[index(Component::InterfaceAverage)] = true;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index c = 0; c < 4; ++c) {
                    const double half = 0.5 * (ea.output()(c, i) - eb.output()(c, i));
                    res.sums[index(Component::InterfaceAverage)] += inv * half * half;
                    avg_a.o(c, i) = 2.0 * inv * half;
                    avg_b.o(c, i) = -2.0 * inv * half;
                }
        }
        if (I.residual) {
            res.active[index(Component::InterfaceResidual)] = true;
            std::array<FG, 5> ra, rb;
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t m = residual_vector(seed_jet(ea, i, dirs), opts_, ra);
                residual_vector(seed_jet(eb, i, dirs), opts_, rb);
                for (std::size_t k = 0; k < m; ++k) {
                    const double e = ra[k].v - rb[k].v;
                    res.sums[index(Component::InterfaceResidual)] += inv * e * e;
                    if (grad_) {
                        scatter(ra[k], 4.0 * inv * e, i, dirs, res_a.o, res_a.t);
                        scatter(rb[k], -4.0 * inv * e, i, dirs, res_b.o, res_b.t);
                    }
                }
            }
        }
        if (I.flux) {
            res.active[index(Component::InterfaceFlux)] = true;
            using F4 = ad::ForwardGrad<4>;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double nx = I.normals(0, t.begin + i), ny = I.normals(1, t.begin + i);
                const auto flux_of = [&](const nn::BatchEvaluator& ev) {
                    const auto& O = ev.output();
                    return physics::normal_flux<F4>(F4::variable(O(0, i), 0), F4::variable(O(1, i), 1),
                                                    F4::variable(O(2, i), 2), F4::variable(O(3, i), 3), nx, ny,
                                                    opts_.gamma);
                };
                const auto ga = flux_of(ea);
                const auto gb = flux_of(eb);
                for (std::size_t k = 0; k < 4; ++k) {
                    const double e = ga[k].v - gb[k].v;
                    res.sums[index(Component::InterfaceFlux)] += inv * e * e;
                    for (Eigen::Index c = 0; c < 4; ++c) {
                        flx_a.o(c, i) += 4.0 * inv * e * ga[k].g[static_cast<std::size_t>(c)];
                        flx_b.o(c, i) -= 4.0 * inv * e * gb[k].g[static_cast<std::size_t>(c)];
                    }
                }
            }
        }
        // Each breakdown receives the value once; the reduction adds it to both owners.
        if (grad_) {
            if (I.average) {
                res.grads.push_back({Group::InterfaceAverage, I.a, backward(ea, I.a, avg_a.o, {})});
                res.grads.push_back({Group::InterfaceAverage, I.b, backward(eb, I.b, avg_b.o, {})});
            }
            if (I.residual) {
                res.grads.push_back({Group::InterfaceResidual, I.a, backward(ea, I.a, res_a.o, res_a.t)});
                res.grads.push_back({Group::InterfaceResidual, I.b, backward(eb, I.b, res_b.o, res_b.t)});
            }
            if (I.flux) {
                res.grads.push_back({Group::InterfaceFlux, I.a, backward(ea, I.a, flx_a.o, {})});
                res.grads.push_back({Group::InterfaceFlux, I.b, backward(eb, I.b, flx_b.o, {})});
            }
        }
        return res;
    }

    TaskResult run_global() const {
        const GlobalQuadrature& Q = *problem_.quadrature;
        const Eigen::Index N = Q.points.cols();
        const std::size_t nets = nets_.size();
        // Per net: quadrature columns it predicts at and the averaging weight.
        std::vector<std::vector<Eigen::Index>> cols(nets);
        std::vector<std::vector<double>> coef(nets);
        for (Eigen::Index i = 0; i < N; ++i) {
            const auto& own = Q.owners[static_cast<std::size_t>(i)].owners;
            if (own.empty()) throw DomainError("quadrature node outside every subdomain");
            for (std::size_t q : own) {
                if (q >= nets) throw DomainError("quadrature node assigned to a missing subnet");
                cols[q].push_back(i);
                coef[q].push_back(1.0 / static_cast<double>(own.size()));
            }
        }
        Eigen::MatrixXd U = Eigen::MatrixXd::Zero(4, N);
        std::vector<nn::BatchEvaluator> evs(nets);
        for (std::size_t q = 0; q < nets; ++q) {
            if (cols[q].empty()) continue;
            Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(cols[q].size()));
            for (std::size_t k = 0; k < cols[q].size(); ++k) pts.col(static_cast<Eigen::Index>(k)) = Q.points.col(cols[q][k]);
            evs[q].forward(nets_[q], pts, 0);
            for (std::size_t k = 0; k < cols[q].size(); ++k)
                U.col(cols[q][k]) += coef[q][k] * evs[q].output().col(static_cast<Eigen::Index>(k));
        }
        using F4 = ad::ForwardGrad<4>;
        std::array<double, 4> phi{};
        std::vector<std::array<F4, 4>> local(static_cast<std::size_t>(N));
        for (Eigen::Index i = 0; i < N; ++i) {
            auto& g = local[static_cast<std::size_t>(i)];
            g = physics::normal_flux<F4>(F4::variable(U(0, i), 0), F4::variable(U(1, i), 1), F4::variable(U(2, i), 2),
                                         F4::variable(U(3, i), 3), Q.normals(0, i), Q.normals(1, i), opts_.gamma);
            for (std::size_t c = 0; c < 4; ++c) phi[c] += Q.weights(i) * g[c].v;
        }
        TaskResult res;
        res.owner_a = problem_.xpinn && nets > 1 ? nets : 0;
        res.sums[index(Component::GlobalMass)] = phi[0] * phi[0];
        res.sums[index(Component::GlobalMomentum)] = phi[1] * phi[1] + phi[2] * phi[2];
        res.sums[index(Component::GlobalEnergy)] = phi[3] * phi[3];
        for (Component c : {Component::GlobalMass, Component::GlobalMomentum, Component::GlobalEnergy})
            res.active[index(c)] = true;
        if (!grad_) return res;
        Eigen::MatrixXd Ubar = Eigen::MatrixXd::Zero(4, N);
        for (Eigen::Index i = 0; i < N; ++i)
            for (std::size_t c = 0; c < 4; ++c)
                for (std::size_t j = 0; j < 4; ++j)
                    Ubar(static_cast<Eigen::Index>(j), i) +=
                        2.0 * phi[c] * Q.weights(i) * local[static_cast<std::size_t>(i)][c].g[j];
        for (std::size_t q = 0; q < nets; ++q) {
            if (cols[q].empty()) continue;
            Eigen::MatrixXd oadj(4, static_cast<Eigen::Index>(cols[q].size()));
            for (std::size_t k = 0; k < cols[q].size(); ++k)
                oadj.col(static_cast<Eigen::Index>(k)) = coef[q][k] * Ubar.col(cols[q][k]);
            res.grads.push_back({Group::Global, q, backward(evs[q], q, oadj, {})});
        }
        return res;
    }

    const Problem& problem_;
    const TermOptions& opts_;
    bool grad_;
    std::vector<nn::NetworkParams> nets_;
};

std::vector<Task> make_tasks(const Problem& p) {
    std::vector<Task> tasks;
    const auto chunk = static_cast<Eigen::Index>(std::max<std::size_t>(1, p.options.chunk));
    for (std::size_t q = 0; q < p.subdomains.size(); ++q)
        for (const auto& set : p.subdomains[q].sets) {
            const auto n = static_cast<Eigen::Index>(set.size());
            for (Eigen::Index b = 0; b < n; b += chunk)
                tasks.push_back({Task::Kind::Set, q, &set, 0, b, std::min(n, b + chunk)});
        }
    for (std::size_t k = 0; k < p.interfaces.size(); ++k) {
        const auto n = static_cast<Eigen::Index>(p.interfaces[k].points.size());
        for (Eigen::Index b = 0; b < n; b += chunk) tasks.push_back({Task::Kind::Interface, 0, nullptr, k, b, std::min(n, b + chunk)});
    }
    if (p.quadrature) tasks.push_back({Task::Kind::Global, 0, nullptr, 0, 0, 0});
    return tasks;
}

}  // namespace

Evaluation evaluate(const Problem& problem, std::span<const double> theta, const Weights& weights,
                    bool want_gradient) {
    problem.validate();
    if (theta.size() != problem.parameter_count()) throw ContractError("parameter vector has the wrong length");
    const Engine engine(problem, theta, want_gradient);
    const std::vector<Task> tasks = make_tasks(problem);
    std::vector<TaskResult> results(tasks.size());
    parallel_for(tasks.size(), problem.options.threads, [&](std::size_t i) { results[i] = engine.run(tasks[i]); });

    Evaluation out;
    const std::size_t nets = problem.nets.size();
    out.subdomains.resize(nets);
    const std::size_t P = problem.parameter_count();
    if (want_gradient)
        for (auto& g : out.group_gradient) g.assign(P, 0.0);
    std::vector<std::size_t> offsets(nets);
    for (std::size_t q = 0; q < nets; ++q) offsets[q] = problem.offset(q);

    const auto add_to = [&](std::size_t owner, const TaskResult& r) {
        if (owner == kNoOwner) return;
        LossBreakdown& b = owner == nets ? out.global : out.subdomains[owner];
        for (std::size_t k = 0; k < kComponentCount; ++k) {
            b.value[k] += r.sums[k];
            b.active[k] = b.active[k] || r.active[k];
        }
    };
    for (const TaskResult& r : results) {
        add_to(r.owner_a, r);
        add_to(r.owner_b, r);
        for (const TaskGrad& tg : r.grads) {
            auto& dst = out.group_gradient[index(tg.group)];
            const std::size_t at = offsets[tg.net];
            for (std::size_t k = 0; k < tg.g.size(); ++k) dst[at + k] += tg.g[k];
        }
    }
    for (auto& b : out.subdomains) b.recompute_total(weights);
    out.global.recompute_total(weights);
    out.total = out.global.total;
    for (const auto& b : out.subdomains) out.total += b.total;

    if (want_gradient) {
        const std::vector<double> mask = problem.trainable_mask();
        out.gradient.assign(P, 0.0);
        for (std::size_t g = 0; g < kGroupCount; ++g) {
            auto& gg = out.group_gradient[g];
            for (std::size_t k = 0; k < P; ++k) gg[k] *= mask[k];
            const double w = weights.w[g];
            for (std::size_t k = 0; k < P; ++k) out.gradient[k] += w * gg[k];
        }
    }
    return out;
}

Evaluation pinn_loss(const nn::NetworkParams& params, const SubdomainData& data,
                     const std::optional<GlobalQuadrature>& quadrature, const TermOptions& options,
                     const Weights& weights, bool want_gradient) {
    Problem p;
    p.nets = {params};
    p.subdomains = {data};
    p.quadrature = quadrature;
    p.options = options;
    p.xpinn = false;
    for (Role role : options.required_roles) {
        const PointSet* s = data.find(role);
        if (!s || s->size() == 0) throw ConfigError("loss recipe needs " + sampling::to_string(role) + " data, none supplied");
    }
    return evaluate(p, params.values(), weights, want_gradient);
}

Evaluation xpinn_loss(std::span<const nn::NetworkParams> subnets, std::span<const SubdomainData> data,
                      std::span<const InterfaceData> interfaces, const std::optional<GlobalQuadrature>& quadrature,
                      const TermOptions& options, const Weights& weights, bool want_gradient) {
    Problem p;
    p.nets.assign(subnets.begin(), subnets.end());
    p.subdomains.assign(data.begin(), data.end());
    p.interfaces.assign(interfaces.begin(), interfaces.end());
    p.quadrature = quadrature;
    p.options = options;
    p.xpinn = true;
    return evaluate(p, p.pack(), weights, want_gradient);
}

WeightUpdate update_dynamic_weights(const DynamicWeights& current,
                                    const std::array<std::vector<double>, kGroupCount>& group_gradient) {
    WeightUpdate u{current, {}};
    u.next.weights[Group::Residual] = 1.0;
    const auto& gr = group_gradient[index(Group::Residual)];
    double gmax = 0.0;
    for (double v : gr) gmax = std::max(gmax, std::abs(v));
    for (Group g : current.adaptive) {
        if (g == Group::Residual) continue;
        const auto& gi = group_gradient[index(g)];
        const double w = current.weights[g];
        double mean = 0.0;
        for (double v : gi) mean += std::abs(w * v);
        mean = gi.empty() ? 0.0 : mean / static_cast<double>(gi.size());
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            u.skipped.push_back(g);
            continue;
        }
        const double hat = gmax / mean;
        u.next.weights[g] = (1.0 - current.lambda) * w + current.lambda * hat;
    }
    return u;
}

}  // namespace shockpinn::loss

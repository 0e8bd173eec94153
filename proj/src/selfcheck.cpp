#include "shockpinn/selfcheck.hpp"

#include "shockpinn/loss.hpp"
#include "shockpinn/oracles.hpp"
#include "shockpinn/physics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace shockpinn::selfcheck {

namespace {

using sampling::PointSet;
using sampling::Role;

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

template <class F>
CheckResult timed(std::string name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r = body();
    r.name = std::move(name);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

PointSet random_set(Role role, std::size_t dim, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    PointSet s;
    s.role = role;
    s.coords.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < s.coords.size(); ++i) s.coords.data()[i] = U(rng);
    s.targets.resize(static_cast<Eigen::Index>(sampling::target_width(role)), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < s.targets.size(); ++i) s.targets.data()[i] = 1.0 + 0.5 * U(rng);
    if (role == Role::WallSlip) {
        s.normals.resize(2, static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < s.normals.cols(); ++i) {
            const double a = std::numbers::pi * U(rng);
            s.normals(0, i) = std::cos(a);
            s.normals(1, i) = std::sin(a);
        }
    }
    return s;
}

/// Random network with density and pressure outputs biased to stay above the clamp.
nn::NetworkParams random_network(std::size_t dim, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> depth(1, 3), width(2, 20);
    std::vector<std::size_t> sizes{dim};
    const std::size_t L = depth(rng);
    for (std::size_t k = 0; k < L; ++k) sizes.push_back(width(rng));
    sizes.push_back(nn::kOutputWidth);
    nn::NetworkParams net = nn::xavier_init(sizes, rng());
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t k = 0; k < net.depth(); ++k) {
        auto b = net.bias(k);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.1 * U(rng);
    }
    for (std::size_t k = 0; k + 1 < net.depth(); ++k) net.set_slope(k, 0.1 * (1.0 + 0.2 * U(rng)));
    auto out = net.bias(net.depth() - 1);
    out(0) = 2.0;
    out(3) = 2.0;
    return net;
}

loss::SubdomainData random_data(std::size_t dim, bool steady_extras, std::mt19937_64& rng) {
    loss::SubdomainData d;
    d.sets = {random_set(Role::Residual, dim, 12, rng), random_set(Role::GradientData, dim, 6, rng),
              random_set(Role::Inflow, dim, 5, rng), random_set(Role::WallPressure, dim, 4, rng)};
    if (steady_extras) d.sets.push_back(random_set(Role::WallSlip, dim, 4, rng));
    return d;
}

std::optional<loss::GlobalQuadrature> square_quadrature() {
    const std::vector<geom::Point> v{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
    return loss::make_global_quadrature(geom::Curve::polyline(v), 3, 3);
}

template <std::size_t N>
using FG = ad::ForwardGrad<N>;

/// Entropy, entropy flux and fluxes as functions of the conserved state.
struct ConservedFunctions {
    FG<4> eta;
    std::array<FG<4>, 2> phi;
    std::array<std::array<FG<4>, 4>, 2> G;
};

ConservedFunctions conserved_functions(const physics::ConservedState& U0, double gamma) {
    const FG<4> r = FG<4>::variable(U0.rho, 0), ru = FG<4>::variable(U0.rho_u, 1), rv = FG<4>::variable(U0.rho_v, 2),
                E = FG<4>::variable(U0.rho_E, 3);
    const FG<4> u = ru / r, v = rv / r;
    const FG<4> p = (gamma - 1.0) * (E - 0.5 * (ru * u + rv * v));
    const FG<4> s = ad::log(p) - gamma * ad::log(r);
    ConservedFunctions f;
    f.eta = -(r * s) * (1.0 / (gamma - 1.0));
    f.phi = {u * f.eta, v * f.eta};
    f.G[0] = {ru, ru * u + p, ru * v, u * (E + p)};
    f.G[1] = {rv, rv * u, rv * v + p, v * (E + p)};
    return f;
}

}  // namespace

CheckResult autodiff_gradients(std::uint64_t seed, std::size_t networks) {
    return timed("autodiff gradients vs finite differences", [&] {
        std::mt19937_64 rng(seed);
        std::size_t total = 0, within = 0;
        double worst = 0.0;
        const double h = 1e-4;
        for (std::size_t k = 0; k < networks; ++k) {
            const bool unsteady = k % 2 == 1;
            const std::size_t dim = unsteady ? 3 : 2;
            nn::NetworkParams net = random_network(dim, rng);
            const loss::SubdomainData data = random_data(dim, !unsteady, rng);
            loss::TermOptions o;
            o.unsteady = unsteady;
            o.entropy_mode = physics::EntropyMode::Relu;
            std::optional<loss::GlobalQuadrature> quad;
            if (!unsteady) quad = square_quadrature();
            loss::Weights w;
            for (std::size_t g = 0; g < loss::kGroupCount; ++g) w.w[g] = 0.5 + 0.1 * static_cast<double>(g);

            const loss::Evaluation e = loss::pinn_loss(net, data, quad, o, w, true);
            std::vector<double> theta(net.values().begin(), net.values().end());
            nn::NetworkParams probe = net;
            const auto value_at = [&](std::size_t i, double x) {
                std::copy(theta.begin(), theta.end(), probe.values().begin());
                probe.values()[i] = x;
                return loss::pinn_loss(probe, data, quad, o, w, false).total;
            };
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double fd = (value_at(i, theta[i] + h) - value_at(i, theta[i] - h)) / (2.0 * h);
                const double g = e.gradient[i];
                const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-8});
                worst = std::max(worst, rel);
                within += rel <= 1e-5 ? 1 : 0;
                ++total;
            }
        }
        const double fraction = static_cast<double>(within) / static_cast<double>(total);
        CheckResult r;
        r.passed = fraction >= 0.99 && worst <= 1e-4;
        r.detail = format("%.0f parameters, %.4f%% within 1e-5, max relative error %.3e", static_cast<double>(total),
                          100.0 * fraction, worst);
        return r;
    });
}

CheckResult entropy_pair_identity(std::uint64_t seed, std::size_t states) {
    return timed("entropy pair identity", [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> rho(0.1, 5.0), vel(-3.0, 3.0), pre(0.1, 10.0);
        double worst = 0.0;
        for (std::size_t n = 0; n < states; ++n) {
            const physics::PrimitiveState W{rho(rng), vel(rng), vel(rng), pre(rng)};
            const auto f = conserved_functions(physics::to_conserved(W), physics::kGammaAir);
            for (std::size_t k = 0; k < 2; ++k) {
                double err = 0.0, scale = 0.0;
                for (std::size_t j = 0; j < 4; ++j) {
                    double lhs = 0.0;
                    for (std::size_t i = 0; i < 4; ++i) lhs += f.eta.g[i] * f.G[k][i].g[j];
                    err = std::max(err, std::abs(lhs - f.phi[k].g[j]));
                    scale = std::max(scale, std::abs(f.phi[k].g[j]));
                }
                worst = std::max(worst, err / scale);
            }
        }
        CheckResult r;
        r.passed = worst <= 1e-7;
        r.detail = format("%.0f states, max relative mismatch %.3e", static_cast<double>(states), worst);
        return r;
    });
}

CheckResult smooth_exact_residuals(std::uint64_t seed, std::size_t points) {
    return timed("smooth exact solution residuals", [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> xy(-1.0, 1.0), tt(0.0, 1.0);
        double worst_euler = 0.0, worst_entropy = 0.0;
        for (std::size_t n = 0; n < points; ++n) {
            const double x = xy(rng), y = xy(rng), t = tt(rng);
            const auto W = oracles::smooth_exact(x, y, t);
            const auto g = oracles::smooth_density_gradient(x, y, t);
            physics::PrimitiveJet<double> q;
            q.rho = ad::BasicDual<double>(W.rho);
            q.rho.width = 3;
            for (std::size_t d = 0; d < 3; ++d) q.rho.tangent[d] = g[d];
            for (auto* c : {&q.u, &q.v, &q.p}) c->width = 3;
            q.u.value = W.u;
            q.v.value = W.v;
            q.p.value = W.p;
            for (double r : physics::unsteady_residual(q)) worst_euler = std::max(worst_euler, std::abs(r));
            worst_entropy = std::max(worst_entropy,
                                     std::abs(physics::entropy_residual(q, physics::EntropyMode::Relu, 0.0, true)));
        }
        CheckResult r;
        r.passed = worst_euler < 1e-10 && worst_entropy < 1e-10;
        r.detail = format("max |Euler residual| %.3e, max relu entropy residual %.3e", worst_euler, worst_entropy);
        return r;
    });
}

CheckResult expansion_exact_residuals(std::uint64_t seed, std::size_t points, double margin) {
    return timed("expansion fan residuals", [&] {
        const oracles::ExpansionCase ec;
        const physics::ReferenceScales sc{ec.inlet.rho, std::hypot(ec.inlet.u, ec.inlet.v), 1.0};
        const double lead = ec.lead_angle(), tail = ec.tail_angle();
        const double wall = -ec.geometry.theta;
        const double h = 1e-6;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        std::size_t used = 0;
        const geom::Region region = ec.geometry.region();
        while (used < points) {
            const geom::Point p{U(rng), U(rng)};
            if (!region.contains(p)) continue;
            const geom::Point rel = p - ec.geometry.corner;
            const double r = geom::norm(rel);
            const double phi = std::atan2(rel.y, rel.x);
            const auto gap = [&](double edge) { return r * std::sin(std::min(std::abs(phi - edge), 0.5 * std::numbers::pi)); };
            if (gap(lead) < margin || gap(tail) < margin || gap(wall) < margin) continue;
            const auto W = [&](double x, double y) {
                return physics::nondimensionalize(oracles::expansion_exact(ec, {x, y}, false), sc);
            };
            const auto c = W(p.x, p.y);
            const auto ex = W(p.x + h, p.y), wx = W(p.x - h, p.y), ny = W(p.x, p.y + h), sy = W(p.x, p.y - h);
            physics::PrimitiveJet<double> q;
            for (std::size_t i = 0; i < 4; ++i) {
                q[i] = ad::BasicDual<double>(c[i]);
                q[i].width = 2;
                q[i].tangent[0] = (ex[i] - wx[i]) / (2.0 * h);
                q[i].tangent[1] = (ny[i] - sy[i]) / (2.0 * h);
            }
            for (double r : physics::steady_residual(q)) worst = std::max(worst, std::abs(r));
            ++used;
        }
        CheckResult r;
        r.passed = worst < 1e-6;
        r.detail = format("%.0f points, max |steady residual| %.3e (nondimensional)", static_cast<double>(points), worst);
        return r;
    });
}

CheckResult oblique_tabulated_states() {
    return timed("oblique shock tabulated states", [&] {
        const auto pre = oracles::kObliquePre;
        const double theta = oracles::radians(10.0);
        const double mach = std::hypot(pre.u, pre.v) / oracles::sound_speed(pre);
        const auto rel = oracles::oblique_shock_relations(mach, theta);
        const auto order = oracles::resolve_velocity_order(pre, oracles::kObliquePostDensity, oracles::kObliquePostSpeed,
                                                           oracles::kObliquePostPressure, theta, rel.beta);
        const auto& jump = order.chosen == oracles::VelocityOrder::CosSin ? order.cos_sin : order.sin_cos;
        const double normal_mach = mach * std::sin(rel.beta);
        const double ratio = oracles::kObliquePostDensity / pre.rho;
        const double expected = oracles::normal_shock_density_ratio(normal_mach);
        const double ratio_error = std::abs(ratio - expected) / expected;
        std::ostringstream d;
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "order %s, beta %.3f deg, jump residuals mass %.2f%% normal-mom %.2f%% tangential-mom %.2f%% "
                      "energy %.2f%% (limit 1%%); density ratio %.4f vs %.4f (%.2f%%, limit 0.5%%)",
                      oracles::to_string(order.chosen).c_str(), oracles::degrees(rel.beta), 100.0 * jump.relative[0],
                      100.0 * jump.relative[1], 100.0 * jump.relative[2], 100.0 * jump.relative[3], ratio, expected,
                      100.0 * ratio_error);
        CheckResult r;
        r.passed = jump.max_abs() <= 0.01 && ratio_error <= 0.005;
        r.detail = buf;
        return r;
    });
}

CheckResult single_subdomain_equivalence(std::uint64_t seed, std::size_t configs) {
    return timed("single-subdomain equivalence", [&] {
        std::mt19937_64 rng(seed);
        std::size_t mismatches = 0;
        for (std::size_t k = 0; k < configs; ++k) {
            const bool unsteady = k % 3 == 2;
            const std::size_t dim = unsteady ? 3 : 2;
            const nn::NetworkParams net = random_network(dim, rng);
            const loss::SubdomainData data = random_data(dim, !unsteady, rng);
            loss::TermOptions o;
            o.unsteady = unsteady;
            o.entropy = k % 4 != 0;
            o.entropy_mode = k % 2 == 0 ? physics::EntropyMode::Relu : physics::EntropyMode::Squared;
            o.chunk = 5;
            std::optional<loss::GlobalQuadrature> quad;
            if (!unsteady && k % 2 == 1) quad = square_quadrature();
            loss::Weights w;
            for (std::size_t g = 0; g < loss::kGroupCount; ++g) w.w[g] = 0.25 + 0.3 * static_cast<double>((g + k) % 5);

            const auto a = loss::pinn_loss(net, data, quad, o, w, true);
            const std::vector<nn::NetworkParams> nets{net};
            const std::vector<loss::SubdomainData> datas{data};
            const auto b = loss::xpinn_loss(nets, datas, {}, quad, o, w, true);
            const auto ca = a.combined(), cb = b.combined();
            if (a.total != b.total || ca.value != cb.value || ca.active != cb.active || a.gradient != b.gradient) ++mismatches;

            std::uniform_real_distribution<double> U(-1.0, 1.0);
            const nn::Locator one = [](std::span<const double>) { return std::vector<std::size_t>{0}; };
            for (int i = 0; i < 10; ++i) {
                std::array<double, 3> x{U(rng), U(rng), U(rng)};
                const std::span<const double> pt(x.data(), dim);
                const auto f = nn::forward(net, pt);
                const auto s = nn::stitched_forward(nets, one, pt);
                for (std::size_t c = 0; c < 4; ++c)
                    if (f[c].value != s[c].value || f[c].tangent != s[c].tangent) {
                        ++mismatches;
                        break;
                    }
            }
        }
        CheckResult r;
        r.passed = mismatches == 0;
        r.detail = format("%.0f random configurations, %.0f mismatches", static_cast<double>(configs),
                          static_cast<double>(mismatches));
        return r;
    });
}

std::vector<NamedCheck> all_checks() {
    return {{"autodiff", [] { return autodiff_gradients(); }},
            {"entropy-pair", [] { return entropy_pair_identity(); }},
            {"smooth-exact", [] { return smooth_exact_residuals(); }},
            {"expansion-exact", [] { return expansion_exact_residuals(); }},
            {"oblique-states", [] { return oblique_tabulated_states(); }},
            {"equivalence", [] { return single_subdomain_equivalence(); }}};
}

bool run_all(std::ostream& out) {
    bool ok = true;
    for (const auto& c : all_checks()) {
        const CheckResult r = c.run();
        ok = ok && r.passed;
        char t[32];
        std::snprintf(t, sizeof t, "%.1fs", r.seconds);
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << t << "): " << r.detail << "\n";
    }
    return ok;
}

}  // namespace shockpinn::selfcheck

#include "shockpinn/oracles.hpp"

#include "shockpinn/error.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace shockpinn::oracles {

using std::numbers::pi;

double degrees(double r) { return r * 180.0 / pi; }
double radians(double d) { return d * pi / 180.0; }

namespace {

template <class F>
double find_root(F f, double lo, double hi, const char* what) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw DomainError(std::string(what) + ": root is not bracketed");
    std::uintmax_t iters = 200;
    const auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (a + b);
}

}  // namespace

// --- smooth -----------------------------------------------------------------

PrimitiveState smooth_exact(double x, double y, double t) {
    return {1.0 + 0.2 * std::sin(pi * (x + y - (kSmoothU + kSmoothV) * t)), kSmoothU, kSmoothV, 1.0};
}

std::array<double, 3> smooth_density_gradient(double x, double y, double t) {
    const double c = 0.2 * pi * std::cos(pi * (x + y - (kSmoothU + kSmoothV) * t));
    return {c, c, -(kSmoothU + kSmoothV) * c};
}

// --- Prandtl-Meyer --------------------------------------------------------------

double prandtl_meyer_nu(double mach, double gamma) {
    if (!(mach >= 1.0)) throw DomainError("Prandtl-Meyer function needs M >= 1");
    const double k = (gamma + 1.0) / (gamma - 1.0);
    const double m2 = mach * mach - 1.0;
    return std::sqrt(k) * std::atan(std::sqrt(m2 / k)) - std::atan(std::sqrt(m2));
}

double max_nu(double gamma) { return 0.5 * pi * (std::sqrt((gamma + 1.0) / (gamma - 1.0)) - 1.0); }

double inverse_nu(double nu, double gamma) {
    if (nu < 0.0 || nu >= max_nu(gamma)) throw DomainError("Prandtl-Meyer angle outside [0, nu_max)");
    if (nu == 0.0) return 1.0;
    double hi = 2.0;
    while (prandtl_meyer_nu(hi, gamma) < nu) hi *= 2.0;
    return find_root([&](double m) { return prandtl_meyer_nu(m, gamma) - nu; }, 1.0, hi, "inverse_nu");
}

double mach_angle(double mach) {
    if (!(mach >= 1.0)) throw DomainError("Mach angle needs M >= 1");
    return std::asin(1.0 / mach);
}

// --- expansion -------------------------------------------------------------

double WedgeGeometry::wall_slope() const {
    return wall == WallCurve::Tangent ? std::tan(theta) : std::tanh(theta);
}

double WedgeGeometry::wall_y(double x) const { return corner.y - wall_slope() * (x - corner.x); }

geom::Region WedgeGeometry::region() const {
    if (!(theta > 0.0 && theta < radians(45.0))) throw ConfigError("wedge angle must lie in (0, 45) degrees");
    const double x1 = corner.x + length;
    return geom::Region(geom::Polygon({corner, {x1, wall_y(x1)}, {x1, corner.y + top}, {corner.x, corner.y + top}}));
}

geom::Point WedgeGeometry::wall_normal() const {
    const double s = wall_slope();
    const double n = std::hypot(1.0, s);
    return {-s / n, -1.0 / n};
}

double sound_speed(const PrimitiveState& w, double gamma) { return std::sqrt(gamma * w.p / w.rho); }

double ExpansionCase::inlet_mach() const { return std::hypot(inlet.u, inlet.v) / sound_speed(inlet, gamma); }
double ExpansionCase::lead_angle() const { return mach_angle(inlet_mach()); }
double ExpansionCase::downstream_mach() const {
    return inverse_nu(prandtl_meyer_nu(inlet_mach(), gamma) + geometry.theta, gamma);
}
double ExpansionCase::tail_angle() const { return mach_angle(downstream_mach()) - geometry.theta; }

PrimitiveState expansion_exact(const ExpansionCase& c, geom::Point p, bool check_domain) {
    if (check_domain) {
        const auto& g = c.geometry;
        const bool inside = p.x >= g.corner.x && p.x <= g.corner.x + g.length && p.y <= g.corner.y + g.top &&
                            p.y >= g.wall_y(p.x) - 1e-12;
        if (!inside) throw DomainError("point outside the expansion domain");
    }
    const double gamma = c.gamma;
    const double m1 = c.inlet_mach();
    const double phi = std::atan2(p.y - c.geometry.corner.y, p.x - c.geometry.corner.x);
    const double lead = c.lead_angle();
    if (phi >= lead) return c.inlet;

    const double nu1 = prandtl_meyer_nu(m1, gamma);
    double mach;
    double turn;
    if (phi <= c.tail_angle()) {
        mach = c.downstream_mach();
        turn = c.geometry.theta;
    } else {
        const double m2 = c.downstream_mach();
        mach = find_root(
            [&](double m) { return mach_angle(m) - (prandtl_meyer_nu(m, gamma) - nu1) - phi; }, m1, m2,
            "expansion fan");
        turn = prandtl_meyer_nu(mach, gamma) - nu1;
    }
    const double h = 0.5 * (gamma - 1.0);
    const double tr = (1.0 + h * m1 * m1) / (1.0 + h * mach * mach);
    const double a = sound_speed(c.inlet, gamma) * std::sqrt(tr);
    const double speed = mach * a;
    const double inflow_dir = std::atan2(c.inlet.v, c.inlet.u);
    return {c.inlet.rho * std::pow(tr, 1.0 / (gamma - 1.0)), speed * std::cos(inflow_dir - turn),
            speed * std::sin(inflow_dir - turn), c.inlet.p * std::pow(tr, gamma / (gamma - 1.0))};
}

// --- oblique shock -----------------------------------------------------------

namespace {
double theta_of_beta(double mach, double beta, double gamma) {
    const double s = std::sin(beta);
    return std::atan(2.0 / std::tan(beta) * (mach * mach * s * s - 1.0) /
                     (mach * mach * (gamma + std::cos(2.0 * beta)) + 2.0));
}

double beta_at_max_deflection(double mach, double gamma) {
    const double mu = mach_angle(mach);
    const auto r = boost::math::tools::brent_find_minima([&](double b) { return -theta_of_beta(mach, b, gamma); },
                                                         mu, 0.5 * pi, 52);
    return r.first;
}
}  // namespace

double max_deflection(double mach, double gamma) {
    if (!(mach > 1.0)) throw DomainError("oblique shocks need supersonic flow");
    return theta_of_beta(mach, beta_at_max_deflection(mach, gamma), gamma);
}

double normal_shock_density_ratio(double mn, double gamma) {
    return (gamma + 1.0) * mn * mn / ((gamma - 1.0) * mn * mn + 2.0);
}

ShockRatios oblique_shock_relations(double mach, double theta, double gamma) {
    if (!(mach > 1.0)) throw DomainError("oblique shocks need supersonic flow");
    if (theta < 0.0) throw DomainError("deflection angle must be non-negative");
    ShockRatios r;
    const double mu = mach_angle(mach);
    if (theta == 0.0) {
        r.beta = mu;
        r.downstream_mach = mach;
        return r;
    }
    const double bmax = beta_at_max_deflection(mach, gamma);
    if (theta > theta_of_beta(mach, bmax, gamma))
        throw DomainError("deflection exceeds the attached-shock limit; the shock detaches (use the bow-shock case)");
    r.beta = find_root([&](double b) { return theta_of_beta(mach, b, gamma) - theta; }, mu, bmax, "shock angle");
    const double mn = mach * std::sin(r.beta);
    r.density = normal_shock_density_ratio(mn, gamma);
    r.pressure = 1.0 + 2.0 * gamma / (gamma + 1.0) * (mn * mn - 1.0);
    r.temperature = r.pressure / r.density;
    const double mn2 = std::sqrt((1.0 + 0.5 * (gamma - 1.0) * mn * mn) / (gamma * mn * mn - 0.5 * (gamma - 1.0)));
    r.downstream_mach = mn2 / std::sin(r.beta - theta);
    return r;
}

double ObliqueShockCase::signed_distance(geom::Point p) const {
    return std::cos(beta) * p.y - std::sin(beta) * p.x;
}

ObliqueShockCase oblique_case_from_pre(const PrimitiveState& pre, double theta, double gamma) {
    if (!pre.admissible() || pre.u <= 0.0 || pre.v != 0.0)
        throw DomainError("oblique-shock pre state must be admissible and flow along +x");
    ObliqueShockCase c;
    c.pre = pre;
    c.theta = theta;
    c.mach = pre.u / sound_speed(pre, gamma);
    const ShockRatios r = oblique_shock_relations(c.mach, theta, gamma);
    c.beta = r.beta;
    const double rho2 = pre.rho * r.density;
    const double p2 = pre.p * r.pressure;
    const double speed = r.downstream_mach * std::sqrt(gamma * p2 / rho2);
    c.post = post_state(rho2, speed, p2, theta, VelocityOrder::CosSin);
    return c;
}

PrimitiveState oblique_exact(const ObliqueShockCase& c, geom::Point p) {
    return c.signed_distance(p) > 0.0 ? c.pre : c.post;
}

double JumpResiduals::max_abs() const {
    double m = 0.0;
    for (double r : relative) m = std::max(m, std::abs(r));
    return m;
}

JumpResiduals verify_rankine_hugoniot(const PrimitiveState& pre, const PrimitiveState& post, double beta,
                                      double gamma) {
    const geom::Point n{std::sin(beta), -std::cos(beta)};
    const geom::Point t{std::cos(beta), std::sin(beta)};
    const auto normal_fluxes = [&](const PrimitiveState& w) {
        const geom::Point vel{w.u, w.v};
        const double vn = geom::dot(vel, n);
        const double rhoE = physics::eos_energy(w, gamma);
        return std::array<double, 4>{w.rho * vn, w.rho * vn * vn + w.p, w.rho * vn * geom::dot(vel, t),
                                     vn * (rhoE + w.p)};
    };
    const auto a = normal_fluxes(pre);
    const auto b = normal_fluxes(post);
    JumpResiduals r;
    for (std::size_t k = 0; k < 4; ++k) r.relative[k] = (a[k] - b[k]) / std::abs(a[k]);
    return r;
}

std::string to_string(VelocityOrder order) { return order == VelocityOrder::CosSin ? "cos-sin" : "sin-cos"; }

PrimitiveState post_state(double rho, double speed, double p, double theta, VelocityOrder order) {
    const double c = speed * std::cos(theta);
    const double s = speed * std::sin(theta);
    return order == VelocityOrder::CosSin ? PrimitiveState{rho, c, s, p} : PrimitiveState{rho, s, c, p};
}

OrderingReport resolve_velocity_order(const PrimitiveState& pre, double rho, double speed, double p, double theta,
                                      double beta, double gamma) {
    OrderingReport r;
    r.cos_sin = verify_rankine_hugoniot(pre, post_state(rho, speed, p, theta, VelocityOrder::CosSin), beta, gamma);
    r.sin_cos = verify_rankine_hugoniot(pre, post_state(rho, speed, p, theta, VelocityOrder::SinCos), beta, gamma);
    r.chosen = r.cos_sin.max_abs() <= r.sin_cos.max_abs() ? VelocityOrder::CosSin : VelocityOrder::SinCos;
    return r;
}

// --- reference fields ------------------------------------------------------------

ReferenceField::ReferenceField(std::vector<geom::Point> points, std::vector<PrimitiveState> states, Units units,
                               FieldSource source)
    : points_(std::move(points)), states_(std::move(states)), units_(units), source_(source) {
    if (points_.size() != states_.size()) throw ContractError("reference field points and states differ in count");
    build_lattice();
}

void ReferenceField::build_lattice() {
    xs_.clear();
    ys_.clear();
    index_.clear();
    grad_.clear();
    if (points_.size() < 4) return;
    std::vector<double> xs, ys;
    for (const auto& p : points_) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (xs.size() < 2 || ys.size() < 2 || xs.size() * ys.size() > 16 * points_.size()) return;
    std::vector<long> index(xs.size() * ys.size(), -1);
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const auto i = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), points_[k].x) - xs.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), points_[k].y) - ys.begin());
        index[j * xs.size() + i] = static_cast<long>(k);
    }
    xs_ = std::move(xs);
    ys_ = std::move(ys);
    index_ = std::move(index);

    grad_.assign(points_.size(), {0.0, 0.0});
    const auto diff = [&](std::size_t i, std::size_t j, bool along_x) {
        const std::vector<double>& axis = along_x ? xs_ : ys_;
        const std::size_t c = along_x ? i : j;
        const auto at = [&](std::size_t k) { return along_x ? node(k, j) : node(i, k); };
        const long here = at(c);
        const long prev = c > 0 ? at(c - 1) : -1;
        const long next = c + 1 < axis.size() ? at(c + 1) : -1;
        if (prev >= 0 && next >= 0)
            return (states_[next].rho - states_[prev].rho) / (axis[c + 1] - axis[c - 1]);
        if (next >= 0) return (states_[next].rho - states_[here].rho) / (axis[c + 1] - axis[c]);
        if (prev >= 0) return (states_[here].rho - states_[prev].rho) / (axis[c] - axis[c - 1]);
        return 0.0;
    };
    for (std::size_t j = 0; j < ys_.size(); ++j)
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            const long k = node(i, j);
            if (k >= 0) grad_[k] = {diff(i, j, true), diff(i, j, false)};
        }
}

long ReferenceField::node(std::size_t i, std::size_t j) const { return index_[j * xs_.size() + i]; }

template <class F>
auto ReferenceField::blend(geom::Point p, F&& value_at) const {
    if (!is_lattice()) throw AnalysisError("reference field is not a lattice; interpolation unavailable");
    if (p.x < xs_.front() || p.x > xs_.back() || p.y < ys_.front() || p.y > ys_.back())
        throw AnalysisError("interpolation point outside the reference lattice");
    auto i = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), p.x) - xs_.begin());
    auto j = static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), p.y) - ys_.begin());
    i = std::clamp<std::size_t>(i, 1, xs_.size() - 1) - 1;
    j = std::clamp<std::size_t>(j, 1, ys_.size() - 1) - 1;
    const double fx = (p.x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    const double fy = (p.y - ys_[j]) / (ys_[j + 1] - ys_[j]);
    const std::array<long, 4> corner{node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
    const std::array<double, 4> w{(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    using V = decltype(value_at(0L));
    V acc{};
    double wsum = 0.0;
    bool any = false;
    for (std::size_t c = 0; c < 4; ++c) {
        if (corner[c] < 0) continue;
        any = true;
        const V v = value_at(corner[c]);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w[c] * v[k];
        wsum += w[c];
    }
    if (!any) throw AnalysisError("interpolation cell has no reference nodes");
    if (wsum <= 0.0) {
        // Point sits on a present corner's opposite side with zero weight: nearest present corner.
        for (std::size_t c = 0; c < 4; ++c)
            if (corner[c] >= 0) return value_at(corner[c]);
    }
    for (auto& v : acc) v /= wsum;
    return acc;
}

PrimitiveState ReferenceField::interpolate(geom::Point p) const {
    const auto v = blend(p, [&](long k) {
        const auto& s = states_[k];
        return std::array<double, 4>{s.rho, s.u, s.v, s.p};
    });
    return {v[0], v[1], v[2], v[3]};
}

std::array<double, 2> ReferenceField::density_gradient(geom::Point p) const {
    return blend(p, [&](long k) { return grad_[k]; });
}

ReferenceField ReferenceField::nondimensionalized(const physics::ReferenceScales& scales) const {
    if (units_ == Units::Nondimensional) return *this;
    std::vector<PrimitiveState> s;
    s.reserve(states_.size());
    for (const auto& w : states_) s.push_back(physics::nondimensionalize(w, scales));
    return ReferenceField(points_, std::move(s), Units::Nondimensional, source_);
}

ReferenceField load_reference_field(const std::filesystem::path& path, const std::string& format,
                                    const std::optional<geom::Region>& domain) {
    if (format != "csv") throw IngestionError("unsupported reference-field format '" + format + "'");
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open reference field " + path.string());
    Units units = Units::SI;
    std::vector<geom::Point> pts;
    std::vector<PrimitiveState> states;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("units:");
            if (pos != std::string::npos) {
                std::string u = line.substr(pos + 6);
                u.erase(0, u.find_first_not_of(" \t"));
                u.erase(u.find_last_not_of(" \t") + 1);
                if (u == "SI") units = Units::SI;
                else if (u == "nondim") units = Units::Nondimensional;
                else throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": unknown units '" + u + "'");
            }
            continue;
        }
        if (!header) {
            std::string h = line;
            h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
            if (h != "x,y,rho,u,v,p")
                throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": expected header x,y,rho,u,v,p");
            header = true;
            continue;
        }
        std::array<double, 6> v{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t n = 0;
        while (std::getline(ss, cell, ',')) {
            if (n >= 6) break;
            char* end = nullptr;
            v[n] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) break;
            ++n;
        }
        if (n != 6 || std::getline(ss, cell, ','))
            throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": expected 6 numeric columns");
        const PrimitiveState w{v[2], v[3], v[4], v[5]};
        if (!w.admissible())
            throw IngestionError(path.string() + ":" + std::to_string(lineno) +
                                 ": inadmissible state (rho and p must be positive and finite)");
        const geom::Point p{v[0], v[1]};
        if (domain && !domain->contains_closure(p))
            throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": point outside the declared domain");
        pts.push_back(p);
        states.push_back(w);
    }
    if (!header) throw IngestionError(path.string() + ": missing header");
    if (pts.empty()) throw IngestionError(path.string() + ": no data rows");
    return ReferenceField(std::move(pts), std::move(states), units, FieldSource::ExternalFile);
}

void save_reference_field(const std::filesystem::path& path, const ReferenceField& field) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "# units: " << (field.units() == Units::SI ? "SI" : "nondim") << "\n";
    out << "x,y,rho,u,v,p\n";
    char buf[256];
    for (std::size_t k = 0; k < field.size(); ++k) {
        const auto& p = field.points()[k];
        const auto& s = field.states()[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.x, p.y, s.rho, s.u, s.v, s.p);
        out << buf;
    }
}

}  // namespace shockpinn::oracles

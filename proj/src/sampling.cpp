#include "shockpinn/sampling.hpp"

#include "shockpinn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace shockpinn::sampling {

std::string to_string(Role role) {
    switch (role) {
        case Role::Residual: return "residual";
        case Role::GradientData: return "gradient-data";
        case Role::Inflow: return "inflow";
        case Role::WallPressure: return "wall-pressure";
        case Role::Interface: return "interface";
        case Role::WallSlip: return "wall-slip";
    }
    return "?";
}

Role parse_role(const std::string& name) {
    for (Role r : {Role::Residual, Role::GradientData, Role::Inflow, Role::WallPressure, Role::Interface,
                   Role::WallSlip})
        if (to_string(r) == name) return r;
    throw IngestionError("unknown point role '" + name + "'");
}

std::size_t target_width(Role role) {
    switch (role) {
        case Role::GradientData: return 2;
        case Role::Inflow: return 4;
        case Role::WallPressure: return 1;
        default: return 0;
    }
}

geom::Point PointSet::point(std::size_t i) const {
    const auto c = static_cast<Eigen::Index>(i);
    return {coords(0, c), coords(1, c)};
}

double PointSet::time(std::size_t i) const {
    return dimension() > 2 ? coords(2, static_cast<Eigen::Index>(i)) : 0.0;
}

void PointSet::validate() const {
    if (dimension() != 2 && dimension() != 3) throw ContractError("point sets must be 2- or 3-dimensional");
    if (static_cast<std::size_t>(targets.rows()) != target_width(role) || targets.cols() != coords.cols())
        throw ContractError(to_string(role) + " set has " + std::to_string(targets.rows()) + " target rows, expected " +
                            std::to_string(target_width(role)));
    if (role == Role::WallSlip && (normals.rows() != 2 || normals.cols() != coords.cols()))
        throw ContractError("wall-slip set needs a unit normal per point");
    if (!coords.allFinite() || !targets.allFinite()) throw ContractError(to_string(role) + " set has non-finite values");
}

PointSet PointSet::select(const std::vector<std::size_t>& columns) const {
    PointSet out;
    out.role = role;
    out.seed = seed;
    out.method = method;
    const auto n = static_cast<Eigen::Index>(columns.size());
    out.coords.resize(coords.rows(), n);
    out.targets.resize(targets.rows(), n);
    if (normals.size() > 0) out.normals.resize(2, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto c = static_cast<Eigen::Index>(columns[static_cast<std::size_t>(k)]);
        out.coords.col(k) = coords.col(c);
        if (targets.rows() > 0) out.targets.col(k) = targets.col(c);
        if (normals.size() > 0) out.normals.col(k) = normals.col(c);
    }
    return out;
}

Strategy parse_strategy(const std::string& name) {
    if (name == "uniform") return Strategy::Uniform;
    if (name == "grid") return Strategy::Grid;
    throw ConfigError("unknown sampling strategy '" + name + "'");
}

namespace {

PointSet empty_set(Role role, std::size_t dim, std::size_t n) {
    PointSet s;
    s.role = role;
    s.coords.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    s.targets.resize(static_cast<Eigen::Index>(target_width(role)), static_cast<Eigen::Index>(n));
    return s;
}

double van_der_corput(std::size_t n) {
    double q = 0.0, bk = 0.5;
    while (n > 0) {
        if (n & 1u) q += bk;
        n >>= 1u;
        bk *= 0.5;
    }
    return q;
}

}  // namespace

PointSet sample_domain(const geom::Region& region, std::size_t count, std::uint64_t seed, Strategy strategy,
                       Role role) {
    if (count == 0) throw ConfigError("sample count must be positive");
    const geom::Box box = region.bounds();
    const auto& time = region.time();
    const std::size_t dim = region.dimension();
    if (region.area() <= 0.0) throw ConfigError("cannot sample an empty region");
    PointSet out = empty_set(role, dim, count);
    out.seed = seed;

    if (strategy == Strategy::Uniform) {
        out.method = "uniform";
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax), u01(0.0, 1.0);
        std::size_t n = 0, attempts = 0;
        while (n < count) {
            if (++attempts > 1000 * count + 100000) throw ConfigError("region too thin to sample");
            const geom::Point p{ux(rng), uy(rng)};
            const double t = time ? time->t0 + u01(rng) * (time->t1 - time->t0) : 0.0;
            if (!region.contains(p)) continue;
            const auto c = static_cast<Eigen::Index>(n++);
            out.coords(0, c) = p.x;
            out.coords(1, c) = p.y;
            if (time) out.coords(2, c) = t;
        }
        return out;
    }

    out.method = "grid";
    const double fill = region.area() / (box.width() * box.height());
    const double per_axis = dim == 3 ? std::cbrt(static_cast<double>(count) / fill)
                                     : std::sqrt(static_cast<double>(count) / fill);
    for (auto k = static_cast<std::size_t>(std::ceil(per_axis - 1e-9));; ++k) {
        std::vector<std::array<double, 3>> pts;
        const std::size_t kt = dim == 3 ? k : 1;
        for (std::size_t l = 0; l < kt; ++l)
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < k; ++i) {
                    const geom::Point p{box.xmin + (static_cast<double>(i) + 0.5) * box.width() / static_cast<double>(k),
                                        box.ymin + (static_cast<double>(j) + 0.5) * box.height() / static_cast<double>(k)};
                    if (!region.contains(p)) continue;
                    const double t = time ? time->t0 + (static_cast<double>(l) + 0.5) * (time->t1 - time->t0) /
                                                           static_cast<double>(kt)
                                          : 0.0;
                    pts.push_back({p.x, p.y, t});
                }
        if (pts.size() < count) continue;
        for (std::size_t n = 0; n < count; ++n) {
            const auto c = static_cast<Eigen::Index>(n);
            for (std::size_t d = 0; d < dim; ++d) out.coords(static_cast<Eigen::Index>(d), c) = pts[n][d];
        }
        return out;
    }
}

PointSet synth_schlieren(const SchlierenSpec& spec, PointSet locations) {
    PointSet out = std::move(locations);
    out.role = Role::GradientData;
    out.targets.resize(2, out.coords.cols());
    if (spec.method == GradientMethod::Analytic) {
        if (!spec.analytic) throw ConfigError("analytic density gradient not available for this field");
        out.method = "analytic";
    } else {
        if (!spec.density) throw ConfigError("finite-difference gradients need a density field");
        if (!(spec.h > 0.0)) throw ConfigError("finite-difference spacing must be positive");
        char buf[64];
        std::snprintf(buf, sizeof buf, "fd:h=%g", spec.h);
        out.method = buf;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const geom::Point p = out.point(i);
        const double t = out.time(i);
        std::array<double, 2> g{};
        if (spec.method == GradientMethod::Analytic) {
            g = spec.analytic(p.x, p.y, t);
        } else {
            const double h = spec.h;
            const double side = spec.discontinuity ? spec.discontinuity(p) : 0.0;
            const auto same_side = [&](geom::Point q) {
                return !spec.discontinuity || ((spec.discontinuity(q) > 0.0) == (side > 0.0));
            };
            for (int d = 0; d < 2; ++d) {
                const geom::Point e = d == 0 ? geom::Point{h, 0.0} : geom::Point{0.0, h};
                const auto f = [&](geom::Point q) { return spec.density(q.x, q.y, t); };
                const geom::Point fwd = p + e, bwd = p - e;
                if (same_side(fwd) && same_side(bwd)) {
                    g[d] = (f(fwd) - f(bwd)) / (2.0 * h);
                } else if (same_side(bwd) && same_side(p - 2.0 * e)) {
                    g[d] = (3.0 * f(p) - 4.0 * f(bwd) + f(p - 2.0 * e)) / (2.0 * h);
                } else if (same_side(fwd) && same_side(p + 2.0 * e)) {
                    g[d] = (-3.0 * f(p) + 4.0 * f(fwd) - f(p + 2.0 * e)) / (2.0 * h);
                } else {
                    throw ConfigError("finite-difference stencil cannot avoid the discontinuity; reduce h");
                }
            }
        }
        if (!std::isfinite(g[0]) || !std::isfinite(g[1])) throw ConfigError("density gradient undefined in region D");
        out.targets(0, static_cast<Eigen::Index>(i)) = g[0];
        out.targets(1, static_cast<Eigen::Index>(i)) = g[1];
    }
    return out;
}

PointSet synth_schlieren(const SchlierenSpec& spec, const geom::Region& region, std::size_t count, std::uint64_t seed,
                         Strategy strategy) {
    return synth_schlieren(spec, sample_domain(region, count, seed, strategy, Role::GradientData));
}

namespace {

void fill_boundary_point(PointSet& out, std::size_t n, geom::Point p, double t, const BoundarySpec& spec) {
    const auto c = static_cast<Eigen::Index>(n);
    if (spec.domain && !spec.domain->contains_closure(p)) throw ConfigError("boundary curve leaves the domain");
    out.coords(0, c) = p.x;
    out.coords(1, c) = p.y;
    if (spec.time) out.coords(2, c) = t;
    const std::size_t w = target_width(spec.role);
    if (w > 0) {
        if (!spec.targets) throw ConfigError(to_string(spec.role) + " boundary set needs targets");
        const std::vector<double> v = spec.targets(p, t);
        if (v.size() != w) throw ContractError("boundary target size does not match role");
        for (std::size_t k = 0; k < w; ++k) out.targets(static_cast<Eigen::Index>(k), c) = v[k];
    }
    if (spec.role == Role::WallSlip) {
        if (!spec.normal) throw ConfigError("wall-slip boundary set needs normals");
        const geom::Point nrm = spec.normal(p);
        const double len = geom::norm(nrm);
        out.normals(0, c) = nrm.x / len;
        out.normals(1, c) = nrm.y / len;
    }
}

}  // namespace

PointSet sample_boundary(const geom::Curve& curve, std::size_t count, std::uint64_t seed, const BoundarySpec& spec) {
    if (count == 0) throw ConfigError("sample count must be positive");
    if (curve.empty() || !(curve.length() > 0.0)) throw ConfigError("degenerate boundary curve");
    PointSet out = empty_set(spec.role, spec.time ? 3 : 2, count);
    if (spec.role == Role::WallSlip) out.normals.resize(2, static_cast<Eigen::Index>(count));
    out.seed = seed;
    out.method = "uniform";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t n = 0; n < count; ++n) {
        const double s = u01(rng);
        const double t = spec.time ? spec.time->t0 + u01(rng) * (spec.time->t1 - spec.time->t0) : 0.0;
        fill_boundary_point(out, n, curve.at(s), t, spec);
    }
    return out;
}

PointSet sample_interface(const geom::Curve& curve, std::size_t count, std::optional<geom::TimeInterval> time) {
    if (count == 0) throw ConfigError("interface point count must be positive");
    if (curve.empty() || !(curve.length() > 0.0)) throw ConfigError("degenerate interface curve");
    PointSet out = empty_set(Role::Interface, time ? 3 : 2, count);
    out.method = "even";
    for (std::size_t n = 0; n < count; ++n) {
        const double s = count == 1 ? 0.5 : static_cast<double>(n) / static_cast<double>(count - 1);
        const geom::Point p = curve.at(s);
        const auto c = static_cast<Eigen::Index>(n);
        out.coords(0, c) = p.x;
        out.coords(1, c) = p.y;
        if (time) out.coords(2, c) = time->t0 + van_der_corput(n + 1) * (time->t1 - time->t0);
    }
    return out;
}

void add_noise(PointSet& set, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    for (Eigen::Index j = 0; j < set.targets.cols(); ++j)
        for (Eigen::Index i = 0; i < set.targets.rows(); ++i) set.targets(i, j) += dist(rng);
}

PointSet concatenate(const std::vector<PointSet>& sets) {
    if (sets.empty()) throw ContractError("nothing to concatenate");
    PointSet out;
    out.role = sets.front().role;
    out.seed = sets.front().seed;
    out.method = sets.front().method;
    Eigen::Index n = 0;
    for (const auto& s : sets) {
        if (s.role != out.role || s.dimension() != sets.front().dimension())
            throw ContractError("concatenating point sets of different roles or dimensions");
        n += s.coords.cols();
    }
    const bool normals = sets.front().normals.size() > 0;
    out.coords.resize(sets.front().coords.rows(), n);
    out.targets.resize(sets.front().targets.rows(), n);
    if (normals) out.normals.resize(2, n);
    Eigen::Index at = 0;
    for (const auto& s : sets) {
        out.coords.middleCols(at, s.coords.cols()) = s.coords;
        out.targets.middleCols(at, s.coords.cols()) = s.targets;
        if (normals) out.normals.middleCols(at, s.coords.cols()) = s.normals;
        at += s.coords.cols();
    }
    return out;
}

void write_point_sets(const std::filesystem::path& path, const std::vector<PointSet>& sets) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "role,x,y,t,c0,c1,c2,c3,nx,ny\n";
    char buf[64];
    const auto cell = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& s : sets) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            out << to_string(s.role) << ',' << cell(s.coords(0, c)) << ',' << cell(s.coords(1, c)) << ',';
            if (s.dimension() > 2) out << cell(s.coords(2, c));
            for (Eigen::Index k = 0; k < 4; ++k) {
                out << ',';
                if (k < s.targets.rows()) out << cell(s.targets(k, c));
            }
            out << ',';
            if (s.normals.size() > 0) out << cell(s.normals(0, c));
            out << ',';
            if (s.normals.size() > 0) out << cell(s.normals(1, c));
            out << '\n';
        }
    }
}

std::vector<PointSet> read_point_sets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open point file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("role,x,y,t", 0) != 0)
        throw IngestionError(path.string() + ": expected header role,x,y,t,c0,c1,c2,c3,nx,ny");
    struct Rows {
        Role role;
        bool has_time = false;
        std::vector<std::array<double, 10>> rows;
    };
    std::vector<Rows> groups;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 10) throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": expected 10 columns");
        const Role role = parse_role(cells[0]);
        const bool has_time = !cells[3].empty();
        if (groups.empty() || groups.back().role != role || groups.back().has_time != has_time)
            groups.push_back({role, has_time, {}});
        std::array<double, 10> v{};
        for (std::size_t k = 1; k < 10; ++k) {
            if (cells[k].empty()) continue;
            char* end = nullptr;
            v[k] = std::strtod(cells[k].c_str(), &end);
            if (end == cells[k].c_str())
                throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cells[k] + "'");
        }
        groups.back().rows.push_back(v);
    }
    std::vector<PointSet> out;
    for (const auto& g : groups) {
        PointSet s = empty_set(g.role, g.has_time ? 3 : 2, g.rows.size());
        s.method = "file";
        if (g.role == Role::WallSlip) s.normals.resize(2, static_cast<Eigen::Index>(g.rows.size()));
        for (std::size_t i = 0; i < g.rows.size(); ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            const auto& r = g.rows[i];
            s.coords(0, c) = r[1];
            s.coords(1, c) = r[2];
            if (g.has_time) s.coords(2, c) = r[3];
            for (Eigen::Index k = 0; k < s.targets.rows(); ++k) s.targets(k, c) = r[4 + static_cast<std::size_t>(k)];
            if (g.role == Role::WallSlip) {
                s.normals(0, c) = r[8];
                s.normals(1, c) = r[9];
            }
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace shockpinn::sampling

#include "shockpinn/geometry.hpp"

#include "shockpinn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace shockpinn::geom {

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }
double distance(Point a, Point b) { return norm(a - b); }

namespace {

double segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double u = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return distance(p, a + u * ab);
}

}  // namespace

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw ConfigError("polygon needs at least three vertices");
}

Polygon Polygon::rectangle(const Box& b) {
    if (!(b.xmax > b.xmin && b.ymax > b.ymin)) throw ConfigError("empty box");
    return Polygon({{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax}});
}

bool Polygon::contains(Point p) const {
    if (boundary_distance(p) <= 1e-14) return false;
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = vertices_[i];
        const Point b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double Polygon::signed_area() const {
    double s = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(vertices_[i], vertices_[(i + 1) % n]);
    return 0.5 * s;
}

Box Polygon::bounds() const {
    Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point& v : vertices_) {
        b.xmin = std::min(b.xmin, v.x);
        b.xmax = std::max(b.xmax, v.x);
        b.ymin = std::min(b.ymin, v.y);
        b.ymax = std::max(b.ymax, v.y);
    }
    return b;
}

double Polygon::boundary_distance(Point p) const {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) d = std::min(d, segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
    return d;
}

Region::Region(Polygon outer, std::vector<Disk> holes, std::optional<TimeInterval> time)
    : outer_(std::move(outer)), holes_(std::move(holes)), time_(time) {
    if (time_ && time_->t1 < time_->t0) throw ConfigError("time interval is reversed");
    for (const Disk& d : holes_)
        if (!(d.radius > 0.0)) throw ConfigError("hole radius must be positive");
}

bool Region::contains(Point p) const {
    if (!outer_.contains(p)) return false;
    return std::none_of(holes_.begin(), holes_.end(), [&](const Disk& d) { return distance(p, d.center) <= d.radius; });
}

bool Region::contains_closure(Point p, double tol) const {
    if (contains(p)) return true;
    if (!outer_.contains(p) && outer_.boundary_distance(p) > tol) return false;
    return std::all_of(holes_.begin(), holes_.end(),
                       [&](const Disk& d) { return distance(p, d.center) >= d.radius - tol; });
}

double Region::area() const {
    const Box b = bounds();
    const int n = 400;
    std::size_t hits = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (contains({b.xmin + (i + 0.5) * b.width() / n, b.ymin + (j + 0.5) * b.height() / n})) ++hits;
    return b.width() * b.height() * static_cast<double>(hits) / (n * n);
}

// ---------------------------------------------------------------------------

Point Curve::Piece::at(double u) const {
    if (!is_arc) return a + u * (b - a);
    const double phi = phi0 + u * (phi1 - phi0);
    return {center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)};
}

Point Curve::Piece::tangent(double u) const {
    if (!is_arc) return (1.0 / length) * (b - a);
    const double phi = phi0 + u * (phi1 - phi0);
    const double sgn = phi1 > phi0 ? 1.0 : -1.0;
    return {-sgn * std::sin(phi), sgn * std::cos(phi)};
}

Curve Curve::segment(Point a, Point b) {
    Curve c;
    Piece p;
    p.a = a;
    p.b = b;
    p.length = distance(a, b);
    if (!(p.length > 0.0)) throw ConfigError("degenerate segment");
    c.pieces_.push_back(p);
    c.length_ = p.length;
    return c;
}

Curve Curve::arc(Point center, double radius, double phi0, double phi1) {
    if (!(radius > 0.0) || phi0 == phi1) throw ConfigError("degenerate arc");
    Curve c;
    Piece p;
    p.is_arc = true;
    p.center = center;
    p.radius = radius;
    p.phi0 = phi0;
    p.phi1 = phi1;
    p.length = radius * std::abs(phi1 - phi0);
    c.pieces_.push_back(p);
    c.length_ = p.length;
    return c;
}

Curve Curve::polyline(std::span<const Point> points) {
    if (points.size() < 2) throw ConfigError("polyline needs at least two points");
    Curve c = segment(points[0], points[1]);
    for (std::size_t i = 2; i < points.size(); ++i) c.append(segment(points[i - 1], points[i]));
    return c;
}

Curve& Curve::append(const Curve& other) {
    pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end());
    length_ += other.length_;
    return *this;
}

std::pair<std::size_t, double> Curve::locate(double s) const {
    if (pieces_.empty()) throw ContractError("empty curve");
    double target = std::clamp(s, 0.0, 1.0) * length_;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (target <= pieces_[i].length || i + 1 == pieces_.size())
            return {i, std::clamp(target / pieces_[i].length, 0.0, 1.0)};
        target -= pieces_[i].length;
    }
    return {pieces_.size() - 1, 1.0};
}

Point Curve::at(double s) const {
    const auto [i, u] = locate(s);
    return pieces_[i].at(u);
}

Point Curve::tangent(double s) const {
    const auto [i, u] = locate(s);
    return pieces_[i].tangent(u);
}

Point Curve::right_normal(double s) const {
    const Point t = tangent(s);
    return {t.y, -t.x};
}

bool Curve::closed(double tol) const { return !pieces_.empty() && distance(start(), end()) <= tol; }

double Curve::signed_distance(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (const Piece& piece : pieces_) {
        double d;
        double side;
        if (!piece.is_arc) {
            d = segment_distance(p, piece.a, piece.b);
            side = cross(piece.b - piece.a, p - piece.a);
        } else {
            const double r = distance(p, piece.center);
            double phi = std::atan2(p.y - piece.center.y, p.x - piece.center.x);
            const double lo = std::min(piece.phi0, piece.phi1);
            const double hi = std::max(piece.phi0, piece.phi1);
            while (phi < lo) phi += 2.0 * std::numbers::pi;
            while (phi > hi && phi - 2.0 * std::numbers::pi >= lo) phi -= 2.0 * std::numbers::pi;
            if (phi >= lo && phi <= hi) d = std::abs(r - piece.radius);
            else d = std::min(distance(p, piece.at(0.0)), distance(p, piece.at(1.0)));
            // Counter-clockwise arcs have their center on the left.
            const double ccw = piece.phi1 > piece.phi0 ? 1.0 : -1.0;
            side = ccw * (piece.radius - r);
        }
        if (d < best) {
            best = d;
            sign = side >= 0.0 ? 1.0 : -1.0;
        }
    }
    return sign * best;
}

// ---------------------------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t order) {
    if (order == 0) throw ConfigError("quadrature order must be positive");
    std::vector<double> x(order), w(order);
    const std::size_t m = (order + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t k = 1; k <= order; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
            }
            dp = static_cast<double>(order) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = w[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

QuadratureRule boundary_quadrature(const Curve& curve, std::size_t panels, std::size_t order) {
    if (curve.empty()) throw ConfigError("quadrature over an empty curve");
    if (panels == 0) throw ConfigError("quadrature needs at least one panel");
    const auto [nodes, weights] = gauss_legendre(order);
    QuadratureRule rule;
    for (const auto& piece : curve.pieces()) {
        const double h = 1.0 / static_cast<double>(panels);
        for (std::size_t k = 0; k < panels; ++k) {
            for (std::size_t i = 0; i < order; ++i) {
                const double u = (static_cast<double>(k) + 0.5 * (nodes[i] + 1.0)) * h;
                const Point t = piece.tangent(u);
                rule.points.push_back(piece.at(u));
                rule.normals.push_back({t.y, -t.x});
                rule.weights.push_back(0.5 * weights[i] * h * piece.length);
            }
        }
    }
    return rule;
}

}  // namespace shockpinn::geom

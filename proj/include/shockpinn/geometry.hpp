#pragma once

// Planar geometry for the experiment domains: points, polygons, regions with
// circular holes and an optional time interval, piecewise curves parameterized
// by arclength, and Gauss-Legendre boundary quadrature.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace shockpinn::geom {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point&, const Point&) = default;
};

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);
double distance(Point a, Point b);

struct Box {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    [[nodiscard]] double width() const { return xmax - xmin; }
    [[nodiscard]] double height() const { return ymax - ymin; }
};

class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Point> vertices);
    static Polygon rectangle(const Box& box);

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    /// Even-odd rule; boundary points count as outside.
    [[nodiscard]] bool contains(Point p) const;
    [[nodiscard]] double signed_area() const;
    [[nodiscard]] Box bounds() const;
    /// Distance from `p` to the nearest edge.
    [[nodiscard]] double boundary_distance(Point p) const;

private:
    std::vector<Point> vertices_;
};

struct Disk {
    Point center;
    double radius = 0.0;
    [[nodiscard]] bool contains(Point p) const { return distance(p, center) < radius; }
};

struct TimeInterval {
    double t0 = 0.0;
    double t1 = 1.0;
};

/// Polygon minus disks, optionally extruded over a time interval.
class Region {
public:
    Region() = default;
    explicit Region(Polygon outer, std::vector<Disk> holes = {}, std::optional<TimeInterval> time = std::nullopt);

    [[nodiscard]] bool contains(Point p) const;
    /// Inside or within `tol` of the outer boundary or a hole boundary.
    [[nodiscard]] bool contains_closure(Point p, double tol = 1e-9) const;
    [[nodiscard]] const Polygon& outer() const noexcept { return outer_; }
    [[nodiscard]] const std::vector<Disk>& holes() const noexcept { return holes_; }
    [[nodiscard]] const std::optional<TimeInterval>& time() const noexcept { return time_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return time_ ? 3 : 2; }
    [[nodiscard]] Box bounds() const { return outer_.bounds(); }
    [[nodiscard]] double area() const;

private:
    Polygon outer_;
    std::vector<Disk> holes_;
    std::optional<TimeInterval> time_;
};

/// Concatenation of straight segments and circular arcs, parameterized by
/// arclength. The right-hand normal of a counter-clockwise loop points outward.
class Curve {
public:
    static Curve segment(Point a, Point b);
    /// Arc of `center`, `radius` from angle `phi0` to `phi1` (radians, either direction).
    static Curve arc(Point center, double radius, double phi0, double phi1);
    static Curve polyline(std::span<const Point> points);

    Curve& append(const Curve& other);

    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] bool empty() const noexcept { return pieces_.empty(); }
    [[nodiscard]] std::size_t piece_count() const noexcept { return pieces_.size(); }
    /// Point at arclength fraction `s` in [0, 1].
    [[nodiscard]] Point at(double s) const;
    /// Unit tangent at fraction `s`.
    [[nodiscard]] Point tangent(double s) const;
    /// Unit normal = tangent rotated clockwise by 90 degrees.
    [[nodiscard]] Point right_normal(double s) const;
    [[nodiscard]] Point start() const { return at(0.0); }
    [[nodiscard]] Point end() const { return at(1.0); }
    [[nodiscard]] bool closed(double tol = 1e-12) const;

    /// Nearest distance from `p` to the curve and the side: positive when `p`
    /// is to the left of the nearest piece.
    [[nodiscard]] double signed_distance(Point p) const;

    struct Piece {
        bool is_arc = false;
        Point a, b;            // segment endpoints
        Point center;          // arc data
        double radius = 0.0;
        double phi0 = 0.0, phi1 = 0.0;
        double length = 0.0;
        [[nodiscard]] Point at(double u) const;       // u in [0, 1]
        [[nodiscard]] Point tangent(double u) const;
    };
    [[nodiscard]] const std::vector<Piece>& pieces() const noexcept { return pieces_; }

private:
    std::pair<std::size_t, double> locate(double s) const;
    std::vector<Piece> pieces_;
    double length_ = 0.0;
};

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<Point> normals;   ///< right-hand unit normals
    std::vector<double> weights;  ///< arclength weights
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t order);

/// Composite Gauss-Legendre rule along the curve: each piece is split into
/// `panels` equal panels with `order` nodes each.
QuadratureRule boundary_quadrature(const Curve& curve, std::size_t panels, std::size_t order);

}  // namespace shockpinn::geom

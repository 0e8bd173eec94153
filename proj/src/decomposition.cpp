#include "shockpinn/decomposition.hpp"

#include "shockpinn/error.hpp"

#include <algorithm>
#include <cmath>

namespace shockpinn::decomp {

Decomposition::Decomposition(geom::Region domain, std::vector<geom::Curve> cuts, double tolerance)
    : domain_(std::move(domain)), cuts_(std::move(cuts)), tolerance_(tolerance) {
    for (const auto& c : cuts_)
        if (c.empty()) throw ConfigError("empty subdomain cut");
    if (!(tolerance_ >= 0.0)) throw ConfigError("interface tolerance must be non-negative");
}

Location Decomposition::classify(geom::Point p) const {
    std::size_t positive = 0;
    std::optional<std::size_t> touching;
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
        const double d = cuts_[k].signed_distance(p);
        if (std::abs(d) < tolerance_) touching = k;
        else if (d > 0.0) ++positive;
    }
    if (touching) {
        // On cut k: neighbours are the subdomains with and without that cut counted.
        return {{positive, positive + 1}};
    }
    return {{positive}};
}

Location Decomposition::locate(geom::Point p) const {
    if (!domain_.contains_closure(p, 1e-12)) throw DomainError("point lies outside the decomposed domain");
    return classify(p);
}

geom::Curve clip_to_domain(const geom::Curve& cut, const geom::Region& domain, std::size_t resolution) {
    const std::size_t n = std::max<std::size_t>(resolution, 2) * cut.piece_count();
    const auto inside = [&](double s) { return domain.contains_closure(cut.at(s), 1e-12); };
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i <= n; ++i) {
        if (inside(static_cast<double>(i) / static_cast<double>(n))) {
            if (!first) first = i;
            last = i;
        }
    }
    if (!first) throw ConfigError("subdomain cut does not intersect the domain");
    const auto refine = [&](double in, double out) {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (in + out);
            (inside(mid) ? in : out) = mid;
        }
        return in;
    };
    const double step = 1.0 / static_cast<double>(n);
    const double s0 = *first == 0 ? 0.0 : refine(static_cast<double>(*first) * step, static_cast<double>(*first - 1) * step);
    const double s1 = *last == n ? 1.0 : refine(static_cast<double>(*last) * step, static_cast<double>(*last + 1) * step);

    std::vector<double> params{s0};
    double acc = 0.0;
    for (const auto& piece : cut.pieces()) {
        const double a = acc / cut.length();
        acc += piece.length;
        const double b = acc / cut.length();
        if (piece.is_arc)
            for (std::size_t k = 1; k < resolution; ++k) {
                const double s = a + (b - a) * static_cast<double>(k) / static_cast<double>(resolution);
                if (s > s0 && s < s1) params.push_back(s);
            }
        if (b > s0 && b < s1) params.push_back(b);
    }
    params.push_back(s1);
    std::sort(params.begin(), params.end());
    std::vector<geom::Point> pts;
    for (double s : params) {
        const geom::Point p = cut.at(s);
        if (pts.empty() || geom::distance(pts.back(), p) > 1e-14) pts.push_back(p);
    }
    if (pts.size() < 2) throw ConfigError("subdomain cut only touches the domain");
    return geom::Curve::polyline(pts);
}

}  // namespace shockpinn::decomp

#include "shockpinn/analysis.hpp"

#include "shockpinn/error.hpp"
#include "shockpinn/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace shockpinn::analysis {

double relative_l2(std::span<const double> predicted, std::span<const double> reference) {
    if (predicted.size() != reference.size()) throw AnalysisError("relative L2: field sizes differ");
    if (reference.empty()) throw AnalysisError("relative L2: empty fields");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = predicted[i] - reference[i];
        num += d * d;
        den += reference[i] * reference[i];
    }
    if (!(den > 0.0)) throw AnalysisError("relative L2: reference field has zero norm");
    return std::sqrt(num / den);
}

EvaluationGrid make_grid(const geom::Region& region, std::size_t nx, std::size_t ny, std::optional<double> time) {
    if (nx < 2 || ny < 2) throw ConfigError("evaluation grid needs at least 2 nodes per direction");
    const geom::Box b = region.bounds();
    std::vector<geom::Point> kept;
    kept.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const geom::Point p{b.xmin + b.width() * static_cast<double>(i) / static_cast<double>(nx - 1),
                                b.ymin + b.height() * static_cast<double>(j) / static_cast<double>(ny - 1)};
            if (region.contains_closure(p, 1e-9)) kept.push_back(p);
        }
    EvaluationGrid g;
    g.nx = nx;
    g.ny = ny;
    g.time = time;
    g.points.resize(time ? 3 : 2, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        g.points(0, c) = kept[k].x;
        g.points(1, c) = kept[k].y;
        if (time) g.points(2, c) = *time;
    }
    return g;
}

ErrorReport error_report(const FieldFunction& predicted, const FieldFunction& reference,
                         std::span<const EvaluationGrid> grids, std::size_t threads) {
    ErrorReport r;
    for (const auto& g : grids) {
        const std::size_t n = static_cast<std::size_t>(g.points.cols());
        const std::size_t start = r.samples.size();
        r.samples.resize(start + n);
        parallel_for(n, threads, [&](std::size_t k) {
            const auto c = static_cast<Eigen::Index>(k);
            std::array<double, 3> x{g.points(0, c), g.points(1, c), g.points.rows() > 2 ? g.points(2, c) : 0.0};
            const std::span<const double> pt(x.data(), static_cast<std::size_t>(g.points.rows()));
            r.samples[start + k] = {x, predicted(pt), reference(pt)};
        });
    }
    std::vector<double> p(r.samples.size()), q(r.samples.size());
    for (std::size_t v = 0; v < 4; ++v) {
        for (std::size_t k = 0; k < r.samples.size(); ++k) {
            p[k] = r.samples[k].predicted[v];
            q[k] = r.samples[k].reference[v];
        }
        r.relative_l2[v] = relative_l2(p, q);
    }
    return r;
}

std::optional<std::array<double, 4>> interface_jump(std::span<const nn::NetworkParams> subnets, std::size_t a,
                                                    std::size_t b, const Eigen::MatrixXd& points) {
    if (subnets.size() < 2) return std::nullopt;
    if (a >= subnets.size() || b >= subnets.size()) throw AnalysisError("interface references a missing subnet");
    nn::BatchEvaluator ea, eb;
    ea.forward(subnets[a], points, 0);
    eb.forward(subnets[b], points, 0);
    std::array<double, 4> jump{};
    for (Eigen::Index i = 0; i < points.cols(); ++i)
        for (Eigen::Index c = 0; c < 4; ++c)
            jump[static_cast<std::size_t>(c)] =
                std::max(jump[static_cast<std::size_t>(c)], std::abs(ea.output()(c, i) - eb.output()(c, i)));
    return jump;
}

std::string to_string(NormKind kind) { return kind == NormKind::Spectral ? "spectral" : "frobenius"; }

NormKind parse_norm_kind(const std::string& name) {
    if (name == "spectral") return NormKind::Spectral;
    if (name == "frobenius") return NormKind::Frobenius;
    throw ConfigError("unknown norm '" + name + "' (expected spectral or frobenius)");
}

double complexity_measure(const nn::NetworkParams& net, NormKind kind) {
    double product = 1.0;
    for (std::size_t k = 0; k < net.depth(); ++k) {
        const Eigen::MatrixXd W = net.weights(k);
        if (kind == NormKind::Frobenius) {
            product *= W.norm();
        } else {
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
            product *= svd.singularValues()(0);
        }
    }
    return product;
}

ComplexityReport complexity_norms(const nn::NetworkParams& baseline, std::span<const nn::NetworkParams> subnets,
                                  NormKind kind) {
    ComplexityReport r;
    r.kind = kind;
    const double base = complexity_measure(baseline, kind);
    if (!(base > 0.0)) throw AnalysisError("baseline network has a zero norm measure");
    r.rows.push_back({"PINN", base, 100.0});
    double sum = 0.0;
    for (std::size_t q = 0; q < subnets.size(); ++q) {
        const double m = complexity_measure(subnets[q], kind);
        sum += m;
        r.rows.push_back({"XPINN-" + std::to_string(q + 1), m, 100.0 * m / base});
    }
    if (!subnets.empty()) r.combined_percent = 100.0 * sum / base;
    return r;
}

void write_field_csv(const std::filesystem::path& path, const ErrorReport& report) {
    std::ofstream out(path);
    if (!out) throw AnalysisError("cannot write " + path.string());
    out << "x,y,t,var,predicted,reference,abs_error,rel_error\n";
    char line[256];
    for (const auto& s : report.samples)
        for (std::size_t v = 0; v < 4; ++v) {
            const double pred = s.predicted[v], ref = s.reference[v];
            const double abs_err = std::abs(pred - ref);
            const double rel_err = ref != 0.0 ? abs_err / std::abs(ref) : abs_err;
            std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%s,%.10g,%.10g,%.6g,%.6g\n", s.x[0], s.x[1], s.x[2],
                          kVariables[v], pred, ref, abs_err, rel_err);
            out << line;
        }
}

}  // namespace shockpinn::analysis

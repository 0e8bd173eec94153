#include "shockpinn/network.hpp"

#include "shockpinn/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace shockpinn::nn {

NetworkParams::NetworkParams(std::vector<std::size_t> layer_sizes, double scale_n, double alpha_clamp)
    : sizes_(std::move(layer_sizes)), scale_n_(scale_n), alpha_(alpha_clamp) {
    if (sizes_.size() < 3) throw ConfigError("network needs at least one hidden layer");
    for (std::size_t s : sizes_)
        if (s == 0) throw ConfigError("layer sizes must be positive");
    if (sizes_.front() > ad::kMaxDirections) throw ConfigError("network input width must be 2 or 3");
    if (sizes_.back() != kOutputWidth) throw ConfigError("network output width must be 4 (rho, u, v, p)");
    if (!(alpha_clamp > 0.0 && alpha_clamp < 1.0)) throw ConfigError("alpha_clamp must lie in (0, 1)");
    if (!(scale_n > 0.0)) throw ConfigError("scale_n must be positive");
    std::size_t offset = 0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
        weight_offset_.push_back(offset);
        offset += sizes_[k + 1] * sizes_[k] + sizes_[k + 1];
        if (k + 2 < sizes_.size()) offset += 1;  // slope
    }
    values_.assign(offset, 0.0);
    for (std::size_t k = 0; k < hidden_layers(); ++k) values_[slope_offset(k)] = 1.0 / scale_n_;
}

std::size_t NetworkParams::slope_offset(std::size_t layer) const {
    if (layer >= hidden_layers()) throw ContractError("output layer has no activation slope");
    return bias_offset(layer) + rows(layer);
}

Eigen::Map<const RowMatrix> NetworkParams::weights(std::size_t layer) const {
    return {values_.data() + weight_offset(layer), static_cast<Eigen::Index>(rows(layer)),
            static_cast<Eigen::Index>(cols(layer))};
}
Eigen::Map<RowMatrix> NetworkParams::weights(std::size_t layer) {
    return {values_.data() + weight_offset(layer), static_cast<Eigen::Index>(rows(layer)),
            static_cast<Eigen::Index>(cols(layer))};
}
Eigen::Map<const Eigen::VectorXd> NetworkParams::bias(std::size_t layer) const {
    return {values_.data() + bias_offset(layer), static_cast<Eigen::Index>(rows(layer))};
}
Eigen::Map<Eigen::VectorXd> NetworkParams::bias(std::size_t layer) {
    return {values_.data() + bias_offset(layer), static_cast<Eigen::Index>(rows(layer))};
}

std::vector<double> NetworkParams::trainable_mask() const {
    std::vector<double> mask(values_.size(), 1.0);
    if (!adaptive_)
        for (std::size_t k = 0; k < hidden_layers(); ++k) mask[slope_offset(k)] = 0.0;
    return mask;
}

NetworkParams xavier_init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed, double scale_n,
                          double alpha_clamp) {
    NetworkParams params(layer_sizes, scale_n, alpha_clamp);
    params.set_seed(seed);
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < params.depth(); ++k) {
        const double fan = static_cast<double>(params.rows(k) + params.cols(k));
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan));
        auto W = params.weights(k);
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = dist(rng);
    }
    return params;
}

NetworkOutput forward(const NetworkParams& params, std::span<const double> point) {
    if (point.size() != params.input_width()) throw ContractError("point dimension does not match network input width");
    std::vector<ad::DualPoint> theta(params.values().begin(), params.values().end());
    std::vector<ad::DualPoint> inputs;
    for (std::size_t i = 0; i < point.size(); ++i)
        inputs.push_back(ad::DualPoint::variable(point[i], point.size(), i));
    const auto out = forward_generic<ad::DualPoint>(params, theta, inputs);
    NetworkOutput r{out[0], out[1], out[2], out[3]};
    for (std::size_t c = 0; c < 4; ++c) r[c].width = static_cast<std::uint8_t>(point.size());
    return r;
}

NetworkOutput stitched_forward(std::span<const NetworkParams> subnets, const Locator& locate,
                               std::span<const double> point) {
    const std::vector<std::size_t> owners = locate(point);
    if (owners.empty()) throw DomainError("point lies outside every subdomain");
    NetworkOutput sum = forward(subnets[owners.front()], point);
    if (owners.size() == 1) return sum;
    for (std::size_t i = 1; i < owners.size(); ++i) {
        const NetworkOutput o = forward(subnets[owners[i]], point);
        for (std::size_t c = 0; c < 4; ++c) sum[c] = sum[c] + o[c];
    }
    const double inv = 1.0 / static_cast<double>(owners.size());
    for (std::size_t c = 0; c < 4; ++c) sum[c] = sum[c] * inv;
    return sum;
}

// ---------------------------------------------------------------------------

void BatchEvaluator::forward(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& points,
                             std::size_t directions) {
    if (static_cast<std::size_t>(points.rows()) != params.input_width())
        throw ContractError("point dimension does not match network input width");
    if (directions > params.input_width()) throw ContractError("more tangent directions than inputs");
    batch_ = static_cast<std::size_t>(points.cols());
    directions_ = directions;
    const std::size_t L = params.depth();
    layers_.resize(L);
    input_ = points;

    for (std::size_t k = 0; k < L; ++k) {
        Layer& layer = layers_[k];
        // Owned copies keep the SIMD reduction order independent of where the parameters live.
        const RowMatrix W = params.weights(k);
        const Eigen::VectorXd b = params.bias(k);
        const Eigen::MatrixXd& prev = k == 0 ? input_ : layers_[k - 1].h;
        layer.z.noalias() = W * prev;
        layer.z.colwise() += b;
        layer.dz.resize(directions);
        for (std::size_t d = 0; d < directions; ++d) {
            if (k == 0) layer.dz[d] = W.col(static_cast<Eigen::Index>(d)).replicate(1, static_cast<Eigen::Index>(batch_));
            else layer.dz[d].noalias() = W * layers_[k - 1].dh[d];
        }
        if (k + 1 < L) {
            const double s = params.slope(k) * params.scale_n();
            layer.h = (s * layer.z.array()).tanh().matrix();
            layer.dh.resize(directions);
            for (std::size_t d = 0; d < directions; ++d)
                layer.dh[d] = (s * (1.0 - layer.h.array().square()) * layer.dz[d].array()).matrix();
        }
    }

    const Layer& last = layers_.back();
    output_ = last.z;
    output_tangent_.assign(last.dz.begin(), last.dz.end());
    const double alpha = params.alpha_clamp();
    clamped_.setConstant(4, static_cast<Eigen::Index>(batch_), false);
    for (Eigen::Index c : {Eigen::Index{0}, Eigen::Index{3}}) {
        for (Eigen::Index j = 0; j < output_.cols(); ++j) {
            if (output_(c, j) >= alpha) continue;
            clamped_(c, j) = true;
            output_(c, j) = alpha;
            for (auto& t : output_tangent_) t(c, j) = 0.0;
        }
    }
}

void BatchEvaluator::backward(const NetworkParams& params, const Eigen::MatrixXd& output_adjoint,
                              const std::vector<Eigen::MatrixXd>& tangent_adjoint, std::span<double> grad) const {
    if (grad.size() != params.size()) throw ContractError("gradient buffer has wrong size");
    if (tangent_adjoint.size() > directions_) throw ContractError("tangent adjoints exceed forward directions");
    const std::size_t L = params.depth();
    const std::size_t D = tangent_adjoint.size();
    const Eigen::Index B = static_cast<Eigen::Index>(batch_);

    Eigen::MatrixXd zbar = output_adjoint;
    std::vector<Eigen::MatrixXd> dzbar(tangent_adjoint.begin(), tangent_adjoint.end());
    zbar = clamped_.select(0.0, zbar);
    for (auto& t : dzbar) t = clamped_.select(0.0, t);

    Eigen::MatrixXd hbar;
    std::vector<Eigen::MatrixXd> dhbar(D);
    for (std::size_t k = L; k-- > 0;) {
        const RowMatrix W = params.weights(k);
        Eigen::Map<RowMatrix> gW(grad.data() + params.weight_offset(k), W.rows(), W.cols());
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + params.bias_offset(k), W.rows());

        RowMatrix local;
        if (k == 0) {
            local.noalias() = zbar * input_.transpose();
            for (std::size_t d = 0; d < D; ++d) local.col(static_cast<Eigen::Index>(d)) += dzbar[d].rowwise().sum();
        } else {
            const Layer& prev = layers_[k - 1];
            local.noalias() = zbar * prev.h.transpose();
            for (std::size_t d = 0; d < D; ++d) local.noalias() += dzbar[d] * prev.dh[d].transpose();
        }
        const Eigen::VectorXd local_b = zbar.rowwise().sum();
        gW += local;
        gb += local_b;
        if (k == 0) break;

        // Into hidden layer j = k - 1: h = tanh(s z), dh = s (1 - h^2) dz.
        hbar.noalias() = W.transpose() * zbar;
        for (std::size_t d = 0; d < D; ++d) dhbar[d].noalias() = W.transpose() * dzbar[d];

        const std::size_t j = k - 1;
        const Layer& layer = layers_[j];
        const double s = params.slope(j) * params.scale_n();
        const Eigen::ArrayXXd S = 1.0 - layer.h.array().square();
        Eigen::ArrayXXd Sbar = Eigen::ArrayXXd::Zero(S.rows(), B);
        double sbar = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            const Eigen::ArrayXXd g = dhbar[d].array();
            const Eigen::ArrayXXd t = layer.dz[d].array();
            Sbar += s * g * t;
            sbar += (g * S * t).sum();
            dzbar[d] = (s * S * g).matrix();
        }
        const Eigen::ArrayXXd ubar = (hbar.array() - 2.0 * layer.h.array() * Sbar) * S;
        sbar += (ubar * layer.z.array()).sum();
        zbar = (s * ubar).matrix();
        grad[params.slope_offset(j)] += params.scale_n() * sbar;
    }
}

// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
    nlohmann::json header;
    header["format"] = "shockpinn-network";
    header["version"] = 1;
    header["layers"] = params.layer_sizes();
    header["scale_n"] = params.scale_n();
    header["alpha_clamp"] = params.alpha_clamp();
    header["adaptive"] = params.adaptive();
    header["seed"] = params.seed();
    header["count"] = params.size();
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << header.dump() << '\n';
    char buf[40];
    for (double v : params.values()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open checkpoint " + path.string());
    std::string line;
    std::getline(in, line);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw IngestionError("bad checkpoint header in " + path.string() + ": " + e.what());
    }
    if (header.value("format", "") != "shockpinn-network") throw IngestionError("not a network checkpoint: " + path.string());
    NetworkParams params(header.at("layers").get<std::vector<std::size_t>>(), header.at("scale_n").get<double>(),
                         header.at("alpha_clamp").get<double>());
    params.set_adaptive(header.value("adaptive", true));
    params.set_seed(header.value("seed", std::uint64_t{0}));
    const std::size_t count = header.at("count").get<std::size_t>();
    if (count != params.size()) throw IngestionError("checkpoint count does not match layer sizes");
    auto values = params.values();
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw IngestionError("checkpoint truncated: " + path.string());
        values[i] = std::strtod(line.c_str(), nullptr);
    }
    return params;
}

}  // namespace shockpinn::nn

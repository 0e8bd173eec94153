#pragma once

// Feed-forward networks (x, y[, t]) -> (rho, u, v, p) with layer-wise
// adaptive tanh activations and positivity-clamped rho and p.
//
// Parameters live in one flat vector in canonical layer-major order:
// W1 (row-major), b1, a1, W2, b2, a2, ..., W_L, b_L. Hidden layer k applies
// tanh(scale_n * a_k * z); the output layer is affine.

#include "shockpinn/autodiff.hpp"
#include "shockpinn/physics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shockpinn::nn {

inline constexpr std::size_t kOutputWidth = 4;  ///< (rho, u, v, p)
inline constexpr double kDefaultScale = 10.0;
inline constexpr double kDefaultClamp = 1e-6;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using NetworkOutput = physics::PrimitiveJet<double>;

class NetworkParams {
public:
    NetworkParams() = default;
    /// `layer_sizes` = [inputs, hidden..., outputs]; at least one hidden layer.
    explicit NetworkParams(std::vector<std::size_t> layer_sizes, double scale_n = kDefaultScale,
                           double alpha_clamp = kDefaultClamp);

    [[nodiscard]] const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    [[nodiscard]] std::size_t input_width() const noexcept { return sizes_.front(); }
    [[nodiscard]] std::size_t output_width() const noexcept { return sizes_.back(); }
    /// Number of affine layers (hidden + output).
    [[nodiscard]] std::size_t depth() const noexcept { return sizes_.size() - 1; }
    [[nodiscard]] std::size_t hidden_layers() const noexcept { return sizes_.size() - 2; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double scale_n() const noexcept { return scale_n_; }
    [[nodiscard]] double alpha_clamp() const noexcept { return alpha_; }
    void set_scale_n(double n) { scale_n_ = n; }

    /// Whether the activation slopes a_k are trainable.
    [[nodiscard]] bool adaptive() const noexcept { return adaptive_; }
    void set_adaptive(bool on) noexcept { adaptive_ = on; }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] std::size_t weight_offset(std::size_t layer) const { return weight_offset_.at(layer); }
    [[nodiscard]] std::size_t bias_offset(std::size_t layer) const { return weight_offset(layer) + rows(layer) * cols(layer); }
    /// Offset of the slope a_{layer}; only hidden layers have one.
    [[nodiscard]] std::size_t slope_offset(std::size_t layer) const;
    [[nodiscard]] std::size_t rows(std::size_t layer) const { return sizes_.at(layer + 1); }
    [[nodiscard]] std::size_t cols(std::size_t layer) const { return sizes_.at(layer); }

    [[nodiscard]] Eigen::Map<const RowMatrix> weights(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<RowMatrix> weights(std::size_t layer);
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
    [[nodiscard]] double slope(std::size_t layer) const { return values_[slope_offset(layer)]; }
    void set_slope(std::size_t layer, double a) { values_[slope_offset(layer)] = a; }

    /// 1 for trainable entries, 0 for frozen slopes when not adaptive.
    [[nodiscard]] std::vector<double> trainable_mask() const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> weight_offset_;
    std::vector<double> values_;
    double scale_n_ = kDefaultScale;
    double alpha_ = kDefaultClamp;
    bool adaptive_ = true;
    std::uint64_t seed_ = 0;
};

/// Xavier-normal weights (variance 2 / (fan_in + fan_out)), zero biases,
/// slopes a_k = 1 / scale_n. Deterministic in `seed`.
NetworkParams xavier_init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
                          double scale_n = kDefaultScale, double alpha_clamp = kDefaultClamp);

/// Single-point evaluation with tangents in every input direction.
NetworkOutput forward(const NetworkParams& params, std::span<const double> point);

/// Scalar-generic forward: `theta` in canonical order, `inputs` already seeded.
/// Used with ad::Var to record a network on a tape.
template <class S>
std::array<S, kOutputWidth> forward_generic(const NetworkParams& arch, std::span<const S> theta,
                                            std::span<const S> inputs) {
    using std::tanh;
    using ad::max_with;
    using ad::tanh;
    std::vector<S> current(inputs.begin(), inputs.end());
    std::vector<S> next;
    for (std::size_t k = 0; k < arch.depth(); ++k) {
        const std::size_t r = arch.rows(k);
        const std::size_t c = arch.cols(k);
        const std::size_t w0 = arch.weight_offset(k);
        const std::size_t b0 = arch.bias_offset(k);
        next.assign(r, S(0.0));
        for (std::size_t i = 0; i < r; ++i) {
            S acc = theta[b0 + i];
            for (std::size_t j = 0; j < c; ++j) acc = acc + theta[w0 + i * c + j] * current[j];
            next[i] = acc;
        }
        if (k + 1 < arch.depth()) {
            const S s = theta[arch.slope_offset(k)] * arch.scale_n();
            for (auto& z : next) z = tanh(s * z);
        }
        current.swap(next);
    }
    return {max_with(current[0], arch.alpha_clamp()), current[1], current[2],
            max_with(current[3], arch.alpha_clamp())};
}

/// Resolves which subnets own a point: one id inside a subdomain, several on
/// an interface. Empty means the point is outside the domain.
using Locator = std::function<std::vector<std::size_t>(std::span<const double>)>;

/// Indicator-stitched prediction; interface points average their owners.
NetworkOutput stitched_forward(std::span<const NetworkParams> subnets, const Locator& locate,
                               std::span<const double> point);

/// Batched forward pass with input tangents and the matching reverse sweep.
/// Points are columns. Keeps every intermediate needed by `backward`.
class BatchEvaluator {
public:
    /// Tangents are propagated for the first `directions` inputs.
    void forward(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& points,
                 std::size_t directions);

    [[nodiscard]] std::size_t batch() const noexcept { return batch_; }
    [[nodiscard]] std::size_t directions() const noexcept { return directions_; }
    [[nodiscard]] const Eigen::MatrixXd& output() const noexcept { return output_; }
    [[nodiscard]] const Eigen::MatrixXd& output_tangent(std::size_t d) const { return output_tangent_.at(d); }

    /// Accumulates d(loss)/d(theta) into `grad` given the adjoints of the
    /// clamped outputs and of their tangents.
    void backward(const NetworkParams& params, const Eigen::MatrixXd& output_adjoint,
                  const std::vector<Eigen::MatrixXd>& tangent_adjoint, std::span<double> grad) const;

private:
    struct Layer {
        Eigen::MatrixXd z;                   // pre-activation
        Eigen::MatrixXd h;                   // activation
        std::vector<Eigen::MatrixXd> dz;     // tangents of z
        std::vector<Eigen::MatrixXd> dh;     // tangents of h
    };
    std::vector<Layer> layers_;
    Eigen::MatrixXd input_;
    Eigen::MatrixXd output_;
    std::vector<Eigen::MatrixXd> output_tangent_;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> clamped_;
    std::size_t batch_ = 0;
    std::size_t directions_ = 0;
};

// Checkpoint: first line is a JSON header (layers, scale_n, alpha_clamp,
// adaptive, seed, count), followed by `count` values, one per line, %.17g.
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace shockpinn::nn

#pragma once

// Two-phase training: Adam, then L-BFGS with a strong Wolfe line search.

#include "shockpinn/loss.hpp"

#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shockpinn::opt {

struct AdamOptions {
    std::size_t iterations = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct LbfgsOptions {
    std::size_t iterations = 0;
    std::size_t memory = 50;
    double c1 = 1e-4;   ///< sufficient decrease
    double c2 = 0.9;    ///< curvature
    double tol_grad = 1e-9;
    double tol_change = 1e-12;
    std::size_t max_line_search = 25;
};

struct Schedule {
    AdamOptions adam;
    LbfgsOptions lbfgs;
    /// Throws ConfigError on a non-positive learning rate, zero memory or bad Wolfe constants.
    void validate() const;
};

struct AdamState {
    std::size_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

/// One bias-corrected Adam update in place. Throws DivergenceError if `grad` is not finite.
void adam_step(AdamState& state, const AdamOptions& options, std::span<double> theta, std::span<const double> grad);

using Objective = std::function<double(std::span<const double> theta, std::span<double> grad)>;

enum class LbfgsStatus { GradientTolerance, ChangeTolerance, IterationLimit, LineSearchFailure };
std::string to_string(LbfgsStatus status);

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho = 0.0;
};

struct LbfgsState {
    std::deque<CurvaturePair> pairs;
    std::size_t skipped = 0;
};

struct LbfgsResult {
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    LbfgsStatus status = LbfgsStatus::IterationLimit;
    LbfgsState state;
};

/// Called with iteration 0 for the starting point and then once per accepted step.
using IterationCallback = std::function<void(std::size_t iteration, std::span<const double> theta, double value)>;

/// Non-finite objective values at trial points are treated as failed
/// sufficient decrease. On a line-search failure the memory is cleared and a
/// steepest-descent search is tried once; a second failure ends the phase.
LbfgsResult lbfgs_run(const Objective& f, std::vector<double>& theta, const LbfgsOptions& options,
                      const IterationCallback& callback = {});

// --- training loop -------------------------------------------------------------

struct HistoryRow {
    std::size_t iteration = 0;
    std::string phase;  ///< "adam", "lbfgs" or "init"
    loss::LossBreakdown combined;
    std::vector<double> subdomain_totals;
    loss::Weights weights;
    double total = 0.0;
    double best = 0.0;
};

struct TrainOptions {
    Schedule schedule;
    loss::Weights weights;
    /// Present when dynamic weights are enabled.
    std::optional<loss::DynamicWeights> dynamic;
    std::size_t checkpoint_every = 0;
    std::function<void(std::size_t iteration, std::span<const double> theta)> checkpoint;
    /// Streamed loss history; the header is written before the first row.
    std::ostream* history = nullptr;
};

struct TrainResult {
    std::vector<double> theta;  ///< best-so-far parameters
    double best = 0.0;
    std::size_t best_iteration = 0;
    std::vector<HistoryRow> history;
    loss::Weights final_weights;
    std::optional<LbfgsResult> lbfgs;
};

/// Throws DivergenceError naming the first non-finite loss component or gradient group.
void check_finite(const loss::Evaluation& e);

/// Runs Adam then L-BFGS and returns the iterate with the lowest weighted total.
/// With dynamic weights only iterates evaluated under the frozen final weights
/// compete: the Adam end point and the L-BFGS iterates. Earlier rows then carry
/// an infinite best value.
TrainResult train(const loss::Problem& problem, std::vector<double> theta, const TrainOptions& options);

void write_history_header(std::ostream& out, const loss::LossBreakdown& layout, std::size_t subdomains);
void write_history_row(std::ostream& out, const HistoryRow& row);

}  // namespace shockpinn::opt

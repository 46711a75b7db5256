#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace almgp {

struct OptimConfig {
    std::size_t history_size = 20;
    /// Initial trial step of the line search at every iteration.
    double learning_rate = 1.0;
    /// L-BFGS iterations per optimization step. The early-stop rule is
    /// checked once per step.
    std::size_t max_iters_per_step = 20;
    /// L-BFGS iterations over the whole run.
    std::size_t max_total_iters = 1000;
    /// Relative loss-change threshold between steps; 0 disables early stopping.
    double early_stop_tol = 0.0;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    /// Infinity-norm gradient threshold.
    double grad_tol = 1e-10;

    void validate() const;
};

/// Loss history for the relative-change rule
///   |(L_current - L_previous) / (L_current - L_initial)|.
struct StopTracker {
    double loss_initial = 0.0;
    double loss_previous = 0.0;
    double loss_current = 0.0;
    std::size_t count = 0;

    void record(double loss) noexcept;
    /// Empty while fewer than two losses are recorded or when the
    /// denominator is zero.
    [[nodiscard]] std::optional<double> relative_change() const noexcept;
};

/// True iff the relative change is defined and strictly below tol.
bool early_stop(const StopTracker& tracker, double tol) noexcept;

/// Returns f(x) and writes the gradient into grad (already sized).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Maps an accepted iterate (and its objective value) to the loss tracked by
/// the early-stop rule. When absent the objective value itself is tracked.
using StopLoss = std::function<double(const Eigen::VectorXd& x, double f)>;

enum class StopReason { max_iters, grad_tol, early_stop, line_search_failed };

struct TraceEntry {
    std::size_t step_index = 0;
    std::size_t iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    std::size_t evaluations = 0;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    StopReason reason = StopReason::max_iters;
    bool line_search_failed = false;
    std::size_t steps = 0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    /// One entry per accepted iteration, plus the starting point.
    std::vector<TraceEntry> trace;
    /// Accepted iterates, x0 first; filled only when requested.
    std::vector<Eigen::VectorXd> iterates;
};

struct MinimizeOptions {
    StopLoss stop_loss;
    /// Replaces the starting loss as L_initial of the early-stop rule.
    std::optional<double> baseline_loss;
    bool keep_iterates = false;
};

/// Limited-memory BFGS with a strong Wolfe line search. Every accepted step
/// satisfies both Wolfe conditions, so the objective never increases.
///
/// Iterations are grouped into optimization steps of at most
/// max_iters_per_step iterations; the curvature history carries across steps
/// and the early-stop rule compares the tracked loss at step boundaries.
/// At most max_total_iters iterations run in total.
/// Each line search gives up after 25 evaluations.
///
/// Throws Error(divergence) when f(x0) or its gradient is not finite. Trial
/// points with non-finite values are rejected by the line search.
MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimConfig& cfg,
                        const MinimizeOptions& options = {});

} // namespace almgp

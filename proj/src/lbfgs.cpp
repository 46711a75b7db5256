#include "almgp/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "almgp/error.hpp"

namespace almgp {

void OptimConfig::validate() const {
    if (history_size == 0 || max_iters_per_step == 0 || max_total_iters == 0) {
        throw Error(ErrorKind::invalid_spec, "optimizer counts must be positive");
    }
    if (!(learning_rate > 0.0)) {
        throw Error(ErrorKind::invalid_spec, "learning rate must be positive");
    }
    if (!(early_stop_tol >= 0.0)) {
        throw Error(ErrorKind::invalid_spec, "early-stop tolerance must be non-negative");
    }
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
        throw Error(ErrorKind::invalid_spec, "Wolfe constants must satisfy 0 < c1 < c2 < 1");
    }
}

void StopTracker::record(double loss) noexcept {
    if (count == 0) {
        loss_initial = loss;
        loss_previous = loss;
    } else {
        loss_previous = loss_current;
    }
    loss_current = loss;
    ++count;
}

std::optional<double> StopTracker::relative_change() const noexcept {
    const double denom = loss_current - loss_initial;
    if (count < 2 || denom == 0.0 || !std::isfinite(denom)) {
        return std::nullopt;
    }
    return std::abs((loss_current - loss_previous) / denom);
}

bool early_stop(const StopTracker& tracker, double tol) noexcept {
    const auto ratio = tracker.relative_change();
    return ratio.has_value() && *ratio < tol;
}

namespace {

constexpr std::size_t kMaxBracketTrials = 25;
constexpr std::size_t kMaxLineSearchEvals = 25;
constexpr double kIntervalTol = 1e-12;

struct Sample {
    double t = 0.0;
    double f = 0.0;
    double slope = 0.0;  // directional derivative g(t)^T d
    Eigen::VectorXd grad;
};

// Minimiser of the cubic through (t1, f1, g1) and (t2, f2, g2), clamped to
// [lo, hi]; midpoint when the cubic has no real minimiser.
double cubic_minimizer(double t1, double f1, double g1, double t2, double f2, double g2, double lo,
                       double hi) {
    const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (t1 - t2);
    const double disc = d1 * d1 - g1 * g2;
    if (disc >= 0.0 && std::isfinite(disc)) {
        const double d2 = std::sqrt(disc);
        const double t = t1 <= t2 ? t2 - (t2 - t1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
                                  : t1 - (t1 - t2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
        if (std::isfinite(t)) {
            return std::clamp(t, lo, hi);
        }
    }
    return 0.5 * (lo + hi);
}

struct LineSearchResult {
    Sample accepted;
    bool ok = false;
    std::size_t evaluations = 0;
};

class StrongWolfe {
public:
    StrongWolfe(const Objective& f, const OptimConfig& cfg, const Eigen::VectorXd& x,
                const Eigen::VectorXd& dir, double f0, double slope0)
        : f_(f), cfg_(cfg), x_(x), dir_(dir), f0_(f0), slope0_(slope0) {}

    LineSearchResult run(double t_init) {
        Sample prev{0.0, f0_, slope0_, {}};
        double t = t_init;
        for (std::size_t trial = 0; trial < kMaxBracketTrials; ++trial) {
            if (!budget_left()) {
                return fail();
            }
            Sample cur = evaluate(t);
            if (!armijo(cur) || (trial > 0 && cur.f >= prev.f)) {
                return zoom(prev, cur);
            }
            if (curvature(cur)) {
                return accept(std::move(cur));
            }
            if (cur.slope >= 0.0) {
                return zoom(cur, prev);
            }
            // extrapolate within [t + 0.01 (t - t_prev), 10 t]
            const double lo = cur.t + 0.01 * (cur.t - prev.t);
            const double hi = 10.0 * cur.t;
            t = cubic_minimizer(prev.t, prev.f, prev.slope, cur.t, cur.f, cur.slope, lo, hi);
            prev = std::move(cur);
        }
        return fail();
    }

private:
    bool budget_left() const { return evaluations_ < kMaxLineSearchEvals; }

    bool armijo(const Sample& s) const {
        return std::isfinite(s.f) && s.f <= f0_ + cfg_.wolfe_c1 * s.t * slope0_;
    }

    bool curvature(const Sample& s) const {
        return std::isfinite(s.slope) && std::abs(s.slope) <= -cfg_.wolfe_c2 * slope0_;
    }

    Sample evaluate(double t) {
        ++evaluations_;
        Sample s;
        s.t = t;
        s.grad = Eigen::VectorXd::Zero(x_.size());
        const Eigen::VectorXd trial = x_ + t * dir_;
        s.f = f_(trial, s.grad);
        s.slope = s.grad.dot(dir_);
        if (!std::isfinite(s.f) || !s.grad.allFinite()) {
            s.f = std::numeric_limits<double>::infinity();
            s.slope = std::numeric_limits<double>::quiet_NaN();
        }
        return s;
    }

    // lo satisfies Armijo and has the lowest value seen; the minimiser lies
    // between lo and hi.
    LineSearchResult zoom(Sample lo, Sample hi) {
        bool insufficient_progress = false;
        while (budget_left()) {
            const double left = std::min(lo.t, hi.t);
            const double right = std::max(lo.t, hi.t);
            const double width = right - left;
            if (width * dir_.lpNorm<Eigen::Infinity>() < kIntervalTol) {
                break;
            }
            double t = std::isfinite(hi.f)
                           ? cubic_minimizer(lo.t, lo.f, lo.slope, hi.t, hi.f, hi.slope, left, right)
                           : 0.5 * (left + right);
            // keep trials away from the bracket ends
            const double margin = 0.1 * width;
            if (std::min(right - t, t - left) < margin) {
                if (insufficient_progress || t >= right || t <= left) {
                    t = std::abs(t - right) < std::abs(t - left) ? right - margin : left + margin;
                    insufficient_progress = false;
                } else {
                    insufficient_progress = true;
                }
            } else {
                insufficient_progress = false;
            }

            Sample cur = evaluate(t);
            if (!armijo(cur) || cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (curvature(cur)) {
                    return accept(std::move(cur));
                }
                if (cur.slope * (hi.t - lo.t) >= 0.0) {
                    hi = std::move(lo);
                }
                lo = std::move(cur);
            }
        }
        return fail();
    }

    LineSearchResult accept(Sample s) {
        LineSearchResult out;
        out.accepted = std::move(s);
        out.ok = true;
        out.evaluations = evaluations_;
        return out;
    }

    LineSearchResult fail() const {
        LineSearchResult out;
        out.evaluations = evaluations_;
        return out;
    }

    const Objective& f_;
    const OptimConfig& cfg_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& dir_;
    double f0_;
    double slope0_;
    std::size_t evaluations_ = 0;
};

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd two_loop(const std::deque<CurvaturePair>& history, const Eigen::VectorXd& grad) {
    Eigen::VectorXd q = -grad;
    if (history.empty()) {
        return q;
    }
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
        alpha[i] = history[i].rho * history[i].s.dot(q);
        q -= alpha[i] * history[i].y;
    }
    const auto& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double beta = history[i].rho * history[i].y.dot(q);
        q += (alpha[i] - beta) * history[i].s;
    }
    return q;
}

} // namespace

MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimConfig& cfg,
                        const MinimizeOptions& options) {
    cfg.validate();
    MinimizeResult result;
    result.x = x0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x0.size());
    result.f = f(result.x, grad);
    result.evaluations = 1;
    if (!std::isfinite(result.f) || !grad.allFinite()) {
        throw Error(ErrorKind::divergence, "objective is not finite at the starting point");
    }
    if (options.keep_iterates) {
        result.iterates.push_back(result.x);
    }

    StopTracker tracker;
    tracker.record(options.stop_loss ? options.stop_loss(result.x, result.f) : result.f);
    if (options.baseline_loss) {
        tracker.loss_initial = *options.baseline_loss;
    }
    result.trace.push_back({0, 0, result.f, grad.lpNorm<Eigen::Infinity>(), 0.0, 1});

    std::deque<CurvaturePair> history;
    bool done = false;
    while (!done) {
        if (result.iterations >= cfg.max_total_iters) {
            result.reason = StopReason::max_iters;
            break;
        }
        ++result.steps;
        for (std::size_t inner = 0; inner < cfg.max_iters_per_step && result.iterations < cfg.max_total_iters;
             ++inner) {
            if (grad.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
                result.reason = StopReason::grad_tol;
                done = true;
                break;
            }
            Eigen::VectorXd dir = two_loop(history, grad);
            double slope = grad.dot(dir);
            if (!(slope < 0.0)) {
                history.clear();
                dir = -grad;
                slope = grad.dot(dir);
            }

            // without curvature pairs the direction is the raw gradient, so
            // the first trial is scaled down by its 1-norm
            double t0 = cfg.learning_rate;
            if (history.empty()) {
                t0 *= std::min(1.0, 1.0 / grad.lpNorm<1>());
            }
            StrongWolfe search(f, cfg, result.x, dir, result.f, slope);
            auto step = search.run(t0);
            result.evaluations += step.evaluations;
            if (!step.ok) {
                result.line_search_failed = true;
                result.reason = StopReason::line_search_failed;
                done = true;
                break;
            }

            CurvaturePair pair{step.accepted.t * dir, step.accepted.grad - grad, 0.0};
            const double sy = pair.s.dot(pair.y);
            result.x += pair.s;
            result.f = step.accepted.f;
            grad = std::move(step.accepted.grad);
            ++result.iterations;
            if (sy > 1e-10 * pair.y.squaredNorm() && sy > 0.0) {
                pair.rho = 1.0 / sy;
                history.push_back(std::move(pair));
                if (history.size() > cfg.history_size) {
                    history.pop_front();
                }
            }
            if (options.keep_iterates) {
                result.iterates.push_back(result.x);
            }
            result.trace.push_back({result.steps, result.iterations, result.f, grad.lpNorm<Eigen::Infinity>(),
                                    step.accepted.t, step.evaluations});
        }
        if (done) {
            break;
        }
        tracker.record(options.stop_loss ? options.stop_loss(result.x, result.f) : result.f);
        if (early_stop(tracker, cfg.early_stop_tol)) {
            result.reason = StopReason::early_stop;
            break;
        }
    }
    return result;
}

} // namespace almgp

#include "almgp/active_learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "almgp/error.hpp"

namespace almgp {

std::string_view to_string(StopMetric metric) noexcept {
    switch (metric) {
    case StopMetric::train_mse: return "train_mse";
    case StopMetric::test_rmse_change: return "test_rmse_change";
    case StopMetric::none: return "none";
    }
    return "none";
}

std::string_view to_string(Strategy strategy) noexcept {
    return strategy == Strategy::alc ? "alc" : "random";
}

std::string_view to_string(RefitMode mode) noexcept {
    switch (mode) {
    case RefitMode::warm: return "warm";
    case RefitMode::cold: return "cold";
    case RefitMode::best: return "best";
    }
    return "best";
}

RefitMode parse_refit_mode(std::string_view text) {
    if (text == "warm") return RefitMode::warm;
    if (text == "cold") return RefitMode::cold;
    if (text == "best") return RefitMode::best;
    throw Error(ErrorKind::invalid_spec, "unknown refit mode '" + std::string(text) + "'");
}

StopMetric parse_stop_metric(std::string_view text) {
    if (text == "train_mse") return StopMetric::train_mse;
    if (text == "test_rmse_change") return StopMetric::test_rmse_change;
    if (text == "none") return StopMetric::none;
    throw Error(ErrorKind::invalid_spec, "unknown stop metric '" + std::string(text) + "'");
}

Strategy parse_strategy(std::string_view text) {
    if (text == "alc") return Strategy::alc;
    if (text == "random") return Strategy::random;
    throw Error(ErrorKind::invalid_spec, "unknown strategy '" + std::string(text) + "'");
}

void AlConfig::validate() const {
    if (batch_size < 1) {
        throw Error(ErrorKind::invalid_spec, "batch size must be at least 1");
    }
    if (screen_size <= batch_size) {
        throw Error(ErrorKind::invalid_spec, "screening size K must exceed batch size B");
    }
    if (max_added < batch_size) {
        throw Error(ErrorKind::invalid_spec, "budget N_max must be at least the batch size");
    }
    if (!(tol >= 0.0)) {
        throw Error(ErrorKind::invalid_spec, "stopping threshold must be non-negative");
    }
}

PoolState::PoolState(Eigen::MatrixXd candidates, Eigen::MatrixXd reference)
    : candidates_(std::move(candidates)), reference_(std::move(reference)) {
    remaining_.resize(static_cast<std::size_t>(candidates_.rows()));
    std::iota(remaining_.begin(), remaining_.end(), std::size_t{0});
}

void PoolState::remove(std::size_t round, const std::vector<std::size_t>& indices) {
    for (auto idx : indices) {
        auto it = std::lower_bound(remaining_.begin(), remaining_.end(), idx);
        if (it == remaining_.end() || *it != idx) {
            throw Error(ErrorKind::invalid_spec, "candidate " + std::to_string(idx) + " is not in the pool");
        }
        remaining_.erase(it);
    }
    history_.push_back({round, indices});
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

// Indices of `values` ordered by value descending, ties to the lower position.
std::vector<std::size_t> rank_descending(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

} // namespace

std::vector<std::size_t> variance_screen(const FittedMgp& model, const PoolState& pool, std::size_t K) {
    const auto& remaining = pool.remaining();
    if (remaining.empty() || K == 0) {
        return {};
    }
    const auto& gp = model.gp();
    const Eigen::MatrixXd latent = model.latent(gather_rows(pool.candidates(), remaining));
    const Eigen::MatrixXd V = gp.half_solve_columns(corr_cross(gp.kernel(), gp.features(), latent));
    const Eigen::VectorXd explained = V.colwise().squaredNorm().transpose();

    std::vector<double> variance(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        variance[i] = std::max(0.0, gp.tau2() * (1.0 - explained(static_cast<Eigen::Index>(i))) + gp.sigma2());
    }
    const auto order = rank_descending(variance);
    const std::size_t keep = std::min(K, remaining.size());
    std::vector<std::size_t> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back(remaining[order[i]]);
    }
    return out;
}

AlcScorer::AlcScorer(const FittedMgp& model, const Eigen::Ref<const Eigen::MatrixXd>& reference)
    : model_(model) {
    if (reference.rows() == 0) {
        return;
    }
    const auto& gp = model.gp();
    ref_latent_ = model.latent(reference);
    half_solved_ = gp.half_solve_columns(corr_cross(gp.kernel(), gp.features(), ref_latent_));
    base_sum_ = half_solved_.squaredNorm();
}

double AlcScorer::augmented_terms(const Eigen::Ref<const Eigen::VectorXd>& x_new) const {
    if (ref_latent_.rows() == 0) {
        return 0.0;
    }
    const auto& gp = model_.gp();
    const Eigen::MatrixXd z = model_.latent(x_new.transpose());
    const Eigen::VectorXd k = corr_vector(gp.kernel(), gp.features(), z.row(0).transpose());
    const Eigen::VectorXd l = gp.half_solve(k);
    const double d2 = 1.0 + gp.rho() + gp.jitter() - l.squaredNorm();
    const Eigen::VectorXd k_ref = corr_vector(gp.kernel(), ref_latent_, z.row(0).transpose());

    if (d2 > 1e-12) {
        // new row of the augmented Cholesky factor is [l^T, sqrt(d2)]
        const Eigen::VectorXd c = (k_ref - half_solved_.transpose() * l) / std::sqrt(d2);
        return c.squaredNorm();
    }

    // Nearly singular augmentation: refactor the full (n+1) matrix.
    const auto n = gp.size();
    Eigen::MatrixXd features(n + 1, gp.features().cols());
    features << gp.features(), z;
    Eigen::MatrixXd A = corr_matrix(gp.kernel(), features);
    A.diagonal().array() += gp.rho();
    const auto factor = factorize_with_jitter(A);
    Eigen::MatrixXd K_ref(n + 1, ref_latent_.rows());
    K_ref << corr_cross(gp.kernel(), gp.features(), ref_latent_), k_ref.transpose();
    const Eigen::MatrixXd W = factor.lower.triangularView<Eigen::Lower>().solve(K_ref);
    return W.squaredNorm() - base_sum_;
}

double AlcScorer::score(const Eigen::Ref<const Eigen::VectorXd>& x_new) const {
    return model_.gp().tau2() * (base_sum_ + augmented_terms(x_new));
}

double AlcScorer::variance_reduction(const Eigen::Ref<const Eigen::VectorXd>& x_new) const {
    return model_.gp().tau2() * augmented_terms(x_new);
}

double alc_score(const FittedMgp& model, const Eigen::Ref<const Eigen::VectorXd>& x_new,
                 const Eigen::Ref<const Eigen::MatrixXd>& reference) {
    if (static_cast<std::size_t>(x_new.size()) != model.arch().input_dim()) {
        throw Error(ErrorKind::shape, "candidate dimension does not match the model input");
    }
    return AlcScorer(model, reference).score(x_new);
}

std::vector<std::size_t> select_batch(const FittedMgp& model, PoolState& pool, const AlConfig& cfg,
                                      std::size_t round, std::mt19937_64& rng) {
    cfg.validate();
    if (pool.empty()) {
        return {};
    }
    std::vector<std::size_t> chosen;
    if (cfg.strategy == Strategy::random) {
        std::vector<std::size_t> order = pool.remaining();
        const std::size_t take = std::min(cfg.batch_size, order.size());
        // partial Fisher-Yates
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
            std::swap(order[i], order[pick(rng)]);
        }
        chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
        const auto screened = variance_screen(model, pool, cfg.screen_size);
        const AlcScorer scorer(model, pool.reference());
        std::vector<double> scores(screened.size());
        for (std::size_t i = 0; i < screened.size(); ++i) {
            scores[i] = scorer.score(pool.candidates().row(static_cast<Eigen::Index>(screened[i])).transpose());
        }
        // ties go to the lower candidate index
        std::vector<std::size_t> order(screened.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return screened[a] < screened[b];
        });
        const std::size_t take = std::min(cfg.batch_size, order.size());
        for (std::size_t i = 0; i < take; ++i) {
            chosen.push_back(screened[order[i]]);
        }
    }
    pool.remove(round, chosen);
    return chosen;
}

double rmse(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& truth) {
    if (pred.size() != truth.size() || pred.size() == 0) {
        throw Error(ErrorKind::shape, "RMSE needs two non-empty vectors of equal length");
    }
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

namespace {

FitOptions fit_options(const LoopConfig& cfg, const Dataset& test) {
    FitOptions options;
    if (cfg.optimizer_tracks_test_rmse) {
        options.stop_loss = [&test](const FittedMgp& m) { return rmse(predict_mgp(m, test.X).means, test.y); };
    }
    return options;
}

FittedMgp refit(const MlpArch& arch, const MgpParams& init, const MgpParams& previous, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y, const OptimConfig& opt, RefitMode mode, const FitOptions& warm_options,
                const FitOptions& cold_options) {
    switch (mode) {
    case RefitMode::warm: return fit(arch, previous, X, y, opt, warm_options).model;
    case RefitMode::cold: return fit(arch, init, X, y, opt, cold_options).model;
    case RefitMode::best: break;
    }
    std::optional<FitResult> warm;
    std::optional<FitResult> cold;
    try {
        warm = fit(arch, previous, X, y, opt, warm_options);
    } catch (const FitFailure&) {
    }
    try {
        cold = fit(arch, init, X, y, opt, cold_options);
    } catch (const FitFailure&) {
        if (!warm) {
            throw;
        }
    }
    if (!warm) {
        return std::move(cold->model);
    }
    if (!cold) {
        return std::move(warm->model);
    }
    // ties keep the warm fit
    return cold->optimizer.f < warm->optimizer.f ? std::move(cold->model) : std::move(warm->model);
}

} // namespace

FitResult fit_initial(const Dataset& initial, const MlpArch& arch, const MgpParams& init, const LoopConfig& cfg,
                      const Dataset& test) {
    return fit(arch, init, initial.X, initial.y, cfg.opt, fit_options(cfg, test));
}

LoopResult run_loop(const Dataset& initial, PoolState pool, const Dataset& test, const MlpArch& arch,
                    const MgpParams& init, const FittedMgp& step0, const LoopConfig& cfg, const LabelOracle& oracle) {
    cfg.al.validate();
    if (initial.X.rows() < 2) {
        throw Error(ErrorKind::invalid_spec, "the initial design needs at least two points");
    }
    using Clock = std::chrono::steady_clock;

    LoopResult result{step0, {}, 0.0, false, std::nullopt};
    result.initial_test_rmse = rmse(predict_mgp(step0, test.X).means, test.y);

    Eigen::MatrixXd X = initial.X;
    Eigen::VectorXd y = initial.y;
    std::mt19937_64 rng(cfg.seed);
    OptimConfig refit_opt = cfg.opt;
    if (cfg.al.refit_max_iters > 0) {
        refit_opt.max_total_iters = std::min(refit_opt.max_total_iters, cfg.al.refit_max_iters);
    }
    const FitOptions cold_options = fit_options(cfg, test);
    FitOptions warm_options = cold_options;
    warm_options.baseline = init;
    double previous_rmse = result.initial_test_rmse;

    const std::size_t rounds = cfg.al.max_added / cfg.al.batch_size;
    for (std::size_t r = 1; r <= rounds; ++r) {
        const auto start = Clock::now();
        const auto chosen = select_batch(result.model, pool, cfg.al, r, rng);
        if (chosen.empty()) {
            break;
        }
        const Eigen::MatrixXd points = gather_rows(pool.candidates(), chosen);
        Eigen::VectorXd labels(points.rows());
        try {
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
                labels(i) = oracle(points.row(i).transpose());
                if (!std::isfinite(labels(i))) {
                    throw Error(ErrorKind::oracle_failure, "oracle returned a non-finite label");
                }
            }
        } catch (const std::exception& e) {
            result.failure = std::string("oracle failure in round ") + std::to_string(r) + ": " + e.what();
            return result;
        }

        const auto n_old = X.rows();
        X.conservativeResize(n_old + points.rows(), Eigen::NoChange);
        X.bottomRows(points.rows()) = points;
        y.conservativeResize(n_old + points.rows());
        y.tail(points.rows()) = labels;

        try {
            result.model = refit(arch, init, result.model.params(), X, y, refit_opt, cfg.al.refit, warm_options,
                                 cold_options);
        } catch (const Error& e) {
            result.failure = std::string("refit failure in round ") + std::to_string(r) + ": " + e.what();
            return result;
        }

        RunRecord record;
        record.run_id = cfg.run_id;
        record.strategy = cfg.al.strategy;
        record.iteration = r;
        record.n_train = static_cast<std::size_t>(X.rows());
        record.selected = chosen;
        record.selected_points = points;
        record.test_rmse = rmse(predict_mgp(result.model, test.X).means, test.y);
        record.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        const double current_rmse = record.test_rmse;
        result.records.push_back(std::move(record));

        bool stop = false;
        switch (cfg.al.stop_metric) {
        case StopMetric::train_mse: {
            const Eigen::VectorXd fitted_y = predict_mgp(result.model, X).means;
            stop = (fitted_y - y).squaredNorm() / static_cast<double>(y.size()) < cfg.al.tol;
            break;
        }
        case StopMetric::test_rmse_change:
            stop = previous_rmse > 0.0 && std::abs(current_rmse - previous_rmse) / previous_rmse < cfg.al.tol;
            break;
        case StopMetric::none:
            break;
        }
        previous_rmse = current_rmse;
        if (stop) {
            result.stopped_early = true;
            break;
        }
    }
    return result;
}

LoopResult run_loop(const Dataset& initial, PoolState pool, const Dataset& test, const MlpArch& arch,
                    const MgpParams& init, const LoopConfig& cfg, const LabelOracle& oracle) {
    auto step0 = fit_initial(initial, arch, init, cfg, test);
    return run_loop(initial, std::move(pool), test, arch, init, step0.model, cfg, oracle);
}

} // namespace almgp

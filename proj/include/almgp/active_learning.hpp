#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "almgp/lbfgs.hpp"
#include "almgp/mgp_model.hpp"

namespace almgp {

enum class StopMetric { train_mse, test_rmse_change, none };
enum class Strategy { alc, random };
/// How each round refits: from the previous round's parameters, from the
/// initial parameters, or both with the lower NLML kept.
enum class RefitMode { warm, cold, best };

std::string_view to_string(StopMetric metric) noexcept;
std::string_view to_string(Strategy strategy) noexcept;
std::string_view to_string(RefitMode mode) noexcept;
StopMetric parse_stop_metric(std::string_view text);
Strategy parse_strategy(std::string_view text);
RefitMode parse_refit_mode(std::string_view text);

struct AlConfig {
    std::size_t screen_size = 20;  // K
    std::size_t batch_size = 1;    // B
    std::size_t max_added = 50;    // N_max
    double tol = 1e-5;
    StopMetric stop_metric = StopMetric::train_mse;
    Strategy strategy = Strategy::alc;
    RefitMode refit = RefitMode::best;
    /// Iteration cap for each per-round refit; 0 keeps the optimizer's own
    /// max_total_iters. Step 0 always uses the optimizer's cap.
    std::size_t refit_max_iters = 0;

    /// Requires K > B >= 1 and N_max >= B.
    void validate() const;
};

struct SelectionRound {
    std::size_t round = 0;
    std::vector<std::size_t> indices;  // positions in the original candidate matrix
};

/// Candidate pool with removal bookkeeping plus the fixed reference set.
class PoolState {
public:
    PoolState(Eigen::MatrixXd candidates, Eigen::MatrixXd reference);

    [[nodiscard]] const Eigen::MatrixXd& candidates() const noexcept { return candidates_; }
    [[nodiscard]] const Eigen::MatrixXd& reference() const noexcept { return reference_; }
    /// Original indices still available, ascending.
    [[nodiscard]] const std::vector<std::size_t>& remaining() const noexcept { return remaining_; }
    [[nodiscard]] const std::vector<SelectionRound>& history() const noexcept { return history_; }
    [[nodiscard]] bool empty() const noexcept { return remaining_.empty(); }

    /// Removes the given original indices; throws if one is not available.
    void remove(std::size_t round, const std::vector<std::size_t>& indices);

private:
    Eigen::MatrixXd candidates_;
    Eigen::MatrixXd reference_;
    std::vector<std::size_t> remaining_;
    std::vector<SelectionRound> history_;
};

/// The K remaining candidates with the largest predictive variance, as
/// original indices sorted by variance (descending, ties to the lower index).
std::vector<std::size_t> variance_screen(const FittedMgp& model, const PoolState& pool, std::size_t K);

/// Reference-set ALC scorer for one fitted model. Precomputes L^{-1} k(X, ref)
/// once, then scores each candidate by augmenting the Cholesky factor with a
/// single row.
class AlcScorer {
public:
    AlcScorer(const FittedMgp& model, const Eigen::Ref<const Eigen::MatrixXd>& reference);

    /// tau2 * sum over the reference set of k_{n+1}^T (K_{n+1} + rho I)^{-1} k_{n+1},
    /// for a candidate given in input space.
    [[nodiscard]] double score(const Eigen::Ref<const Eigen::VectorXd>& x_new) const;

    /// Variance reduction tau2 * sum_ref (k_{n+1}^T A_{n+1}^{-1} k_{n+1} - k_n^T A_n^{-1} k_n),
    /// which equals sum_ref [s_n^2 - s_{n+1}^2].
    [[nodiscard]] double variance_reduction(const Eigen::Ref<const Eigen::VectorXd>& x_new) const;

private:
    double augmented_terms(const Eigen::Ref<const Eigen::VectorXd>& x_new) const;

    const FittedMgp& model_;
    Eigen::MatrixXd ref_latent_;
    Eigen::MatrixXd half_solved_;  // n x m
    double base_sum_ = 0.0;        // sum of k_n^T A_n^{-1} k_n over the reference set
};

double alc_score(const FittedMgp& model, const Eigen::Ref<const Eigen::VectorXd>& x_new,
                 const Eigen::Ref<const Eigen::MatrixXd>& reference);

/// One round of acquisition: screen to K, score ALC, keep the top B (or B
/// uniform draws for the random strategy) and remove them from the pool.
std::vector<std::size_t> select_batch(const FittedMgp& model, PoolState& pool, const AlConfig& cfg,
                                      std::size_t round, std::mt19937_64& rng);

double rmse(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& truth);

struct RunRecord {
    std::size_t run_id = 0;
    Strategy strategy = Strategy::alc;
    std::size_t iteration = 0;
    std::size_t n_train = 0;
    std::vector<std::size_t> selected;  // original candidate indices
    Eigen::MatrixXd selected_points;    // one row per selected point
    double test_rmse = 0.0;
    double wall_ms = 0.0;
};

struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

/// Returns the (possibly noisy) label of a point in model coordinates.
using LabelOracle = std::function<double(const Eigen::VectorXd& x)>;

struct LoopConfig {
    AlConfig al;
    OptimConfig opt;
    /// When true the optimizer's early-stop rule tracks test RMSE instead of
    /// the NLML.
    bool optimizer_tracks_test_rmse = false;
    std::size_t run_id = 0;
    std::uint64_t seed = 0;  // random acquisition stream
};

struct LoopResult {
    FittedMgp model;
    std::vector<RunRecord> records;
    double initial_test_rmse = 0.0;
    bool stopped_early = false;
    /// Set when the labeling oracle failed; records up to that round are kept.
    std::optional<std::string> failure;
};

/// Step 0 fit alone, shared by every strategy of a repetition.
FitResult fit_initial(const Dataset& initial, const MlpArch& arch, const MgpParams& init, const LoopConfig& cfg,
                      const Dataset& test);

/// The full acquisition loop starting from an already fitted Step 0 model.
LoopResult run_loop(const Dataset& initial, PoolState pool, const Dataset& test, const MlpArch& arch,
                    const MgpParams& init, const FittedMgp& step0, const LoopConfig& cfg, const LabelOracle& oracle);

/// Convenience overload that performs the Step 0 fit itself.
LoopResult run_loop(const Dataset& initial, PoolState pool, const Dataset& test, const MlpArch& arch,
                    const MgpParams& init, const LoopConfig& cfg, const LabelOracle& oracle);

} // namespace almgp

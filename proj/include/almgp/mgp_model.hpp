#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "almgp/error.hpp"
#include "almgp/gp_core.hpp"
#include "almgp/lbfgs.hpp"
#include "almgp/manifold_map.hpp"

namespace almgp {

/// Every trainable scalar of the manifold GP. Network weights are stored as
/// they are; the GP hyperparameters are stored as raw values whose squares
/// give the length-scales, tau2 and rho.
///
/// Flattened order: network parameters (see MlpParams), then the Q raw
/// length-scales, then tau2_raw, then rho_raw.
struct MgpParams {
    MlpParams mlp;
    Eigen::VectorXd kernel_raw;
    double tau2_raw = 1.0;
    double rho_raw = 0.1;

    /// Default network initialisation from `seed`, unit length-scales and
    /// tau2, rho = rho_raw_init^2.
    static MgpParams initial(const MlpArch& arch, std::uint64_t seed, double rho_raw_init = 0.1);

    [[nodiscard]] Eigen::VectorXd flatten() const;
    static MgpParams unflatten(const MlpArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat);

    [[nodiscard]] GpRawParams gp_raw() const { return {kernel_raw, tau2_raw, rho_raw}; }
    [[nodiscard]] KernelSpec kernel() const { return KernelSpec::gaussian(kernel_raw.array().square()); }
    [[nodiscard]] double tau2() const noexcept { return tau2_raw * tau2_raw; }
    [[nodiscard]] double rho() const noexcept { return rho_raw * rho_raw; }
};

/// Frozen parameters plus the GP conditioned on the latent training features.
class FittedMgp {
public:
    FittedMgp(MlpArch arch, MgpParams params, Eigen::MatrixXd train_X, Eigen::VectorXd train_y);

    [[nodiscard]] const MlpArch& arch() const noexcept { return arch_; }
    [[nodiscard]] const MgpParams& params() const noexcept { return params_; }
    [[nodiscard]] const GpState& gp() const noexcept { return gp_; }
    [[nodiscard]] const Eigen::MatrixXd& train_X() const noexcept { return train_X_; }
    [[nodiscard]] const Eigen::VectorXd& train_y() const noexcept { return gp_.y(); }

    [[nodiscard]] Eigen::MatrixXd latent(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

private:
    MlpArch arch_;
    MgpParams params_;
    Eigen::MatrixXd train_X_;
    GpState gp_;
};

struct MgpPredictions {
    Eigen::VectorXd means;
    Eigen::VectorXd vars;
};

/// NLML of the GP on the latent features forward(X).
double joint_nlml(const MlpArch& arch, const MgpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

struct JointGradient {
    double value = 0.0;
    Eigen::VectorXd grad;  // in MgpParams::flatten order
};

JointGradient joint_grad(const MlpArch& arch, const MgpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y);

/// Raised when training cannot produce a finite objective; carries the last
/// parameter vector with a finite NLML.
class FitFailure : public Error {
public:
    FitFailure(const std::string& what, Eigen::VectorXd last_finite)
        : Error(ErrorKind::fit_failure, what), last_finite_(std::move(last_finite)) {}

    [[nodiscard]] const Eigen::VectorXd& last_finite_iterate() const noexcept { return last_finite_; }

private:
    Eigen::VectorXd last_finite_;
};

struct FitOptions {
    /// Loss tracked by the early-stop rule instead of the NLML, evaluated on
    /// the model built at each accepted iterate.
    std::function<double(const FittedMgp&)> stop_loss;
    /// When set, L_initial of the early-stop rule is the tracked loss at these
    /// parameters instead of at the starting point. Warm-started refits use
    /// the untrained initialization so the ratio keeps a cold-fit scale.
    std::optional<MgpParams> baseline;
    bool keep_iterates = false;
};

struct FitResult {
    FittedMgp model;
    MinimizeResult optimizer;
    double initial_nlml = 0.0;
};

/// Joint maximum-likelihood training of network and GP hyperparameters.
FitResult fit(const MlpArch& arch, const MgpParams& init, const Eigen::Ref<const Eigen::MatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y, const OptimConfig& opt, const FitOptions& options = {});

MgpPredictions predict_mgp(const FittedMgp& model, const Eigen::Ref<const Eigen::MatrixXd>& X_query);

} // namespace almgp

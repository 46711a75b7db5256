#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "almgp/kernels.hpp"

namespace almgp {

/// Diagonal jitter policy: start at 1e-8, escalate x10 on Cholesky failure,
/// give up past 1e-4.
inline constexpr double kInitialJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;

struct Factorization {
    Eigen::MatrixXd lower;  // L with L L^T = A + jitter I
    double jitter = 0.0;
};

/// Cholesky factor of a symmetric matrix under the jitter policy.
/// Throws Error(ill_conditioned) when even kMaxJitter does not help.
Factorization factorize_with_jitter(const Eigen::MatrixXd& A);

/// Zero-mean GP conditioned on (features, y) with fixed hyperparameters.
/// Immutable after construction; predictions are read-only.
class GpState {
public:
    GpState(KernelSpec kernel, Eigen::MatrixXd features, Eigen::VectorXd y, double tau2, double rho);

    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const Eigen::MatrixXd& features() const noexcept { return features_; }
    [[nodiscard]] const Eigen::VectorXd& y() const noexcept { return y_; }
    [[nodiscard]] const Eigen::MatrixXd& lower() const noexcept { return factor_.lower; }
    [[nodiscard]] const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
    [[nodiscard]] double tau2() const noexcept { return tau2_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] double sigma2() const noexcept { return rho_ * tau2_; }
    [[nodiscard]] double jitter() const noexcept { return factor_.jitter; }
    [[nodiscard]] Eigen::Index size() const noexcept { return y_.size(); }

    /// L^{-1} v, the half-solve used by variance and ALC computations.
    [[nodiscard]] Eigen::VectorXd half_solve(const Eigen::Ref<const Eigen::VectorXd>& v) const;
    [[nodiscard]] Eigen::MatrixXd half_solve_columns(const Eigen::Ref<const Eigen::MatrixXd>& V) const;

private:
    KernelSpec kernel_;
    Eigen::MatrixXd features_;
    Eigen::VectorXd y_;
    Factorization factor_;
    Eigen::VectorXd alpha_;
    double tau2_;
    double rho_;
};

struct Prediction {
    double mean = 0.0;
    double var = 0.0;
};

/// -2 log-likelihood: n log tau2 + log det(K + rho I) + y^T (K + rho I)^{-1} y / tau2,
/// where the matrix carries the jitter chosen by factorize_with_jitter.
double nlml(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& features,
            const Eigen::Ref<const Eigen::VectorXd>& y, double tau2, double rho);

/// Closed-form maximiser of the likelihood in tau2: y^T (K + rho I)^{-1} y / n.
double profile_tau2(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& features,
                    const Eigen::Ref<const Eigen::VectorXd>& y, double rho);

/// Predictive mean k^T alpha and variance tau2 (1 - k^T A^{-1} k) + rho tau2.
/// A negative variance from round-off is clamped to zero and counted.
Prediction predict(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x_feat);

/// 1 - k^T (K + rho I)^{-1} k, without the tau2 scale or the noise floor.
double noise_free_variance(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x_feat);

std::size_t variance_clamp_count() noexcept;
void reset_variance_clamp_count() noexcept;

/// GP hyperparameters in optimizer coordinates: theta = raw^2, tau2 = raw^2,
/// rho = raw^2.
struct GpRawParams {
    Eigen::VectorXd lengthscale_raw;
    double tau2_raw = 1.0;
    double rho_raw = 0.1;

    [[nodiscard]] Eigen::VectorXd lengthscales() const { return lengthscale_raw.array().square(); }
    [[nodiscard]] double tau2() const noexcept { return tau2_raw * tau2_raw; }
    [[nodiscard]] double rho() const noexcept { return rho_raw * rho_raw; }
};

struct NlmlGradient {
    double value = 0.0;
    Eigen::VectorXd d_lengthscale_raw;
    double d_tau2_raw = 0.0;
    double d_rho_raw = 0.0;
    Eigen::MatrixXd d_features;  // n x q, for backpropagation into the feature map
};

/// NLML of the Gaussian kernel and its gradient with respect to the raw
/// hyperparameters and to the feature matrix.
NlmlGradient nlml_grad_kernelparams(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                    const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const GpRawParams& raw);

} // namespace almgp

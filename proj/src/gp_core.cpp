#include "almgp/gp_core.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "almgp/error.hpp"

namespace almgp {

namespace {

std::atomic<std::size_t> g_variance_clamps{0};

// In-place lower Cholesky; false when the matrix is not positive definite.
bool cholesky_lower(Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(a);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    a.triangularView<Eigen::StrictlyUpper>().setZero();
    return true;
}

constexpr Eigen::Index kBlock = 32;

// Overwrites a lower-triangular block with its inverse.
void invert_lower(Eigen::Ref<Eigen::MatrixXd> l) {
    const auto n = l.rows();
    if (n <= kBlock) {
        Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
        l.triangularView<Eigen::Lower>().solveInPlace(inv);
        l = inv;
        return;
    }
    const auto h = n / 2;
    invert_lower(l.topLeftCorner(h, h));
    invert_lower(l.bottomRightCorner(n - h, n - h));
    // X21 = -X22 L21 X11
    Eigen::MatrixXd t = l.bottomLeftCorner(n - h, h) * l.topLeftCorner(h, h).triangularView<Eigen::Lower>();
    l.bottomLeftCorner(n - h, h).noalias() = -(l.bottomRightCorner(n - h, n - h).triangularView<Eigen::Lower>() * t);
}

// Overwrites the lower triangle of x (lower triangular) with that of x^T x.
void lower_gram(Eigen::Ref<Eigen::MatrixXd> x) {
    const auto n = x.rows();
    if (n <= kBlock) {
        const Eigen::MatrixXd low = x.triangularView<Eigen::Lower>();
        x.triangularView<Eigen::Lower>() = low.transpose() * low;
        return;
    }
    const auto h = n / 2;
    auto x11 = x.topLeftCorner(h, h);
    auto x21 = x.bottomLeftCorner(n - h, h);
    auto x22 = x.bottomRightCorner(n - h, n - h);
    lower_gram(x11);
    x11.selfadjointView<Eigen::Lower>().rankUpdate(x21.transpose());
    x21 = x22.triangularView<Eigen::Lower>().transpose() * x21;
    lower_gram(x22);
}

// Full inverse of L L^T given the lower factor.
Eigen::MatrixXd inverse_from_cholesky(const Eigen::MatrixXd& lower) {
    Eigen::MatrixXd inv = lower;
    invert_lower(inv);
    lower_gram(inv);
    inv.triangularView<Eigen::StrictlyUpper>() = inv.transpose();
    return inv;
}

void check_training_shapes(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (features.rows() == 0) {
        throw Error(ErrorKind::shape, "GP needs at least one training point");
    }
    if (features.rows() != y.size()) {
        throw Error(ErrorKind::shape, "feature rows (" + std::to_string(features.rows()) +
                                          ") do not match response length (" +
                                          std::to_string(y.size()) + ")");
    }
}

void check_hyper(double tau2, double rho) {
    if (!(tau2 > 0.0) || !std::isfinite(tau2)) {
        throw Error(ErrorKind::invalid_spec, "tau2 must be positive");
    }
    if (!(rho >= 0.0) || !std::isfinite(rho)) {
        throw Error(ErrorKind::invalid_spec, "rho must be non-negative");
    }
}

Eigen::MatrixXd regularised(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& features,
                            double rho) {
    Eigen::MatrixXd A = corr_matrix(kernel, features);
    A.diagonal().array() += rho;
    return A;
}

} // namespace

Factorization factorize_with_jitter(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) {
        throw Error(ErrorKind::shape, "Cholesky needs a square matrix");
    }
    for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd work = A;
        work.diagonal().array() += jitter;
        if (cholesky_lower(work) && work.diagonal().minCoeff() > 0.0) {
            return {std::move(work), jitter};
        }
    }
    throw Error(ErrorKind::ill_conditioned, "Cholesky failed after jitter escalation to 1e-4");
}

GpState::GpState(KernelSpec kernel, Eigen::MatrixXd features, Eigen::VectorXd y, double tau2, double rho)
    : kernel_(std::move(kernel)),
      features_(std::move(features)),
      y_(std::move(y)),
      tau2_(tau2),
      rho_(rho) {
    check_training_shapes(features_, y_);
    check_hyper(tau2_, rho_);
    factor_ = factorize_with_jitter(regularised(kernel_, features_, rho_));
    alpha_ = y_;
    factor_.lower.triangularView<Eigen::Lower>().solveInPlace(alpha_);
    factor_.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
}

Eigen::VectorXd GpState::half_solve(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    return factor_.lower.triangularView<Eigen::Lower>().solve(v);
}

Eigen::MatrixXd GpState::half_solve_columns(const Eigen::Ref<const Eigen::MatrixXd>& V) const {
    return factor_.lower.triangularView<Eigen::Lower>().solve(V);
}

double nlml(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& features,
            const Eigen::Ref<const Eigen::VectorXd>& y, double tau2, double rho) {
    check_training_shapes(features, y);
    check_hyper(tau2, rho);
    const auto factor = factorize_with_jitter(regularised(kernel, features, rho));
    const Eigen::VectorXd w = factor.lower.triangularView<Eigen::Lower>().solve(y);
    const double log_det = 2.0 * factor.lower.diagonal().array().log().sum();
    const auto n = static_cast<double>(y.size());
    return n * std::log(tau2) + log_det + w.squaredNorm() / tau2;
}

double profile_tau2(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& features,
                    const Eigen::Ref<const Eigen::VectorXd>& y, double rho) {
    check_training_shapes(features, y);
    check_hyper(1.0, rho);
    const auto factor = factorize_with_jitter(regularised(kernel, features, rho));
    const Eigen::VectorXd w = factor.lower.triangularView<Eigen::Lower>().solve(y);
    return w.squaredNorm() / static_cast<double>(y.size());
}

double noise_free_variance(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x_feat) {
    const Eigen::VectorXd k = corr_vector(state.kernel(), state.features(), x_feat);
    return 1.0 - state.half_solve(k).squaredNorm();
}

Prediction predict(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x_feat) {
    const Eigen::VectorXd k = corr_vector(state.kernel(), state.features(), x_feat);
    Prediction out;
    out.mean = k.dot(state.alpha());
    double var = state.tau2() * (1.0 - state.half_solve(k).squaredNorm()) + state.sigma2();
    if (var < 0.0) {
        g_variance_clamps.fetch_add(1, std::memory_order_relaxed);
        var = 0.0;
    }
    out.var = var;
    return out;
}

std::size_t variance_clamp_count() noexcept { return g_variance_clamps.load(std::memory_order_relaxed); }

void reset_variance_clamp_count() noexcept { g_variance_clamps.store(0, std::memory_order_relaxed); }

NlmlGradient nlml_grad_kernelparams(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                    const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const GpRawParams& raw) {
    check_training_shapes(features, y);
    const auto n = features.rows();
    const auto q = features.cols();
    if (raw.lengthscale_raw.size() != q) {
        throw Error(ErrorKind::shape, "one raw length-scale per feature dimension is required");
    }
    const Eigen::VectorXd theta = raw.lengthscales();
    const double tau2 = raw.tau2();
    const double rho = raw.rho();
    check_hyper(tau2, rho);

    const Eigen::MatrixXd K = corr_matrix(KernelSpec::gaussian(theta), features);
    Eigen::MatrixXd A = K;
    A.diagonal().array() += rho;
    const auto factor = factorize_with_jitter(A);
    const auto L = factor.lower.triangularView<Eigen::Lower>();
    const auto Lt = factor.lower.transpose().triangularView<Eigen::Upper>();

    const Eigen::MatrixXd A_inv = inverse_from_cholesky(factor.lower);
    Eigen::VectorXd alpha = y;
    L.solveInPlace(alpha);
    const double quad = alpha.squaredNorm();
    Lt.solveInPlace(alpha);

    NlmlGradient out;
    const double log_det = 2.0 * factor.lower.diagonal().array().log().sum();
    out.value = static_cast<double>(n) * std::log(tau2) + log_det + quad / tau2;

    // dQ = tr(W dA) with W = A^{-1} - alpha alpha^T / tau2.
    Eigen::MatrixXd W = A_inv - (alpha * alpha.transpose()) / tau2;
    const double d_rho = W.trace();
    const double d_tau2 = static_cast<double>(n) / tau2 - quad / (tau2 * tau2);

    // P = W o K carries every entry's sensitivity through the kernel.
    const Eigen::MatrixXd P = W.cwiseProduct(K);
    const Eigen::VectorXd row_sum = P.rowwise().sum();
    const Eigen::MatrixXd PZ = P * features;

    out.d_features.resize(n, q);
    out.d_lengthscale_raw.resize(q);
    for (Eigen::Index l = 0; l < q; ++l) {
        const auto z = features.col(l);
        // sum_ij P_ij (z_i - z_j)^2 = 2 (sum_i r_i z_i^2 - z^T P z)
        const double weighted = 2.0 * (row_sum.dot(z.cwiseProduct(z)) - z.dot(PZ.col(l)));
        const double d_theta = weighted / (theta(l) * theta(l));
        out.d_lengthscale_raw(l) = d_theta * 2.0 * raw.lengthscale_raw(l);
        out.d_features.col(l) = (-4.0 / theta(l)) * (row_sum.cwiseProduct(z) - PZ.col(l));
    }
    out.d_tau2_raw = d_tau2 * 2.0 * raw.tau2_raw;
    out.d_rho_raw = d_rho * 2.0 * raw.rho_raw;
    return out;
}

} // namespace almgp

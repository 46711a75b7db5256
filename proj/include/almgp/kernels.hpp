#pragma once

#include <Eigen/Dense>

namespace almgp {

enum class KernelFamily { gaussian, matern };

/// Correlation function with one length-scale per input dimension.
///
///   gaussian:  exp(-sum_l (a_l - b_l)^2 / theta_l)
///   matern:    product over dimensions of the half-integer Matern
///              closed form with u = 2 sqrt(nu) |a_l - b_l| / theta_l,
///              nu in {1/2, 3/2, 5/2}.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    Eigen::VectorXd lengthscales;
    double matern_nu = 2.5;

    static KernelSpec gaussian(Eigen::VectorXd lengthscales);
    static KernelSpec matern(Eigen::VectorXd lengthscales, double nu);

    [[nodiscard]] Eigen::Index dims() const noexcept { return lengthscales.size(); }
    void validate() const;
};

double corr(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
            const Eigen::Ref<const Eigen::VectorXd>& b);

/// n x n correlation matrix over the rows of X. Each off-diagonal pair is
/// evaluated once and mirrored, so the result is exactly symmetric.
Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Correlations between x and each row of X.
Eigen::VectorXd corr_vector(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& x);

/// Cross-correlation matrix: result(i, j) = corr(X.row(i), Y.row(j)).
Eigen::MatrixXd corr_cross(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::MatrixXd>& Y);

} // namespace almgp

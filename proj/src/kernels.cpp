#include "almgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "almgp/error.hpp"

namespace almgp {

KernelSpec KernelSpec::gaussian(Eigen::VectorXd lengthscales) {
    KernelSpec spec;
    spec.family = KernelFamily::gaussian;
    spec.lengthscales = std::move(lengthscales);
    return spec;
}

KernelSpec KernelSpec::matern(Eigen::VectorXd lengthscales, double nu) {
    KernelSpec spec;
    spec.family = KernelFamily::matern;
    spec.lengthscales = std::move(lengthscales);
    spec.matern_nu = nu;
    return spec;
}

void KernelSpec::validate() const {
    if (lengthscales.size() == 0) {
        throw Error(ErrorKind::invalid_kernel, "kernel needs at least one length-scale");
    }
    for (Eigen::Index l = 0; l < lengthscales.size(); ++l) {
        if (!(lengthscales(l) > 0.0) || !std::isfinite(lengthscales(l))) {
            throw Error(ErrorKind::invalid_kernel, "kernel length-scales must be positive and finite");
        }
    }
    if (family == KernelFamily::matern && matern_nu != 0.5 && matern_nu != 1.5 && matern_nu != 2.5) {
        throw Error(ErrorKind::invalid_kernel, "Matern smoothness must be 1/2, 3/2 or 5/2");
    }
}

namespace {

void check_dims(const KernelSpec& spec, Eigen::Index dims) {
    if (dims != spec.dims()) {
        throw Error(ErrorKind::shape, "kernel acts on " + std::to_string(spec.dims()) +
                                          " dimensions, input has " + std::to_string(dims));
    }
}

// exp(-s) floored at the smallest subnormal, so correlations of finite
// inputs stay strictly positive even when the exponent underflows.
double decay(double s) { return std::max(std::exp(-s), std::numeric_limits<double>::denorm_min()); }

double matern_factor(double u, double nu) {
    if (nu == 0.5) {
        return decay(u);
    }
    if (nu == 1.5) {
        return (1.0 + u) * decay(u);
    }
    return (1.0 + u + u * u / 3.0) * decay(u);
}

// Shared by every entry point so corr(a, b) and corr(b, a) execute the same
// floating-point operations.
template <class A, class B>
double corr_unchecked(const KernelSpec& spec, const A& a, const B& b) {
    const auto dims = spec.dims();
    if (spec.family == KernelFamily::gaussian) {
        double sum = 0.0;
        for (Eigen::Index l = 0; l < dims; ++l) {
            const double diff = a(l) - b(l);
            sum += diff * diff / spec.lengthscales(l);
        }
        return decay(sum);
    }
    const double scale = 2.0 * std::sqrt(spec.matern_nu);
    double prod = 1.0;
    for (Eigen::Index l = 0; l < dims; ++l) {
        const double u = scale * std::abs(a(l) - b(l)) / spec.lengthscales(l);
        prod *= matern_factor(u, spec.matern_nu);
    }
    return std::max(prod, std::numeric_limits<double>::denorm_min());
}

} // namespace

double corr(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
            const Eigen::Ref<const Eigen::VectorXd>& b) {
    spec.validate();
    check_dims(spec, a.size());
    check_dims(spec, b.size());
    return corr_unchecked(spec, a, b);
}

Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    spec.validate();
    check_dims(spec, X.cols());
    const auto n = X.rows();
    if (n == 0) {
        throw Error(ErrorKind::shape, "correlation matrix needs at least one row");
    }
    Eigen::MatrixXd K(n, n);
    if (spec.family == KernelFamily::gaussian) {
        // same per-entry arithmetic as corr(), laid out column by column
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index l = 0; l < spec.dims(); ++l) {
            const auto col = X.col(l);
            const double theta = spec.lengthscales(l);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double xj = col(j);
                for (Eigen::Index i = j + 1; i < n; ++i) {
                    const double diff = col(i) - xj;
                    D(i, j) += diff * diff / theta;
                }
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            K(j, j) = 1.0;
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double v = decay(D(i, j));
                K(i, j) = v;
                K(j, i) = v;
            }
        }
        return K;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        K(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = corr_unchecked(spec, X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Eigen::VectorXd corr_vector(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
    spec.validate();
    check_dims(spec, X.cols());
    check_dims(spec, x.size());
    Eigen::VectorXd k(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        k(i) = corr_unchecked(spec, X.row(i), x);
    }
    return k;
}

Eigen::MatrixXd corr_cross(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::MatrixXd>& Y) {
    spec.validate();
    check_dims(spec, X.cols());
    check_dims(spec, Y.cols());
    Eigen::MatrixXd C(X.rows(), Y.rows());
    for (Eigen::Index j = 0; j < Y.rows(); ++j) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            C(i, j) = corr_unchecked(spec, X.row(i), Y.row(j));
        }
    }
    return C;
}

} // namespace almgp

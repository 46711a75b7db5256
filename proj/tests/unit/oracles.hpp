#pragma once

// Independent reference implementations used as test oracles. They favour
// obviousness over speed: explicit inverses, scalar loops, plain central
// differences.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double gaussian_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& theta) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < a.size(); ++l) {
        s += (a(l) - b(l)) * (a(l) - b(l)) / theta(l);
    }
    return std::exp(-s);
}

inline Eigen::MatrixXd gaussian_K(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
    const auto n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            K(i, j) = gaussian_corr(X.row(i).transpose(), X.row(j).transpose(), theta);
        }
    }
    return K;
}

inline Eigen::VectorXd gaussian_k(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
    Eigen::VectorXd k(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        k(i) = gaussian_corr(X.row(i).transpose(), x, theta);
    }
    return k;
}

// A = K + (rho + jitter) I, inverted explicitly.
inline Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& K, double rho, double jitter) {
    const Eigen::MatrixXd A = K + (rho + jitter) * Eigen::MatrixXd::Identity(K.rows(), K.cols());
    return A.inverse();
}

inline double dense_nlml(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double tau2, double rho, double jitter) {
    const Eigen::MatrixXd A = K + (rho + jitter) * Eigen::MatrixXd::Identity(K.rows(), K.cols());
    const double n = static_cast<double>(y.size());
    return n * std::log(tau2) + std::log(A.determinant()) + y.dot(A.inverse() * y) / tau2;
}

struct DensePrediction {
    double mean;
    double var;
};

inline DensePrediction dense_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                                     double tau2, double rho, double jitter, const Eigen::VectorXd& x) {
    const Eigen::MatrixXd Ainv = dense_inverse(gaussian_K(X, theta), rho, jitter);
    const Eigen::VectorXd k = gaussian_k(X, x, theta);
    return {k.dot(Ainv * y), tau2 * (1.0 - k.dot(Ainv * k)) + rho * tau2};
}

// tau2 * sum over ref of k_{n+1}^T A_{n+1}^{-1} k_{n+1}, with the augmented
// matrix built and inverted from scratch.
inline double dense_alc(const Eigen::MatrixXd& Z, const Eigen::VectorXd& z_new, const Eigen::MatrixXd& ref_latent,
                        const Eigen::VectorXd& theta, double tau2, double rho, double jitter) {
    Eigen::MatrixXd Z1(Z.rows() + 1, Z.cols());
    Z1 << Z, z_new.transpose();
    const Eigen::MatrixXd Ainv = dense_inverse(gaussian_K(Z1, theta), rho, jitter);
    double total = 0.0;
    for (Eigen::Index r = 0; r < ref_latent.rows(); ++r) {
        const Eigen::VectorXd k = gaussian_k(Z1, ref_latent.row(r).transpose(), theta);
        total += k.dot(Ainv * k);
    }
    return tau2 * total;
}

inline double logsigmoid(double x) { return -std::log(1.0 + std::exp(-x)); }

// Scalar-by-scalar network pass: W[l] is h_l x h_{l-1}.
inline Eigen::MatrixXd naive_forward(const std::vector<Eigen::MatrixXd>& W, const std::vector<Eigen::VectorXd>& b,
                                     const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), W.back().rows());
    for (Eigen::Index s = 0; s < X.rows(); ++s) {
        std::vector<double> z(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) z[j] = X(s, j);
        for (std::size_t l = 0; l < W.size(); ++l) {
            std::vector<double> next(W[l].rows());
            for (Eigen::Index i = 0; i < W[l].rows(); ++i) {
                double a = b[l](i);
                for (Eigen::Index j = 0; j < W[l].cols(); ++j) a += W[l](i, j) * z[j];
                next[i] = logsigmoid(a);
            }
            z = next;
        }
        for (std::size_t i = 0; i < z.size(); ++i) out(s, static_cast<Eigen::Index>(i)) = z[i];
    }
    return out;
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / max(1, |b_i|)
inline double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(1.0, std::abs(b(i))));
    }
    return worst;
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0,
                                      double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = u(rng);
    return M;
}

inline Eigen::VectorXd uniform_vector(Eigen::Index n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return uniform_matrix(n, 1, rng, lo, hi).col(0);
}

} // namespace oracle

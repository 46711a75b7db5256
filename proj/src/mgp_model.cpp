#include "almgp/mgp_model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace almgp {

MgpParams MgpParams::initial(const MlpArch& arch, std::uint64_t seed, double rho_raw_init) {
    std::mt19937_64 rng(seed);
    MgpParams params;
    params.mlp = MlpParams::init_default(arch, rng);
    params.kernel_raw = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(arch.latent_dim()));
    params.tau2_raw = 1.0;
    params.rho_raw = rho_raw_init;
    return params;
}

Eigen::VectorXd MgpParams::flatten() const {
    const Eigen::VectorXd net = mlp.flatten();
    Eigen::VectorXd flat(net.size() + kernel_raw.size() + 2);
    flat << net, kernel_raw, tau2_raw, rho_raw;
    return flat;
}

MgpParams MgpParams::unflatten(const MlpArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat) {
    const auto net = static_cast<Eigen::Index>(arch.num_params());
    const auto q = static_cast<Eigen::Index>(arch.latent_dim());
    if (flat.size() != net + q + 2) {
        throw Error(ErrorKind::shape, "flat mGP vector has " + std::to_string(flat.size()) +
                                          " entries, expected " + std::to_string(net + q + 2));
    }
    MgpParams params;
    params.mlp = MlpParams::unflatten(arch, flat.head(net));
    params.kernel_raw = flat.segment(net, q);
    params.tau2_raw = flat(net + q);
    params.rho_raw = flat(net + q + 1);
    return params;
}

FittedMgp::FittedMgp(MlpArch arch, MgpParams params, Eigen::MatrixXd train_X, Eigen::VectorXd train_y)
    : arch_(std::move(arch)),
      params_(std::move(params)),
      train_X_(std::move(train_X)),
      gp_(params_.kernel(), forward(arch_, params_.mlp, train_X_), std::move(train_y), params_.tau2(),
          params_.rho()) {}

Eigen::MatrixXd FittedMgp::latent(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    return forward(arch_, params_.mlp, X);
}

double joint_nlml(const MlpArch& arch, const MgpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
    return nlml(params.kernel(), forward(arch, params.mlp, X), y, params.tau2(), params.rho());
}

JointGradient joint_grad(const MlpArch& arch, const MgpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
    const Eigen::MatrixXd latent = forward(arch, params.mlp, X);
    const NlmlGradient gp = nlml_grad_kernelparams(latent, y, params.gp_raw());
    const Eigen::VectorXd net = backward(arch, params.mlp, X, gp.d_features);

    JointGradient out;
    out.value = gp.value;
    out.grad.resize(net.size() + gp.d_lengthscale_raw.size() + 2);
    out.grad << net, gp.d_lengthscale_raw, gp.d_tau2_raw, gp.d_rho_raw;
    return out;
}

FitResult fit(const MlpArch& arch, const MgpParams& init, const Eigen::Ref<const Eigen::MatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y, const OptimConfig& opt, const FitOptions& options) {
    if (X.rows() < 2) {
        throw Error(ErrorKind::invalid_spec, "fitting needs at least two training points");
    }
    if (X.rows() != y.size()) {
        throw Error(ErrorKind::shape, "training inputs and responses differ in length");
    }
    const Eigen::MatrixXd train_X = X;
    const Eigen::VectorXd train_y = y;

    Objective objective = [&](const Eigen::VectorXd& flat, Eigen::VectorXd& grad) {
        try {
            auto jg = joint_grad(arch, MgpParams::unflatten(arch, flat), train_X, train_y);
            grad = std::move(jg.grad);
            return jg.value;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ill_conditioned && e.kind() != ErrorKind::invalid_spec) {
                throw;
            }
            grad.setConstant(std::numeric_limits<double>::quiet_NaN());
            return std::numeric_limits<double>::infinity();
        }
    };

    MinimizeOptions min_opts;
    min_opts.keep_iterates = options.keep_iterates;
    if (options.stop_loss) {
        min_opts.stop_loss = [&](const Eigen::VectorXd& flat, double) {
            return options.stop_loss(FittedMgp(arch, MgpParams::unflatten(arch, flat), train_X, train_y));
        };
    }

    if (options.baseline) {
        try {
            const double base = options.stop_loss
                                    ? options.stop_loss(FittedMgp(arch, *options.baseline, train_X, train_y))
                                    : joint_nlml(arch, *options.baseline, train_X, train_y);
            if (std::isfinite(base)) {
                min_opts.baseline_loss = base;
            }
        } catch (const Error&) {
            // an unusable baseline falls back to the starting loss
        }
    }

    const Eigen::VectorXd x0 = init.flatten();
    MinimizeResult result;
    try {
        result = minimize(objective, x0, opt, min_opts);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::divergence) {
            throw FitFailure("mGP objective is not finite at the initial parameters", x0);
        }
        throw;
    }
    const double initial = result.trace.front().loss;
    FittedMgp model(arch, MgpParams::unflatten(arch, result.x), train_X, train_y);
    return FitResult{std::move(model), std::move(result), initial};
}

MgpPredictions predict_mgp(const FittedMgp& model, const Eigen::Ref<const Eigen::MatrixXd>& X_query) {
    const Eigen::MatrixXd latent = model.latent(X_query);
    MgpPredictions out;
    out.means.resize(latent.rows());
    out.vars.resize(latent.rows());
    for (Eigen::Index i = 0; i < latent.rows(); ++i) {
        const auto p = predict(model.gp(), latent.row(i).transpose());
        out.means(i) = p.mean;
        out.vars(i) = p.var;
    }
    return out;
}

} // namespace almgp

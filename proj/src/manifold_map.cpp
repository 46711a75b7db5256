#include "almgp/manifold_map.hpp"

#include <cmath>
#include <string>

#include "almgp/error.hpp"

namespace almgp {

std::size_t MlpArch::num_params() const {
    std::size_t total = 0;
    for (std::size_t i = 1; i < layer_sizes.size(); ++i) {
        total += layer_sizes[i] * layer_sizes[i - 1] + layer_sizes[i];
    }
    return total;
}

void MlpArch::validate() const {
    if (layer_sizes.size() < 2) {
        throw Error(ErrorKind::invalid_spec, "network needs an input and an output layer");
    }
    for (auto size : layer_sizes) {
        if (size == 0) {
            throw Error(ErrorKind::invalid_spec, "network layer sizes must be positive");
        }
    }
}

void MlpParams::check_shapes(const MlpArch& arch) const {
    arch.validate();
    if (weights.size() != arch.num_layers() || biases.size() != arch.num_layers()) {
        throw Error(ErrorKind::shape, "parameter layer count does not match the architecture");
    }
    for (std::size_t i = 0; i < arch.num_layers(); ++i) {
        const auto rows = static_cast<Eigen::Index>(arch.layer_sizes[i + 1]);
        const auto cols = static_cast<Eigen::Index>(arch.layer_sizes[i]);
        if (weights[i].rows() != rows || weights[i].cols() != cols || biases[i].size() != rows) {
            throw Error(ErrorKind::shape, "parameter shapes of layer " + std::to_string(i + 1) +
                                              " do not match the architecture");
        }
    }
}

Eigen::VectorXd MlpParams::flatten() const {
    Eigen::Index total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i].size() + biases[i].size();
    }
    Eigen::VectorXd flat(total);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& W = weights[i];
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                flat(at++) = W(r, c);
            }
        }
        flat.segment(at, biases[i].size()) = biases[i];
        at += biases[i].size();
    }
    return flat;
}

MlpParams MlpParams::unflatten(const MlpArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat) {
    arch.validate();
    if (static_cast<std::size_t>(flat.size()) != arch.num_params()) {
        throw Error(ErrorKind::shape, "flat parameter vector has " + std::to_string(flat.size()) +
                                          " entries, architecture needs " +
                                          std::to_string(arch.num_params()));
    }
    MlpParams params = zeros(arch);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < arch.num_layers(); ++i) {
        auto& W = params.weights[i];
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                W(r, c) = flat(at++);
            }
        }
        params.biases[i] = flat.segment(at, params.biases[i].size());
        at += params.biases[i].size();
    }
    return params;
}

MlpParams MlpParams::zeros(const MlpArch& arch) {
    arch.validate();
    MlpParams params;
    for (std::size_t i = 0; i < arch.num_layers(); ++i) {
        const auto rows = static_cast<Eigen::Index>(arch.layer_sizes[i + 1]);
        const auto cols = static_cast<Eigen::Index>(arch.layer_sizes[i]);
        params.weights.emplace_back(Eigen::MatrixXd::Zero(rows, cols));
        params.biases.emplace_back(Eigen::VectorXd::Zero(rows));
    }
    return params;
}

MlpParams MlpParams::init_default(const MlpArch& arch, std::mt19937_64& rng) {
    MlpParams params = zeros(arch);
    for (std::size_t i = 0; i < arch.num_layers(); ++i) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(arch.layer_sizes[i]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto& W = params.weights[i];
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                W(r, c) = dist(rng);
            }
        }
        for (Eigen::Index r = 0; r < params.biases[i].size(); ++r) {
            params.biases[i](r) = dist(rng);
        }
    }
    return params;
}

double logsigmoid(double x) noexcept {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

namespace {

// d/dx logsigmoid(x) = sigmoid(-x)
double logsigmoid_slope(double x) noexcept {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

void check_input(const MlpArch& arch, const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    params.check_shapes(arch);
    if (static_cast<std::size_t>(X.cols()) != arch.input_dim()) {
        throw Error(ErrorKind::shape, "network expects " + std::to_string(arch.input_dim()) +
                                          " input columns, got " + std::to_string(X.cols()));
    }
}

Eigen::MatrixXd pre_activation(const MlpParams& params, std::size_t layer, const Eigen::MatrixXd& Z) {
    Eigen::MatrixXd pre = Z * params.weights[layer].transpose();
    pre.rowwise() += params.biases[layer].transpose();
    return pre;
}

} // namespace

Eigen::MatrixXd forward(const MlpArch& arch, const MlpParams& params,
                        const Eigen::Ref<const Eigen::MatrixXd>& X) {
    check_input(arch, params, X);
    Eigen::MatrixXd Z = X;
    for (std::size_t i = 0; i < arch.num_layers(); ++i) {
        Z = pre_activation(params, i, Z).unaryExpr([](double v) { return logsigmoid(v); });
    }
    return Z;
}

Eigen::VectorXd backward(const MlpArch& arch, const MlpParams& params,
                         const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::MatrixXd>& upstream_grad) {
    check_input(arch, params, X);
    const auto layers = arch.num_layers();
    if (upstream_grad.rows() != X.rows() ||
        static_cast<std::size_t>(upstream_grad.cols()) != arch.latent_dim()) {
        throw Error(ErrorKind::shape, "upstream gradient must be n x latent_dim");
    }

    std::vector<Eigen::MatrixXd> inputs;  // Z_{i-1} for each layer
    std::vector<Eigen::MatrixXd> pres;
    inputs.reserve(layers);
    pres.reserve(layers);
    Eigen::MatrixXd Z = X;
    for (std::size_t i = 0; i < layers; ++i) {
        inputs.push_back(Z);
        pres.push_back(pre_activation(params, i, Z));
        Z = pres.back().unaryExpr([](double v) { return logsigmoid(v); });
    }

    MlpParams grad = MlpParams::zeros(arch);
    Eigen::MatrixXd delta = upstream_grad;
    for (std::size_t k = layers; k-- > 0;) {
        delta = delta.cwiseProduct(pres[k].unaryExpr([](double v) { return logsigmoid_slope(v); }));
        grad.weights[k] = delta.transpose() * inputs[k];
        grad.biases[k] = delta.colwise().sum().transpose();
        if (k > 0) {
            delta = delta * params.weights[k];
        }
    }
    return grad.flatten();
}

} // namespace almgp

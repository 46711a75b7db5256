#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace almgp {

/// Fully-connected network shape [p, h_1, ..., Q]. Every layer, including
/// the last, applies the log-sigmoid activation.
struct MlpArch {
    std::vector<std::size_t> layer_sizes;

    [[nodiscard]] std::size_t input_dim() const { return layer_sizes.front(); }
    [[nodiscard]] std::size_t latent_dim() const { return layer_sizes.back(); }
    [[nodiscard]] std::size_t num_layers() const { return layer_sizes.size() - 1; }
    [[nodiscard]] std::size_t num_params() const;

    void validate() const;
};

/// Weights and biases of every layer. Layer i maps h_{i-1} -> h_i with an
/// h_i x h_{i-1} weight matrix.
///
/// Flattened order: layer by layer, the weight matrix row-major followed by
/// the bias vector.
struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    [[nodiscard]] Eigen::VectorXd flatten() const;
    static MlpParams unflatten(const MlpArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat);

    static MlpParams zeros(const MlpArch& arch);
    /// Uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases alike.
    static MlpParams init_default(const MlpArch& arch, std::mt19937_64& rng);

    void check_shapes(const MlpArch& arch) const;
};

/// log(1 / (1 + exp(-x))), evaluated without overflow.
double logsigmoid(double x) noexcept;

/// Maps the n x p input matrix to the n x Q latent matrix.
Eigen::MatrixXd forward(const MlpArch& arch, const MlpParams& params,
                        const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Gradient over the flattened parameters given dL/dM(X) (n x Q).
Eigen::VectorXd backward(const MlpArch& arch, const MlpParams& params,
                         const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::MatrixXd>& upstream_grad);

} // namespace almgp

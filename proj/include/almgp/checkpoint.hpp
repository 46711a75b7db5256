#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "almgp/mgp_model.hpp"

namespace almgp {

inline constexpr int kCheckpointVersion = 1;

/// Self-describing model snapshot: architecture, kernel family and the flat
/// raw parameter vector, optionally with the training data so the fitted
/// model can be rebuilt. Doubles are written in shortest round-trip form, so
/// every raw parameter survives a save/load cycle bit for bit.
struct Checkpoint {
    MlpArch arch;
    MgpParams params;
    std::optional<Eigen::MatrixXd> train_X;
    std::optional<Eigen::VectorXd> train_y;

    static Checkpoint from_model(const FittedMgp& model);
    [[nodiscard]] FittedMgp to_model() const;

    [[nodiscard]] std::string to_json() const;
    static Checkpoint from_json(const std::string& text);
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace almgp

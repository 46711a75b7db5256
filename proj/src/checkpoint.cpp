#include "almgp/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace almgp {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            row.push_back(M(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) {
        return {};
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd M(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != p) {
            throw Error(ErrorKind::shape, "ragged matrix in checkpoint");
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            M(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
    }
    return M;
}

} // namespace

Checkpoint Checkpoint::from_model(const FittedMgp& model) {
    return Checkpoint{model.arch(), model.params(), model.train_X(), model.train_y()};
}

FittedMgp Checkpoint::to_model() const {
    if (!train_X || !train_y) {
        throw Error(ErrorKind::invalid_spec, "checkpoint carries no training data");
    }
    return FittedMgp(arch, params, *train_X, *train_y);
}

std::string Checkpoint::to_json() const {
    json doc;
    doc["format"] = "almgp-checkpoint";
    doc["version"] = kCheckpointVersion;
    doc["arch"] = {{"layers", arch.layer_sizes}, {"activation", "logsigmoid"}};
    doc["kernel"] = {{"family", "gaussian"}, {"parameterization", "squared"}};
    const Eigen::VectorXd flat = params.flatten();
    doc["theta"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    doc["layout"] = {{"network", arch.num_params()}, {"lengthscales", arch.latent_dim()}, {"tau2", 1}, {"rho", 1}};
    if (train_X && train_y) {
        doc["train_X"] = matrix_to_json(*train_X);
        doc["train_y"] = std::vector<double>(train_y->data(), train_y->data() + train_y->size());
    }
    return doc.dump(1);
}

Checkpoint Checkpoint::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "almgp-checkpoint") {
        throw Error(ErrorKind::io, "not an almgp checkpoint");
    }
    if (doc.value("version", 0) != kCheckpointVersion) {
        throw Error(ErrorKind::io, "unsupported checkpoint version");
    }
    try {
        Checkpoint cp;
        cp.arch.layer_sizes = doc.at("arch").at("layers").get<std::vector<std::size_t>>();
        cp.arch.validate();
        const auto theta = doc.at("theta").get<std::vector<double>>();
        cp.params = MgpParams::unflatten(cp.arch, Eigen::Map<const Eigen::VectorXd>(
                                                      theta.data(), static_cast<Eigen::Index>(theta.size())));
        if (doc.contains("train_X") && doc.contains("train_y")) {
            cp.train_X = matrix_from_json(doc.at("train_X"));
            const auto y = doc.at("train_y").get<std::vector<double>>();
            cp.train_y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        }
        return cp;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write checkpoint " + path.string());
    }
    out << checkpoint.to_json() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read checkpoint " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return Checkpoint::from_json(buffer.str());
}

} // namespace almgp

#include <doctest.h>

#include <cmath>
#include <random>

#include "almgp/manifold_map.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace almgp;

namespace {

MlpParams random_params(const MlpArch& arch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return MlpParams::init_default(arch, rng);
}

} // namespace

TEST_SUITE("manifold_map") {

TEST_CASE("zero parameters give -log 2 everywhere") {
    const MlpArch arch{{3, 5, 2}};
    std::mt19937_64 rng(1);
    const auto out = forward(arch, MlpParams::zeros(arch), oracle::uniform_matrix(4, 3, rng, -5.0, 5.0));
    CHECK(out.rows() == 4);
    CHECK(out.cols() == 2);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        CHECK(out.data()[i] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
        CHECK(out.data()[i] == doctest::Approx(-0.693147).epsilon(1e-6));
    }
}

TEST_CASE("1-6-2 network maps n x 1 to n x 2") {
    const MlpArch arch{{1, 6, 2}};
    std::mt19937_64 rng(2);
    const auto out = forward(arch, random_params(arch, 3), oracle::uniform_matrix(7, 1, rng));
    CHECK(out.rows() == 7);
    CHECK(out.cols() == 2);
    CHECK((out.array() < 0.0).all());
}

TEST_CASE("forward matches a scalar re-implementation") {
    for (const MlpArch& arch : {MlpArch{{1, 6, 2}}, MlpArch{{2, 10, 3}}, MlpArch{{8, 30, 4}}, MlpArch{{2, 4, 3, 2}}}) {
        const auto p = random_params(arch, 4);
        std::mt19937_64 rng(5);
        const auto X = oracle::uniform_matrix(3, static_cast<Eigen::Index>(arch.input_dim()), rng, -2.0, 2.0);
        const auto expect = oracle::naive_forward(p.weights, p.biases, X);
        CHECK((forward(arch, p, X) - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("forward is deterministic") {
    const MlpArch arch{{2, 10, 3}};
    const auto p = random_params(arch, 6);
    std::mt19937_64 rng(7);
    const auto X = oracle::uniform_matrix(20, 2, rng);
    CHECK(forward(arch, p, X) == forward(arch, p, X));
}

TEST_CASE("logsigmoid is stable, negative and increasing") {
    double prev = -std::numeric_limits<double>::infinity();
    for (double x = -800.0; x <= 40.0; x += 0.37) {
        const double v = logsigmoid(x);
        CHECK(std::isfinite(v));
        CHECK(v < 0.0);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(logsigmoid(0.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(logsigmoid(-1000.0) == doctest::Approx(-1000.0).epsilon(1e-15));
}

TEST_CASE("flatten and unflatten round-trip") {
    const MlpArch arch{{8, 30, 4}};
    const auto p = random_params(arch, 8);
    const auto flat = p.flatten();
    CHECK(static_cast<std::size_t>(flat.size()) == arch.num_params());
    CHECK(MlpParams::unflatten(arch, flat).flatten() == flat);
    // documented order: W1 row-major, b1, W2 row-major, b2
    CHECK(flat(0) == p.weights[0](0, 0));
    CHECK(flat(1) == p.weights[0](0, 1));
    CHECK(flat(8) == p.weights[0](1, 0));
    CHECK(flat(240) == p.biases[0](0));
}

TEST_CASE("default initialization bounds") {
    const MlpArch arch{{8, 30, 4}};
    const auto p = random_params(arch, 9);
    CHECK((p.weights[0].array().abs() < 1.0 / std::sqrt(8.0)).all());
    CHECK((p.biases[0].array().abs() < 1.0 / std::sqrt(8.0)).all());
    CHECK((p.weights[1].array().abs() < 1.0 / std::sqrt(30.0)).all());
    CHECK((p.biases[1].array().abs() < 1.0 / std::sqrt(30.0)).all());
}

TEST_CASE("shape errors") {
    const MlpArch arch{{2, 3, 1}};
    CHECK(thrown_kind([&] { forward(arch, MlpParams::zeros(arch), Eigen::MatrixXd::Zero(2, 3)); }) == ErrorKind::shape);
    CHECK(thrown_kind([] { MlpArch{{2}}.validate(); }).has_value());
    CHECK(thrown_kind([] { MlpArch{{2, 0, 1}}.validate(); }).has_value());
}

TEST_CASE("zero upstream gradient gives zero gradient") {
    const MlpArch arch{{2, 4, 2}};
    std::mt19937_64 rng(10);
    const auto X = oracle::uniform_matrix(5, 2, rng);
    const auto g = backward(arch, random_params(arch, 11), X, Eigen::MatrixXd::Zero(5, 2));
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single unit hand derivative") {
    const MlpArch arch{{1, 1}};
    MlpParams p = MlpParams::zeros(arch);
    const double w = 0.7, b = -0.3, x = 1.9;
    p.weights[0](0, 0) = w;
    p.biases[0](0) = b;
    Eigen::MatrixXd X(1, 1);
    X << x;
    const auto g = backward(arch, p, X, Eigen::MatrixXd::Ones(1, 1));
    const double a = w * x + b;
    CHECK(g(0) == doctest::Approx(x / (1.0 + std::exp(a))).epsilon(1e-14));
    CHECK(g(1) == doctest::Approx(1.0 / (1.0 + std::exp(a))).epsilon(1e-14));
}

TEST_CASE("backward matches central differences") {
    for (const MlpArch& arch :
         {MlpArch{{2, 4, 2}}, MlpArch{{1, 6, 2}}, MlpArch{{2, 10, 3}}, MlpArch{{3, 10, 2}}, MlpArch{{8, 30, 4}}}) {
        const auto p = random_params(arch, 12);
        std::mt19937_64 rng(13);
        const auto X = oracle::uniform_matrix(5, static_cast<Eigen::Index>(arch.input_dim()), rng, -1.0, 1.0);
        const auto U = oracle::uniform_matrix(5, static_cast<Eigen::Index>(arch.latent_dim()), rng, -1.0, 1.0);
        const auto loss = [&](const Eigen::VectorXd& flat) {
            return (forward(arch, MlpParams::unflatten(arch, flat), X).array() * U.array()).sum();
        };
        const auto fd = oracle::central_difference(loss, p.flatten());
        CHECK(oracle::max_rel_error(backward(arch, p, X, U), fd) < 1e-5);
    }
}

} // TEST_SUITE

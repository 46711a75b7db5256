#include <doctest.h>

#include <cmath>
#include <random>

#include "almgp/active_learning.hpp"
#include "almgp/benchmarks.hpp"
#include "almgp/mgp_model.hpp"
#include "almgp/seeding.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace almgp;

namespace {

const MlpArch kArchs[] = {MlpArch{{1, 6, 2}}, MlpArch{{2, 10, 3}}, MlpArch{{3, 10, 2}}, MlpArch{{8, 30, 4}}};

} // namespace

TEST_SUITE("mgp_model") {

TEST_CASE("initial parameters") {
    const MlpArch arch{{2, 10, 3}};
    const auto p = MgpParams::initial(arch, 5);
    CHECK(p.kernel_raw.size() == 3);
    CHECK((p.kernel_raw.array() == 1.0).all());
    CHECK(p.tau2() == 1.0);
    CHECK(p.rho() == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(MgpParams::unflatten(arch, p.flatten()).flatten() == p.flatten());
    CHECK(static_cast<std::size_t>(p.flatten().size()) == arch.num_params() + 3 + 2);
    // tail order: length-scales, tau2, rho
    const auto flat = p.flatten();
    CHECK(flat(flat.size() - 1) == p.rho_raw);
    CHECK(flat(flat.size() - 2) == p.tau2_raw);
}

TEST_CASE("zero network gives constant features") {
    const MlpArch arch{{2, 4, 2}};
    MgpParams p = MgpParams::initial(arch, 1);
    p.mlp = MlpParams::zeros(arch);
    std::mt19937_64 rng(2);
    const auto X = oracle::uniform_matrix(4, 2, rng);
    const auto y = oracle::uniform_vector(4, rng, -1.0, 1.0);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Constant(4, 2, -std::log(2.0));
    FittedMgp m(arch, p, X, y);
    const double expect =
        oracle::dense_nlml(oracle::gaussian_K(Z, p.kernel().lengthscales), y, p.tau2(), p.rho(), m.gp().jitter());
    CHECK(std::abs(joint_nlml(arch, p, X, y) - expect) < 1e-9 * std::abs(expect));
}

TEST_CASE("single point nlml") {
    const MlpArch arch{{1, 6, 2}};
    MgpParams p = MgpParams::initial(arch, 3);
    p.tau2_raw = 1.5;
    p.rho_raw = 0.0;
    Eigen::MatrixXd X(1, 1);
    X << 0.42;
    Eigen::VectorXd y(1);
    y << 0.9;
    CHECK(joint_nlml(arch, p, X, y) == doctest::Approx(std::log(2.25) + 0.81 / 2.25).epsilon(1e-7));
}

TEST_CASE("composition law") {
    for (const auto& arch : kArchs) {
        const auto p = MgpParams::initial(arch, 4);
        std::mt19937_64 rng(5);
        const auto X = oracle::uniform_matrix(9, static_cast<Eigen::Index>(arch.input_dim()), rng);
        const auto y = oracle::uniform_vector(9, rng, -1.0, 1.0);
        CHECK(joint_nlml(arch, p, X, y) == nlml(p.kernel(), forward(arch, p.mlp, X), y, p.tau2(), p.rho()));
    }
}

TEST_CASE("joint gradient matches central differences for every architecture") {
    for (const auto& arch : {MlpArch{{2, 4, 2}}, kArchs[0], kArchs[1], kArchs[2], kArchs[3]}) {
        const auto p = MgpParams::initial(arch, 6);
        std::mt19937_64 rng(7);
        const auto X = oracle::uniform_matrix(6, static_cast<Eigen::Index>(arch.input_dim()), rng);
        const auto y = oracle::uniform_vector(6, rng, -1.0, 1.0);
        const auto jg = joint_grad(arch, p, X, y);
        const auto f = [&](const Eigen::VectorXd& v) { return joint_nlml(arch, MgpParams::unflatten(arch, v), X, y); };
        CHECK(oracle::max_rel_error(jg.grad, oracle::central_difference(f, p.flatten())) < 1e-5);
        CHECK(jg.value == joint_nlml(arch, p, X, y));
    }
}

TEST_CASE("rho gradient is zero at rho_raw = 0") {
    const MlpArch arch{{2, 4, 2}};
    MgpParams p = MgpParams::initial(arch, 8);
    p.rho_raw = 0.0;
    std::mt19937_64 rng(9);
    const auto X = oracle::uniform_matrix(6, 2, rng);
    const auto y = oracle::uniform_vector(6, rng, -1.0, 1.0);
    const auto g = joint_grad(arch, p, X, y).grad;
    CHECK(g(g.size() - 1) == 0.0);
}

TEST_CASE("row permutation leaves the gradient unchanged") {
    const MlpArch arch{{2, 4, 2}};
    const auto p = MgpParams::initial(arch, 10);
    std::mt19937_64 rng(11);
    const auto X = oracle::uniform_matrix(6, 2, rng);
    const auto y = oracle::uniform_vector(6, rng, -1.0, 1.0);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 3, 0, 5, 1, 4, 2;
    const Eigen::MatrixXd Xp = perm * X;
    const Eigen::VectorXd yp = perm * y;
    const auto a = joint_grad(arch, p, X, y).grad;
    const auto b = joint_grad(arch, p, Xp, yp).grad;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
}

TEST_CASE("fit never increases the nlml") {
    const MlpArch arch{{1, 6, 2}};
    Eigen::MatrixXd X(2, 1);
    X << 0.2, 0.8;
    Eigen::VectorXd y(2);
    y << 0.5, -0.5;
    OptimConfig opt;
    opt.max_total_iters = 200;
    const auto first = fit(arch, MgpParams::initial(arch, 12), X, y, opt);
    CHECK(first.optimizer.f <= first.initial_nlml);
    // restart at the optimum reached
    const auto second = fit(arch, first.model.params(), X, y, opt);
    CHECK(second.optimizer.f <= second.initial_nlml);
    CHECK(std::isfinite(second.optimizer.f));
}

TEST_CASE("trig step 0 fit reaches train RMSE below 0.5 in at least 9 of 10 seeds") {
    const Problem prob = make_problem(ProblemName::trig1d);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = make_problem_data(prob, seed);
        const auto init = MgpParams::initial(prob.arch, stage_seed(seed, SeedStage::model_init));
        FitOptions options;
        const auto r = fit(prob.arch, init, data.train_X, data.train_y, prob.opt, options);
        CHECK(std::isfinite(r.optimizer.f));
        const double train_rmse = rmse(predict_mgp(r.model, data.train_X).means, data.train_y);
        good += train_rmse < 0.5 ? 1 : 0;
    }
    CHECK(good >= 9);
}

TEST_CASE("prediction through the latent space") {
    const MlpArch arch{{2, 4, 2}};
    MgpParams p = MgpParams::initial(arch, 13);
    p.kernel_raw.setConstant(0.1);  // short length-scales keep K well conditioned
    p.rho_raw = 0.0;
    std::mt19937_64 rng(14);
    const auto X = oracle::uniform_matrix(5, 2, rng);
    const auto y = oracle::uniform_vector(5, rng, -1.0, 1.0);
    FittedMgp m(arch, p, X, y);
    CHECK(m.gp().features() == forward(arch, p.mlp, X));

    const auto at_train = predict_mgp(m, X);
    CHECK((at_train.means - y).cwiseAbs().maxCoeff() < 1e-5);

    const auto Q = oracle::uniform_matrix(12, 2, rng);
    const auto batch = predict_mgp(m, Q);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        const auto one = predict(m.gp(), forward(arch, p.mlp, Q.row(i)).row(0).transpose());
        CHECK(std::abs(batch.means(i) - one.mean) <= 1e-12);
        CHECK(std::abs(batch.vars(i) - one.var) <= 1e-12);
    }
}

TEST_CASE("inputs with the same latent image predict identically") {
    // first input weight zero: x1 is invisible to the network
    const MlpArch arch{{2, 3, 2}};
    MgpParams p = MgpParams::initial(arch, 15);
    p.mlp.weights[0].col(0).setZero();
    std::mt19937_64 rng(16);
    const auto X = oracle::uniform_matrix(4, 2, rng);
    const auto y = oracle::uniform_vector(4, rng, -1.0, 1.0);
    FittedMgp m(arch, p, X, y);
    Eigen::MatrixXd Q(2, 2);
    Q << 0.1, 0.6, 0.9, 0.6;
    const auto pr = predict_mgp(m, Q);
    CHECK(pr.means(0) == pr.means(1));
    CHECK(pr.vars(0) == pr.vars(1));
}

} // TEST_SUITE

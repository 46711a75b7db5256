#include <doctest.h>

#include <cmath>
#include <random>

#include "almgp/lbfgs.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace almgp;

namespace {

double quadratic(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * x;
    return x.squaredNorm();
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    g(0) = -2.0 * a - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
}

// Every consecutive pair of kept iterates is one accepted step x -> x + d.
// Both conditions are invariant to how d splits into alpha * p.
void check_strong_wolfe(const Objective& f, const MinimizeResult& r, const OptimConfig& cfg) {
    REQUIRE(r.iterates.size() >= 2);
    for (std::size_t k = 0; k + 1 < r.iterates.size(); ++k) {
        const Eigen::VectorXd& x = r.iterates[k];
        const Eigen::VectorXd d = r.iterates[k + 1] - x;
        Eigen::VectorXd g0(x.size()), g1(x.size());
        const double f0 = f(x, g0);
        const double f1 = f(r.iterates[k + 1], g1);
        const double slope0 = g0.dot(d);
        CHECK(slope0 < 0.0);
        CHECK(f1 <= f0 + cfg.wolfe_c1 * slope0 + 1e-15 * std::abs(f0));
        CHECK(std::abs(g1.dot(d)) <= cfg.wolfe_c2 * std::abs(slope0) * (1.0 + 1e-12));
    }
}

} // namespace

TEST_SUITE("lbfgs") {

TEST_CASE("quadratic from (3,4) converges in at most 5 iterations") {
    OptimConfig cfg;
    MinimizeOptions options;
    options.keep_iterates = true;
    const Eigen::Vector2d x0(3.0, 4.0);
    const auto r = minimize(quadratic, x0, cfg, options);
    CHECK(r.x.norm() < 1e-8);
    CHECK(r.iterations <= 5);
    check_strong_wolfe(quadratic, r, cfg);
}

TEST_CASE("rosenbrock from (-1.2, 1) reaches (1, 1)") {
    OptimConfig cfg;
    cfg.max_total_iters = 2000;
    MinimizeOptions options;
    options.keep_iterates = true;
    const Eigen::Vector2d x0(-1.2, 1.0);
    const auto r = minimize(rosenbrock, x0, cfg, options);
    CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
    CHECK(std::abs(r.x(1) - 1.0) < 1e-5);
    check_strong_wolfe(rosenbrock, r, cfg);
}

TEST_CASE("objective never increases across accepted iterations") {
    OptimConfig cfg;
    cfg.max_total_iters = 300;
    const Eigen::Vector2d x0(-1.2, 1.0);
    const auto r = minimize(rosenbrock, x0, cfg);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].loss <= r.trace[k - 1].loss);
    }
}

TEST_CASE("convex quadratics converge in at most n + 1 iterations with a tight line search") {
    std::mt19937_64 rng(3);
    for (Eigen::Index n = 1; n <= 5; ++n) {
        const Eigen::MatrixXd M = oracle::uniform_matrix(n, n, rng, -1.0, 1.0);
        const Eigen::MatrixXd A = M * M.transpose() + Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd b = oracle::uniform_vector(n, rng, -1.0, 1.0);
        const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            g = A * x - b;
            return 0.5 * x.dot(A * x) - b.dot(x);
        };
        OptimConfig cfg;
        cfg.history_size = static_cast<std::size_t>(n);
        cfg.wolfe_c2 = 1e-3;
        cfg.grad_tol = 1e-8;
        const auto r = minimize(f, Eigen::VectorXd::Zero(n), cfg);
        const Eigen::VectorXd xs = A.ldlt().solve(b);
        CHECK((r.x - xs).norm() < 1e-6);
        CHECK(r.iterations <= static_cast<std::size_t>(n + 1));
    }
}

TEST_CASE("deterministic given the same inputs") {
    OptimConfig cfg;
    cfg.max_total_iters = 50;
    const Eigen::Vector2d x0(-1.2, 1.0);
    const auto a = minimize(rosenbrock, x0, cfg);
    const auto b = minimize(rosenbrock, x0, cfg);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("early stop examples") {
    StopTracker t;
    t.record(10.0);
    t.record(5.0);
    t.record(5.0);
    CHECK(t.relative_change().value() == 0.0);
    CHECK(early_stop(t, 1e-12));

    StopTracker same;
    same.record(3.0);
    same.record(2.0);
    same.record(3.0);
    CHECK_FALSE(same.relative_change().has_value());
    CHECK_FALSE(early_stop(same, 1e9));

    StopTracker ninth;
    ninth.record(10.0);
    ninth.record(2.0);
    ninth.record(1.0);
    CHECK(ninth.relative_change().value() == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(early_stop(ninth, 0.12));
    CHECK_FALSE(early_stop(ninth, 0.11));

    StopTracker one;
    one.record(1.0);
    CHECK_FALSE(early_stop(one, 1.0));
}

TEST_CASE("early stopping ends the run at a step boundary") {
    OptimConfig cfg;
    cfg.early_stop_tol = 0.5;
    cfg.max_iters_per_step = 3;
    cfg.max_total_iters = 1000;
    const Eigen::Vector2d x0(-1.2, 1.0);
    const auto r = minimize(rosenbrock, x0, cfg);
    CHECK(r.reason == StopReason::early_stop);
    CHECK(r.iterations <= r.steps * cfg.max_iters_per_step);
}

TEST_CASE("iteration cap") {
    OptimConfig cfg;
    cfg.max_total_iters = 7;
    cfg.max_iters_per_step = 3;
    const Eigen::Vector2d x0(-1.2, 1.0);
    const auto r = minimize(rosenbrock, x0, cfg);
    CHECK(r.iterations == 7);
    CHECK(r.reason == StopReason::max_iters);
}

TEST_CASE("non-finite start diverges") {
    const Objective bad = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.setZero();
        return std::log(x(0));
    };
    CHECK(thrown_kind([&] { minimize(bad, Eigen::VectorXd::Constant(1, -1.0), OptimConfig{}); }) ==
          ErrorKind::divergence);
}

TEST_CASE("inconsistent gradient makes the line search fail") {
    // gradient claims descent along +x while f grows that way
    const Objective liar = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = -Eigen::VectorXd::Ones(x.size());
        return x.sum();
    };
    const auto r = minimize(liar, Eigen::VectorXd::Zero(2), OptimConfig{});
    CHECK(r.line_search_failed);
    CHECK(r.reason == StopReason::line_search_failed);
    CHECK(r.x == Eigen::VectorXd::Zero(2));
}

TEST_CASE("config validation") {
    OptimConfig cfg;
    cfg.wolfe_c1 = 0.9;
    cfg.wolfe_c2 = 0.5;
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::invalid_spec);
    OptimConfig zero;
    zero.history_size = 0;
    CHECK(thrown_kind([&] { zero.validate(); }) == ErrorKind::invalid_spec);
}

} // TEST_SUITE

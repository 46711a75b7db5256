#include "almgp/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "almgp/error.hpp"
#include "almgp/seeding.hpp"

namespace almgp {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

void require_in(double value, double lo, double hi, const char* what) {
    if (!(value >= lo && value <= hi)) {
        throw Error(ErrorKind::domain, std::string(what) + " = " + std::to_string(value) + " is outside [" +
                                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

} // namespace

double eval_trig1d(double x) {
    require_in(x, 0.0, 1.0, "x");
    if (x <= 0.33) {
        return 1.35 * std::cos(12.0 * kPi * x);
    }
    if (x <= 0.66) {
        return 1.35;
    }
    return 1.35 * std::cos(6.0 * kPi * x);
}

double synthetic2d_base(double x1, double x2) {
    return 1.0 - normal_pdf(x2, 3.0, 0.5) - normal_pdf(x2, -3.0, 0.5) + x1 / 100.0;
}

Eigen::Vector2d rotate_about_center(const Eigen::Vector2d& p, double degrees) {
    const double a = degrees * kPi / 180.0;
    const Eigen::Vector2d center(5.0, 5.0);
    Eigen::Matrix2d R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R * (p - center) + center;
}

double eval_synthetic2d(double x1, double x2) {
    require_in(x1, 0.0, 10.0, "x1");
    require_in(x2, 0.0, 10.0, "x2");
    const Eigen::Vector2d back = rotate_about_center(Eigen::Vector2d(x1, x2), -45.0);
    return synthetic2d_base(back(0), back(1));
}

double sphere_function(double x, double y, double z) { return std::cos(x) + y * y + std::exp(z); }

SpherePoint eval_sphere3d(double v, double alpha) {
    require_in(v, -1.0, 1.0, "v");
    require_in(alpha, 0.0, 2.0 * kPi, "alpha");
    const double radius = std::sqrt(1.0 - v * v);
    SpherePoint p;
    p.z = v;
    p.x = radius * std::cos(alpha);
    p.y = radius * std::sin(alpha);
    p.value = sphere_function(p.x, p.y, p.z);
    return p;
}

double sphere_disk(double x, double y) { return std::cos(x) + y * y + std::exp(1.0 - x * x - y * y); }

double eval_borehole(const Eigen::Ref<const Eigen::VectorXd>& u) {
    if (u.size() != 8) {
        throw Error(ErrorKind::shape, "borehole takes 8 inputs");
    }
    static constexpr const char* names[8] = {"r_w", "r", "T_u", "H_u", "T_l", "H_l", "L", "K_w"};
    for (Eigen::Index i = 0; i < 8; ++i) {
        require_in(u(i), kBoreholeRanges[static_cast<std::size_t>(i)].lower,
                   kBoreholeRanges[static_cast<std::size_t>(i)].upper, names[i]);
    }
    return borehole_flow(u(0), u(1), u(2), u(3), u(4), u(5), u(6), u(7));
}

double borehole_flow(double rw, double r, double Tu, double Hu, double Tl, double Hl, double L, double Kw) {
    const double log_ratio = std::log(r / rw);
    return 2.0 * kPi * Tu * (Hu - Hl) / (log_ratio * (1.0 + 2.0 * L * Tu / (log_ratio * rw * rw * Kw) + Tu / Tl));
}

Eigen::VectorXd borehole_from_unit(const Eigen::Ref<const Eigen::VectorXd>& unit) {
    if (unit.size() != 8) {
        throw Error(ErrorKind::shape, "borehole takes 8 inputs");
    }
    Eigen::VectorXd u(8);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const auto& range = kBoreholeRanges[static_cast<std::size_t>(i)];
        u(i) = range.lower + (range.upper - range.lower) * std::clamp(unit(i), 0.0, 1.0);
    }
    return u;
}

std::string_view to_string(ProblemName name) noexcept {
    switch (name) {
    case ProblemName::trig1d: return "trig1d";
    case ProblemName::synthetic2d: return "synthetic2d";
    case ProblemName::sphere3d: return "sphere3d";
    case ProblemName::borehole8d: return "borehole8d";
    }
    return "trig1d";
}

ProblemName parse_problem(std::string_view text) {
    for (auto name : {ProblemName::trig1d, ProblemName::synthetic2d, ProblemName::sphere3d, ProblemName::borehole8d}) {
        if (text == to_string(name)) {
            return name;
        }
    }
    if (text == "borehole") {
        return ProblemName::borehole8d;
    }
    throw Error(ErrorKind::invalid_spec, "unknown problem '" + std::string(text) + "'");
}

double Problem::truth(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim) {
        throw Error(ErrorKind::shape, "point has the wrong dimension for " + std::string(to_string(name)));
    }
    switch (name) {
    case ProblemName::trig1d: return eval_trig1d(x(0));
    case ProblemName::synthetic2d: return eval_synthetic2d(x(0), x(1));
    case ProblemName::sphere3d: return sphere_function(x(0), x(1), x(2));
    case ProblemName::borehole8d: return eval_borehole(borehole_from_unit(x));
    }
    return 0.0;
}

Problem make_problem(ProblemName name) {
    Problem p;
    p.name = name;
    switch (name) {
    case ProblemName::trig1d:
        p.input_dim = 1;
        p.noise_sd = 0.1;
        p.arch.layer_sizes = {1, 6, 2};
        p.n_initial = 10;
        p.n_test = 500;
        p.n_candidates = 100;
        p.n_reference = 100;
        p.al.screen_size = 20;
        p.al.max_added = 50;
        p.al.tol = 1e-5;
        p.al.stop_metric = StopMetric::train_mse;
        p.al.refit = RefitMode::best;
        p.opt.history_size = 20;
        p.opt.learning_rate = 1e-3;
        p.opt.max_iters_per_step = 20;
        p.opt.max_total_iters = 5000;
        p.opt.early_stop_tol = 1e-5;
        break;
    case ProblemName::synthetic2d:
        p.input_dim = 2;
        p.arch.layer_sizes = {2, 10, 3};
        p.n_initial = 50;
        p.n_test = 500;
        p.n_candidates = 500;
        p.n_reference = 500;
        p.al.screen_size = 50;
        p.al.max_added = 50;
        p.al.stop_metric = StopMetric::none;
        p.al.refit = RefitMode::warm;
        p.opt.history_size = 50;
        p.opt.learning_rate = 1e-2;
        p.opt.max_iters_per_step = 50;
        p.opt.max_total_iters = 5000;
        p.opt.early_stop_tol = 1e-5;
        break;
    case ProblemName::sphere3d:
        p.input_dim = 3;
        p.arch.layer_sizes = {3, 10, 2};
        p.n_initial = 50;
        p.n_test = 500;
        p.n_candidates = 500;
        p.n_reference = 500;
        p.al.screen_size = 50;
        p.al.max_added = 100;
        p.al.stop_metric = StopMetric::none;
        p.al.refit = RefitMode::warm;
        p.opt.history_size = 50;
        p.opt.learning_rate = 1e-2;
        p.opt.max_iters_per_step = 20;
        p.opt.max_total_iters = 5000;
        p.opt.early_stop_tol = 1e-5;
        break;
    case ProblemName::borehole8d:
        p.input_dim = 8;
        p.arch.layer_sizes = {8, 30, 4};
        p.n_initial = 50;
        p.n_test = 500;
        p.n_candidates = 500;
        p.n_reference = 500;
        p.al.screen_size = 50;
        p.al.max_added = 150;
        p.al.stop_metric = StopMetric::none;
        p.al.refit = RefitMode::warm;
        p.opt.history_size = 50;
        p.opt.learning_rate = 1e-3;
        p.opt.max_iters_per_step = 100;
        p.opt.max_total_iters = 10000;
        p.opt.early_stop_tol = 1e-8;
        p.optimizer_loss = OptimizerLoss::test_rmse;
        p.al.refit_max_iters = 100;
        break;
    }
    p.al.batch_size = 1;
    return p;
}

namespace {

Eigen::MatrixXd lhd(std::size_t n, const std::vector<Interval>& bounds, std::uint64_t seed) {
    return lhd_sample(DesignSpec{n, bounds.size(), bounds, DesignKind::lhd, seed});
}

Eigen::MatrixXd grid(std::size_t n, const std::vector<Interval>& bounds) {
    return uniform_grid(DesignSpec{n, bounds.size(), bounds, DesignKind::uniform_grid, 0});
}

// (v, alpha) design mapped onto the sphere.
Eigen::MatrixXd sphere_points(std::size_t n, std::uint64_t seed) {
    const Eigen::MatrixXd va = lhd(n, {{-1.0, 1.0}, {0.0, 2.0 * kPi}}, seed);
    Eigen::MatrixXd xyz(va.rows(), 3);
    for (Eigen::Index i = 0; i < va.rows(); ++i) {
        const auto p = eval_sphere3d(va(i, 0), va(i, 1));
        xyz.row(i) << p.x, p.y, p.z;
    }
    return xyz;
}

Eigen::VectorXd evaluate(const Problem& problem, const Eigen::MatrixXd& X) {
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        y(i) = problem.truth(X.row(i).transpose());
    }
    return y;
}

} // namespace

ProblemData make_problem_data(const Problem& problem, std::uint64_t seed) {
    ProblemData data;
    const auto seed_for = [seed](SeedStage stage) { return stage_seed(seed, stage); };
    switch (problem.name) {
    case ProblemName::trig1d: {
        const std::vector<Interval> unit{{0.0, 1.0}};
        data.train_X = lhd(problem.n_initial, unit, seed_for(SeedStage::initial_design));
        data.test_X = grid(problem.n_test, unit);
        data.cand_X = grid(problem.n_candidates, unit);
        data.ref_X = grid(problem.n_reference, unit);
        break;
    }
    case ProblemName::synthetic2d: {
        const auto box = cube_bounds(2, {0.0, 10.0});
        data.train_X = lhd(problem.n_initial, box, seed_for(SeedStage::initial_design));
        data.test_X = lhd(problem.n_test, box, seed_for(SeedStage::test_design));
        data.cand_X = lhd(problem.n_candidates, box, seed_for(SeedStage::candidate_design));
        data.ref_X = lhd(problem.n_reference, box, seed_for(SeedStage::reference_design));
        data.viz_X = grid(grid_points_for_mesh({0.0, 10.0}, 0.2), box);
        break;
    }
    case ProblemName::sphere3d:
        data.train_X = sphere_points(problem.n_initial, seed_for(SeedStage::initial_design));
        data.test_X = sphere_points(problem.n_test, seed_for(SeedStage::test_design));
        data.cand_X = sphere_points(problem.n_candidates, seed_for(SeedStage::candidate_design));
        data.ref_X = sphere_points(problem.n_reference, seed_for(SeedStage::reference_design));
        break;
    case ProblemName::borehole8d: {
        const auto unit = cube_bounds(8);
        data.train_X = lhd(problem.n_initial, unit, seed_for(SeedStage::initial_design));
        data.test_X = lhd(problem.n_test, unit, seed_for(SeedStage::test_design));
        data.cand_X = lhd(problem.n_candidates, unit, seed_for(SeedStage::candidate_design));
        data.ref_X = lhd(problem.n_reference, unit, seed_for(SeedStage::reference_design));
        break;
    }
    }
    data.train_y = evaluate(problem, data.train_X);
    data.test_y = evaluate(problem, data.test_X);
    if (problem.noise_sd > 0.0) {
        std::mt19937_64 rng(seed_for(SeedStage::label_noise));
        std::normal_distribution<double> noise(0.0, problem.noise_sd);
        for (Eigen::Index i = 0; i < data.train_y.size(); ++i) {
            data.train_y(i) += noise(rng);
        }
    }
    return data;
}

NoisyLabeler::NoisyLabeler(const Problem& problem, std::uint64_t seed)
    : problem_(problem), rng_(stage_seed(seed, SeedStage::acquisition_noise)) {}

double NoisyLabeler::operator()(const Eigen::VectorXd& x) {
    double y = problem_.truth(x);
    if (problem_.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, problem_.noise_sd);
        y += noise(rng_);
    }
    return y;
}

} // namespace almgp

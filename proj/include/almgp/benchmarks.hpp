#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "almgp/active_learning.hpp"
#include "almgp/designs.hpp"
#include "almgp/lbfgs.hpp"
#include "almgp/manifold_map.hpp"

namespace almgp {

// ---- test functions -------------------------------------------------------

/// Piecewise trigonometric function on [0, 1]:
///   1.35 cos(12 pi x) on [0, 0.33], 1.35 on (0.33, 0.66], 1.35 cos(6 pi x) on (0.66, 1].
double eval_trig1d(double x);

/// Unrotated two-dimensional function
///   1 - phi(x2; 3, 0.5^2) - phi(x2; -3, 0.5^2) + x1 / 100.
double synthetic2d_base(double x1, double x2);

/// Rotates p by `degrees` counter-clockwise about (5, 5).
Eigen::Vector2d rotate_about_center(const Eigen::Vector2d& p, double degrees);

/// The base function rotated by 45 degrees about the domain centre: the query
/// is rotated back by -45 degrees before evaluation. Domain [0, 10]^2.
double eval_synthetic2d(double x1, double x2);

struct SpherePoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double value = 0.0;
};

/// Maps (v, alpha) in [-1, 1] x [0, 2 pi] to the unit sphere and evaluates
/// cos(x) + y^2 + exp(z).
SpherePoint eval_sphere3d(double v, double alpha);

/// cos(x) + y^2 + exp(z) at a point of R^3.
double sphere_function(double x, double y, double z);

/// Disk form cos(x) + y^2 + exp(1 - x^2 - y^2). The exponent is z^2 rather
/// than z, so it agrees with the sphere function only where z is 0 or 1.
double sphere_disk(double x, double y);

/// Physical input ranges of the borehole function, in the order
/// r_w, r, T_u, H_u, T_l, H_l, L, K_w.
inline constexpr std::array<Interval, 8> kBoreholeRanges{{
    {0.05, 0.15},
    {100.0, 50000.0},
    {63070.0, 115600.0},
    {990.0, 1110.0},
    {63.1, 116.0},
    {700.0, 820.0},
    {1120.0, 1680.0},
    {9855.0, 12045.0},
}};

/// Water flow rate through a borehole, inputs in physical units. Throws
/// Error(domain) outside kBoreholeRanges.
double eval_borehole(const Eigen::Ref<const Eigen::VectorXd>& u);

/// The flow expression itself, without the range check.
double borehole_flow(double rw, double r, double Tu, double Hu, double Tl, double Hl, double L, double Kw);

/// Affine map from [0, 1]^8 to the physical ranges.
Eigen::VectorXd borehole_from_unit(const Eigen::Ref<const Eigen::VectorXd>& unit);

// ---- problem definitions --------------------------------------------------

enum class ProblemName { trig1d, synthetic2d, sphere3d, borehole8d };

std::string_view to_string(ProblemName name) noexcept;
ProblemName parse_problem(std::string_view text);

/// Where the optimizer's early-stop rule takes its loss from.
enum class OptimizerLoss { nlml, test_rmse };

struct Problem {
    ProblemName name = ProblemName::trig1d;
    std::size_t input_dim = 1;
    double noise_sd = 0.0;
    MlpArch arch;
    AlConfig al;
    OptimConfig opt;
    OptimizerLoss optimizer_loss = OptimizerLoss::nlml;
    std::size_t n_initial = 0;
    std::size_t n_test = 0;
    std::size_t n_candidates = 0;
    std::size_t n_reference = 0;

    /// Noise-free response at a point in model coordinates (the columns the
    /// network sees).
    [[nodiscard]] double truth(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Default configuration of each experiment.
Problem make_problem(ProblemName name);

struct ProblemData {
    Eigen::MatrixXd train_X;
    Eigen::VectorXd train_y;  // noisy when noise_sd > 0
    Eigen::MatrixXd test_X;
    Eigen::VectorXd test_y;   // always noise-free
    Eigen::MatrixXd cand_X;
    Eigen::MatrixXd ref_X;
    Eigen::MatrixXd viz_X;    // optional visualisation grid (may be empty)
};

/// Generates every point set of one repetition from the run seed.
ProblemData make_problem_data(const Problem& problem, std::uint64_t seed);

/// Labels acquired points with the same noise model as the initial data.
/// Draws from its own generator, so it must outlive the loop that uses it.
class NoisyLabeler {
public:
    NoisyLabeler(const Problem& problem, std::uint64_t seed);
    double operator()(const Eigen::VectorXd& x);

private:
    Problem problem_;
    std::mt19937_64 rng_;
};

} // namespace almgp

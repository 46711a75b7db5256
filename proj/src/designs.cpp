#include "almgp/designs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "almgp/error.hpp"

namespace almgp {

void DesignSpec::validate() const {
    if (n_points == 0) {
        throw Error(ErrorKind::invalid_spec, "design needs at least one point");
    }
    if (dims == 0) {
        throw Error(ErrorKind::invalid_spec, "design needs at least one dimension");
    }
    if (bounds.size() != dims) {
        throw Error(ErrorKind::invalid_spec,
                    "design bounds have " + std::to_string(bounds.size()) +
                        " entries, expected " + std::to_string(dims));
    }
    for (const auto& b : bounds) {
        if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper)) {
            throw Error(ErrorKind::invalid_spec, "design bounds must satisfy lower < upper");
        }
    }
}

Eigen::MatrixXd lhd_sample(const DesignSpec& spec) {
    spec.validate();
    if (spec.kind != DesignKind::lhd) {
        throw Error(ErrorKind::invalid_spec, "lhd_sample called with a grid spec");
    }
    const auto n = spec.n_points;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<std::size_t> perm(n);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dims));
    for (std::size_t d = 0; d < spec.dims; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto [lo, hi] = spec.bounds[d];
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[i]) + jitter(rng)) / static_cast<double>(n);
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = lo + (hi - lo) * u;
        }
    }
    return design;
}

namespace {

Eigen::VectorXd linspace(const Interval& interval, std::size_t n) {
    if (n == 1) {
        return Eigen::VectorXd::Constant(1, 0.5 * (interval.lower + interval.upper));
    }
    Eigen::VectorXd axis(static_cast<Eigen::Index>(n));
    const double step = (interval.upper - interval.lower) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        axis(static_cast<Eigen::Index>(i)) = interval.lower + step * static_cast<double>(i);
    }
    // pin the right endpoint exactly
    axis(static_cast<Eigen::Index>(n - 1)) = interval.upper;
    return axis;
}

} // namespace

Eigen::MatrixXd uniform_grid(const DesignSpec& spec) {
    spec.validate();
    if (spec.dims > 2) {
        throw Error(ErrorKind::unsupported_grid, "uniform grids support at most two dimensions");
    }
    const auto n = static_cast<Eigen::Index>(spec.n_points);
    const Eigen::VectorXd first = linspace(spec.bounds[0], spec.n_points);
    if (spec.dims == 1) {
        return first;
    }
    const Eigen::VectorXd second = linspace(spec.bounds[1], spec.n_points);
    Eigen::MatrixXd grid(n * n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            grid(i * n + j, 0) = first(i);
            grid(i * n + j, 1) = second(j);
        }
    }
    return grid;
}

std::size_t grid_points_for_mesh(const Interval& interval, double mesh) {
    if (!(mesh > 0.0) || !(interval.lower < interval.upper)) {
        throw Error(ErrorKind::invalid_spec, "grid mesh must be positive over a proper interval");
    }
    return static_cast<std::size_t>(std::llround((interval.upper - interval.lower) / mesh)) + 1;
}

Eigen::MatrixXd generate_design(const DesignSpec& spec) {
    return spec.kind == DesignKind::lhd ? lhd_sample(spec) : uniform_grid(spec);
}

std::vector<Interval> cube_bounds(std::size_t dims, Interval interval) {
    return std::vector<Interval>(dims, interval);
}

} // namespace almgp

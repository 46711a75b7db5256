#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace almgp {

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

enum class DesignKind { lhd, uniform_grid };

/// Request for a space-filling or grid design. For grids, n_points is the
/// number of points per axis, so the result has n_points^dims rows.
struct DesignSpec {
    std::size_t n_points = 0;
    std::size_t dims = 0;
    std::vector<Interval> bounds;
    DesignKind kind = DesignKind::lhd;
    std::uint64_t seed = 0;

    /// Throws Error(invalid_spec) on zero counts, bounds of the wrong length
    /// or degenerate intervals.
    void validate() const;
};

/// Random-permutation Latin hypercube with uniform jitter inside each stratum.
/// Every one-dimensional projection has exactly one point per stratum.
Eigen::MatrixXd lhd_sample(const DesignSpec& spec);

/// Evenly spaced grid with both endpoints included; tensor product for
/// dims == 2. Throws Error(unsupported_grid) for dims > 2.
Eigen::MatrixXd uniform_grid(const DesignSpec& spec);

/// Points per axis for a grid of the given mesh size: width / mesh + 1.
std::size_t grid_points_for_mesh(const Interval& interval, double mesh);

/// Dispatches on spec.kind.
Eigen::MatrixXd generate_design(const DesignSpec& spec);

/// Convenience: the same interval repeated for every dimension.
std::vector<Interval> cube_bounds(std::size_t dims, Interval interval = {});

} // namespace almgp

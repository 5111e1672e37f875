#pragma once

#include <algorithm>

#include <Eigen/Dense>

namespace ncbal {

/// Conserved variables of one cell (at most three components).
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

/// Small dense matrix: Hessians, flux Jacobians and N×d source coefficients.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

/// Points and unit normals live in the plane; 1D meshes use the x axis.
using Point = Eigen::Vector2d;
using Normal = Eigen::Vector2d;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    double width() const noexcept { return hi - lo; }
};

/// Infinity norm scale used for relative tolerances; never below one.
inline double tolerance_scale(const State& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace ncbal

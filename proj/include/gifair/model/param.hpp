#pragma once

#include <Eigen/Dense>

namespace gifair {

/// Dense model parameter vector. Dimension is fixed for the lifetime of a
/// federation.
using ParamVector = Eigen::VectorXd;

/// Row-major so that per-sample access is a contiguous row.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const ParamVector& v) noexcept { return v.allFinite(); }

}  // namespace gifair

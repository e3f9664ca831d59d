#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ymh {

using Complex = std::complex<double>;

/// Largest bundle rank handled by the per-site kernels. Site matrices are
/// stack-allocated up to this size.
inline constexpr int kMaxRank = 4;

using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxRank, kMaxRank>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRank, 1>;

/// One matrix per site (or per link), in lattice index order.
using MatField = std::vector<Mat>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace ymh

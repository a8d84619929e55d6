#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace fivec {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using cplx = std::complex<double>;

/// Wave mode of a covector. S covers both shear polarizations.
enum class Mode { P, S, unclassified };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

}  // namespace fivec

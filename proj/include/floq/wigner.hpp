#pragma once

#include "floq/common.hpp"

namespace floq {

// zyz Euler angles: R = Rz(alpha) Ry(beta) Rz(gamma), active rotations.
struct Euler {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

// d^l_{m m'}(beta) = <l m| exp(-i beta Jy) |l m'>, integer l.
double small_d(int l, int m, int mp, double beta);
cplx big_D(int l, int m, int mp, const Euler& e);
// (2l+1)x(2l+1) matrix with row m+l, column m'+l.
MatC wigner_D(int l, const Euler& e);

Mat2 su2_axis_angle(const Vec3& axis, double angle);  // exp(-i angle n.sigma/2)
Mat2 su2_euler(const Euler& e);
Mat3 so3_from_su2(const Mat2& u);
Mat3 so3_euler(const Euler& e);

// Euler angles of a proper rotation. The representation closest to `hint`
// is returned, allowing beta < 0 and shifting alpha/gamma by 2pi, so that
// sampled trajectories come out continuous. At the poles alpha keeps the
// hint value and gamma absorbs the rest.
Euler euler_from_so3(const Mat3& r, const Euler& hint = {});

}  // namespace floq

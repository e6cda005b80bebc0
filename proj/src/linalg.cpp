#include "floq/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace floq::linalg {

MatC expm(const MatC& a) {
  require_finite(a, "expm input");
  MatC out = a.exp();
  require_finite(out, "expm output");
  return out;
}

MatC expm_hermitian(const MatC& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("expm_hermitian: eigensolver failed");
  const VecC ph = (cplx(0, -t) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

MatC expm_real_symmetric(const MatR& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatR> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("expm_real_symmetric: eigensolver failed");
  const VecC ph = (cplx(0, -t) * es.eigenvalues().cast<cplx>()).array().exp();
  const MatC v = es.eigenvectors().cast<cplx>();
  return v * ph.asDiagonal() * v.transpose();
}

double op_norm(const MatC& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatC> svd(a);
  return svd.singularValues()(0);
}

MatC matrix_power(const MatC& a, std::uint64_t n) {
  MatC result = MatC::Identity(a.rows(), a.cols());
  MatC base = a;
  while (n > 0) {
    if (n & 1u) result = result * base;
    n >>= 1u;
    if (n > 0) base = base * base;
  }
  return result;
}

void require_finite(const MatC& a, const char* what) {
  if (!a.allFinite()) throw NumericalError(std::string("non-finite entries in ") + what);
}

}  // namespace floq::linalg

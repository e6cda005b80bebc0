#include "floq/spin.hpp"

#include <cmath>

namespace floq::spin {

int multiplicity(double S) {
  const double twoS = 2.0 * S;
  if (S < 0.0 || std::abs(twoS - std::round(twoS)) > 1e-12)
    throw DomainError("spin quantum number must be a non-negative half-integer");
  return static_cast<int>(std::lround(twoS)) + 1;
}

MatC sz(double S) {
  const int d = multiplicity(S);
  MatC m = MatC::Zero(d, d);
  for (int k = 0; k < d; ++k) m(k, k) = S - k;
  return m;
}

MatC splus(double S) {
  const int d = multiplicity(S);
  MatC m = MatC::Zero(d, d);
  // <m+1|S+|m> = sqrt(S(S+1) - m(m+1)); row k has m = S-k.
  for (int k = 1; k < d; ++k) {
    const double mm = S - k;
    m(k - 1, k) = std::sqrt(S * (S + 1) - mm * (mm + 1));
  }
  return m;
}

MatC sminus(double S) { return splus(S).adjoint(); }
MatC sx(double S) { return 0.5 * (splus(S) + sminus(S)); }
MatC sy(double S) { return cplx(0, -0.5) * (splus(S) - sminus(S)); }

MatC kron(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatC identity(int d) { return MatC::Identity(d, d); }

MatC embed(const std::vector<int>& dims, std::size_t site, const MatC& op) {
  if (site >= dims.size()) throw DomainError("embed: site out of range");
  if (op.rows() != dims[site]) throw DomainError("embed: operator dimension mismatch");
  MatC out = MatC::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k)
    out = kron(out, k == site ? op : identity(dims[k]));
  return out;
}

namespace {

inline int bit_of(int n, int site) { return n - 1 - site; }

void check_site(int n, int site) {
  if (n < 1 || n > 16 || site < 0 || site >= n) throw DomainError("qubit site out of range");
}

}  // namespace

MatC qubit_op(int n, int site, char axis) {
  check_site(n, site);
  const int d = 1 << n;
  const int mask = 1 << bit_of(n, site);
  MatC m = MatC::Zero(d, d);
  for (int b = 0; b < d; ++b) {
    const bool down = (b & mask) != 0;
    const int f = b ^ mask;
    switch (axis) {
      case 'z': m(b, b) = down ? -0.5 : 0.5; break;
      case 'x': m(f, b) = 0.5; break;
      case 'y': m(f, b) = down ? cplx(0, -0.5) : cplx(0, 0.5); break;
      case '+': if (down) m(f, b) = 1.0; break;
      case '-': if (!down) m(f, b) = 1.0; break;
      default: throw DomainError("qubit_op: unknown axis");
    }
  }
  return m;
}

MatC qubit_collective(int n, char axis) {
  MatC m = qubit_op(n, 0, axis);
  for (int i = 1; i < n; ++i) m += qubit_op(n, i, axis);
  return m;
}

MatR qubit_collective_real(int n, char axis) {
  if (axis != 'x' && axis != 'z') throw DomainError("qubit_collective_real: x or z only");
  const int d = 1 << n;
  MatR m = MatR::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int i = 0; i < n; ++i) {
      const int mask = 1 << bit_of(n, i);
      if (axis == 'z') m(b, b) += (b & mask) ? -0.5 : 0.5;
      else m(b ^ mask, b) += 0.5;
    }
  return m;
}

MatC tensor_power(const Mat2& u, int n) {
  MatC out = MatC::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, MatC(u));
  return out;
}

MatC tensor1(int n, int i, int q) {
  switch (q) {
    case 0: return qubit_op(n, i, 'z');
    case 1: return -qubit_op(n, i, '+') / std::sqrt(2.0);
    case -1: return qubit_op(n, i, '-') / std::sqrt(2.0);
    default: throw DomainError("tensor1: |q| > 1");
  }
}

MatC tensor2(int n, int i, int j, int q) {
  if (i == j) throw DomainError("tensor2: needs two distinct sites");
  const MatC zi = qubit_op(n, i, 'z'), zj = qubit_op(n, j, 'z');
  const MatC pi = qubit_op(n, i, '+'), pj = qubit_op(n, j, '+');
  const MatC mi = qubit_op(n, i, '-'), mj = qubit_op(n, j, '-');
  const double r6 = std::sqrt(6.0);
  switch (q) {
    case 0: return 2.0 * zi * zj - 0.5 * (pi * mj + mi * pj);
    case 1: return -0.5 * r6 * (pi * zj + zi * pj);
    case -1: return 0.5 * r6 * (mi * zj + zi * mj);
    case 2: return 0.5 * r6 * pi * pj;
    case -2: return 0.5 * r6 * mi * mj;
    default: throw DomainError("tensor2: |q| > 2");
  }
}

MatR dipolar_secular(const MatR& d) {
  const int n = static_cast<int>(d.rows());
  if (n < 1 || n > 16 || d.cols() != n) throw DomainError("dipolar_secular: bad coupling matrix");
  const int dim = 1 << n;
  MatR h = MatR::Zero(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dij = d(i, j);
      if (dij == 0.0) continue;
      const int mi = 1 << bit_of(n, i), mj = 1 << bit_of(n, j);
      for (int b = 0; b < dim; ++b) {
        const bool si = b & mi, sj = b & mj;
        // 2 Iz Iz is +1/2 for aligned spins, -1/2 for opposite.
        h(b, b) += (si == sj ? 0.5 : -0.5) * dij;
        if (si != sj) h(b ^ mi ^ mj, b) += -0.5 * dij;
      }
    }
  return h;
}

VecR zeeman_diagonal(const VecR& hz) {
  const int n = static_cast<int>(hz.size());
  const int dim = 1 << n;
  VecR out = VecR::Zero(dim);
  for (int b = 0; b < dim; ++b)
    for (int i = 0; i < n; ++i) out(b) += ((b >> bit_of(n, i)) & 1 ? -0.5 : 0.5) * hz(i);
  return out;
}

}  // namespace floq::spin

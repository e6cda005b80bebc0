#pragma once

#include <vector>

#include "floq/common.hpp"

// Spin operators. Single-spin bases are ordered m = S, S-1, ..., -S.
// Qubit registers put site 0 in the most significant tensor factor, so
// basis index b has spin i up when bit (N-1-i) of b is clear.
namespace floq::spin {

int multiplicity(double S);  // 2S+1, throws for non half-integer S

MatC sx(double S);
MatC sy(double S);
MatC sz(double S);
MatC splus(double S);
MatC sminus(double S);

MatC kron(const MatC& a, const MatC& b);
MatC identity(int d);

// op acting on factor `site` of a register with the given local dimensions.
MatC embed(const std::vector<int>& dims, std::size_t site, const MatC& op);

// Qubit-register helpers, built directly from bit arithmetic.
MatC qubit_op(int n, int site, char axis);      // axis in {x,y,z,+,-}
MatC qubit_collective(int n, char axis);         // sum over sites
MatR qubit_collective_real(int n, char axis);    // x or z only
MatC tensor_power(const Mat2& u, int n);

// Spherical tensor components, scaled so that T20 = 3 Iz Iz - I.I and T10 = Iz.
MatC tensor1(int n, int i, int q);
MatC tensor2(int n, int i, int j, int q);

// sum_{i<j} d_ij (3 Iz_i Iz_j - I_i.I_j), real and magnetisation conserving.
MatR dipolar_secular(const MatR& d);

// sum_i h_i Iz_i, diagonal.
VecR zeeman_diagonal(const VecR& h);

}  // namespace floq::spin

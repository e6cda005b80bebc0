#pragma once

#include <cstdint>

#include "floq/common.hpp"

namespace floq::linalg {

// General dense exponential (scaling and squaring, Pade 13).
MatC expm(const MatC& a);

// exp(-i t H) for Hermitian H via its eigendecomposition.
MatC expm_hermitian(const MatC& h, double t);
MatC expm_real_symmetric(const MatR& h, double t);

// Largest singular value.
double op_norm(const MatC& a);

// a^n by binary powering.
MatC matrix_power(const MatC& a, std::uint64_t n);

void require_finite(const MatC& a, const char* what);

}  // namespace floq::linalg

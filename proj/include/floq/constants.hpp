#pragma once

// CODATA 2018 values, SI units.
namespace floq::phys {

inline constexpr double mu0_over_4pi = 1.0e-7;       // T^2 m^3 / J
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double gamma_13c = 67.2828e6;       // rad s^-1 T^-1
inline constexpr double gamma_e = 1.76085963023e11;  // rad s^-1 T^-1 (magnitude)
inline constexpr double angstrom = 1.0e-10;
inline constexpr double diamond_a0 = 3.57e-10;       // m

}  // namespace floq::phys

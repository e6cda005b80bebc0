#pragma once

#include "floq/drive.hpp"
#include "floq/lattice.hpp"

namespace fixtures {

inline floq::DriveSequence reference_drive(double dw = 0.0) {
  return floq::DriveSequence{56e-6, 92e-6, 4460.0, dw};
}

// Three nuclei and one electron at the positions used for the toy-model study,
// in units of the lattice constant.
inline floq::SpinClusterGeometry three_spin_geometry(double electron_spin = 1.0) {
  const double a = floq::phys::diamond_a0;
  std::vector<floq::Vec3> nuc = {a * floq::Vec3(1, 1, -3) / 4.0, a * floq::Vec3(4, 2, 2) / 4.0,
                                 a * floq::Vec3(-2, -4, 2) / 4.0};
  std::vector<floq::Vec3> el = {a * floq::Vec3(0.2, -0.2, 20.25)};
  return floq::make_geometry(nuc, el, {electron_spin});
}

}  // namespace fixtures

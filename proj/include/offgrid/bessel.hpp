// First-order Bessel function of the first kind, used by the analytic
// ellipse transform (jinc kernel).
#pragma once

#include <cmath>
#include <cstdlib>

namespace offgrid {

// J1 on the realistic argument range (|x| up to a few hundred). The standard
// library routine is accurate to ~1e-13 there; tests pin tabulated values.
inline double bessel_j1(double x) {
  double ax = std::abs(x);
  double v = std::cyl_bessel_j(1.0, ax);
  return x < 0 ? -v : v;
}

// jinc(q) = J1(2 pi q) / q, continuously extended by jinc(0) = pi.
// This is the unit-disk Fourier transform profile.
inline double jinc(double q) {
  double aq = std::abs(q);
  if (aq < 1e-8) {
    // series: J1(z)/z*2pi = pi (1 - z^2/8 + ...), z = 2 pi q
    double z = 2.0 * 3.14159265358979323846 * aq;
    return 3.14159265358979323846 * (1.0 - z * z / 8.0);
  }
  return bessel_j1(2.0 * 3.14159265358979323846 * aq) / aq;
}

}  // namespace offgrid

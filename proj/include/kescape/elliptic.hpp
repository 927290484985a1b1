#pragma once

// Complete elliptic integrals and Jacobi elliptic functions.
//
// Every function here takes the *parameter* m = k^2, not the modulus k.
// sn(u|m) has period 4K(m) and dn(u|m) has period 2K(m). Note that
// std::comp_ellint_1 and Boost.Math take the modulus k instead.

namespace kescape::elliptic {

/// K(m) by the arithmetic-geometric mean. Requires 0 <= m < 1.
double complete_k(double m);

/// E(m) by the arithmetic-geometric mean. Requires 0 <= m <= 1; E(1) = 1.
double complete_e(double m);

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

/// sn, cn and dn at real argument u, by the descending Landen (AGM) sequence.
/// m == 0 and m == 1 use the circular and hyperbolic closed forms.
JacobiTriple jacobi(double u, double m);

}  // namespace kescape::elliptic

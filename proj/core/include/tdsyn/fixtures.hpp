#pragma once

#include "tdsyn/synthesis.hpp"

namespace tdsyn::fixtures {

/// Bundled benchmark plant with tr(A) = 0 and invertible B (state feedback).
inline DelaySystem example1() {
  Mat a(2, 2), b(2, 2);
  a << 0.2, 0.0, 0.2, -0.2;
  b << -1.0, 0.0, -1.0, -1.0;
  return DelaySystem::state_feedback(a, b);
}

/// The stabilizing starting gain used with example1 (A + B K0 = diag(-1,-2)).
inline Mat example1_k0() {
  Mat k(2, 2);
  k << 1.2, 0.0, -1.0, 1.8;
  return k;
}

/// Reference gains synthesized for example1 at orders 1..3, used as analysis
/// fixtures for the certified and spectral delay-margin columns.
inline Mat example1_reference_gain(int order) {
  Mat k(2, 2);
  switch (order) {
    case 1: k << 0.1979, 0.0057, -0.1195, 0.0383; break;
    case 2: k << 0.2011, 0.0001, -0.1463, 0.0915; break;
    case 3: k << 0.2005, 0.0, -0.1375, 0.0744; break;
    default: throw Error(Errc::DimensionMismatch, "reference gains exist for orders 1..3");
  }
  return k;
}

/// Bundled benchmark plant with a single-column B.
inline DelaySystem example2() {
  Mat a(2, 2), b(2, 1);
  a << 0.0, 1.0, -2.0, -0.1;
  b << 0.0, 1.0;
  return DelaySystem::state_feedback(a, b);
}

/// Starting gain for example2.
inline Mat example2_k0() {
  Mat k(1, 2);
  k << -1.0, -5.0;
  return k;
}

}  // namespace tdsyn::fixtures

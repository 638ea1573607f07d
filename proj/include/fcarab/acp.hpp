#pragma once

namespace fcarab {

/// Array control parameters: the two ring radii, in millimetres.
struct ACPState {
  double r1 = 0.0;      // true
  double r2 = 0.0;
  double r1_bar = 0.0;  // presumed
  double r2_bar = 0.0;
  double l1 = 0.0;      // maximum absolute error
  double l2 = 0.0;

  /// Presumed state with zero error; the true radii equal the presumed ones.
  static ACPState presumed(double r1_bar, double r2_bar, double l1, double l2) {
    return {r1_bar, r2_bar, r1_bar, r2_bar, l1, l2};
  }

  double dx() const { return r1 - r1_bar; }
  double dy() const { return r2 - r2_bar; }

  /// Throws ConfigError when the bounds are negative or the true radii
  /// violate them.
  void validate() const;
};

}  // namespace fcarab

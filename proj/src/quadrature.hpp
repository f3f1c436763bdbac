#pragma once

// Adaptive Simpson integration used for profile integrals.

#include <cmath>
#include <string>

#include "qball/error.hpp"

namespace qball::detail {

template <class F>
class AdaptiveSimpson {
 public:
  AdaptiveSimpson(F f, double abs_tol, int max_depth)
      : f_(f), tol_(abs_tol), max_depth_(max_depth) {}

  double integrate(double a, double b) {
    const double m = 0.5 * (a + b);
    const double fa = f_(a), fm = f_(m), fb = f_(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double result = refine(a, b, fa, fm, fb, whole, tol_, max_depth_);
    if (failed_) {
      throw Error(ErrorKind::Numerical,
                  "adaptive Simpson did not converge; achieved error estimate " +
                      std::to_string(worst_) + " vs tolerance " +
                      std::to_string(tol_));
    }
    return result;
  }

 private:
  double refine(double a, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f_(lm), frm = f_(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    if (depth <= 0) {
      failed_ = true;
      worst_ = std::max(worst_, std::abs(delta) / 15.0);
      return left + right + delta / 15.0;
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  F f_;
  double tol_;
  int max_depth_;
  bool failed_ = false;
  double worst_ = 0.0;
};

template <class F>
double adaptive_simpson(F f, double a, double b, double abs_tol,
                        int max_depth = 48) {
  return AdaptiveSimpson<F>(f, abs_tol, max_depth).integrate(a, b);
}

/// Running sum with Neumaier compensation; order of additions is the
/// caller's loop order, so results are reproducible.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qball::detail

#include "epsim/quadrature.hpp"

namespace epsim {
namespace {

struct Simpson {
  const std::function<double(double)>& f;
  int max_depth;
  bool exhausted = false;

  // fm is f at the midpoint of [a, b]; whole is the Simpson estimate on [a, b].
  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m));
    const double frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= 2 && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth) {
      exhausted = true;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  Simpson s{f, max_depth};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // depth >= 2 forces two levels of splitting before the error test is trusted.
  const double result = s.recurse(a, b, fa, fm, fb, whole, tol, 0);
  if (s.exhausted) throw NumericError("adaptive Simpson: tolerance not met at maximum depth");
  return result;
}

}  // namespace epsim

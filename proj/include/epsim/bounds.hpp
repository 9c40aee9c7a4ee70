#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "epsim/function_class.hpp"

namespace epsim {

using Rational = boost::rational<long long>;

std::string to_string(const Rational& q);
/// Parses "p/q", "p" or a finite decimal such as "0.75".
Rational parse_rational(const std::string& s);

/// Every unnamed universal constant. All default to 1 except A5, which the
/// budget requires to be at most 1/2.
struct BoundConstants {
  double A = 1.0;
  double A1 = 1.0;
  double A2 = 1.0;
  double A3 = 1.0;
  double A4 = 1.0;
  double A5 = 0.5;
  double C1 = 1.0;
  double C2 = 1.0;
  double C = 1.0;
  double C1p = 1.0;
  double D = 1.0;
  double B = 1.0;

  /// Throws DomainError unless all are positive and A5 <= 1/2.
  void validate() const;
  [[nodiscard]] std::vector<std::pair<std::string, double>> items() const;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

struct BoundReport {
  std::string name;
  NamedValues inputs;
  NamedValues constants;
  NamedValues terms;
  double rhs = 0.0;
  std::optional<double> threshold;
  bool preconditions_ok = true;
  std::string failing_condition;

  [[nodiscard]] bool vacuous() const { return rhs >= 1.0; }
};

/// 2 exp(-A1 t^2 / sigma^2) + 2 exp(-A1 t sqrt(n) / M); threshold A(sym_moment + t).
BoundReport talagrand_tail(double t, double n, double sigma2, double envelope_m, double sym_moment,
                           const BoundConstants& c = {});

/// A2 sqrt(v sigma^2 log(beta v 1/sigma)) with its four preconditions.
/// `class_sup` is the sup-norm bound of the class being controlled.
BoundReport vc_moment_bound(double n, double sigma, double beta, double v, double cover_c,
                            double class_sup, const BoundConstants& c = {});

/// A3 (J + sqrt(n) 1{M > sqrt(n) sigma^{1+r0} / (sqrt2 b0)}), J = sqrt2 b0 sigma^{1-r0}/(1-r0).
BoundReport br_moment_bound(double sigma, double b0, double r0, double n, double envelope_m,
                            const BoundConstants& c = {});

/// 2 exp(-t^2 / (2 sigma_T^2)).
double borell_tail(double t, double sigma_t);
BoundReport borell_report(double t, double sigma_t);

struct RateVc {
  Rational tau1;
  Rational tau2;
};
/// tau1 = 1/(2 + 5 nu0), tau2 = (4 + 5 nu0)/(4 + 10 nu0).
RateVc rate_vc(const Rational& nu0);
/// (alpha tau1 - 1/2)/(1 + alpha) on 1/(2 tau1) < alpha < 1/tau1.
Rational rate_thm1(const Rational& alpha, const Rational& tau1);
/// kappa = (1 - r0)/(2 r0), 0 < r0 < 1.
Rational rate_br(const Rational& r0);
struct RateThm2 {
  Rational theta;
  Rational tau;
};
/// theta = kappa(1/2 - kappa), tau = theta/(1 - kappa), 0 < kappa < 1/2.
RateThm2 rate_thm2(const Rational& kappa);

/// Inputs of the three-term coupling budget.
struct BudgetInputs {
  double epsilon = 0.5;
  double delta = 1.0;
  double t = 1.0;
  double n = 100.0;
  double envelope_m = 1.0;
  EntropyRegime regime;
  std::optional<double> n_eps;  // grid cardinality; regime bound when absent
  std::optional<double> mu_n;   // symmetrized modulus; regime moment bound when absent
  std::optional<double> mu;     // Gaussian modulus; regime moment bound when absent
};

/// Regime bound on the grid cardinality: ceil(c0 M^nu0 eps^-nu0) or
/// ceil(exp(2^{2 r0} b0^2 / eps^{2 r0})).
double grid_cardinality_bound(double epsilon, double envelope_m, const EntropyRegime& regime);

/// Zaitsev term + 2 exp(-A1 sqrt(n) t / M) + 4 exp(-A5 t^2 / eps^2), and the
/// threshold A mu_n + mu + delta + (A + 1) t.
BoundReport error_budget(const BudgetInputs& in, const BoundConstants& c = {});

/// 18 exp(-C1' t^2 / sigma^2) + 18 exp(-C1' t sqrt(n) / M); threshold C sqrt(n)(B + t).
BoundReport combined_tail_empirical(double t, double n, double sigma_f2, double envelope_m,
                                    const BoundConstants& c = {});
/// 18 exp(-t^2 / (2 sigma^2)); threshold D sqrt(n)(B + t).
BoundReport combined_tail_gaussian(double t, double n, double sigma_f2, const BoundConstants& c = {});

/// sqrt(n) eps / (2 sqrt(1 + 2 nu0) sqrt(log(M v 1/eps))) > M, for 0 < eps < 1/e.
bool check_sample_size_condition(double n, double epsilon, double envelope_m, double nu0);

}  // namespace epsim

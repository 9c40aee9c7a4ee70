#include "epsim/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "epsim/bridge.hpp"
#include "epsim/coupling.hpp"
#include "epsim/errors.hpp"

namespace epsim {

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

Rational parse_rational(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
    const auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(s));
    const std::string frac = s.substr(dot + 1);
    if (frac.size() > 15) throw ConfigError("rational '" + s + "' has too many decimals");
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::string whole = s.substr(0, dot);
    const bool neg = !whole.empty() && whole[0] == '-';
    const long long w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
    const long long f = frac.empty() ? 0 : std::stoll(frac);
    return Rational(w * den + (neg ? -f : f), den);
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse rational '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("rational '" + s + "' out of range");
  } catch (const boost::bad_rational&) {
    throw ConfigError("rational '" + s + "' has a zero denominator");
  }
}

void BoundConstants::validate() const {
  for (const auto& [name, v] : items()) {
    if (!(v > 0.0)) throw DomainError("constant " + name + " must be positive");
  }
  if (A5 > 0.5) throw DomainError("constant A5 must be <= 1/2");
}

std::vector<std::pair<std::string, double>> BoundConstants::items() const {
  return {{"A", A},   {"A1", A1}, {"A2", A2}, {"A3", A3},   {"A4", A4}, {"A5", A5},
          {"C1", C1}, {"C2", C2}, {"C", C},   {"C1p", C1p}, {"D", D},   {"B", B}};
}

namespace {

void fail(BoundReport& r, const std::string& why) {
  if (r.preconditions_ok) r.failing_condition = why;
  r.preconditions_ok = false;
}

}  // namespace

BoundReport talagrand_tail(double t, double n, double sigma2, double envelope_m, double sym_moment,
                           const BoundConstants& c) {
  BoundReport r;
  r.name = "talagrand";
  r.inputs = {{"t", t}, {"n", n}, {"sigma2", sigma2}, {"M", envelope_m}, {"sym_moment", sym_moment}};
  r.constants = {{"A", c.A}, {"A1", c.A1}};
  if (!(t > 0.0)) fail(r, "t > 0");
  if (!(sigma2 > 0.0)) fail(r, "sigma2 > 0");
  const double t1 = 2.0 * std::exp(-c.A1 * t * t / sigma2);
  const double t2 = 2.0 * std::exp(-c.A1 * t * std::sqrt(n) / envelope_m);
  r.terms = {{"variance_term", t1}, {"range_term", t2}};
  r.rhs = t1 + t2;
  r.threshold = c.A * (sym_moment + t);
  return r;
}

BoundReport vc_moment_bound(double n, double sigma, double beta, double v, double cover_c,
                            double class_sup, const BoundConstants& c) {
  BoundReport r;
  r.name = "vc_moment";
  r.inputs = {{"n", n}, {"sigma", sigma}, {"beta", beta}, {"v", v}, {"c", cover_c}, {"class_sup", class_sup}};
  r.constants = {{"A2", c.A2}};
  const double lg = std::log(std::max(beta, 1.0 / sigma));
  r.rhs = c.A2 * std::sqrt(v * sigma * sigma * lg);
  if (!(class_sup <= beta)) fail(r, "envelope second moment <= beta^2");
  if (!(cover_c > 1.0)) fail(r, "covering constant c > 1");
  if (!(sigma <= 1.0 / (8.0 * cover_c))) fail(r, "sigma <= 1/(8c)");
  if (!(std::sqrt(n * sigma * sigma / lg) / (2.0 * std::sqrt(v + 1.0)) >= class_sup)) {
    fail(r, "sqrt(n sigma^2 / log(beta v 1/sigma)) / (2 sqrt(v+1)) >= class sup");
  }
  return r;
}

BoundReport br_moment_bound(double sigma, double b0, double r0, double n, double envelope_m,
                            const BoundConstants& c) {
  if (!(r0 > 0.0 && r0 < 1.0)) throw DomainError("br_moment_bound: r0 must be in (0,1)");
  BoundReport r;
  r.name = "br_moment";
  r.inputs = {{"sigma", sigma}, {"b0", b0}, {"r0", r0}, {"n", n}, {"M", envelope_m}};
  r.constants = {{"A3", c.A3}};
  if (!(sigma > 0.0 && sigma < 1.0)) fail(r, "0 < sigma < 1");
  const double j = std::sqrt(2.0) * b0 * std::pow(sigma, 1.0 - r0) / (1.0 - r0);
  const double a = std::pow(sigma, 1.0 + r0) / (std::sqrt(2.0) * b0);
  const double indicator = envelope_m > std::sqrt(n) * a ? std::sqrt(n) : 0.0;
  r.terms = {{"entropy_integral", j}, {"a_sigma", a}, {"truncation_term", indicator}};
  r.rhs = c.A3 * (j + indicator);
  return r;
}

double borell_tail(double t, double sigma_t) {
  if (!(t > 0.0) || !(sigma_t > 0.0)) throw DomainError("borell_tail: needs t > 0 and sigma_T > 0");
  return 2.0 * std::exp(-t * t / (2.0 * sigma_t * sigma_t));
}

BoundReport borell_report(double t, double sigma_t) {
  BoundReport r;
  r.name = "borell";
  r.inputs = {{"t", t}, {"sigma_T", sigma_t}};
  r.rhs = borell_tail(t, sigma_t);
  return r;
}

RateVc rate_vc(const Rational& nu0) {
  if (!(nu0 > Rational(0))) throw DomainError("rate_vc: nu0 must be positive");
  return {Rational(1) / (Rational(2) + Rational(5) * nu0),
          (Rational(4) + Rational(5) * nu0) / (Rational(4) + Rational(10) * nu0)};
}

Rational rate_thm1(const Rational& alpha, const Rational& tau1) {
  if (!(tau1 > Rational(0))) throw DomainError("rate_thm1: tau1 must be positive");
  if (!(alpha * tau1 > Rational(1, 2) && alpha * tau1 < Rational(1))) {
    throw DomainError("rate_thm1: alpha must satisfy 1/(2 tau1) < alpha < 1/tau1");
  }
  return (alpha * tau1 - Rational(1, 2)) / (Rational(1) + alpha);
}

Rational rate_br(const Rational& r0) {
  if (!(r0 > Rational(0) && r0 < Rational(1))) throw DomainError("rate_br: r0 must be in (0,1)");
  return (Rational(1) - r0) / (Rational(2) * r0);
}

RateThm2 rate_thm2(const Rational& kappa) {
  if (!(kappa > Rational(0) && kappa < Rational(1, 2))) {
    throw DomainError("rate_thm2: kappa must be in (0, 1/2)");
  }
  RateThm2 out;
  out.theta = kappa * (Rational(1, 2) - kappa);
  out.tau = kappa * (Rational(1, 2) - kappa) / (Rational(1) - kappa);
  if (out.tau != out.theta / (Rational(1) - kappa)) throw NumericError("rate_thm2: tau identity failed");
  return out;
}

double grid_cardinality_bound(double epsilon, double envelope_m, const EntropyRegime& regime) {
  if (regime.kind == EntropyRegime::Kind::VC) {
    return std::ceil(regime.c0 * std::pow(envelope_m, regime.nu0) * std::pow(epsilon, -regime.nu0));
  }
  return std::ceil(std::exp(std::pow(2.0, 2.0 * regime.r0) * regime.b0 * regime.b0 /
                            std::pow(epsilon, 2.0 * regime.r0)));
}

BoundReport error_budget(const BudgetInputs& in, const BoundConstants& c) {
  BoundReport r;
  r.name = "error_budget";
  const double n_eps = in.n_eps ? *in.n_eps : grid_cardinality_bound(in.epsilon, in.envelope_m, in.regime);
  r.inputs = {{"epsilon", in.epsilon}, {"delta", in.delta}, {"t", in.t}, {"n", in.n},
              {"M", in.envelope_m}, {"N_eps", n_eps}};
  r.constants = c.items();
  if (!(in.epsilon > 0.0 && in.epsilon < 1.0)) fail(r, "0 < epsilon < 1");
  if (!(in.delta > 0.0)) fail(r, "delta > 0");
  if (!(in.t > 0.0)) fail(r, "t > 0");
  const double zt = zaitsev_grid_tail(in.n, in.envelope_m, std::max(1.0, n_eps), in.delta, {c.C1, c.C2});
  const double t2 = 2.0 * std::exp(-c.A1 * std::sqrt(in.n) * in.t / in.envelope_m);
  const double t3 = 4.0 * std::exp(-c.A5 * in.t * in.t / (in.epsilon * in.epsilon));
  r.terms = {{"zaitsev", zt}, {"talagrand", t2}, {"gaussian", t3}};
  r.rhs = zt + t2 + t3;

  double mu_n = 0.0;
  double mu = 0.0;
  if (in.regime.kind == EntropyRegime::Kind::VC) {
    const double nu0 = in.regime.nu0;
    mu_n = c.A2 * in.epsilon * std::sqrt(2.0 * nu0 * std::log(std::max(in.envelope_m, 1.0 / in.epsilon)));
    mu = c.A4 * dudley_power(1.0, 2.0 * nu0, std::min(in.epsilon, 1.0)).value;
    if (!(in.epsilon < std::exp(-1.0))) {
      fail(r, "moment bounds need epsilon < 1/e");
    } else if (!check_sample_size_condition(in.n, in.epsilon, in.envelope_m, nu0)) {
      fail(r, "sample-size condition for the VC moment bound");
    }
  } else {
    mu_n = br_moment_bound(in.epsilon, in.regime.b0, in.regime.r0, in.n, in.envelope_m, c).rhs;
    mu = c.A4 * std::sqrt(2.0) * in.regime.b0 * std::pow(in.epsilon, 1.0 - in.regime.r0) / (1.0 - in.regime.r0);
  }
  if (in.mu_n) mu_n = *in.mu_n;
  if (in.mu) mu = *in.mu;
  r.terms.emplace_back("mu_n", mu_n);
  r.terms.emplace_back("mu", mu);
  r.threshold = c.A * mu_n + mu + in.delta + (c.A + 1.0) * in.t;
  return r;
}

BoundReport combined_tail_empirical(double t, double n, double sigma_f2, double envelope_m,
                                    const BoundConstants& c) {
  BoundReport r;
  r.name = "combined_tail_empirical";
  r.inputs = {{"t", t}, {"n", n}, {"sigma_F2", sigma_f2}, {"M", envelope_m}};
  r.constants = {{"C", c.C}, {"C1p", c.C1p}, {"B", c.B}};
  if (!(t > 0.0)) fail(r, "t > 0");
  const double a = 18.0 * std::exp(-c.C1p * t * t / sigma_f2);
  const double b = 18.0 * std::exp(-c.C1p * t * std::sqrt(n) / envelope_m);
  r.terms = {{"variance_term", a}, {"range_term", b}};
  r.rhs = a + b;
  r.threshold = c.C * std::sqrt(n) * (c.B + t);
  return r;
}

BoundReport combined_tail_gaussian(double t, double n, double sigma_f2, const BoundConstants& c) {
  BoundReport r;
  r.name = "combined_tail_gaussian";
  r.inputs = {{"t", t}, {"n", n}, {"sigma_F2", sigma_f2}};
  r.constants = {{"D", c.D}, {"B", c.B}};
  if (!(t > 0.0)) fail(r, "t > 0");
  r.rhs = 18.0 * std::exp(-t * t / (2.0 * sigma_f2));
  r.threshold = c.D * std::sqrt(n) * (c.B + t);
  return r;
}

bool check_sample_size_condition(double n, double epsilon, double envelope_m, double nu0) {
  if (!(epsilon > 0.0 && epsilon < std::exp(-1.0))) {
    throw DomainError("sample-size condition needs 0 < epsilon < 1/e");
  }
  const double lhs = std::sqrt(n) * epsilon /
                     (2.0 * std::sqrt(1.0 + 2.0 * nu0) * std::sqrt(std::log(std::max(envelope_m, 1.0 / epsilon))));
  return lhs > envelope_m;
}

}  // namespace epsim

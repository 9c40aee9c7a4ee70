#include "epsim/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "epsim/errors.hpp"

namespace epsim {

double zaitsev_bound(double n_dim, double b, double delta, const ZaitsevParams& params) {
  if (!(n_dim >= 1.0) || !(b > 0.0) || !(delta >= 0.0)) {
    throw DomainError("zaitsev_bound: needs N >= 1, B > 0, delta >= 0");
  }
  return params.c1 * n_dim * n_dim * std::exp(-params.c2 * delta / (n_dim * n_dim * b));
}

double zaitsev_grid_tail(double n, double envelope_m, double n_eps, double delta,
                         const ZaitsevParams& params) {
  if (!(n >= 1.0) || !(envelope_m > 0.0)) throw DomainError("zaitsev_grid_tail: needs n >= 1, M > 0");
  return zaitsev_bound(n_eps, envelope_m * std::sqrt(n_eps / n), delta, params);
}

double select_epsilon_vc(double n, double nu0) {
  if (!(n >= 3.0) || !(nu0 > 0.0)) throw DomainError("select_epsilon_vc: needs n >= 3 and nu0 > 0");
  return std::pow(std::log(n) / n, 1.0 / (2.0 + 5.0 * nu0));
}

BrEpsilon select_epsilon_br(double n, double b0, double r0, double cap) {
  if (!(n >= 3.0) || !(b0 > 0.0) || !(r0 > 0.0 && r0 < 1.0) || !(cap > 0.0 && cap < 1.0)) {
    throw DomainError("select_epsilon_br: needs n >= 3, b0 > 0, r0 in (0,1), cap in (0,1)");
  }
  BrEpsilon out;
  const double two_r = 2.0 * r0;
  out.uncapped = std::pow(10.0 * b0 * b0 * std::pow(2.0, two_r) / std::log(n), 1.0 / two_r);
  out.capped = out.uncapped >= cap;
  out.epsilon = out.capped ? cap : out.uncapped;
  out.induced = std::exp(-5.0 * std::pow(2.0, two_r) * b0 * b0 / (2.0 * std::pow(out.epsilon, two_r)));
  return out;
}

DeltaT select_delta_t(double epsilon, EntropyRegime::Kind regime, double gamma1, double gamma2,
                      std::optional<double> r0) {
  if (!(epsilon > 0.0)) throw DomainError("select_delta_t: epsilon must be positive");
  double scale = 0.0;
  if (regime == EntropyRegime::Kind::VC) {
    if (!(epsilon < 1.0)) throw DomainError("select_delta_t: VC regime needs epsilon < 1");
    scale = epsilon * std::sqrt(std::log(1.0 / epsilon));
  } else {
    if (!r0) throw DomainError("select_delta_t: BR regime needs r0");
    if (!(epsilon < 1.0)) throw DomainError("select_delta_t: BR regime needs epsilon < 1");
    scale = std::pow(epsilon, 1.0 - *r0);
  }
  return {gamma1 * scale, gamma2 * scale};
}

std::string to_string(CouplingMethod m) { return m == CouplingMethod::Quantile ? "quantile" : "transport"; }

CouplingMethod parse_coupling_method(const std::string& s) {
  if (s == "quantile") return CouplingMethod::Quantile;
  if (s == "transport" || s == "ot") return CouplingMethod::Transport;
  throw ConfigError("unknown coupling method '" + s + "'");
}

std::vector<double> quantile_cell_weights(const std::vector<double>& probabilities,
                                          const std::vector<std::size_t>& counts, std::size_t n,
                                          Rng& rng) {
  if (probabilities.size() != counts.size()) throw ShapeError("quantile coupling: counts and cells differ");
  std::vector<double> w(probabilities.size(), 0.0);
  std::size_t last = probabilities.size();
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] > 0.0) {
      last = j;
    } else if (counts[j] != 0) {
      throw NumericError("quantile coupling: sample point in a zero-probability cell");
    }
  }
  if (last == probabilities.size()) throw NumericError("quantile coupling: no cell has positive mass");
  const boost::math::normal_distribution<double> normal;
  double p_before = 0.0;
  double w_before = 0.0;
  std::size_t remaining = n;
  for (std::size_t j = 0; j <= last; ++j) {
    const double p = probabilities[j];
    if (p <= 0.0) continue;
    const double rest = 1.0 - p_before;
    if (j == last || !(rest > p)) {
      w[j] = -w_before;
    } else {
      const double q = std::clamp(p / rest, 0.0, 1.0);
      const auto c = static_cast<double>(counts[j]);
      const boost::math::binomial_distribution<double> bin(static_cast<double>(remaining), q);
      const double hi = boost::math::cdf(bin, c);
      const double lo = counts[j] == 0 ? 0.0 : boost::math::cdf(bin, c - 1.0);
      double u = lo + uniform01(rng) * (hi - lo);
      u = std::clamp(u, 1e-300, 1.0 - 1e-16);
      const double sd = std::sqrt(std::max(0.0, p * (rest - p) / rest));
      w[j] = -q * w_before + sd * boost::math::quantile(normal, u);
    }
    w_before += w[j];
    p_before += p;
    remaining -= counts[j];
  }
  return w;
}

GridCoupler::GridCoupler(const ClassModel& model, std::vector<Param> functions, CouplingMethod method,
                         std::size_t ot_batch, OtMethod ot_method)
    : model_(model), method_(method), ot_batch_(ot_batch), ot_method_(ot_method) {
  if (functions.empty()) throw DomainError("coupler: empty function list");
  means_ = model_.means(functions);
  cells_ = model_.cells(functions);
  if (method_ == CouplingMethod::Quantile && !cells_) {
    throw UnsupportedError("quantile coupling needs a cell partition; use the transport coupling");
  }
  if (method_ == CouplingMethod::Transport && ot_batch_ < 1) throw DomainError("coupler: OT batch must be >= 1");
  bridge_ = make_bridge(model_, std::move(functions));
}

std::vector<double> GridCoupler::y_sum(const SamplePath& sample) const {
  const auto& cls = model_.function_class();
  const std::size_t k = size();
  const double root_n = std::sqrt(static_cast<double>(sample.n));
  const double bound = cls.envelope() * std::sqrt(static_cast<double>(k) / static_cast<double>(sample.n));
  std::vector<double> s(k, 0.0);
  std::vector<double> yi(k);
  for (std::size_t i = 0; i < sample.n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      yi[j] = (cls.evaluate_unchecked(bridge_.params[j], sample.point(i)) - means_[j]) / root_n;
      sq += yi[j] * yi[j];
    }
    if (std::sqrt(sq) > bound * (1.0 + 1e-12)) {
      throw NumericError("Y-sum: summand norm exceeds M sqrt(N/n)");
    }
    for (std::size_t j = 0; j < k; ++j) s[j] += yi[j];
  }
  return s;
}

std::vector<double> GridCoupler::draw_y_sum(std::size_t n, Rng& rng, const SeedSpec& seed) const {
  if (!cells_) return y_sum(draw_sample(model_.distribution(), n, seed));
  // Multinomial cell counts by sequential binomials.
  const auto& p = cells_->probabilities();
  std::vector<std::size_t> counts(p.size(), 0);
  std::size_t remaining = n;
  double rest = 1.0;
  for (std::size_t j = 0; j < p.size() && remaining > 0; ++j) {
    if (p[j] <= 0.0) continue;
    const double q = std::clamp(p[j] / rest, 0.0, 1.0);
    const std::size_t c =
        q >= 1.0 ? remaining
                 : static_cast<std::size_t>(std::binomial_distribution<long long>(
                       static_cast<long long>(remaining), q)(rng));
    counts[j] = c;
    remaining -= c;
    rest -= p[j];
  }
  return empirical_process_cells(*cells_, counts, means_, n);
}

GridCoupler::Outcome GridCoupler::couple(const SamplePath& sample, const SeedSpec& seed) const {
  Outcome out;
  out.y = y_sum(sample);
  const std::size_t k = size();
  if (method_ == CouplingMethod::Quantile) {
    Rng rng = make_rng(seed.child(phase::kQuantile));
    const auto counts = cell_counts(*cells_, sample);
    const auto w = quantile_cell_weights(cells_->probabilities(), counts, sample.n, rng);
    const Eigen::VectorXd z = cells_->values() * Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    out.z.assign(z.data(), z.data() + z.size());
    return out;
  }
  const std::size_t m = ot_batch_;
  Eigen::MatrixXd source(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  Eigen::MatrixXd target(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) source(0, static_cast<Eigen::Index>(j)) = out.y[j];
  Rng src_rng = make_rng(seed.child(phase::kBatchSource));
  const SeedSpec src_seed = seed.child(phase::kBatchSource);
  for (std::size_t r = 1; r < m; ++r) {
    const auto y = draw_y_sum(sample.n, src_rng, src_seed.child(static_cast<std::uint32_t>(r)));
    for (std::size_t j = 0; j < k; ++j) source(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = y[j];
  }
  Rng tgt_rng = make_rng(seed.child(phase::kBatchTarget));
  std::vector<double> g(k);
  for (std::size_t r = 0; r < m; ++r) {
    sample_bridge(bridge_, tgt_rng, g);
    for (std::size_t j = 0; j < k; ++j) target(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = g[j];
  }
  const TransportPlan plan = ot_couple(std::move(source), std::move(target), ot_method_);
  const auto row = plan.target.row(static_cast<Eigen::Index>(plan.assignment[0]));
  out.z.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.z[j] = row(static_cast<Eigen::Index>(j));
  out.transport_cost = plan.cost;
  return out;
}

CouplingEngine::CouplingEngine(const ClassModel& model, double epsilon, const CouplingConfig& config,
                               const ExecPolicy& policy)
    : model_(model),
      epsilon_(epsilon),
      mesh_(model.function_class().verification_mesh(config.mesh_size)),
      grid_(build_grid(model, epsilon, mesh_, config.center_budget, policy)),
      coupler_(model, grid_.centers, config.method, config.ot_batch, config.ot_method) {
  extender_ = ConditionalExtender(grid_.gram, model_.cross_covariance(mesh_, grid_.centers), model_.gram(mesh_));
  mesh_cells_ = model_.cells(mesh_);
  mesh_means_ = model_.means(mesh_);
  nearest_center_.resize(mesh_.size());
  for (std::size_t f = 0; f < mesh_.size(); ++f) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < grid_.size(); ++h) {
      const double dist = model_.distance(mesh_[f], grid_.centers[h]);
      if (dist < best) {
        best = dist;
        nearest_center_[f] = h;
      }
    }
  }
}

std::vector<double> CouplingEngine::alpha_on_mesh(const SamplePath& sample) const {
  if (mesh_cells_) return empirical_process_cells(*mesh_cells_, cell_counts(*mesh_cells_, sample), mesh_means_, sample.n);
  return empirical_process(sample, model_, mesh_);
}

CouplingRealization CouplingEngine::construct(std::size_t n, const SeedSpec& seed) const {
  CouplingRealization r;
  r.n = n;
  r.epsilon = epsilon_;
  r.grid_size = grid_.size();
  r.seeds = seed;
  const SamplePath sample = draw_sample(model_.distribution(), n, seed.child(phase::kSample));
  auto outcome = coupler_.couple(sample, seed);
  r.y_sum = std::move(outcome.y);
  r.z_sum = std::move(outcome.z);
  r.transport_cost = outcome.transport_cost;
  r.sup_grid = sup_discrepancy(r.y_sum, r.z_sum);
  r.euclid_grid = euclid_discrepancy(r.y_sum, r.z_sum);

  const auto alpha = alpha_on_mesh(sample);
  std::vector<double> bridge(mesh_.size());
  Rng rng = make_rng(seed.child(phase::kExtension));
  extender_.extend(r.z_sum, rng, bridge);
  r.sup_mesh = sup_discrepancy(alpha, bridge);
  for (std::size_t f = 0; f < mesh_.size(); ++f) {
    const std::size_t h = nearest_center_[f];
    r.modulus_alpha = std::max(r.modulus_alpha, std::abs(alpha[f] - r.y_sum[h]));
    r.modulus_bridge = std::max(r.modulus_bridge, std::abs(bridge[f] - r.z_sum[h]));
  }
  return r;
}

CouplingRealization construct_joint(const ClassModel& model, std::size_t n, double epsilon,
                                    const CouplingConfig& config, const SeedSpec& seed) {
  return CouplingEngine(model, epsilon, config).construct(n, seed);
}

}  // namespace epsim

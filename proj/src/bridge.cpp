#include "epsim/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "epsim/errors.hpp"
#include "epsim/quadrature.hpp"
#include "epsim/stats.hpp"

namespace epsim {

Factorization factorize(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw ShapeError("factorize: matrix is not square");
  Factorization out;
  if (k.rows() == 0) return out;
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericError("factorize: matrix is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd lambda = es.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -kPsdTolerance) {
      throw NumericError("factorize: not a covariance (eigenvalue " + std::to_string(lambda(i)) + ")");
    }
    if (lambda(i) < 0.0) {
      out.repair = std::max(out.repair, -lambda(i));
      lambda(i) = 0.0;
    }
  }
  out.factor = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  return out;
}

BridgeModel bridge_from_covariance(const Eigen::MatrixXd& cov) {
  BridgeModel m;
  m.cov = cov;
  auto f = factorize(cov);
  m.factor = std::move(f.factor);
  m.repair = f.repair;
  return m;
}

BridgeModel make_bridge(const ClassModel& model, std::vector<Param> params) {
  BridgeModel m = bridge_from_covariance(model.gram(params));
  m.params = std::move(params);
  return m;
}

void sample_bridge(const BridgeModel& model, Rng& rng, std::span<double> out) {
  if (out.size() != model.size()) throw ShapeError("sample_bridge: output length mismatch");
  Eigen::VectorXd g(static_cast<Eigen::Index>(model.size()));
  fill_normal(rng, std::span<double>(g.data(), model.size()));
  Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = model.factor * g;
}

std::vector<double> sample_bridge(const BridgeModel& model, const SeedSpec& seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(model.size());
  sample_bridge(model, rng, out);
  return out;
}

ConditionalExtender::ConditionalExtender(const Eigen::MatrixXd& grid_cov, const Eigen::MatrixXd& cross,
                                         const Eigen::MatrixXd& marginal) {
  if (grid_cov.rows() != grid_cov.cols() || cross.cols() != grid_cov.rows() ||
      marginal.rows() != marginal.cols() || marginal.rows() != cross.rows()) {
    throw ShapeError("conditional extension: covariance blocks have inconsistent shapes");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (grid_cov + grid_cov.transpose()));
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > kPinvCutoff * top) inv(i) = 1.0 / lambda(i);
  }
  const Eigen::MatrixXd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  weights_ = cross * pinv;
  schur_ = marginal - weights_ * cross.transpose();
  schur_ = 0.5 * (schur_ + schur_.transpose());
  if (schur_.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(schur_);
  Eigen::VectorXd mu = ss.eigenvalues();
  const double mtop = std::max(0.0, mu.maxCoeff());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) < -kSchurTolerance) {
      throw NumericError("conditional extension: inconsistent covariance (Schur eigenvalue " +
                         std::to_string(mu(i)) + ")");
    }
    // Round-off sized eigenvalues are zeroed so duplicated grid members
    // extend exactly.
    if (mu(i) <= 1e-12 * std::max(1.0, mtop)) mu(i) = 0.0;
  }
  schur_factor_ = ss.eigenvectors() * mu.cwiseSqrt().asDiagonal();
}

void ConditionalExtender::extend(std::span<const double> grid_values, Rng& rng,
                                 std::span<double> out) const {
  if (grid_values.size() != grid_size() || out.size() != new_size()) {
    throw ShapeError("conditional extension: value lengths do not match the covariance blocks");
  }
  const Eigen::Map<const Eigen::VectorXd> g(grid_values.data(), static_cast<Eigen::Index>(grid_values.size()));
  Eigen::VectorXd z(static_cast<Eigen::Index>(new_size()));
  fill_normal(rng, std::span<double>(z.data(), new_size()));
  Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) =
      weights_ * g + schur_factor_ * z;
}

std::vector<double> conditional_extend(const Eigen::MatrixXd& grid_cov, const Eigen::MatrixXd& cross,
                                       const Eigen::MatrixXd& marginal,
                                       std::span<const double> grid_values, const SeedSpec& seed) {
  const ConditionalExtender ext(grid_cov, cross, marginal);
  Rng rng = make_rng(seed);
  std::vector<double> out(ext.new_size());
  ext.extend(grid_values, rng, out);
  return out;
}

Estimate mu_estimate(const ClassModel& model, const PairSet& pairs, std::size_t reps,
                     std::uint64_t master_seed, const ExecPolicy& policy) {
  Estimate est;
  if (pairs.empty()) return est;
  if (reps < 2) throw DomainError("mu_estimate: reps must be >= 2");
  const BridgeModel bridge = make_bridge(model, pairs.mesh);
  std::vector<double> vals(reps);
  for_each_index(reps, policy, [&](std::size_t r) {
    const auto g = sample_bridge(bridge, replication_seed(master_seed, r, phase::kGaussian));
    double best = 0.0;
    for (const auto& [i, j] : pairs.pairs) best = std::max(best, std::abs(g[i] - g[j]));
    vals[r] = best;
  });
  const MeanSe m = mean_se(vals);
  est.value = m.mean;
  est.se = m.se;
  return est;
}

namespace {

// int_0^sigma h(x) dx through x = sigma e^{-y^2}, truncated where the weight
// is negligible. The square keeps a sqrt-type zero of h at sigma smooth.
double log_substituted(const std::function<double(double)>& h, double sigma) {
  const auto g = [&](double y) {
    const double x = sigma * std::exp(-y * y);
    return 2.0 * y * x * h(x);
  };
  double total = 0.0;
  // Panels of equal w-length keep the adaptive rule from skipping the tail.
  for (int k = 0; k < 80; ++k) total += adaptive_simpson(g, std::sqrt(k), std::sqrt(k + 1.0), 1e-13 * sigma);
  return total;
}

}  // namespace

DudleyResult dudley_power(double c, double v, double sigma, DudleyMethod method) {
  if (!(c > 0.0) || !(v > 0.0)) throw DomainError("dudley: power law needs c > 0 and v > 0");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw DomainError("dudley: sigma must be in [0,1]");
  DudleyResult r;
  r.entropy_bound = std::numeric_limits<double>::quiet_NaN();
  if (sigma == 0.0) {
    r.method = "empty";
    return r;
  }
  if (method == DudleyMethod::Quadrature) {
    r.method = "quadrature";
    // The integrand vanishes beyond c^{1/v}.
    const double upper = std::min(sigma, std::pow(c, 1.0 / v));
    r.value = log_substituted(
        [&](double x) { return std::sqrt(std::max(0.0, std::log(c) + v * std::log(1.0 / x))); }, upper);
    return r;
  }
  // log N(x) = v log(a/x) with a = c^{1/v}; vanishes beyond a.
  const double a = std::pow(c, 1.0 / v);
  const double u = std::min(sigma, a) / a;
  const double l = std::log(1.0 / u);
  r.method = "closed-form";
  r.value = a * std::sqrt(v) * (u * std::sqrt(l) + 0.5 * std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(l)));
  return r;
}

DudleyResult dudley_exp(double b, double r, double sigma, DudleyMethod method) {
  if (!(r < 1.0)) throw NumericError("dudley: exp-law entropy integral diverges for r >= 1");
  if (!(b > 0.0) || !(r > 0.0)) throw DomainError("dudley: exp law needs b > 0 and r > 0");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw DomainError("dudley: sigma must be in [0,1]");
  DudleyResult out;
  out.entropy_bound = std::sqrt(2.0) * b * std::pow(sigma, 1.0 - r) / (1.0 - r);
  if (sigma == 0.0) {
    out.method = "empty";
    return out;
  }
  if (method == DudleyMethod::Quadrature) {
    out.method = "quadrature";
    out.value = log_substituted([&](double x) { return b * std::pow(x, -r); }, sigma);
  } else {
    out.method = "closed-form";
    out.value = b * std::pow(sigma, 1.0 - r) / (1.0 - r);
  }
  return out;
}

std::string covariance_csv(const Eigen::MatrixXd& k) {
  std::string s;
  char buf[64];
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", k(i, j));
      if (j > 0) s += ',';
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace epsim

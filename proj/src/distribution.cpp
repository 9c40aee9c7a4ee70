#include "epsim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "epsim/errors.hpp"

namespace epsim {

Distribution Distribution::uniform() { return Distribution{}; }

Distribution Distribution::product_uniform(int dim) {
  if (dim < 1) throw DomainError("product_uniform: dimension must be >= 1");
  Distribution d;
  d.kind_ = DistKind::ProductUniform;
  d.dim_ = dim;
  return d;
}

Distribution Distribution::discrete(int dim, std::vector<double> atoms,
                                    std::vector<double> weights) {
  if (dim < 1) throw DomainError("discrete: dimension must be >= 1");
  if (weights.empty()) throw DomainError("discrete: at least one atom required");
  if (atoms.size() != weights.size() * static_cast<std::size_t>(dim)) {
    throw ShapeError("discrete: atoms must hold dim values per weight");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("discrete: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("discrete: weights must sum to 1");
  for (double x : atoms) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("discrete: atoms must lie in [0,1]^d");
  }
  Distribution d;
  d.kind_ = DistKind::Discrete;
  d.dim_ = dim;
  d.atoms_ = std::move(atoms);
  d.weights_ = std::move(weights);
  d.cumulative_.resize(d.weights_.size());
  std::partial_sum(d.weights_.begin(), d.weights_.end(), d.cumulative_.begin());
  return d;
}

Distribution Distribution::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta: shape parameters must be positive");
  Distribution d;
  d.kind_ = DistKind::Beta;
  d.a_ = a;
  d.b_ = b;
  return d;
}

bool Distribution::is_continuous_1d() const {
  return dim_ == 1 && kind_ != DistKind::Discrete;
}

PointView Distribution::atom(std::size_t i) const {
  return PointView(atoms_.data() + i * static_cast<std::size_t>(dim_),
                   static_cast<std::size_t>(dim_));
}

double Distribution::cdf(double x) const {
  if (dim_ != 1) throw UnsupportedError("cdf requires a one-dimensional law");
  switch (kind_) {
    case DistKind::Uniform:
    case DistKind::ProductUniform:
      return std::clamp(x, 0.0, 1.0);
    case DistKind::Beta:
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return boost::math::ibeta(a_, b_, x);
    case DistKind::Discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (atoms_[i] <= x) s += weights_[i];
      }
      return s;
    }
  }
  return 0.0;
}

double Distribution::atom_mass(double x) const {
  if (kind_ != DistKind::Discrete) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (atoms_[i] == x) s += weights_[i];
  }
  return s;
}

double Distribution::prob_closed(double lo, double hi) const {
  if (hi < lo) return 0.0;
  return cdf(hi) - cdf(lo) + atom_mass(lo);
}

double Distribution::partial_moment(int k, double lo, double hi) const {
  if (!is_continuous_1d()) throw UnsupportedError("partial_moment requires a continuous 1-D law");
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (hi <= lo) return 0.0;
  if (kind_ != DistKind::Beta) {
    const int p = k + 1;
    return (std::pow(hi, p) - std::pow(lo, p)) / p;
  }
  // x^k Beta(a,b) density = E[X^k] * Beta(a+k, b) density.
  double scale = 1.0;
  for (int j = 0; j < k; ++j) scale *= (a_ + j) / (a_ + b_ + j);
  const double ak = a_ + k;
  auto F = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(ak, b_, x);
  };
  return scale * (F(hi) - F(lo));
}

void Distribution::draw(Rng& rng, std::span<double> out) const {
  switch (kind_) {
    case DistKind::Uniform:
    case DistKind::ProductUniform:
      for (double& v : out) v = uniform01(rng);
      return;
    case DistKind::Beta: {
      std::gamma_distribution<double> ga(a_, 1.0);
      std::gamma_distribution<double> gb(b_, 1.0);
      const double x = ga(rng);
      const double y = gb(rng);
      out[0] = x / (x + y);
      return;
    }
    case DistKind::Discrete: {
      const double u = uniform01(rng) * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      auto idx = static_cast<std::size_t>(it - cumulative_.begin());
      idx = std::min(idx, weights_.size() - 1);
      while (weights_[idx] == 0.0 && idx + 1 < weights_.size()) ++idx;
      const auto p = atom(idx);
      std::copy(p.begin(), p.end(), out.begin());
      return;
    }
  }
}

std::string Distribution::id() const {
  std::ostringstream os;
  switch (kind_) {
    case DistKind::Uniform:
      os << "uniform";
      break;
    case DistKind::ProductUniform:
      os << "product-uniform(" << dim_ << ")";
      break;
    case DistKind::Beta:
      os << "beta(" << a_ << "," << b_ << ")";
      break;
    case DistKind::Discrete:
      os << "discrete(" << weights_.size() << " atoms)";
      break;
  }
  return os.str();
}

}  // namespace epsim

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epsim/rng.hpp"

namespace epsim {

using PointView = std::span<const double>;

enum class DistKind { Uniform, ProductUniform, Discrete, Beta };

/// A sampling law P on [0,1]^d.
class Distribution {
 public:
  static Distribution uniform();
  static Distribution product_uniform(int dim);
  /// Atoms are rows of a flat row-major array of `dim`-vectors.
  static Distribution discrete(int dim, std::vector<double> atoms, std::vector<double> weights);
  static Distribution beta(double a, double b);

  [[nodiscard]] DistKind kind() const { return kind_; }
  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] bool is_discrete() const { return kind_ == DistKind::Discrete; }
  /// Continuous law on [0,1] (uniform, beta, or product-uniform with d = 1).
  [[nodiscard]] bool is_continuous_1d() const;
  [[nodiscard]] bool is_uniform_product() const {
    return kind_ == DistKind::Uniform || kind_ == DistKind::ProductUniform;
  }

  [[nodiscard]] std::size_t atom_count() const { return weights_.size(); }
  [[nodiscard]] PointView atom(std::size_t i) const;
  [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }
  [[nodiscard]] double beta_a() const { return a_; }
  [[nodiscard]] double beta_b() const { return b_; }

  /// P(X <= x) for one-dimensional laws.
  [[nodiscard]] double cdf(double x) const;
  /// P(lo <= X <= hi) for one-dimensional laws.
  [[nodiscard]] double prob_closed(double lo, double hi) const;
  /// P(X = x) for one-dimensional laws (zero unless discrete).
  [[nodiscard]] double atom_mass(double x) const;
  /// E[X^k 1{lo < X <= hi}] for k in {0,1,2}, one-dimensional continuous laws.
  [[nodiscard]] double partial_moment(int k, double lo, double hi) const;

  /// Draws one point into `out` (length dimension()).
  void draw(Rng& rng, std::span<double> out) const;

  /// Short identifier such as "uniform", "beta(2,5)".
  [[nodiscard]] std::string id() const;

 private:
  DistKind kind_ = DistKind::Uniform;
  int dim_ = 1;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double a_ = 1.0;
  double b_ = 1.0;
};

}  // namespace epsim

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epsim/distribution.hpp"
#include "epsim/parallel.hpp"

namespace epsim {

/// Parameter of one class member. Layout depends on the class kind:
/// intervals {theta}; rectangles {a1, b1, ..., ad, bd}; Holder knot values;
/// finite list {index}.
struct Param {
  std::vector<double> values;

  Param() = default;
  Param(std::initializer_list<double> v) : values(v) {}
  explicit Param(std::vector<double> v) : values(std::move(v)) {}

  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  [[nodiscard]] std::size_t size() const { return values.size(); }
  friend bool operator==(const Param&, const Param&) = default;
  friend auto operator<=>(const Param&, const Param&) = default;
};

enum class ClassKind { Intervals, Rectangles, Holder, FiniteList };

/// f(x) = inside for lo <= x <= hi, outside elsewhere. A constant is
/// inside == outside; an interval indicator is (a, b, 1, 0).
struct StepFunction {
  double lo = 0.0;
  double hi = 1.0;
  double inside = 1.0;
  double outside = 0.0;
  std::string description;

  [[nodiscard]] double operator()(double x) const { return (x >= lo && x <= hi) ? inside : outside; }
  [[nodiscard]] bool same_function(const StepFunction& o) const {
    return lo == o.lo && hi == o.hi && inside == o.inside && outside == o.outside;
  }
};

/// Declared entropy regime: (VC) N <= c0 eps^-nu0 or (BR) log N_[] <= b0^2 eps^-2r0.
struct EntropyRegime {
  enum class Kind { VC, BR };
  Kind kind = Kind::VC;
  double c0 = 1.0;
  double nu0 = 1.0;
  double b0 = 1.0;
  double r0 = 0.75;
};

/// A parametric family of functions bounded by M/2 in sup norm.
class FunctionClass {
 public:
  /// f_theta(x) = 1{x <= theta}, theta in [0,1].
  static FunctionClass intervals(double envelope_m = 2.0);
  /// f(x) = 1{a_j <= x_j <= b_j for all j} on [0,1]^dim.
  static FunctionClass rectangles(int dim, double envelope_m = 2.0);
  /// Piecewise-linear interpolants on 2^level + 1 dyadic knots with
  /// |v_i - v_j| <= radius |t_i - t_j|^exponent and |v_i| <= M/2.
  static FunctionClass holder(double exponent, double radius, int knot_level, double envelope_m);
  static FunctionClass finite_list(std::vector<StepFunction> entries, double envelope_m);

  [[nodiscard]] ClassKind kind() const { return kind_; }
  [[nodiscard]] int domain_dimension() const { return dim_; }
  [[nodiscard]] double envelope() const { return m_; }
  [[nodiscard]] const EntropyRegime& regime() const { return regime_; }
  [[nodiscard]] FunctionClass with_regime(EntropyRegime r) const;

  [[nodiscard]] double holder_exponent() const { return exponent_; }
  [[nodiscard]] double holder_radius() const { return radius_; }
  [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
  [[nodiscard]] const std::vector<StepFunction>& entries() const { return entries_; }

  /// Throws DomainError when `theta` is not a member parameter.
  void validate(const Param& theta) const;
  /// Throws DomainError when `x` is outside [0,1]^d.
  void validate_point(PointView x) const;

  /// f_theta(x) with parameter and point checks.
  [[nodiscard]] double evaluate(const Param& theta, PointView x) const;
  [[nodiscard]] double evaluate(const Param& theta, double x) const {
    return evaluate(theta, PointView(&x, 1));
  }
  /// f_theta(x) without checks; callers guarantee membership.
  [[nodiscard]] double evaluate_unchecked(const Param& theta, PointView x) const;

  /// Deterministic parameter mesh used to make "cover" decidable. The
  /// returned size is `size` for intervals and Holder balls, the full
  /// product grid for rectangles, and the whole list for finite lists.
  [[nodiscard]] std::vector<Param> verification_mesh(std::size_t size) const;

  /// Holder member clamp(a |t - c|^s + b, -M/2, M/2) sampled on the knots.
  [[nodiscard]] Param holder_profile(double a, double c, double b) const;

  [[nodiscard]] std::string describe() const;

 private:
  ClassKind kind_ = ClassKind::Intervals;
  int dim_ = 1;
  double m_ = 2.0;
  double exponent_ = 1.0;
  double radius_ = 1.0;
  std::vector<double> knots_;
  std::vector<StepFunction> entries_;
  EntropyRegime regime_;
};

/// Partition of the sample space into cells on which every function of a
/// fixed finite set is constant. values(k, j) is function k on cell j.
class CellPartition {
 public:
  [[nodiscard]] std::size_t cell_count() const { return prob_.size(); }
  [[nodiscard]] const std::vector<double>& probabilities() const { return prob_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
  [[nodiscard]] std::size_t locate(PointView x) const;

 private:
  friend class ClassModel;

  struct Line {
    std::vector<double> breaks;
    std::vector<std::size_t> region_cell;  // 2 * breaks.size() + 1 regions
    [[nodiscard]] std::size_t locate(double x) const;
  };

  enum class Mode { Atoms, Line, Product };
  Mode mode_ = Mode::Line;
  std::vector<double> prob_;
  Eigen::MatrixXd values_;
  std::map<std::vector<double>, std::size_t> atom_cells_;
  std::vector<Line> lines_;
  std::vector<std::size_t> strides_;
};

/// A function class bound to a sampling law P: means, inner products,
/// d_P distances and Gram matrices, all in closed form.
class ClassModel {
 public:
  /// Throws UnsupportedError for combinations without a moment rule
  /// (e.g. Holder balls or intervals on a multi-dimensional P).
  ClassModel(FunctionClass cls, Distribution dist);

  [[nodiscard]] const FunctionClass& function_class() const { return cls_; }
  [[nodiscard]] const Distribution& distribution() const { return dist_; }

  /// E f_theta(X).
  [[nodiscard]] double mean(const Param& theta) const;
  /// E f(X) h(X).
  [[nodiscard]] double inner(const Param& f, const Param& h) const;
  /// E (f(X) - h(X))^2.
  [[nodiscard]] double sqdist(const Param& f, const Param& h) const;
  /// d_P(f, h).
  [[nodiscard]] double distance(const Param& f, const Param& h) const;
  /// cov(G(f), G(h)) = E fh - Ef Eh.
  [[nodiscard]] double covariance(const Param& f, const Param& h) const;
  [[nodiscard]] double variance(const Param& f) const { return covariance(f, f); }

  [[nodiscard]] std::vector<double> means(const std::vector<Param>& params) const;
  [[nodiscard]] Eigen::MatrixXd gram(const std::vector<Param>& params) const;
  [[nodiscard]] Eigen::MatrixXd cross_covariance(const std::vector<Param>& rows,
                                                 const std::vector<Param>& cols) const;
  /// Symmetric matrix of d_P distances; rows run in parallel under `policy`.
  [[nodiscard]] Eigen::MatrixXd distance_matrix(const std::vector<Param>& params,
                                                const ExecPolicy& policy = {}) const;

  /// Cell partition for `functions`, when one exists: always for discrete
  /// P, for indicator and step classes under continuous P. Holder balls
  /// under continuous P have none.
  [[nodiscard]] std::optional<CellPartition> cells(const std::vector<Param>& functions) const;

 private:
  struct Linear {
    double alpha;
    double beta;
  };
  [[nodiscard]] double holder_inner(const Param& f, const Param& g, double sign) const;
  [[nodiscard]] double atom_sum(const Param& f, const Param* g, double sign) const;
  [[nodiscard]] double step_prob(const StepFunction& s) const;
  [[nodiscard]] double step_overlap(const StepFunction& s, const StepFunction& t) const;
  [[nodiscard]] const StepFunction& entry(const Param& p) const;

  FunctionClass cls_;
  Distribution dist_;
  // Per Holder segment: E[X^k 1{segment}] for k = 0, 1, 2.
  std::vector<double> seg_m0_, seg_m1_, seg_m2_;
};

}  // namespace epsim

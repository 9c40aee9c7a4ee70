#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace epsim {

enum class OtMethod { Exact, Greedy };
enum class Norm { Sup, Euclid };

inline constexpr std::size_t kExactOtLimit = 512;

/// A bijective matching of source rows to target rows.
/// assignment[i] is the target row matched to source row i.
struct TransportPlan {
  Eigen::MatrixXd source;
  Eigen::MatrixXd target;
  std::vector<std::size_t> assignment;
  double cost = 0.0;  // mean squared Euclidean distance over matched pairs

  [[nodiscard]] std::size_t size() const { return assignment.size(); }
};

/// Exact: minimum total squared-Euclidean assignment (m <= 512).
/// Greedy: nearest-available matching improved by pairwise swaps.
TransportPlan ot_couple(Eigen::MatrixXd source, Eigen::MatrixXd target, OtMethod method);

/// Minimum-cost assignment for a square cost matrix (shortest augmenting paths).
std::vector<std::size_t> solve_assignment(const Eigen::MatrixXd& cost);

/// Fraction of matched pairs whose difference norm exceeds delta.
double coupling_tail(const TransportPlan& plan, double delta, Norm norm);

/// Difference norms of all matched pairs, in source order.
std::vector<double> matched_distances(const TransportPlan& plan, Norm norm);

}  // namespace epsim

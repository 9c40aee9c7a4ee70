#include "epsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epsim/errors.hpp"

namespace epsim {

std::vector<std::size_t> solve_assignment(const Eigen::MatrixXd& cost) {
  const auto m = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw ShapeError("assignment: cost matrix is not square");
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (columns); p[j] is the row matched to column j,
  // with 1-based indices and column 0 as the augmentation root.
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= m; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(m);
  for (std::size_t j = 1; j <= m; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

namespace {

Eigen::MatrixXd squared_costs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) c(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return c;
}

std::vector<std::size_t> greedy_assignment(const Eigen::MatrixXd& c) {
  const auto m = static_cast<std::size_t>(c.rows());
  std::vector<std::size_t> a(m);
  std::vector<char> taken(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (taken[j]) continue;
      if (best == m || c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <
                           c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best))) {
        best = j;
      }
    }
    a[i] = best;
    taken[best] = 1;
  }
  // Pairwise swap improvement until a full pass finds nothing.
  const auto at = [&](std::size_t i, std::size_t j) {
    return c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = i + 1; k < m; ++k) {
        const double before = at(i, a[i]) + at(k, a[k]);
        const double after = at(i, a[k]) + at(k, a[i]);
        if (after < before - 1e-15 * std::max(1.0, before)) {
          std::swap(a[i], a[k]);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return a;
}

}  // namespace

TransportPlan ot_couple(Eigen::MatrixXd source, Eigen::MatrixXd target, OtMethod method) {
  if (source.rows() != target.rows() || source.cols() != target.cols()) {
    throw ShapeError("ot_couple: source and target batches differ in shape");
  }
  const auto m = static_cast<std::size_t>(source.rows());
  if (method == OtMethod::Exact && m > kExactOtLimit) {
    throw CapacityError("ot_couple: exact assignment limited to 512 points");
  }
  TransportPlan plan;
  const Eigen::MatrixXd c = squared_costs(source, target);
  plan.assignment = method == OtMethod::Exact ? solve_assignment(c) : greedy_assignment(c);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    total += (source.row(static_cast<Eigen::Index>(i)) -
              target.row(static_cast<Eigen::Index>(plan.assignment[i]))).squaredNorm();
  }
  plan.cost = m > 0 ? total / static_cast<double>(m) : 0.0;
  plan.source = std::move(source);
  plan.target = std::move(target);
  return plan;
}

std::vector<double> matched_distances(const TransportPlan& plan, Norm norm) {
  std::vector<double> d(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Eigen::RowVectorXd diff = plan.source.row(static_cast<Eigen::Index>(i)) -
                                    plan.target.row(static_cast<Eigen::Index>(plan.assignment[i]));
    d[i] = norm == Norm::Sup ? diff.cwiseAbs().maxCoeff() : diff.norm();
  }
  return d;
}

double coupling_tail(const TransportPlan& plan, double delta, Norm norm) {
  if (plan.size() == 0) return 0.0;
  std::size_t count = 0;
  for (double d : matched_distances(plan, norm)) {
    if (d > delta) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(plan.size());
}

}  // namespace epsim

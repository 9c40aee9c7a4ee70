#include "epsim/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "epsim/errors.hpp"
#include "epsim/stats.hpp"

namespace epsim {
namespace {

using Index = Eigen::Index;

std::vector<std::size_t> anchored_greedy(const Eigen::MatrixXd& d, double eps, std::size_t budget) {
  const auto s = static_cast<std::size_t>(d.rows());
  std::vector<char> covered(s, 0);
  std::vector<std::size_t> centers;
  for (std::size_t p = 0; p < s; ++p) {
    if (covered[p]) continue;
    std::size_t best = p;
    long best_count = -1;
    for (std::size_t c = 0; c < s; ++c) {
      if (!(d(static_cast<Index>(p), static_cast<Index>(c)) < eps)) continue;
      long count = 0;
      for (std::size_t q = 0; q < s; ++q) {
        if (!covered[q] && d(static_cast<Index>(c), static_cast<Index>(q)) < eps) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best = c;
      }
    }
    centers.push_back(best);
    if (centers.size() > budget) {
      throw CapacityError("build_grid: more than " + std::to_string(budget) +
                          " centers needed (center budget)");
    }
    for (std::size_t q = 0; q < s; ++q) {
      if (d(static_cast<Index>(best), static_cast<Index>(q)) < eps) covered[q] = 1;
    }
  }
  return centers;
}

std::size_t classic_greedy(const Eigen::MatrixXd& d, double eps) {
  const auto s = static_cast<std::size_t>(d.rows());
  std::vector<char> covered(s, 0);
  std::size_t remaining = s;
  std::size_t count = 0;
  while (remaining > 0) {
    std::size_t best = 0;
    long best_gain = -1;
    for (std::size_t c = 0; c < s; ++c) {
      long gain = 0;
      for (std::size_t q = 0; q < s; ++q) {
        if (!covered[q] && d(static_cast<Index>(c), static_cast<Index>(q)) < eps) ++gain;
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    for (std::size_t q = 0; q < s; ++q) {
      if (!covered[q] && d(static_cast<Index>(best), static_cast<Index>(q)) < eps) {
        covered[q] = 1;
        --remaining;
      }
    }
    ++count;
  }
  return count;
}

std::size_t greedy_packing(const Eigen::MatrixXd& d, double separation) {
  const auto s = static_cast<std::size_t>(d.rows());
  std::vector<std::size_t> chosen;
  for (std::size_t p = 0; p < s; ++p) {
    bool ok = true;
    for (std::size_t c : chosen) {
      if (d(static_cast<Index>(p), static_cast<Index>(c)) < separation) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(p);
  }
  return chosen.size();
}

bool cover_dfs(const std::vector<std::uint32_t>& balls, std::uint32_t covered, std::uint32_t full,
               std::size_t depth_left) {
  if (covered == full) return true;
  if (depth_left == 0) return false;
  const std::uint32_t missing = full & ~covered;
  const int e = __builtin_ctz(missing);
  for (std::size_t c = 0; c < balls.size(); ++c) {
    if ((balls[c] >> e) & 1U) {
      if (cover_dfs(balls, covered | balls[c], full, depth_left - 1)) return true;
    }
  }
  return false;
}

}  // namespace

std::size_t exact_cover_size(const Eigen::MatrixXd& distances, double epsilon) {
  const auto s = static_cast<std::size_t>(distances.rows());
  if (s == 0) throw DomainError("exact cover: empty mesh");
  if (s > kExactCoverLimit) throw CapacityError("exact cover: mesh larger than 24 members");
  std::vector<std::uint32_t> balls(s, 0);
  for (std::size_t c = 0; c < s; ++c) {
    for (std::size_t q = 0; q < s; ++q) {
      if (distances(static_cast<Index>(c), static_cast<Index>(q)) < epsilon) balls[c] |= (1U << q);
    }
  }
  const std::uint32_t full = s == 32 ? 0xFFFFFFFFU : ((1U << s) - 1U);
  for (std::size_t k = 1; k <= s; ++k) {
    if (cover_dfs(balls, 0U, full, k)) return k;
  }
  return s;
}

Grid build_grid(const ClassModel& model, double epsilon, const std::vector<Param>& mesh,
                std::size_t center_budget, const ExecPolicy& policy) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("build_grid: epsilon must be in (0,1)");
  if (mesh.empty()) throw DomainError("build_grid: empty verification mesh");
  const Eigen::MatrixXd d = model.distance_matrix(mesh, policy);
  const auto idx = anchored_greedy(d, epsilon, center_budget);
  Grid g;
  g.epsilon = epsilon;
  for (std::size_t i : idx) g.centers.push_back(mesh[i]);
  g.gram = model.gram(g.centers);
  g.source = model.distribution().id();
  return g;
}

Grid build_grid(const ClassModel& model, double epsilon, std::size_t mesh_size,
                std::size_t center_budget) {
  return build_grid(model, epsilon, model.function_class().verification_mesh(mesh_size),
                    center_budget);
}

CoverResult covering_number_dP(const ClassModel& model, double epsilon,
                               const std::vector<Param>& mesh, const ExecPolicy& policy) {
  if (!(epsilon > 0.0)) throw DomainError("covering number: epsilon must be positive");
  if (mesh.empty()) throw DomainError("covering number: empty mesh");
  const Eigen::MatrixXd d = model.distance_matrix(mesh, policy);
  CoverResult r;
  if (mesh.size() <= kExactCoverLimit) {
    r.upper = r.lower = exact_cover_size(d, epsilon);
    r.exact = true;
    r.method = "exhaustive";
    return r;
  }
  r.upper = anchored_greedy(d, epsilon, mesh.size()).size();
  r.method = "anchored-greedy";
  const std::size_t classic = classic_greedy(d, epsilon);
  if (classic < r.upper) {
    r.upper = classic;
    r.method = "greedy";
  }
  const auto kind = model.function_class().kind();
  if (kind != ClassKind::FiniteList) {
    // Members of one epsilon-bracket are pairwise within epsilon, so any
    // bracketing at epsilon or epsilon/2 is itself an epsilon-cover.
    for (double e : {epsilon, epsilon / 2}) {
      if (e >= 1.0) continue;
      const std::size_t b = bracketing(model, e, mesh).count();
      if (b < r.upper) {
        r.upper = b;
        r.method = "bracket-derived";
      }
    }
  }
  r.lower = std::min(r.upper, greedy_packing(d, 2.0 * epsilon));
  return r;
}

namespace {

// Incremental bracket hull for one class kind.
class BracketHull {
 public:
  explicit BracketHull(const ClassModel& m) : model_(m), cls_(m.function_class()) {
    if (cls_.kind() == ClassKind::Holder) {
      const auto& t = cls_.knots();
      const auto& dist = model_.distribution();
      seg_prob_.assign(t.size() - 1, 0.0);
      if (dist.is_discrete()) {
        for (std::size_t a = 0; a < dist.atom_count(); ++a) {
          const double x = dist.atom(a)[0];
          auto i = static_cast<std::size_t>(x * static_cast<double>(t.size() - 1));
          i = std::min(i, t.size() - 2);
          seg_prob_[i] += dist.weight(a);
        }
      } else {
        for (std::size_t i = 0; i + 1 < t.size(); ++i) seg_prob_[i] = dist.cdf(t[i + 1]) - dist.cdf(t[i]);
      }
    }
  }

  void reset(const Param& p) {
    lo_ = p.values;
    hi_ = p.values;
    if (cls_.kind() == ClassKind::Holder) {
      lo_.resize(p.size() - 1);
      hi_.resize(p.size() - 1);
      for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        lo_[i] = std::min(p[i], p[i + 1]);
        hi_[i] = std::max(p[i], p[i + 1]);
      }
    }
    width_ = std::sqrt(width2(lo_, hi_));
  }

  // Width after absorbing p, without committing.
  [[nodiscard]] double trial(const Param& p, std::vector<double>& lo, std::vector<double>& hi) const {
    lo = lo_;
    hi = hi_;
    absorb(p, lo, hi);
    return std::sqrt(width2(lo, hi));
  }
  void commit(std::vector<double> lo, std::vector<double> hi, double width) {
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    width_ = width;
  }
  [[nodiscard]] double width() const { return width_; }

 private:
  void absorb(const Param& p, std::vector<double>& lo, std::vector<double>& hi) const {
    switch (cls_.kind()) {
      case ClassKind::Intervals:
        lo[0] = std::min(lo[0], p[0]);
        hi[0] = std::max(hi[0], p[0]);
        return;
      case ClassKind::Rectangles:
        // lo holds the intersection box, hi the bounding box.
        for (int j = 0; j < cls_.domain_dimension(); ++j) {
          const auto a = static_cast<std::size_t>(2 * j);
          lo[a] = std::max(lo[a], p[a]);
          lo[a + 1] = std::min(lo[a + 1], p[a + 1]);
          hi[a] = std::min(hi[a], p[a]);
          hi[a + 1] = std::max(hi[a + 1], p[a + 1]);
        }
        return;
      case ClassKind::Holder:
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
          lo[i] = std::min(lo[i], std::min(p[i], p[i + 1]));
          hi[i] = std::max(hi[i], std::max(p[i], p[i + 1]));
        }
        return;
      case ClassKind::FiniteList:
        return;
    }
  }

  [[nodiscard]] double box_prob(const std::vector<double>& box) const {
    const auto& dist = model_.distribution();
    const int d = cls_.domain_dimension();
    if (dist.is_discrete()) {
      double s = 0.0;
      for (std::size_t a = 0; a < dist.atom_count(); ++a) {
        const auto x = dist.atom(a);
        bool in = true;
        for (int j = 0; j < d && in; ++j) {
          in = x[static_cast<std::size_t>(j)] >= box[static_cast<std::size_t>(2 * j)] &&
               x[static_cast<std::size_t>(j)] <= box[static_cast<std::size_t>(2 * j + 1)];
        }
        if (in) s += dist.weight(a);
      }
      return s;
    }
    double v = 1.0;
    for (int j = 0; j < d; ++j) {
      v *= std::max(0.0, box[static_cast<std::size_t>(2 * j + 1)] - box[static_cast<std::size_t>(2 * j)]);
    }
    return v;
  }

  [[nodiscard]] double width2(const std::vector<double>& lo, const std::vector<double>& hi) const {
    const auto& dist = model_.distribution();
    switch (cls_.kind()) {
      case ClassKind::Intervals:
        return std::max(0.0, dist.cdf(hi[0]) - dist.cdf(lo[0]));
      case ClassKind::Rectangles: {
        bool empty = false;
        for (int j = 0; j < cls_.domain_dimension(); ++j) {
          if (lo[static_cast<std::size_t>(2 * j)] > lo[static_cast<std::size_t>(2 * j + 1)]) empty = true;
        }
        const double inner = empty ? 0.0 : box_prob(lo);
        return std::max(0.0, box_prob(hi) - inner);
      }
      case ClassKind::Holder: {
        double s = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) s += seg_prob_[i] * (hi[i] - lo[i]) * (hi[i] - lo[i]);
        return s;
      }
      case ClassKind::FiniteList:
        return 0.0;
    }
    return 0.0;
  }

  const ClassModel& model_;
  const FunctionClass& cls_;
  std::vector<double> seg_prob_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  double width_ = 0.0;
};

}  // namespace

BracketResult bracketing(const ClassModel& model, double epsilon, const std::vector<Param>& mesh) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("bracketing: epsilon must be in (0,1)");
  if (mesh.empty()) throw DomainError("bracketing: empty mesh");
  if (model.function_class().kind() == ClassKind::FiniteList) {
    throw UnsupportedError("bracketing: finite lists have no ordered bracket construction");
  }
  BracketResult out;
  std::vector<char> covered(mesh.size(), 0);
  BracketHull hull(model);
  std::vector<double> lo;
  std::vector<double> hi;
  for (std::size_t a = 0; a < mesh.size(); ++a) {
    if (covered[a]) continue;
    hull.reset(mesh[a]);
    Bracket b;
    b.members.push_back(a);
    covered[a] = 1;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t q = 0; q < mesh.size(); ++q) {
      if (!covered[q]) order.emplace_back(model.sqdist(mesh[a], mesh[q]), q);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [dist2, q] : order) {
      if (!(dist2 < epsilon * epsilon)) break;
      const double w = hull.trial(mesh[q], lo, hi);
      if (w < epsilon) {
        hull.commit(lo, hi, w);
        b.members.push_back(q);
        covered[q] = 1;
      }
    }
    b.width = hull.width();
    out.brackets.push_back(std::move(b));
  }
  return out;
}

std::size_t bracketing_number(const ClassModel& model, double epsilon, const std::vector<Param>& mesh) {
  return bracketing(model, epsilon, mesh).count();
}

EntropyReport fit_entropy_counts(const std::vector<double>& epsilons,
                                 const std::vector<double>& counts, EntropyRegime::Kind regime) {
  if (epsilons.size() != counts.size()) throw ShapeError("fit_entropy: radii and counts differ in length");
  if (epsilons.size() < 3) throw DomainError("fit_entropy: at least three radii required");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw DomainError("fit_entropy: radii must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw DomainError("fit_entropy: radii must be strictly decreasing");
    }
    if (!(counts[i] >= 1.0)) throw DomainError("fit_entropy: counts must be >= 1");
  }
  if (std::all_of(counts.begin(), counts.end(), [&](double c) { return c == counts[0]; })) {
    throw FitError("fit_entropy: all counts equal, exponent not identifiable");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    x.push_back(std::log(1.0 / epsilons[i]));
    if (regime == EntropyRegime::Kind::VC) {
      y.push_back(std::log(counts[i]));
    } else {
      if (!(counts[i] > 1.0)) throw FitError("fit_entropy: BR fit needs counts > 1 (log log N)");
      y.push_back(std::log(std::log(counts[i])));
    }
  }
  const LineFit fit = linear_fit(x, y);
  EntropyReport r;
  r.epsilons = epsilons;
  r.counts = counts;
  r.regime = regime;
  r.residual = fit.residual;
  if (regime == EntropyRegime::Kind::VC) {
    r.nu0 = fit.slope;
    r.c0 = std::exp(fit.intercept);
  } else {
    r.r0 = fit.slope / 2.0;
    r.b0 = std::exp(fit.intercept / 2.0);
  }
  return r;
}

EntropyReport fit_entropy(const ClassModel& model, const std::vector<double>& epsilons,
                          const std::vector<Param>& mesh, EntropyRegime::Kind regime,
                          CountKind count_kind, const ExecPolicy& policy) {
  std::vector<double> counts;
  for (double e : epsilons) {
    if (count_kind == CountKind::Covering) {
      counts.push_back(static_cast<double>(covering_number_dP(model, e, mesh, policy).upper));
    } else {
      counts.push_back(static_cast<double>(bracketing_number(model, e, mesh)));
    }
  }
  // A cover (or bracketing) at a smaller radius is one at every larger radius.
  for (std::size_t i = counts.size(); i-- > 1;) {
    if (i < counts.size() && epsilons[i - 1] > epsilons[i]) counts[i - 1] = std::min(counts[i - 1], counts[i]);
  }
  return fit_entropy_counts(epsilons, counts, regime);
}

}  // namespace epsim

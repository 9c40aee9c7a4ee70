#include "epsim/function_class.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "epsim/errors.hpp"

namespace epsim {
namespace {

constexpr double kMemberTol = 1e-12;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- FunctionClass

FunctionClass FunctionClass::intervals(double envelope_m) {
  if (!(envelope_m >= 2.0)) throw DomainError("intervals: envelope M must be >= 2 (|f| <= 1)");
  FunctionClass c;
  c.kind_ = ClassKind::Intervals;
  c.m_ = envelope_m;
  c.regime_ = EntropyRegime{EntropyRegime::Kind::VC, 1.0, 1.0, 1.0, 0.75};
  return c;
}

FunctionClass FunctionClass::rectangles(int dim, double envelope_m) {
  if (dim < 1) throw DomainError("rectangles: dimension must be >= 1");
  if (!(envelope_m >= 2.0)) throw DomainError("rectangles: envelope M must be >= 2 (|f| <= 1)");
  FunctionClass c;
  c.kind_ = ClassKind::Rectangles;
  c.dim_ = dim;
  c.m_ = envelope_m;
  c.regime_ = EntropyRegime{EntropyRegime::Kind::VC, 1.0, 2.0 * dim, 1.0, 0.75};
  return c;
}

FunctionClass FunctionClass::holder(double exponent, double radius, int knot_level,
                                    double envelope_m) {
  if (!(exponent > 0.0 && exponent <= 1.0)) throw DomainError("holder: exponent must be in (0,1]");
  if (!(radius > 0.0)) throw DomainError("holder: radius must be positive");
  if (knot_level < 1 || knot_level > 12) throw DomainError("holder: knot level must be in [1,12]");
  if (!(envelope_m > 0.0)) throw DomainError("holder: envelope must be positive");
  FunctionClass c;
  c.kind_ = ClassKind::Holder;
  c.m_ = envelope_m;
  c.exponent_ = exponent;
  c.radius_ = radius;
  const std::size_t k = std::size_t{1} << knot_level;
  c.knots_.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) c.knots_[i] = static_cast<double>(i) / static_cast<double>(k);
  c.regime_ = EntropyRegime{EntropyRegime::Kind::BR, 1.0, 1.0, 1.0, 1.0 / (2.0 * exponent)};
  if (c.regime_.r0 >= 1.0) c.regime_.r0 = 0.99;
  return c;
}

FunctionClass FunctionClass::finite_list(std::vector<StepFunction> entries, double envelope_m) {
  if (entries.empty()) throw DomainError("finite list: at least one function required");
  if (!(envelope_m > 0.0)) throw DomainError("finite list: envelope must be positive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!(e.lo <= e.hi)) throw DomainError("finite list: entry needs lo <= hi");
    if (std::abs(e.inside) > envelope_m / 2 || std::abs(e.outside) > envelope_m / 2) {
      throw DomainError("finite list: entry exceeds envelope M/2");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (entries[j].same_function(e)) throw DomainError("finite list: duplicate entry");
    }
  }
  FunctionClass c;
  c.kind_ = ClassKind::FiniteList;
  c.m_ = envelope_m;
  c.entries_ = std::move(entries);
  c.regime_ = EntropyRegime{EntropyRegime::Kind::VC, static_cast<double>(c.entries_.size()), 1e-6,
                            1.0, 0.75};
  return c;
}

FunctionClass FunctionClass::with_regime(EntropyRegime r) const {
  FunctionClass c = *this;
  c.regime_ = r;
  return c;
}

void FunctionClass::validate(const Param& theta) const {
  switch (kind_) {
    case ClassKind::Intervals:
      if (theta.size() != 1 || !(theta[0] >= 0.0 && theta[0] <= 1.0)) {
        throw DomainError("intervals: theta must be a single value in [0,1]");
      }
      return;
    case ClassKind::Rectangles:
      if (theta.size() != static_cast<std::size_t>(2 * dim_)) {
        throw DomainError("rectangles: parameter needs 2*dim values");
      }
      for (int j = 0; j < dim_; ++j) {
        const double a = theta[2 * j];
        const double b = theta[2 * j + 1];
        if (!(a >= 0.0 && a <= b && b <= 1.0)) {
          throw DomainError("rectangles: need 0 <= a_j <= b_j <= 1");
        }
      }
      return;
    case ClassKind::Holder: {
      if (theta.size() != knots_.size()) throw DomainError("holder: parameter needs one value per knot");
      for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(std::abs(theta[i]) <= m_ / 2 + kMemberTol)) {
          throw DomainError("holder: knot value exceeds envelope M/2");
        }
        for (std::size_t j = 0; j < i; ++j) {
          const double bound = radius_ * std::pow(knots_[i] - knots_[j], exponent_);
          if (std::abs(theta[i] - theta[j]) > bound + kMemberTol) {
            throw DomainError("holder: knot values violate the Holder constraint");
          }
        }
      }
      return;
    }
    case ClassKind::FiniteList: {
      if (theta.size() != 1) throw DomainError("finite list: parameter is a single index");
      const double idx = theta[0];
      if (!(idx >= 0.0 && idx < static_cast<double>(entries_.size()) && idx == std::floor(idx))) {
        throw DomainError("finite list: index out of range");
      }
      return;
    }
  }
}

void FunctionClass::validate_point(PointView x) const {
  if (x.size() != static_cast<std::size_t>(dim_)) throw DomainError("point has wrong dimension");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("point outside [0,1]^d");
  }
}

double FunctionClass::evaluate(const Param& theta, PointView x) const {
  validate(theta);
  validate_point(x);
  return evaluate_unchecked(theta, x);
}

double FunctionClass::evaluate_unchecked(const Param& theta, PointView x) const {
  switch (kind_) {
    case ClassKind::Intervals:
      return x[0] <= theta[0] ? 1.0 : 0.0;
    case ClassKind::Rectangles:
      for (int j = 0; j < dim_; ++j) {
        if (x[j] < theta[2 * j] || x[j] > theta[2 * j + 1]) return 0.0;
      }
      return 1.0;
    case ClassKind::Holder: {
      const std::size_t k = knots_.size() - 1;
      const double pos = x[0] * static_cast<double>(k);
      std::size_t i = static_cast<std::size_t>(pos);
      if (i >= k) i = k - 1;
      const double frac = pos - static_cast<double>(i);
      return theta[i] + (theta[i + 1] - theta[i]) * frac;
    }
    case ClassKind::FiniteList:
      return entries_[static_cast<std::size_t>(theta[0])](x[0]);
  }
  return 0.0;
}

Param FunctionClass::holder_profile(double a, double c, double b) const {
  if (kind_ != ClassKind::Holder) throw UnsupportedError("holder_profile on a non-Holder class");
  if (std::abs(a) > radius_) throw DomainError("holder_profile: |a| must not exceed the radius");
  std::vector<double> v(knots_.size());
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const double raw = a * std::pow(std::abs(knots_[i] - c), exponent_) + b;
    v[i] = std::clamp(raw, -m_ / 2, m_ / 2);
  }
  return Param(std::move(v));
}

std::vector<Param> FunctionClass::verification_mesh(std::size_t size) const {
  if (size == 0) throw DomainError("verification mesh: size must be positive");
  std::vector<Param> mesh;
  switch (kind_) {
    case ClassKind::Intervals:
      for (double t : linspace(0.0, 1.0, size)) mesh.push_back(Param{t});
      break;
    case ClassKind::Rectangles: {
      std::size_t levels = 2;
      auto count = [&](std::size_t k) {
        const double per = static_cast<double>(k * (k + 1) / 2);
        return std::pow(per, dim_);
      };
      while (count(levels) < static_cast<double>(size)) ++levels;
      const auto grid = linspace(0.0, 1.0, levels);
      std::vector<std::pair<double, double>> sides;
      for (std::size_t i = 0; i < levels; ++i) {
        for (std::size_t j = i; j < levels; ++j) sides.emplace_back(grid[i], grid[j]);
      }
      std::vector<std::size_t> idx(static_cast<std::size_t>(dim_), 0);
      while (true) {
        std::vector<double> v;
        for (std::size_t j : idx) {
          v.push_back(sides[j].first);
          v.push_back(sides[j].second);
        }
        mesh.emplace_back(std::move(v));
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == sides.size()) idx[d++] = 0;
        if (d == idx.size()) break;
      }
      break;
    }
    case ClassKind::Holder: {
      std::set<std::vector<double>> seen;
      mesh.push_back(Param(std::vector<double>(knots_.size(), 0.0)));
      seen.insert(mesh.back().values);
      auto per = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(size)))) + 1;
      for (double a : linspace(-radius_, radius_, per)) {
        for (double c : linspace(0.0, 1.0, per)) {
          for (double b : linspace(-m_ / 2, m_ / 2, per)) {
            if (mesh.size() >= size) break;
            Param p = holder_profile(a, c, b);
            if (seen.insert(p.values).second) mesh.push_back(std::move(p));
          }
        }
      }
      break;
    }
    case ClassKind::FiniteList:
      for (std::size_t i = 0; i < entries_.size(); ++i) mesh.push_back(Param{static_cast<double>(i)});
      break;
  }
  return mesh;
}

std::string FunctionClass::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ClassKind::Intervals:
      os << "intervals";
      break;
    case ClassKind::Rectangles:
      os << "rectangles(d=" << dim_ << ")";
      break;
    case ClassKind::Holder:
      os << "holder(s=" << exponent_ << ",R=" << radius_ << ",knots=" << knots_.size() << ")";
      break;
    case ClassKind::FiniteList:
      os << "finite-list(" << entries_.size() << ")";
      break;
  }
  os << " M=" << m_;
  return os.str();
}

// ---------------------------------------------------------------- CellPartition

std::size_t CellPartition::Line::locate(double x) const {
  auto it = std::lower_bound(breaks.begin(), breaks.end(), x);
  const auto i = static_cast<std::size_t>(it - breaks.begin());
  if (it != breaks.end() && *it == x) return region_cell[2 * i + 1];
  return region_cell[2 * i];
}

std::size_t CellPartition::locate(PointView x) const {
  switch (mode_) {
    case Mode::Atoms: {
      auto it = atom_cells_.find(std::vector<double>(x.begin(), x.end()));
      if (it == atom_cells_.end()) throw DomainError("cell lookup: point is not an atom of P");
      return it->second;
    }
    case Mode::Line:
      return lines_[0].locate(x[0]);
    case Mode::Product: {
      std::size_t cell = 0;
      for (std::size_t j = 0; j < lines_.size(); ++j) cell += strides_[j] * lines_[j].locate(x[j]);
      return cell;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- ClassModel

ClassModel::ClassModel(FunctionClass cls, Distribution dist)
    : cls_(std::move(cls)), dist_(std::move(dist)) {
  if (cls_.domain_dimension() != dist_.dimension()) {
    throw UnsupportedError("class and distribution dimensions differ");
  }
  const bool one_d = dist_.dimension() == 1;
  switch (cls_.kind()) {
    case ClassKind::Intervals:
    case ClassKind::FiniteList:
      if (!one_d) throw UnsupportedError("one-dimensional class needs a one-dimensional law");
      break;
    case ClassKind::Rectangles:
      if (!dist_.is_discrete() && !dist_.is_uniform_product()) {
        throw UnsupportedError("rectangles support product-uniform or discrete laws");
      }
      break;
    case ClassKind::Holder:
      if (!dist_.is_discrete()) {
        const auto& t = cls_.knots();
        const std::size_t segs = t.size() - 1;
        seg_m0_.resize(segs);
        seg_m1_.resize(segs);
        seg_m2_.resize(segs);
        for (std::size_t i = 0; i < segs; ++i) {
          const double lo = t[i];
          const double hi = t[i + 1];
          if (dist_.is_uniform_product()) {
            const double h = hi - lo;
            seg_m0_[i] = h;
            seg_m1_[i] = h * h / 2.0;
            seg_m2_[i] = h * h * h / 3.0;
          } else {
            const double m0 = dist_.partial_moment(0, lo, hi);
            const double m1 = dist_.partial_moment(1, lo, hi);
            const double m2 = dist_.partial_moment(2, lo, hi);
            // Moments of u = x - t_i on the segment.
            seg_m0_[i] = m0;
            seg_m1_[i] = m1 - lo * m0;
            seg_m2_[i] = m2 - 2.0 * lo * m1 + lo * lo * m0;
          }
        }
      }
      break;
  }
}

const StepFunction& ClassModel::entry(const Param& p) const {
  return cls_.entries()[static_cast<std::size_t>(p[0])];
}

double ClassModel::step_prob(const StepFunction& s) const { return dist_.prob_closed(s.lo, s.hi); }

double ClassModel::step_overlap(const StepFunction& s, const StepFunction& t) const {
  return dist_.prob_closed(std::max(s.lo, t.lo), std::min(s.hi, t.hi));
}

double ClassModel::atom_sum(const Param& f, const Param* g, double sign) const {
  // sign = 0: E f g (or E f when g is null); sign = -1: E (f - g)^2.
  double s = 0.0;
  for (std::size_t i = 0; i < dist_.atom_count(); ++i) {
    const auto x = dist_.atom(i);
    const double fv = cls_.evaluate_unchecked(f, x);
    if (g == nullptr) {
      s += dist_.weight(i) * fv;
    } else if (sign == 0.0) {
      s += dist_.weight(i) * fv * cls_.evaluate_unchecked(*g, x);
    } else {
      const double d = fv - cls_.evaluate_unchecked(*g, x);
      s += dist_.weight(i) * d * d;
    }
  }
  return s;
}

double ClassModel::holder_inner(const Param& f, const Param& g, double sign) const {
  // E[(f + sign g)^2] if sign != 0 else E[f g]; both piecewise linear on knots.
  const auto& t = cls_.knots();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    if (sign != 0.0) {
      const double a0 = f[i] + sign * g[i];
      const double a1 = ((f[i + 1] + sign * g[i + 1]) - a0) / h;
      s += a0 * a0 * seg_m0_[i] + 2.0 * a0 * a1 * seg_m1_[i] + a1 * a1 * seg_m2_[i];
    } else {
      const double f0 = f[i];
      const double f1 = (f[i + 1] - f[i]) / h;
      const double g0 = g[i];
      const double g1 = (g[i + 1] - g[i]) / h;
      s += f0 * g0 * seg_m0_[i] + (f0 * g1 + f1 * g0) * seg_m1_[i] + f1 * g1 * seg_m2_[i];
    }
  }
  return s;
}

double ClassModel::mean(const Param& theta) const {
  if (dist_.is_discrete()) return atom_sum(theta, nullptr, 0.0);
  switch (cls_.kind()) {
    case ClassKind::Intervals:
      return dist_.cdf(theta[0]);
    case ClassKind::Rectangles: {
      double v = 1.0;
      for (int j = 0; j < cls_.domain_dimension(); ++j) v *= theta[2 * j + 1] - theta[2 * j];
      return v;
    }
    case ClassKind::Holder: {
      const auto& t = cls_.knots();
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double slope = (theta[i + 1] - theta[i]) / (t[i + 1] - t[i]);
        s += theta[i] * seg_m0_[i] + slope * seg_m1_[i];
      }
      return s;
    }
    case ClassKind::FiniteList: {
      const auto& e = entry(theta);
      return e.outside + (e.inside - e.outside) * step_prob(e);
    }
  }
  return 0.0;
}

double ClassModel::inner(const Param& f, const Param& h) const {
  if (dist_.is_discrete()) return atom_sum(f, &h, 0.0);
  switch (cls_.kind()) {
    case ClassKind::Intervals:
      return dist_.cdf(std::min(f[0], h[0]));
    case ClassKind::Rectangles: {
      double v = 1.0;
      for (int j = 0; j < cls_.domain_dimension(); ++j) {
        v *= std::max(0.0, std::min(f[2 * j + 1], h[2 * j + 1]) - std::max(f[2 * j], h[2 * j]));
      }
      return v;
    }
    case ClassKind::Holder:
      return holder_inner(f, h, 0.0);
    case ClassKind::FiniteList: {
      const auto& s = entry(f);
      const auto& t = entry(h);
      const double ds = s.inside - s.outside;
      const double dt = t.inside - t.outside;
      return s.outside * t.outside + s.outside * dt * step_prob(t) + t.outside * ds * step_prob(s) +
             ds * dt * step_overlap(s, t);
    }
  }
  return 0.0;
}

double ClassModel::sqdist(const Param& f, const Param& h) const {
  if (f == h) return 0.0;
  if (dist_.is_discrete()) return atom_sum(f, &h, -1.0);
  switch (cls_.kind()) {
    case ClassKind::Intervals: {
      const double lo = std::min(f[0], h[0]);
      const double hi = std::max(f[0], h[0]);
      return dist_.cdf(hi) - dist_.cdf(lo);
    }
    case ClassKind::Rectangles:
      return std::max(0.0, mean(f) + mean(h) - 2.0 * inner(f, h));
    case ClassKind::Holder:
      return std::max(0.0, holder_inner(f, h, -1.0));
    case ClassKind::FiniteList:
      return std::max(0.0, inner(f, f) + inner(h, h) - 2.0 * inner(f, h));
  }
  return 0.0;
}

double ClassModel::distance(const Param& f, const Param& h) const { return std::sqrt(sqdist(f, h)); }

double ClassModel::covariance(const Param& f, const Param& h) const {
  return inner(f, h) - mean(f) * mean(h);
}

std::vector<double> ClassModel::means(const std::vector<Param>& params) const {
  std::vector<double> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(mean(p));
  return out;
}

Eigen::MatrixXd ClassModel::gram(const std::vector<Param>& params) const {
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd k(n, n);
  const auto mu = means(params);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double c = inner(params[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(j)]) -
                       mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(j)];
      k(i, j) = c;
      k(j, i) = c;
    }
  }
  return k;
}

Eigen::MatrixXd ClassModel::cross_covariance(const std::vector<Param>& rows,
                                             const std::vector<Param>& cols) const {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  const auto mr = means(rows);
  const auto mc = means(cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          inner(rows[i], cols[j]) - mr[i] * mc[j];
    }
  }
  return c;
}

Eigen::MatrixXd ClassModel::distance_matrix(const std::vector<Param>& params,
                                            const ExecPolicy& policy) const {
  const std::size_t n = params.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for_each_index(n, policy, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = distance(params[i], params[j]);
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return d;
}

namespace {

// Builds a 1-D cell line from breakpoints and a value-vector function.
template <class ValueFn>
void build_line(const Distribution& dist, std::vector<double> breaks, ValueFn&& values_at,
                std::vector<double>& prob, std::vector<std::vector<double>>& cell_values,
                std::vector<double>& line_breaks, std::vector<std::size_t>& region_cell) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  line_breaks = breaks;
  std::map<std::vector<double>, std::size_t> ids;
  auto cell_for = [&](const std::vector<double>& v) {
    auto [it, inserted] = ids.emplace(v, prob.size());
    if (inserted) {
      prob.push_back(0.0);
      cell_values.push_back(v);
    }
    return it->second;
  };
  const std::size_t r = breaks.size();
  region_cell.assign(2 * r + 1, 0);
  for (std::size_t i = 0; i <= r; ++i) {
    const double lo = i == 0 ? 0.0 : std::clamp(breaks[i - 1], 0.0, 1.0);
    const double hi = i == r ? 1.0 : std::clamp(breaks[i], 0.0, 1.0);
    const double mid = 0.5 * (lo + hi);
    const std::size_t c = cell_for(values_at(mid));
    region_cell[2 * i] = c;
    if (hi > lo) prob[c] += dist.cdf(hi) - dist.cdf(lo);
    if (i < r) region_cell[2 * i + 1] = cell_for(values_at(breaks[i]));
  }
}

}  // namespace

std::optional<CellPartition> ClassModel::cells(const std::vector<Param>& functions) const {
  CellPartition part;
  const auto nf = static_cast<Eigen::Index>(functions.size());
  if (dist_.is_discrete()) {
    part.mode_ = CellPartition::Mode::Atoms;
    const std::size_t na = dist_.atom_count();
    part.values_.resize(nf, static_cast<Eigen::Index>(na));
    for (std::size_t a = 0; a < na; ++a) {
      const auto x = dist_.atom(a);
      std::vector<double> key(x.begin(), x.end());
      auto [it, inserted] = part.atom_cells_.emplace(key, part.prob_.size());
      if (!inserted) {
        part.prob_[it->second] += dist_.weight(a);
        continue;
      }
      part.prob_.push_back(dist_.weight(a));
    }
    part.values_.resize(nf, static_cast<Eigen::Index>(part.prob_.size()));
    for (const auto& [key, cell] : part.atom_cells_) {
      for (Eigen::Index k = 0; k < nf; ++k) {
        part.values_(k, static_cast<Eigen::Index>(cell)) =
            cls_.evaluate_unchecked(functions[static_cast<std::size_t>(k)], PointView(key));
      }
    }
    return part;
  }

  auto to_matrix = [&](const std::vector<std::vector<double>>& cols) {
    Eigen::MatrixXd m(nf, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (Eigen::Index k = 0; k < nf; ++k) m(k, static_cast<Eigen::Index>(j)) = cols[j][static_cast<std::size_t>(k)];
    }
    return m;
  };

  switch (cls_.kind()) {
    case ClassKind::Holder:
      return std::nullopt;
    case ClassKind::Intervals:
    case ClassKind::FiniteList: {
      std::vector<double> breaks;
      for (const auto& f : functions) {
        if (cls_.kind() == ClassKind::Intervals) {
          breaks.push_back(f[0]);
        } else {
          breaks.push_back(entry(f).lo);
          breaks.push_back(entry(f).hi);
        }
      }
      auto values_at = [&](double x) {
        std::vector<double> v(functions.size());
        for (std::size_t k = 0; k < functions.size(); ++k) {
          v[k] = cls_.evaluate_unchecked(functions[k], PointView(&x, 1));
        }
        return v;
      };
      std::vector<std::vector<double>> cols;
      CellPartition::Line line;
      build_line(dist_, std::move(breaks), values_at, part.prob_, cols, line.breaks, line.region_cell);
      part.mode_ = CellPartition::Mode::Line;
      part.lines_.push_back(std::move(line));
      part.values_ = to_matrix(cols);
      return part;
    }
    case ClassKind::Rectangles: {
      const int d = cls_.domain_dimension();
      std::vector<std::vector<double>> line_prob(static_cast<std::size_t>(d));
      std::vector<std::vector<std::vector<double>>> line_vals(static_cast<std::size_t>(d));
      std::size_t total = 1;
      const Distribution unif = Distribution::uniform();
      for (int j = 0; j < d; ++j) {
        std::vector<double> breaks;
        for (const auto& f : functions) {
          breaks.push_back(f[2 * j]);
          breaks.push_back(f[2 * j + 1]);
        }
        auto member_at = [&](double x) {
          std::vector<double> v(functions.size());
          for (std::size_t k = 0; k < functions.size(); ++k) {
            v[k] = (x >= functions[k][2 * j] && x <= functions[k][2 * j + 1]) ? 1.0 : 0.0;
          }
          return v;
        };
        CellPartition::Line line;
        build_line(unif, std::move(breaks), member_at, line_prob[static_cast<std::size_t>(j)],
                   line_vals[static_cast<std::size_t>(j)], line.breaks, line.region_cell);
        part.lines_.push_back(std::move(line));
        total *= line_prob[static_cast<std::size_t>(j)].size();
        if (total > 200000) return std::nullopt;
      }
      part.mode_ = CellPartition::Mode::Product;
      part.strides_.assign(static_cast<std::size_t>(d), 1);
      for (int j = 1; j < d; ++j) {
        part.strides_[static_cast<std::size_t>(j)] =
            part.strides_[static_cast<std::size_t>(j - 1)] * line_prob[static_cast<std::size_t>(j - 1)].size();
      }
      part.prob_.assign(total, 1.0);
      part.values_ = Eigen::MatrixXd::Ones(nf, static_cast<Eigen::Index>(total));
      for (std::size_t cell = 0; cell < total; ++cell) {
        for (int j = 0; j < d; ++j) {
          const auto ju = static_cast<std::size_t>(j);
          const std::size_t c = (cell / part.strides_[ju]) % line_prob[ju].size();
          part.prob_[cell] *= line_prob[ju][c];
          for (Eigen::Index k = 0; k < nf; ++k) {
            part.values_(k, static_cast<Eigen::Index>(cell)) *= line_vals[ju][c][static_cast<std::size_t>(k)];
          }
        }
      }
      return part;
    }
  }
  return std::nullopt;
}

}  // namespace epsim

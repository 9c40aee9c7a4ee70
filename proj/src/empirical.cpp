#include "epsim/empirical.hpp"

#include <algorithm>
#include <cmath>

#include "epsim/errors.hpp"
#include "epsim/stats.hpp"

namespace epsim {

SamplePath draw_sample(const Distribution& dist, std::size_t n, const SeedSpec& seed) {
  if (n == 0) throw DomainError("draw_sample: n must be >= 1");
  SamplePath s;
  s.n = n;
  s.dim = dist.dimension();
  s.seed = seed;
  s.points.resize(n * static_cast<std::size_t>(s.dim));
  Rng rng = make_rng(seed);
  const auto d = static_cast<std::size_t>(s.dim);
  for (std::size_t i = 0; i < n; ++i) dist.draw(rng, std::span<double>(s.points.data() + i * d, d));
  return s;
}

std::vector<double> empirical_process(const SamplePath& sample, const ClassModel& model,
                                      const std::vector<Param>& params) {
  if (params.empty()) throw DomainError("empirical_process: no parameters");
  const auto& cls = model.function_class();
  for (const auto& p : params) cls.validate(p);
  const double root_n = std::sqrt(static_cast<double>(sample.n));
  std::vector<double> out(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double m = model.mean(params[k]);
    double s = 0.0;
    for (std::size_t i = 0; i < sample.n; ++i) s += cls.evaluate_unchecked(params[k], sample.point(i)) - m;
    out[k] = s / root_n;
  }
  return out;
}

std::vector<std::size_t> cell_counts(const CellPartition& cells, const SamplePath& sample) {
  std::vector<std::size_t> counts(cells.cell_count(), 0);
  for (std::size_t i = 0; i < sample.n; ++i) ++counts[cells.locate(sample.point(i))];
  return counts;
}

std::vector<double> empirical_process_cells(const CellPartition& cells,
                                            const std::vector<std::size_t>& counts,
                                            const std::vector<double>& means, std::size_t n) {
  const auto& v = cells.values();
  if (static_cast<std::size_t>(v.rows()) != means.size() || counts.size() != cells.cell_count()) {
    throw ShapeError("empirical_process_cells: partition, counts and means disagree");
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> out(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] != 0) s += static_cast<double>(counts[j]) * v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
    out[k] = (s - static_cast<double>(n) * means[k]) / root_n;
  }
  return out;
}

double sup_discrepancy(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("sup_discrepancy: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double euclid_discrepancy(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("euclid_discrepancy: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

PairSet build_pairset(const ClassModel& model, double epsilon, const std::vector<Param>& mesh) {
  if (!(epsilon >= 0.0)) throw DomainError("build_pairset: epsilon must be >= 0");
  PairSet ps;
  ps.epsilon = epsilon;
  ps.mesh = mesh;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      if (model.distance(mesh[i], mesh[j]) < epsilon) ps.pairs.emplace_back(i, j);
    }
  }
  return ps;
}

namespace {

// diffs[p * n + i] = (f - f')(X_i) for pair p.
std::vector<double> pair_differences(const ClassModel& model, const PairSet& ps, const SamplePath& s) {
  const auto& cls = model.function_class();
  std::vector<double> out(ps.size() * s.n);
  for (std::size_t p = 0; p < ps.size(); ++p) {
    const auto& f = ps.mesh[ps.pairs[p].first];
    const auto& g = ps.mesh[ps.pairs[p].second];
    for (std::size_t i = 0; i < s.n; ++i) {
      out[p * s.n + i] = cls.evaluate_unchecked(f, s.point(i)) - cls.evaluate_unchecked(g, s.point(i));
    }
  }
  return out;
}

double signed_sup(const std::vector<double>& diffs, std::size_t pairs, std::size_t n,
                  const std::vector<int>& signs) {
  double best = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += signs[i] * diffs[p * n + i];
    best = std::max(best, std::abs(s));
  }
  return best / std::sqrt(static_cast<double>(n));
}

}  // namespace

double mu_n_exhaustive(const ClassModel& model, const PairSet& ps, const SamplePath& sample) {
  if (ps.empty()) return 0.0;
  if (sample.n > kExhaustiveMaxN) throw CapacityError("mu_n oracle: n > 12");
  const auto diffs = pair_differences(model, ps, sample);
  const std::size_t total = std::size_t{1} << sample.n;
  std::vector<int> signs(sample.n);
  double acc = 0.0;
  for (std::size_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < sample.n; ++i) signs[i] = ((mask >> i) & 1U) != 0U ? 1 : -1;
    acc += signed_sup(diffs, ps.size(), sample.n, signs);
  }
  return acc / static_cast<double>(total);
}

Estimate mu_n_estimate(const ClassModel& model, const PairSet& ps, std::size_t n, std::size_t reps,
                       std::uint64_t master_seed, SignMethod method, const ExecPolicy& policy) {
  if (reps < 2) throw DomainError("mu_n_estimate: reps must be >= 2");
  if (n == 0) throw DomainError("mu_n_estimate: n must be >= 1");
  Estimate est;
  if (ps.empty()) return est;
  bool exhaustive = method == SignMethod::Exhaustive;
  if (method == SignMethod::Auto) exhaustive = n <= kExhaustiveMaxN && ps.size() <= kExhaustiveMaxPairs;
  // The signed sum is linear in f, so each pair term is a difference of the
  // symmetrized process on the mesh; cell sums make that cheap.
  const auto cells = exhaustive ? std::nullopt : model.cells(ps.mesh);
  const auto& cls = model.function_class();
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> vals(reps);
  for_each_index(reps, policy, [&](std::size_t r) {
    const SeedSpec seed = replication_seed(master_seed, r, phase::kMeasure);
    const SamplePath s = draw_sample(model.distribution(), n, seed.child(phase::kSample));
    if (exhaustive) {
      vals[r] = mu_n_exhaustive(model, ps, s);
      return;
    }
    Rng rng = make_rng(seed.child(phase::kRademacher));
    std::vector<double> v(ps.mesh.size(), 0.0);
    if (cells) {
      std::vector<double> signed_counts(cells->cell_count(), 0.0);
      for (std::size_t i = 0; i < n; ++i) signed_counts[cells->locate(s.point(i))] += rademacher(rng);
      const Eigen::VectorXd pv =
          cells->values() * Eigen::Map<const Eigen::VectorXd>(signed_counts.data(), static_cast<Eigen::Index>(signed_counts.size()));
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = pv(static_cast<Eigen::Index>(k)) / root_n;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const int e = rademacher(rng);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += e * cls.evaluate_unchecked(ps.mesh[k], s.point(i));
      }
      for (double& x : v) x /= root_n;
    }
    double best = 0.0;
    for (const auto& [i, j] : ps.pairs) best = std::max(best, std::abs(v[i] - v[j]));
    vals[r] = best;
  });
  const MeanSe m = mean_se(vals);
  est.value = m.mean;
  est.se = m.se;
  est.exact = exhaustive;
  return est;
}

}  // namespace epsim

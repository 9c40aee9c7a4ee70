#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "epsim/function_class.hpp"
#include "epsim/parallel.hpp"
#include "epsim/rng.hpp"

namespace epsim {

/// n i.i.d. points of P stored row-major, with the seed that produced them.
struct SamplePath {
  std::size_t n = 0;
  int dim = 1;
  std::vector<double> points;
  SeedSpec seed;

  [[nodiscard]] PointView point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

SamplePath draw_sample(const Distribution& dist, std::size_t n, const SeedSpec& seed);

/// alpha_n(f) = n^{-1/2} sum_i (f(X_i) - E f(X)) for each parameter.
std::vector<double> empirical_process(const SamplePath& sample, const ClassModel& model,
                                      const std::vector<Param>& params);

/// Same quantity from cell counts: every f in the partition is constant per cell.
std::vector<double> empirical_process_cells(const CellPartition& cells,
                                            const std::vector<std::size_t>& counts,
                                            const std::vector<double>& means, std::size_t n);
std::vector<std::size_t> cell_counts(const CellPartition& cells, const SamplePath& sample);

/// max_k |a_k - b_k|. Throws ShapeError on length mismatch.
double sup_discrepancy(std::span<const double> a, std::span<const double> b);
/// Euclidean norm of a - b.
double euclid_discrepancy(std::span<const double> a, std::span<const double> b);

/// Ordered mesh pairs (i, j) with d_P(mesh_i, mesh_j) < epsilon.
struct PairSet {
  double epsilon = 0.0;
  std::vector<Param> mesh;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  [[nodiscard]] bool empty() const { return pairs.empty(); }
  [[nodiscard]] std::size_t size() const { return pairs.size(); }
};

PairSet build_pairset(const ClassModel& model, double epsilon, const std::vector<Param>& mesh);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool exact = false;  // sign average computed by enumeration
};

inline constexpr std::size_t kExhaustiveMaxN = 12;
inline constexpr std::size_t kExhaustiveMaxPairs = 8;

/// E_eps sup_pairs |n^{-1/2} sum_i eps_i (f - f')(X_i)| for a fixed sample,
/// averaged over all 2^n sign vectors.
double mu_n_exhaustive(const ClassModel& model, const PairSet& pairs, const SamplePath& sample);

enum class SignMethod { Auto, MonteCarlo, Exhaustive };

/// Mean over `reps` independent samples of the symmetrized pair supremum.
/// Auto enumerates signs when n <= 12 and at most 8 pairs. Samples and
/// signs come from disjoint sub-streams of replication_seed(master, rep).
Estimate mu_n_estimate(const ClassModel& model, const PairSet& pairs, std::size_t n,
                       std::size_t reps, std::uint64_t master_seed,
                       SignMethod method = SignMethod::Auto, const ExecPolicy& policy = {});

}  // namespace epsim

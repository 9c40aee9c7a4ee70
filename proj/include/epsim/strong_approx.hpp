#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "epsim/coupling.hpp"

namespace epsim {

enum class ScheduleRegime { Thm1, Thm2, Custom };

std::string to_string(ScheduleRegime r);

/// Block sizes of a sequential coupling. `sizes[k]` is n_k and `t[k]` is t_k
/// for k = 0..N in the regime's own indexing; `blocks` are the nonempty
/// block sizes whose concatenation is the path 1..t_N.
struct BlockingSchedule {
  ScheduleRegime regime = ScheduleRegime::Custom;
  double alpha = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  std::size_t n_blocks = 0;  // N
  std::vector<double> sizes;
  std::vector<double> t;
  std::vector<double> blocks;
  std::size_t n_beta = 0;  // N(beta) = floor(N^beta)
  std::size_t k_min = 0;   // thm2: first k from which every n_k >= 1

  [[nodiscard]] double t_total() const { return t.empty() ? 0.0 : t.back(); }
};

/// VC-regime (thm1) schedule: n_0 = 1, n_k = floor(k^alpha), t_k = sum_{j<k} n_j.
/// Requires 1/2 < tau1 alpha < 1 (checked in exact rationals when tau1 and
/// alpha are given as fractions through the overload) and N >= 2.
BlockingSchedule schedule_vc(double alpha, double tau1, double tau2, std::size_t n_blocks,
                             double beta = -1.0);
/// Same, with tau1 = p/q and alpha = a/b given exactly.
BlockingSchedule schedule_vc_exact(long long alpha_num, long long alpha_den, long long tau1_num,
                                   long long tau1_den, double tau2, std::size_t n_blocks);

/// Bracketing-regime (thm2) schedule: t_0 = 1, t_k = floor(exp(k^{1-kappa})), n_k = t_k - t_{k-1}.
/// Requires 0 < kappa < 1/2 and 0 < beta < 1.
BlockingSchedule schedule_br(double kappa, std::size_t n_blocks, double beta = 0.7);

/// Arbitrary positive block sizes (used for reductions and tests).
BlockingSchedule schedule_custom(std::vector<double> blocks);

/// thm1: sum_{k=N(beta)}^{N} n_k^{1/2 - tau1} (log n_k)^{tau2};
/// thm2: sum_{k=N(beta)}^{N} sqrt(n_k) / (log n_k)^kappa.
double s_of_N(const BlockingSchedule& schedule);

struct PathDiscrepancy {
  std::vector<double> block_discrepancy;  // sup_f |sqrt(n_k)(alpha - Z)| per block
  std::vector<double> running_max;        // index m-1 holds max_{j <= m}
  double max_discrepancy = 0.0;
  std::size_t m_star = 0;
  double t_total = 0.0;
  double normalized = 0.0;  // max / sqrt(t_N)
};

struct StrongConfig {
  CouplingMethod method = CouplingMethod::Quantile;
  std::size_t ot_batch = 64;
  OtMethod ot_method = OtMethod::Exact;
  double budget = 5.0e6;  // largest admissible t_N
};

/// Sequential block coupling on the evaluation functions. Each block draws
/// its own sample, couples its Y-sum to a Gaussian vector, and fills the
/// block with i.i.d. N(0, K) increments conditioned to sum to sqrt(n_k) Z.
PathDiscrepancy run_sequential(const ClassModel& model, const std::vector<Param>& functions,
                               const BlockingSchedule& schedule, const StrongConfig& config,
                               const SeedSpec& seed);
/// Same with a prebuilt coupler (its functions are the evaluation set).
PathDiscrepancy run_sequential(const GridCoupler& coupler, const BlockingSchedule& schedule,
                               const StrongConfig& config, const SeedSpec& seed);

/// min(1, 9 tail(t / 30)).
double ms_bound(const std::function<double(double)>& tail, double t);

}  // namespace epsim

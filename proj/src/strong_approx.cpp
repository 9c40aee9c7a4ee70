#include "epsim/strong_approx.hpp"

#include <algorithm>
#include <cmath>

#include <boost/rational.hpp>

#include "epsim/errors.hpp"

namespace epsim {

std::string to_string(ScheduleRegime r) {
  switch (r) {
    case ScheduleRegime::Thm1: return "thm1";
    case ScheduleRegime::Thm2: return "thm2";
    case ScheduleRegime::Custom: return "custom";
  }
  return "custom";
}

namespace {

BlockingSchedule vc_unchecked(double alpha, double tau1, double tau2, std::size_t n_blocks, double beta) {
  BlockingSchedule s;
  s.regime = ScheduleRegime::Thm1;
  s.alpha = alpha;
  s.tau1 = tau1;
  s.tau2 = tau2;
  s.beta = beta < 0.0 ? alpha / (1.0 + alpha) : beta;
  if (!(s.beta > 0.0 && s.beta < 1.0)) throw ScheduleError("schedule: beta must be in (0,1)");
  s.n_blocks = n_blocks;
  s.sizes.resize(n_blocks + 1);
  s.t.resize(n_blocks + 1);
  s.sizes[0] = 1.0;
  for (std::size_t k = 1; k <= n_blocks; ++k) s.sizes[k] = std::floor(std::pow(static_cast<double>(k), alpha));
  s.t[0] = 0.0;
  for (std::size_t k = 1; k <= n_blocks; ++k) s.t[k] = s.t[k - 1] + s.sizes[k - 1];
  s.blocks.assign(s.sizes.begin(), s.sizes.begin() + static_cast<std::ptrdiff_t>(n_blocks));
  s.n_beta = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n_blocks), s.beta)));
  s.k_min = 0;
  return s;
}

}  // namespace

BlockingSchedule schedule_vc(double alpha, double tau1, double tau2, std::size_t n_blocks, double beta) {
  if (n_blocks < 2) throw ScheduleError("schedule_vc: N must be >= 2");
  const double prod = tau1 * alpha;
  if (!(prod > 0.5 && prod < 1.0)) {
    throw ScheduleError("schedule_vc: blocking constraint 1/2 < tau1 alpha < 1 violated (tau1 alpha = " +
                        std::to_string(prod) + ")");
  }
  return vc_unchecked(alpha, tau1, tau2, n_blocks, beta);
}

BlockingSchedule schedule_vc_exact(long long alpha_num, long long alpha_den, long long tau1_num,
                                   long long tau1_den, double tau2, std::size_t n_blocks) {
  using Q = boost::rational<long long>;
  if (alpha_den == 0 || tau1_den == 0) throw ScheduleError("schedule_vc: zero denominator");
  const Q prod = Q(alpha_num, alpha_den) * Q(tau1_num, tau1_den);
  if (!(prod > Q(1, 2) && prod < Q(1))) {
    throw ScheduleError("schedule_vc: blocking constraint 1/2 < tau1 alpha < 1 violated (tau1 alpha = " +
                        std::to_string(prod.numerator()) + "/" + std::to_string(prod.denominator()) + ")");
  }
  if (n_blocks < 2) throw ScheduleError("schedule_vc: N must be >= 2");
  return vc_unchecked(boost::rational_cast<double>(Q(alpha_num, alpha_den)),
                      boost::rational_cast<double>(Q(tau1_num, tau1_den)), tau2, n_blocks, -1.0);
}

BlockingSchedule schedule_br(double kappa, std::size_t n_blocks, double beta) {
  if (!(kappa > 0.0 && kappa < 0.5)) throw DomainError("schedule_br: kappa must be in (0, 1/2)");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("schedule_br: beta must be in (0,1)");
  if (n_blocks < 1) throw ScheduleError("schedule_br: N must be >= 1");
  BlockingSchedule s;
  s.regime = ScheduleRegime::Thm2;
  s.kappa = kappa;
  s.theta = kappa * (0.5 - kappa);
  s.beta = beta;
  s.n_blocks = n_blocks;
  s.t.resize(n_blocks + 1);
  s.sizes.resize(n_blocks + 1);
  s.t[0] = 1.0;
  s.sizes[0] = 1.0;
  for (std::size_t k = 1; k <= n_blocks; ++k) {
    s.t[k] = std::floor(std::exp(std::pow(static_cast<double>(k), 1.0 - kappa)));
    s.sizes[k] = s.t[k] - s.t[k - 1];
  }
  // Empty blocks are merged forward: they simply contribute nothing.
  for (double n : s.sizes) {
    if (n > 0.0) s.blocks.push_back(n);
  }
  s.k_min = n_blocks + 1;
  for (std::size_t k = n_blocks + 1; k-- > 1;) {
    if (s.sizes[k] < 1.0) break;
    s.k_min = k;
  }
  s.n_beta = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n_blocks), beta)));
  return s;
}

BlockingSchedule schedule_custom(std::vector<double> blocks) {
  if (blocks.empty()) throw ScheduleError("schedule_custom: no blocks");
  BlockingSchedule s;
  s.n_blocks = blocks.size();
  s.t.push_back(0.0);
  for (double n : blocks) {
    if (!(n >= 1.0) || n != std::floor(n)) throw ScheduleError("schedule_custom: block sizes must be positive integers");
    s.t.push_back(s.t.back() + n);
  }
  s.sizes = blocks;
  s.blocks = std::move(blocks);
  s.n_beta = 1;
  return s;
}

double s_of_N(const BlockingSchedule& s) {
  if (s.regime == ScheduleRegime::Custom) throw ScheduleError("s(N) is defined for thm1 and thm2 schedules");
  const std::size_t lo = std::max<std::size_t>(s.n_beta, 1);
  double total = 0.0;
  for (std::size_t k = lo; k <= s.n_blocks; ++k) {
    const double n = s.sizes[k];
    if (s.regime == ScheduleRegime::Thm1) {
      total += std::pow(n, 0.5 - s.tau1) * std::pow(std::log(n), s.tau2);
    } else {
      if (!(n >= 2.0)) throw ScheduleError("s(N): block size below 2 inside the summation range");
      total += std::sqrt(n) / std::pow(std::log(n), s.kappa);
    }
  }
  return total;
}

PathDiscrepancy run_sequential(const GridCoupler& coupler, const BlockingSchedule& schedule,
                               const StrongConfig& config, const SeedSpec& seed) {
  if (schedule.t_total() > config.budget) {
    throw CapacityError("run_sequential: t_N = " + std::to_string(schedule.t_total()) +
                        " exceeds the compute budget");
  }
  const auto& model = coupler.model();
  const auto& cls = model.function_class();
  const auto& fns = coupler.functions();
  const auto& means = coupler.means();
  const std::size_t e = fns.size();
  const auto t_total = static_cast<std::size_t>(schedule.t_total());

  PathDiscrepancy out;
  out.t_total = schedule.t_total();
  out.running_max.reserve(t_total);
  std::vector<double> s_emp(e, 0.0);
  std::vector<double> s_gauss(e, 0.0);
  std::vector<double> xi;
  std::vector<double> xbar(e);
  std::vector<double> g(e);
  double running = 0.0;
  const SeedSpec block_root = seed.child(phase::kBlock);
  for (std::size_t k = 0; k < schedule.blocks.size(); ++k) {
    const auto nk = static_cast<std::size_t>(schedule.blocks[k]);
    const SeedSpec bseed = block_root.child(static_cast<std::uint32_t>(k));
    const SamplePath sample = draw_sample(model.distribution(), nk, bseed.child(phase::kSample));
    const auto outcome = coupler.couple(sample, bseed);
    const double root = std::sqrt(static_cast<double>(nk));
    out.block_discrepancy.push_back(root * sup_discrepancy(outcome.y, outcome.z));

    // Conditional fill: xi_j - mean(xi) + T / n_k with T = sqrt(n_k) Z.
    Rng rng = make_rng(bseed.child(phase::kFill));
    xi.assign(nk * e, 0.0);
    std::fill(xbar.begin(), xbar.end(), 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      sample_bridge(coupler.bridge(), rng, std::span<double>(xi.data() + j * e, e));
      for (std::size_t f = 0; f < e; ++f) xbar[f] += xi[j * e + f];
    }
    for (std::size_t f = 0; f < e; ++f) xbar[f] /= static_cast<double>(nk);
    for (std::size_t j = 0; j < nk; ++j) {
      double sup = 0.0;
      for (std::size_t f = 0; f < e; ++f) {
        s_emp[f] += cls.evaluate_unchecked(fns[f], sample.point(j)) - means[f];
        s_gauss[f] += xi[j * e + f] - xbar[f] + root * outcome.z[f] / static_cast<double>(nk);
        sup = std::max(sup, std::abs(s_emp[f] - s_gauss[f]));
      }
      if (sup > running) {
        running = sup;
        out.m_star = out.running_max.size() + 1;
      }
      out.running_max.push_back(running);
    }
  }
  out.max_discrepancy = running;
  out.normalized = t_total > 0 ? running / std::sqrt(static_cast<double>(t_total)) : 0.0;
  return out;
}

PathDiscrepancy run_sequential(const ClassModel& model, const std::vector<Param>& functions,
                               const BlockingSchedule& schedule, const StrongConfig& config,
                               const SeedSpec& seed) {
  const GridCoupler coupler(model, functions, config.method, config.ot_batch, config.ot_method);
  return run_sequential(coupler, schedule, config, seed);
}

double ms_bound(const std::function<double(double)>& tail, double t) {
  return std::min(1.0, 9.0 * tail(t / 30.0));
}

}  // namespace epsim

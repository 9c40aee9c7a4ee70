// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [path-to-epsim-cli]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "epsim/bounds.hpp"
#include "epsim/bridge.hpp"
#include "epsim/empirical.hpp"
#include "epsim/entropy.hpp"
#include "epsim/errors.hpp"
#include "epsim/experiments.hpp"
#include "epsim/stats.hpp"
#include "epsim/strong_approx.hpp"
#include "epsim/transport.hpp"

using namespace epsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!ok) ++g_failed;
}

void info(const std::string& line) { std::cout << "  info: " << line << std::endl; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) {
    status = -1;
    return out;
  }
  std::array<char, 256> buf{};
  while (fgets(buf.data(), buf.size(), p) != nullptr) out += buf.data();
  status = pclose(p);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Exact rational rates, through the CLI when available.
void criterion1(const std::string& cli) {
  const auto t0 = Clock::now();
  std::string text;
  if (!cli.empty()) {
    int status = 0;
    text = capture(cli + " rates --nu0 1 --r0 3/4 --alpha 5", status);
    if (status != 0) {
      report(1, false, "rates exited with status " + std::to_string(status));
      return;
    }
  } else {
    const auto vc = rate_vc(Rational(1));
    const auto t2 = rate_thm2(rate_br(Rational(3, 4)));
    text = "tau1 = " + to_string(vc.tau1) + "\ntau2 = " + to_string(vc.tau2) + "\ntau(alpha) = " +
           to_string(rate_thm1(Rational(5), vc.tau1)) + "\nkappa = " + to_string(rate_br(Rational(3, 4))) +
           "\ntheta = " + to_string(t2.theta) + "\ntau = " + to_string(t2.tau) + "\n";
  }
  const double secs = seconds_since(t0);
  const std::vector<std::string> want{"tau1 = 1/7",  "tau2 = 9/14",  "tau(alpha) = 1/28",
                                      "kappa = 1/6", "theta = 1/18", "tau = 1/15"};
  bool ok = secs < 1.0;
  for (const auto& w : want) ok = ok && text.find(w + "\n") != std::string::npos;
  report(1, ok, "rates " + std::string(cli.empty() ? "(library)" : "(cli)") + " in " + fmt(secs, 3) + " s");
}

// 2. Empirical covariance of 1e5 bridge draws on theta = 1/4, 1/2, 3/4.
void criterion2() {
  const auto t0 = Clock::now();
  const ClassModel model(FunctionClass::intervals(), Distribution::uniform());
  const double th[3] = {0.25, 0.5, 0.75};
  const auto bridge = make_bridge(model, {Param{th[0]}, Param{th[1]}, Param{th[2]}});
  const std::size_t reps = 100000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(3, 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Rng rng = make_rng(SeedSpec{20260101, 0});
  std::vector<double> g(3);
  for (std::size_t r = 0; r < reps; ++r) {
    sample_bridge(bridge, rng, g);
    const Eigen::Vector3d x(g[0], g[1], g[2]);
    mean += x;
    sum += x * x.transpose();
  }
  mean /= static_cast<double>(reps);
  const Eigen::MatrixXd cov = (sum - static_cast<double>(reps) * mean * mean.transpose()) / static_cast<double>(reps - 1);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(cov(i, j) - (std::min(th[i], th[j]) - th[i] * th[j])));
  }
  const double secs = seconds_since(t0);
  report(2, worst <= 0.02 && secs < 30.0,
         "max entrywise error " + fmt(worst) + " (diag " + fmt(cov(0, 0)) + ", " + fmt(cov(1, 1)) + ", " +
             fmt(cov(2, 2)) + ") in " + fmt(secs, 3) + " s");
}

// 3. Explicit-constant tail inequalities at 1e5 replications.
void criterion3() {
  const auto checks = explicit_constant_checks(100000, 31337, ExecPolicy{4});
  std::size_t violations = 0;
  std::size_t informative = 0;
  for (const auto& v : checks) {
    violations += v.violated() ? 1 : 0;
    informative += v.bound < 1.0 ? 1 : 0;
    if (v.violated()) info("violated: " + v.name + " [" + v.setting + "] t=" + fmt(v.t));
  }
  report(3, violations == 0,
         std::to_string(checks.size()) + " checks, " + std::to_string(violations) + " violations, " +
             std::to_string(informative) + " with bound < 1");
}

// 4. Log-log slope of median grid discrepancy, intervals under uniform P.
void criterion4() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.n_grid = {256, 1024, 4096, 16384};
  c.replications = 200;
  c.seed = 4;
  c.workers = 4;
  c.coupling.mesh_size = 200;
  const auto r = run_gauss_approx(c);
  const double secs = seconds_since(t0);
  std::string medians;
  for (const auto& s : r.summary) medians += (medians.empty() ? "" : ", ") + fmt(s.median_grid);
  const bool ok = r.fit.has_value() && r.fit->slope <= -0.07 && !r.failed() && secs < 600.0;
  report(4, ok,
         "slope " + (r.fit ? fmt(r.fit->slope) : std::string("n/a")) + " (medians " + medians + ") in " +
             fmt(secs, 3) + " s");

  // Transport coupling on the same grid; informational, its batch noise
  // floor flattens the curve.
  ExperimentConfig o = c;
  o.replications = 40;
  o.coupling.method = CouplingMethod::Transport;
  o.coupling.ot_batch = 256;
  const auto ot = run_gauss_approx(o);
  if (ot.fit) info("transport coupling slope " + fmt(ot.fit->slope) + " over 40 replications");
}

// 5. Error-budget dominance with fitted A2, A4 over n = 1e2, 1e3, 1e4.
void criterion5() {
  struct Case {
    std::string name;
    Distribution dist;
    double gamma;
  };
  const std::vector<Case> cases{{"intervals/uniform, gamma 1", Distribution::uniform(), 1.0},
                                {"intervals/uniform, gamma 2", Distribution::uniform(), 2.0},
                                {"intervals/beta(2,5), gamma 1", Distribution::beta(2.0, 5.0), 1.0}};
  bool ok = true;
  double worst_spread = 0.0;
  for (const auto& cs : cases) {
    const ClassModel model(FunctionClass::intervals(), cs.dist);
    double lo2 = 1e300, hi2 = 0.0, lo4 = 1e300, hi4 = 0.0;
    for (std::size_t n : {100U, 1000U, 10000U}) {
      const auto a = audit_budget(model, n, cs.gamma, cs.gamma, 400, 64, 55, {}, ExecPolicy{4});
      ok = ok && a.holds();
      lo2 = std::min(lo2, a.a2_fit);
      hi2 = std::max(hi2, a.a2_fit);
      lo4 = std::min(lo4, a.a4_fit);
      hi4 = std::max(hi4, a.a4_fit);
      info(cs.name + " n=" + std::to_string(n) + ": exceed " + fmt(a.exceed) + " <= budget " + fmt(a.budget.rhs) +
           ", A2 " + fmt(a.a2_fit) + ", A4 " + fmt(a.a4_fit) +
           (a.budget.preconditions_ok ? "" : " [" + a.budget.failing_condition + "]"));
    }
    worst_spread = std::max({worst_spread, hi2 / lo2, hi4 / lo4});
  }
  ok = ok && worst_spread <= 3.0;
  report(5, ok, "all budgets dominate; worst fitted-constant spread " + fmt(worst_spread));
}

// Exact mu_n under a two-atom law: every sample and every sign vector.
double enumerate_mu_n(const ClassModel& m, const PairSet& ps, std::size_t n, const std::vector<double>& atoms,
                      const std::vector<double>& w) {
  const auto& cls = m.function_class();
  double total = 0.0;
  for (std::size_t xm = 0; xm < (1U << n); ++xm) {
    double px = 1.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = (xm >> i) & 1U;
      x[i] = atoms[a];
      px *= w[a];
    }
    double inner = 0.0;
    for (std::size_t sm = 0; sm < (1U << n); ++sm) {
      double best = 0.0;
      for (const auto& [i, j] : ps.pairs) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double e = ((sm >> k) & 1U) != 0U ? 1.0 : -1.0;
          s += e * (cls.evaluate(ps.mesh[i], x[k]) - cls.evaluate(ps.mesh[j], x[k]));
        }
        best = std::max(best, std::abs(s) / std::sqrt(static_cast<double>(n)));
      }
      inner += best;
    }
    total += px * inner / static_cast<double>(1U << n);
  }
  return total;
}

// Smallest k such that some k members cover the mesh, by subset enumeration.
std::size_t brute_force_cover(const Eigen::MatrixXd& d, double eps) {
  const auto n = static_cast<std::size_t>(d.rows());
  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < eps) ball[i] |= 1U << j;
    }
  }
  const std::uint32_t all = n == 32 ? ~0U : (1U << n) - 1U;
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::uint32_t cov = 0;
      for (std::size_t i : idx) cov |= ball[i];
      if (cov == all) return k;
      std::size_t p = k;
      while (p > 0 && idx[p - 1] == n - k + p - 1) --p;
      if (p == 0) break;
      ++idx[p - 1];
      for (std::size_t q = p; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  return n;
}

// 6. Oracle equivalences.
void criterion6() {
  std::vector<std::string> bad;

  // Covering numbers against exhaustive set cover, meshes up to 24.
  std::size_t cover_cases = 0;
  {
    const ClassModel iv(FunctionClass::intervals(), Distribution::uniform());
    const ClassModel rect(FunctionClass::rectangles(2), Distribution::product_uniform(2));
    Rng rng = make_rng(SeedSpec{606, 0});
    for (std::size_t size : {8U, 12U, 16U, 20U, 24U}) {
      const auto mesh = iv.function_class().verification_mesh(size);
      const auto dm = iv.distance_matrix(mesh);
      for (double eps : {0.15, 0.25, 0.4}) {
        ++cover_cases;
        if (covering_number_dP(iv, eps, mesh).value() != brute_force_cover(dm, eps)) bad.push_back("cover intervals");
      }
      std::vector<Param> rm;
      for (std::size_t i = 0; i < size; ++i) {
        const double a = uniform01(rng), b = uniform01(rng), c = uniform01(rng), d = uniform01(rng);
        rm.push_back(Param{std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d)});
      }
      const auto rd = rect.distance_matrix(rm);
      for (double eps : {0.3, 0.45}) {
        ++cover_cases;
        if (covering_number_dP(rect, eps, rm).value() != brute_force_cover(rd, eps)) bad.push_back("cover rectangles");
      }
    }
  }

  // One-dimensional exact transport is the sorted matching.
  {
    Rng rng = make_rng(SeedSpec{607, 0});
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd s(64, 1), t(64, 1);
      for (int i = 0; i < 64; ++i) {
        s(i, 0) = standard_normal(rng);
        t(i, 0) = standard_normal(rng);
      }
      const auto plan = ot_couple(s, t, OtMethod::Exact);
      std::vector<std::size_t> si(64), ti(64);
      std::iota(si.begin(), si.end(), 0);
      std::iota(ti.begin(), ti.end(), 0);
      std::sort(si.begin(), si.end(), [&](auto a, auto b) { return s(a, 0) < s(b, 0); });
      std::sort(ti.begin(), ti.end(), [&](auto a, auto b) { return t(a, 0) < t(b, 0); });
      for (std::size_t r = 0; r < 64; ++r) {
        if (plan.assignment[si[r]] != ti[r]) {
          bad.push_back("1-D transport");
          break;
        }
      }
    }
  }

  // Monte Carlo mu_n against full enumeration.
  double worst_z = 0.0;
  {
    const std::vector<double> atoms{0.25, 0.75}, w{0.3, 0.7};
    const ClassModel m(FunctionClass::intervals(), Distribution::discrete(1, atoms, w));
    const auto ps = build_pairset(m, 0.9, {Param{0.1}, Param{0.5}, Param{0.9}});
    for (std::size_t n : {4U, 7U, 10U}) {
      const double exact = enumerate_mu_n(m, ps, n, atoms, w);
      const auto mc = mu_n_estimate(m, ps, n, 100000, 600 + n, SignMethod::MonteCarlo, ExecPolicy{4});
      const double z = std::abs(mc.value - exact) / mc.se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) bad.push_back("mu_n n=" + std::to_string(n));
    }
  }

  // Dudley quadrature against the closed form.
  double worst_rel = 0.0;
  for (double v : {0.5, 1.0, 2.0, 4.0}) {
    for (double c : {0.5, 1.0, 3.0}) {
      for (double s : {0.01, 0.1, 0.3, 0.9}) {
        const double a = dudley_power(c, v, s, DudleyMethod::ClosedForm).value;
        const double q = dudley_power(c, v, s, DudleyMethod::Quadrature).value;
        worst_rel = std::max(worst_rel, std::abs(a - q) / std::abs(a));
      }
    }
  }
  if (worst_rel > 1e-6) bad.push_back("dudley");

  std::string detail = std::to_string(cover_cases) + " cover cases, 5 transport trials, mu_n worst |z| " +
                       fmt(worst_z, 3) + ", Dudley worst rel " + fmt(worst_rel, 3);
  for (const auto& b : bad) detail += "; mismatch " + b;
  report(6, bad.empty(), detail);
}

// 7. Schedule hand values, reconstruction, gate, sandwich and growth.
void criterion7() {
  std::vector<std::string> bad;
  const auto a = schedule_vc_exact(5, 1, 1, 7, 9.0 / 14.0, 3);
  if (a.t_total() != 34.0) bad.push_back("t_3 = " + fmt(a.t_total()));
  const auto b = schedule_br(1.0 / 6.0, 3);
  if (!(b.t[1] == 2.0 && b.t[2] == 5.0 && b.t[3] == 12.0)) bad.push_back("(t1,t2,t3)");
  for (std::size_t n = 2; n <= 200; ++n) {
    const auto s = schedule_vc_exact(5, 1, 1, 7, 9.0 / 14.0, n);
    if (std::accumulate(s.blocks.begin(), s.blocks.end(), 0.0) != s.t_total()) bad.push_back("thm1 sum");
    const auto r = schedule_br(1.0 / 6.0, n);
    if (std::accumulate(r.blocks.begin(), r.blocks.end(), 0.0) != r.t_total()) bad.push_back("thm2 sum");
  }
  try {
    (void)schedule_vc_exact(2, 1, 1, 7, 9.0 / 14.0, 5);
    bad.push_back("gate accepted alpha = 2");
  } catch (const ScheduleError&) {
  }
  const double kappa = 1.0 / 6.0;
  const double theta = kappa * (0.5 - kappa);
  double s_lo = 1e300, s_hi = 0.0, g_lo = 1e300, g_hi = 0.0;
  for (std::size_t n = 20; n <= 200; ++n) {
    const auto s = schedule_br(kappa, n);
    const double sn = s_of_N(s);
    const double sandwich = sn * std::pow(static_cast<double>(n), theta) / std::sqrt(s.t_total());
    const double growth = sn / std::sqrt(s.sizes[n]) / std::pow(static_cast<double>(n), kappa * kappa);
    s_lo = std::min(s_lo, sandwich);
    s_hi = std::max(s_hi, sandwich);
    g_lo = std::min(g_lo, growth);
    g_hi = std::max(g_hi, growth);
  }
  if (!(s_lo > 0.0 && s_hi / s_lo < 1.5)) bad.push_back("sandwich");
  if (!(g_lo > 0.0 && g_hi / g_lo < 1.5)) bad.push_back("growth");
  std::string detail = "t_3 = 34, (2, 5, 12), sandwich constants [" + fmt(s_lo) + ", " + fmt(s_hi) +
                       "], growth constants [" + fmt(g_lo) + ", " + fmt(g_hi) + "] on N in [20, 200]";
  for (const auto& x : bad) detail += "; failed " + x;
  report(7, bad.empty(), detail);
}

// 8. Normalized path discrepancy trend under the alpha = 5 schedule.
void criterion8() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.kind = "strong-approx";
  c.replications = 120;
  c.seed = 8;
  c.workers = 4;
  c.schedule.regime = ScheduleRegime::Thm1;
  c.schedule.n_blocks = {4, 5, 6, 7, 8};
  const auto r = run_strong_approx(c);
  const double secs = seconds_since(t0);
  std::string medians;
  std::size_t down = 0;
  for (std::size_t i = 0; i < r.summary.size(); ++i) {
    medians += (i ? ", " : "") + fmt(r.summary[i].median_normalized);
    if (i > 0 && r.summary[i].median_normalized < r.summary[i - 1].median_normalized) ++down;
  }
  const double decades = std::log10(r.summary.back().t_n / r.summary.front().t_n);
  const bool ok = !r.failed() && decades >= 1.5 && r.trend_slope < 0.0 &&
                  r.summary.back().median_normalized < r.summary.front().median_normalized &&
                  r.envelope_drift < 5.0;
  report(8, ok,
         "t_N " + fmt(r.summary.front().t_n, 6) + " to " + fmt(r.summary.back().t_n, 6) + " (" + fmt(decades, 3) +
             " decades), medians " + medians + ", " + std::to_string(down) + "/" +
             std::to_string(r.summary.size() - 1) + " steps down, trend slope " + fmt(r.trend_slope) +
             ", envelope drift " + fmt(r.envelope_drift) + " in " + fmt(secs, 3) + " s");
}

// 9. Byte-identical outputs across worker counts.
void criterion9(const std::string& cli) {
  std::vector<std::string> bad;
  ExperimentConfig g;
  g.n_grid = {128, 512, 2048};
  g.replications = 30;
  g.seed = 9;
  ExperimentConfig s;
  s.kind = "strong-approx";
  s.replications = 20;
  s.seed = 9;
  s.schedule.n_blocks = {3, 4, 5};
  std::string gcsv[2], gjson[2], scsv[2], sjson[2];
  const int workers[2] = {1, 4};
  for (int k = 0; k < 2; ++k) {
    g.workers = s.workers = workers[k];
    const auto gr = run_gauss_approx(g);
    const auto sr = run_strong_approx(s);
    gcsv[k] = gauss_csv(gr);
    gjson[k] = to_json(gr).dump();
    scsv[k] = strong_csv(sr);
    sjson[k] = to_json(sr).dump();
  }
  if (gcsv[0] != gcsv[1] || gjson[0] != gjson[1]) bad.push_back("library gauss");
  if (scsv[0] != scsv[1] || sjson[0] != sjson[1]) bad.push_back("library strong");

  std::size_t files = 0;
  if (!cli.empty()) {
    const fs::path root = fs::temp_directory_path() / "epsim_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "approx.json";
    std::ofstream(cfg) << R"({"kind": "gauss-approx", "n_grid": [128, 512, 2048], "replications": 30, "seed": 9})";
    const fs::path scfg = root / "strong.json";
    std::ofstream(scfg) << R"({"kind": "strong-approx", "replications": 20, "seed": 9, "schedule": {"N": [3, 4, 5]}})";
    for (const char* format : {"csv", "json"}) {
      for (int w : workers) {
        const fs::path out = root / (std::string(format) + "_w" + std::to_string(w));
        for (const auto& [sub, file] : {std::pair{"approx", cfg}, std::pair{"strong", scfg}}) {
          int status = 0;
          capture(cli + " " + sub + " --config " + file.string() + " --out " + out.string() + " --workers " +
                      std::to_string(w) + " --format " + format + " 2>/dev/null",
                  status);
          if (status != 0) bad.push_back(std::string("cli ") + sub + " exit " + std::to_string(status));
        }
      }
      const fs::path a = root / (std::string(format) + "_w1");
      const fs::path b = root / (std::string(format) + "_w4");
      if (!fs::exists(a)) continue;
      for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        if (slurp(e.path()) != slurp(b / e.path().filename())) bad.push_back("cli " + e.path().filename().string());
      }
    }
    fs::remove_all(root);
  }
  std::string detail = "library CSV/JSON identical for workers 1 and 4";
  if (!cli.empty()) detail += "; " + std::to_string(files) + " CLI output files compared";
  for (const auto& x : bad) detail += "; differs " + x;
  report(9, bad.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const auto t0 = Clock::now();
  const std::vector<void (*)()> plain{criterion2, criterion3, criterion4, criterion5,
                                      criterion6, criterion7, criterion8};
  auto guarded = [](int id, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, [&] { criterion1(cli); });
  for (std::size_t i = 0; i < plain.size(); ++i) guarded(static_cast<int>(i) + 2, plain[i]);
  guarded(9, [&] { criterion9(cli); });
  std::cout << (g_failed == 0 ? "all criteria PASS" : std::to_string(g_failed) + " criteria FAIL") << " ("
            << fmt(seconds_since(t0), 4) << " s)" << std::endl;
  return g_failed == 0 ? 0 : 1;
}

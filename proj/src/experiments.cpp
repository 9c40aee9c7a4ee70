#include "epsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "epsim/bridge.hpp"
#include "epsim/errors.hpp"
#include "epsim/stats.hpp"

namespace epsim {

namespace {

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

Rational rational_field(const Json& j, const char* key, Rational fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_number()) return parse_rational(v.dump());
  throw ConfigError(std::string("config field '") + key + "' must be a number or \"p/q\" string");
}

std::uint64_t seed_field(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number_unsigned() || v.is_number_integer()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    try {
      return std::stoull(v.get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError("seed must be a decimal unsigned 64-bit integer");
    }
  }
  throw ConfigError("seed must be a decimal unsigned 64-bit integer");
}

std::uint64_t stream_master(std::uint64_t master, std::uint64_t key) { return master ^ splitmix64(key); }

}  // namespace

FunctionClass parse_class(const Json& j) {
  const auto type = field<std::string>(j, "type", "intervals");
  const double m = field<double>(j, "M", 2.0);
  if (type == "intervals") return FunctionClass::intervals(m);
  if (type == "rectangles") return FunctionClass::rectangles(field<int>(j, "dim", 2), m);
  if (type == "holder") {
    return FunctionClass::holder(field<double>(j, "exponent", 1.0), field<double>(j, "radius", 1.0),
                                 field<int>(j, "level", 4), m);
  }
  if (type == "finite") {
    std::vector<StepFunction> entries;
    if (!j.contains("entries") || !j.at("entries").is_array()) throw ConfigError("finite class needs an 'entries' table");
    for (const auto& e : j.at("entries")) {
      StepFunction s;
      s.lo = field<double>(e, "lo", 0.0);
      s.hi = field<double>(e, "hi", 1.0);
      s.inside = field<double>(e, "inside", 1.0);
      s.outside = field<double>(e, "outside", 0.0);
      s.description = field<std::string>(e, "description", "");
      entries.push_back(s);
    }
    return FunctionClass::finite_list(std::move(entries), m);
  }
  throw ConfigError("unknown class type '" + type + "'");
}

Distribution parse_distribution(const Json& j) {
  const auto type = field<std::string>(j, "type", "uniform");
  if (type == "uniform") return Distribution::uniform();
  if (type == "product_uniform") return Distribution::product_uniform(field<int>(j, "dim", 2));
  if (type == "beta") return Distribution::beta(field<double>(j, "a", 1.0), field<double>(j, "b", 1.0));
  if (type == "discrete") {
    const int dim = field<int>(j, "dim", 1);
    std::vector<double> atoms;
    if (!j.contains("atoms")) throw ConfigError("discrete distribution needs 'atoms'");
    for (const auto& a : j.at("atoms")) {
      if (a.is_array()) {
        for (const auto& x : a) atoms.push_back(x.get<double>());
      } else {
        atoms.push_back(a.get<double>());
      }
    }
    return Distribution::discrete(dim, std::move(atoms), field<std::vector<double>>(j, "weights", {}));
  }
  throw ConfigError("unknown distribution type '" + type + "'");
}

EntropyRegime parse_regime(const Json& j) {
  EntropyRegime r;
  const auto kind = field<std::string>(j, "kind", "VC");
  if (kind == "VC") {
    r.kind = EntropyRegime::Kind::VC;
  } else if (kind == "BR") {
    r.kind = EntropyRegime::Kind::BR;
  } else {
    throw ConfigError("regime kind must be VC or BR");
  }
  r.c0 = field<double>(j, "c0", 1.0);
  r.nu0 = field<double>(j, "nu0", 1.0);
  r.b0 = field<double>(j, "b0", 1.0);
  r.r0 = field<double>(j, "r0", 0.75);
  if (r.kind == EntropyRegime::Kind::VC && !(r.nu0 > 0.0)) throw ConfigError("regime nu0 must be positive");
  if (r.kind == EntropyRegime::Kind::BR && !(r.r0 > 0.0 && r.r0 < 1.0 && r.b0 > 0.0)) {
    throw ConfigError("regime needs b0 > 0 and r0 in (0,1)");
  }
  return r;
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    c.kind = field<std::string>(j, "kind", c.kind);
    static const std::vector<std::string> kinds{"gauss-approx", "strong-approx", "bounds-audit", "entropy"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
      throw ConfigError("unknown experiment kind '" + c.kind + "'");
    }
    if (j.contains("class")) c.cls = parse_class(j.at("class"));
    if (j.contains("distribution")) c.dist = parse_distribution(j.at("distribution"));
    c.regime = j.contains("regime") ? parse_regime(j.at("regime")) : c.cls.regime();
    if (j.contains("regime")) c.br_cap = field<double>(j.at("regime"), "cap", c.br_cap);
    c.n_grid = field<std::vector<std::size_t>>(j, "n_grid", c.n_grid);
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] < 1) throw ConfigError("n_grid entries must be >= 1");
      if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    }
    c.replications = field<std::size_t>(j, "replications", c.replications);
    if (c.replications < 1) throw ConfigError("replications must be >= 1");
    c.seed = seed_field(j, "seed", c.seed);
    c.workers = field<int>(j, "workers", c.workers);
    c.gamma1 = field<double>(j, "gamma1", c.gamma1);
    c.gamma2 = field<double>(j, "gamma2", c.gamma2);
    if (j.contains("labels")) {
      const auto& l = j.at("labels");
      c.lambda = field<double>(l, "lambda", c.lambda);
      c.gamma = field<double>(l, "gamma", c.gamma);
      c.h = field<double>(l, "H", c.h);
    }
    if (j.contains("epsilon")) c.epsilon = field<double>(j, "epsilon", 0.5);
    if (j.contains("coupling")) {
      const auto& k = j.at("coupling");
      c.coupling.method = parse_coupling_method(field<std::string>(k, "method", "quantile"));
      c.coupling.ot_batch = field<std::size_t>(k, "ot_batch", c.coupling.ot_batch);
      const auto ot = field<std::string>(k, "ot_method", "exact");
      if (ot != "exact" && ot != "greedy") throw ConfigError("ot_method must be exact or greedy");
      c.coupling.ot_method = ot == "exact" ? OtMethod::Exact : OtMethod::Greedy;
      c.coupling.mesh_size = field<std::size_t>(k, "mesh_size", c.coupling.mesh_size);
      c.coupling.center_budget = field<std::size_t>(k, "center_budget", c.coupling.center_budget);
    }
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      const std::vector<std::pair<const char*, double*>> slots{
          {"A", &c.constants.A},   {"A1", &c.constants.A1}, {"A2", &c.constants.A2},
          {"A3", &c.constants.A3}, {"A4", &c.constants.A4}, {"A5", &c.constants.A5},
          {"C1", &c.constants.C1}, {"C2", &c.constants.C2}, {"C", &c.constants.C},
          {"C1p", &c.constants.C1p}, {"D", &c.constants.D}, {"B", &c.constants.B}};
      for (const auto& [name, slot] : slots) *slot = field<double>(k, name, *slot);
      c.constants.validate();
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      const auto reg = field<std::string>(s, "regime", "thm1");
      if (reg == "thm1") {
        c.schedule.regime = ScheduleRegime::Thm1;
      } else if (reg == "thm2") {
        c.schedule.regime = ScheduleRegime::Thm2;
      } else {
        throw ConfigError("schedule regime must be thm1 or thm2");
      }
      c.schedule.alpha = rational_field(s, "alpha", c.schedule.alpha);
      c.schedule.tau1 = rational_field(s, "tau1", c.schedule.tau1);
      c.schedule.tau2 = rational_field(s, "tau2", c.schedule.tau2);
      c.schedule.kappa = rational_field(s, "kappa", c.schedule.kappa);
      c.schedule.beta = field<double>(s, "beta", c.schedule.beta);
      c.schedule.n_blocks = field<std::vector<std::size_t>>(s, "N", c.schedule.n_blocks);
    }
    if (j.contains("strong")) {
      const auto& s = j.at("strong");
      c.strong.method = parse_coupling_method(field<std::string>(s, "method", "quantile"));
      c.strong.ot_batch = field<std::size_t>(s, "ot_batch", c.strong.ot_batch);
      c.strong.budget = field<double>(s, "budget", c.strong.budget);
    }
    if (j.contains("eval_functions")) {
      for (const auto& p : j.at("eval_functions")) {
        c.eval_functions.emplace_back(p.is_array() ? p.get<std::vector<double>>()
                                                   : std::vector<double>{p.get<double>()});
      }
      for (const auto& p : c.eval_functions) c.cls.validate(p);
    }
    c.eval_epsilon = field<double>(j, "eval_epsilon", c.eval_epsilon);
    if (j.contains("entropy")) {
      const auto& e = j.at("entropy");
      c.entropy.epsilons = field<std::vector<double>>(e, "epsilons", c.entropy.epsilons);
      const auto count = field<std::string>(e, "count", "covering");
      if (count != "covering" && count != "bracketing") throw ConfigError("entropy count must be covering or bracketing");
      c.entropy.count = count == "covering" ? CountKind::Covering : CountKind::Bracketing;
      c.entropy.mesh_size = field<std::size_t>(e, "mesh_size", c.entropy.mesh_size);
    }
    c.mc_reps = field<std::size_t>(j, "mc_reps", c.mc_reps);
    if (j.contains("output")) {
      c.out_dir = field<std::string>(j.at("output"), "dir", c.out_dir);
      c.format = field<std::string>(j.at("output"), "format", c.format);
    }
    if (c.format != "csv" && c.format != "json") throw ConfigError("output format must be csv or json");
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& y, RateModel model,
                 double comparison) {
  if (n.size() != y.size()) throw ShapeError("fit_rate: abscissae and values differ in length");
  if (n.size() < 3) throw FitError("fit_rate: at least three n values required");
  RateFit f;
  f.model = model == RateModel::Power ? "power" : "logpower";
  f.comparison = comparison;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 1.0) || !(y[i] > 0.0)) throw FitError("fit_rate: needs n > 1 and positive values");
    f.x.push_back(model == RateModel::Power ? std::log(n[i]) : std::log(std::log(n[i])));
    f.y.push_back(std::log(y[i]));
  }
  const LineFit lf = linear_fit(f.x, f.y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.residual = lf.residual;
  return f;
}

namespace {

struct Selection {
  double epsilon = 0.0;
  bool capped = false;
  DeltaT dt;
};

Selection select_for(const ExperimentConfig& c, std::size_t n) {
  Selection s;
  const bool vc = c.regime.kind == EntropyRegime::Kind::VC;
  if (c.epsilon) {
    s.epsilon = *c.epsilon;
  } else if (vc) {
    s.epsilon = select_epsilon_vc(static_cast<double>(n), c.regime.nu0);
  } else {
    const auto br = select_epsilon_br(static_cast<double>(n), c.regime.b0, c.regime.r0, c.br_cap);
    s.epsilon = br.epsilon;
    s.capped = br.capped;
  }
  s.dt = select_delta_t(s.epsilon, c.regime.kind, c.gamma1, c.gamma2,
                        vc ? std::nullopt : std::optional<double>(c.regime.r0));
  return s;
}

}  // namespace

GaussResult run_gauss_approx(const ExperimentConfig& c) {
  const ClassModel model(c.cls, c.dist);
  const ExecPolicy policy{c.workers};
  GaussResult out;
  std::vector<double> ns;
  std::vector<double> medians;
  for (const std::size_t n : c.n_grid) {
    const Selection sel = select_for(c, n);
    const CouplingEngine engine(model, sel.epsilon, c.coupling, policy);
    const std::uint64_t master = stream_master(c.seed, n);
    auto reps = run_isolated<CouplingRealization>(c.replications, policy, [&](std::size_t r) {
      return engine.construct(n, replication_seed(master, r, 0));
    });
    GaussSummary sum;
    sum.n = n;
    sum.epsilon = sel.epsilon;
    sum.epsilon_capped = sel.capped;
    sum.grid_size = engine.grid().size();
    std::vector<double> g;
    std::vector<double> m;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      ++out.attempted;
      if (!reps[r].value) {
        ++out.failures;
        ++sum.failed;
        out.errors.push_back("n=" + std::to_string(n) + " rep=" + std::to_string(r) + ": " + reps[r].error);
        continue;
      }
      const auto& cr = *reps[r].value;
      out.rows.push_back({n, r, cr.seeds, sel.epsilon, sel.dt.delta, sel.dt.t, cr.sup_grid, cr.sup_mesh,
                          cr.transport_cost});
      g.push_back(cr.sup_grid);
      m.push_back(cr.sup_mesh);
    }
    if (!g.empty()) {
      sum.median_grid = median(g);
      sum.median_mesh = median(m);
      sum.q10_grid = quantile(g, 0.1);
      sum.q90_grid = quantile(g, 0.9);
      sum.q10_mesh = quantile(m, 0.1);
      sum.q90_mesh = quantile(m, 0.9);
      ns.push_back(static_cast<double>(n));
      medians.push_back(sum.median_grid);
    }
    out.summary.push_back(sum);
  }
  if (ns.size() >= 3 && std::all_of(medians.begin(), medians.end(), [](double v) { return v > 0.0; })) {
    if (c.regime.kind == EntropyRegime::Kind::VC) {
      out.fit = fit_rate(ns, medians, RateModel::Power, -1.0 / (2.0 + 5.0 * c.regime.nu0));
    } else {
      out.fit = fit_rate(ns, medians, RateModel::LogPower, -(1.0 - c.regime.r0) / (2.0 * c.regime.r0));
    }
  }
  return out;
}

BlockingSchedule make_schedule(const ScheduleSpec& spec, std::size_t n_blocks) {
  if (spec.regime == ScheduleRegime::Thm1) {
    return schedule_vc_exact(spec.alpha.numerator(), spec.alpha.denominator(), spec.tau1.numerator(),
                             spec.tau1.denominator(), boost::rational_cast<double>(spec.tau2), n_blocks);
  }
  if (spec.regime == ScheduleRegime::Thm2) {
    return schedule_br(boost::rational_cast<double>(spec.kappa), n_blocks, spec.beta);
  }
  throw ScheduleError("make_schedule: custom schedules are not configurable");
}

std::vector<Param> strong_functions(const ExperimentConfig& c, const ClassModel& model) {
  if (!c.eval_functions.empty()) return c.eval_functions;
  return build_grid(model, c.eval_epsilon, model.function_class().verification_mesh(c.coupling.mesh_size),
                    c.coupling.center_budget, ExecPolicy{c.workers})
      .centers;
}

StrongResult run_strong_approx(const ExperimentConfig& c) {
  const ClassModel model(c.cls, c.dist);
  const ExecPolicy policy{c.workers};
  const GridCoupler coupler(model, strong_functions(c, model), c.strong.method, c.strong.ot_batch,
                            c.strong.ot_method);
  StrongResult out;
  double tau_shape = 0.0;
  double log_power = 0.0;
  if (c.schedule.regime == ScheduleRegime::Thm1) {
    tau_shape = boost::rational_cast<double>(rate_thm1(c.schedule.alpha, c.schedule.tau1));
    log_power = boost::rational_cast<double>(c.schedule.tau2);
  } else {
    tau_shape = 0.0;
    log_power = -boost::rational_cast<double>(rate_thm2(c.schedule.kappa).tau);
  }
  for (const std::size_t nb : c.schedule.n_blocks) {
    const BlockingSchedule sched = make_schedule(c.schedule, nb);
    const std::uint64_t master = stream_master(c.seed, nb);
    auto reps = run_isolated<PathDiscrepancy>(c.replications, policy, [&](std::size_t r) {
      return run_sequential(coupler, sched, c.strong, replication_seed(master, r, phase::kBlock));
    });
    std::vector<double> mx;
    std::vector<double> nz;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      ++out.attempted;
      if (!reps[r].value) {
        ++out.failures;
        out.errors.push_back("N=" + std::to_string(nb) + " rep=" + std::to_string(r) + ": " + reps[r].error);
        continue;
      }
      const auto& p = *reps[r].value;
      out.rows.push_back({r, to_string(sched.regime), nb, p.t_total, p.m_star, p.max_discrepancy, p.normalized});
      mx.push_back(p.max_discrepancy);
      nz.push_back(p.normalized);
    }
    StrongSummary s;
    s.n_blocks = nb;
    s.t_n = sched.t_total();
    if (!mx.empty()) {
      s.median_max = median(mx);
      s.median_normalized = median(nz);
    }
    // thm1: t^{1/2 - tau(alpha)} (log t)^{tau2}; thm2: sqrt(t) (log t)^{-tau}.
    s.envelope = std::pow(s.t_n, 0.5 - tau_shape) * std::pow(std::log(s.t_n), log_power);
    s.ratio = s.envelope > 0.0 ? s.median_max / s.envelope : 0.0;
    out.summary.push_back(s);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& s : out.summary) {
    lo = std::min(lo, s.ratio);
    hi = std::max(hi, s.ratio);
  }
  out.envelope_drift = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (out.summary.size() >= 2) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& s : out.summary) {
      if (s.median_normalized > 0.0) {
        x.push_back(std::log(s.t_n));
        y.push_back(std::log(s.median_normalized));
      }
    }
    if (x.size() >= 2) out.trend_slope = linear_fit(x, y).slope;
  }
  return out;
}

EntropyReport run_entropy(const ExperimentConfig& c) {
  const ClassModel model(c.cls, c.dist);
  const auto mesh = c.cls.verification_mesh(c.entropy.mesh_size);
  return fit_entropy(model, c.entropy.epsilons, mesh, c.regime.kind, c.entropy.count, ExecPolicy{c.workers});
}

namespace {

ValidityCheck proportion(std::string name, std::string setting, double t, double bound,
                         const std::vector<char>& hits) {
  ValidityCheck v;
  v.name = std::move(name);
  v.setting = std::move(setting);
  v.t = t;
  v.bound = bound;
  double k = 0.0;
  for (char h : hits) k += h;
  const auto r = static_cast<double>(hits.size());
  v.estimate = k / r;
  v.se = std::sqrt(std::max(v.estimate * (1.0 - v.estimate), 1.0 / r) / r);
  return v;
}

}  // namespace

std::vector<ValidityCheck> explicit_constant_checks(std::size_t reps, std::uint64_t seed,
                                                    const ExecPolicy& policy) {
  std::vector<ValidityCheck> out;
  if (reps < 2) throw DomainError("validity checks need at least two replications");
  const ClassModel model(FunctionClass::intervals(), Distribution::uniform());
  std::vector<Param> grid;
  for (int k = 1; k < 16; ++k) grid.push_back(Param{k / 16.0});
  const BridgeModel bridge = make_bridge(model, grid);
  const double sigma = 0.5;  // sup of sqrt(theta (1 - theta))

  // Gaussian concentration, singleton index set: | |Z| - E|Z| |.
  {
    std::vector<double> z(reps);
    for_each_index(reps, policy, [&](std::size_t r) {
      Rng rng = make_rng(replication_seed(seed, r, phase::kGaussian));
      z[r] = std::abs(standard_normal(rng));
    });
    const double mean_abs = std::sqrt(2.0 / std::numbers::pi);
    for (double t : {1.0, 2.0, 3.0}) {
      std::vector<char> hit(reps);
      for (std::size_t r = 0; r < reps; ++r) hit[r] = std::abs(z[r] - mean_abs) > t;
      out.push_back(proportion("borell", "singleton N(0,1)", t, borell_tail(t, 1.0), hit));
    }
  }
  // Gaussian concentration, bridge on 15 interval indicators.
  {
    std::vector<double> norm(reps);
    for_each_index(reps, policy, [&](std::size_t r) {
      const auto g = sample_bridge(bridge, replication_seed(seed ^ 0x1ULL, r, phase::kGaussian));
      double m = 0.0;
      for (double v : g) m = std::max(m, std::abs(v));
      norm[r] = m;
    });
    const double mean = mean_se(norm).mean;
    for (double t : {0.5 * sigma, sigma, 2.0 * sigma, 3.0 * sigma}) {
      std::vector<char> hit(reps);
      for (std::size_t r = 0; r < reps; ++r) hit[r] = std::abs(norm[r] - mean) > t;
      out.push_back(proportion("borell", "bridge, 15 interval indicators", t, borell_tail(t, sigma), hit));
    }
  }
  // Maximal inequality with (9, 30), sums of 64 Rademacher signs.
  {
    const std::size_t n = 64;
    std::vector<double> mx(reps);
    std::vector<double> last(reps);
    for_each_index(reps, policy, [&](std::size_t r) {
      Rng rng = make_rng(replication_seed(seed ^ 0x2ULL, r, phase::kRademacher));
      double s = 0.0;
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += rademacher(rng);
        m = std::max(m, std::abs(s));
      }
      mx[r] = m;
      last[r] = std::abs(s);
    });
    for (double t : {4.0, 8.0, 16.0, 32.0}) {
      std::vector<char> hit(reps);
      std::vector<char> full(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        hit[r] = mx[r] > t;
        full[r] = last[r] > t / 30.0;
      }
      const ValidityCheck tail = proportion("", "", t / 30.0, 0.0, full);
      ValidityCheck v = proportion("maximal_9_30", "64 Rademacher signs", t,
                                   ms_bound([&](double) { return tail.estimate; }, t), hit);
      v.se = std::sqrt(v.se * v.se + (v.bound < 1.0 ? 81.0 * tail.se * tail.se : 0.0));
      out.push_back(v);
    }
  }
  // Partial sums of 64 i.i.d. bridges: maximal inequality and the Gaussian
  // partial-sum tail with D = B = 1.
  {
    const std::size_t n = 64;
    std::vector<double> mx(reps);
    std::vector<double> last(reps);
    for_each_index(reps, policy, [&](std::size_t r) {
      Rng rng = make_rng(replication_seed(seed ^ 0x3ULL, r, phase::kGaussian));
      std::vector<double> s(grid.size(), 0.0);
      std::vector<double> g(grid.size());
      double m = 0.0;
      double nrm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sample_bridge(bridge, rng, g);
        nrm = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
          s[k] += g[k];
          nrm = std::max(nrm, std::abs(s[k]));
        }
        m = std::max(m, nrm);
      }
      mx[r] = m;
      last[r] = nrm;
    });
    for (double t : {8.0, 16.0, 24.0}) {
      std::vector<char> hit(reps);
      std::vector<char> full(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        hit[r] = mx[r] > t;
        full[r] = last[r] > t / 30.0;
      }
      const ValidityCheck tail = proportion("", "", t / 30.0, 0.0, full);
      ValidityCheck v = proportion("maximal_9_30", "64 bridges on 15 indicators, sup norm", t,
                                   ms_bound([&](double) { return tail.estimate; }, t), hit);
      v.se = std::sqrt(v.se * v.se + (v.bound < 1.0 ? 81.0 * tail.se * tail.se : 0.0));
      out.push_back(v);
    }
    const BoundConstants c;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double t : {0.25, 0.5, 1.0, 1.5}) {
      const BoundReport rep = combined_tail_gaussian(t, static_cast<double>(n), sigma * sigma, c);
      std::vector<char> hit(reps);
      for (std::size_t r = 0; r < reps; ++r) hit[r] = mx[r] > c.D * root_n * (c.B + t);
      out.push_back(proportion("gaussian_partial_sums", "64 bridges on 15 indicators, D = B = 1", t,
                               rep.rhs, hit));
    }
  }
  return out;
}

BudgetAudit audit_budget(const ClassModel& model, std::size_t n, double gamma1, double gamma2,
                         std::size_t reps, std::size_t mesh_size, std::uint64_t seed,
                         const BoundConstants& constants, const ExecPolicy& policy) {
  const auto& cls = model.function_class();
  const EntropyRegime regime = cls.regime();
  if (regime.kind != EntropyRegime::Kind::VC) throw UnsupportedError("budget audit: VC regime only");
  BudgetAudit a;
  a.n = n;
  a.epsilon = select_epsilon_vc(static_cast<double>(n), regime.nu0);
  const DeltaT dt = select_delta_t(a.epsilon, regime.kind, gamma1, gamma2);
  a.delta = dt.delta;
  a.t = dt.t;
  CouplingConfig cfg;
  cfg.mesh_size = mesh_size;
  const CouplingEngine engine(model, a.epsilon, cfg, policy);
  a.grid_size = engine.grid().size();
  const PairSet pairs = build_pairset(model, a.epsilon, engine.mesh());
  const std::uint64_t master = stream_master(seed, n);
  a.mu_n = mu_n_estimate(model, pairs, n, reps, master ^ 0x11ULL, SignMethod::MonteCarlo, policy);
  a.mu = mu_estimate(model, pairs, reps, master ^ 0x22ULL, policy);
  const double m = cls.envelope();
  const double eps = a.epsilon;
  a.a2_fit = a.mu_n.value / (eps * std::sqrt(2.0 * regime.nu0 * std::log(std::max(m, 1.0 / eps))));
  a.a4_fit = a.mu.value / dudley_power(1.0, 2.0 * regime.nu0, std::min(eps, 1.0)).value;
  BoundConstants c = constants;
  c.A2 = a.a2_fit;
  c.A4 = a.a4_fit;
  BudgetInputs in;
  in.epsilon = eps;
  in.delta = a.delta;
  in.t = a.t;
  in.n = static_cast<double>(n);
  in.envelope_m = m;
  in.regime = regime;
  in.n_eps = static_cast<double>(a.grid_size);
  a.budget = error_budget(in, c);
  const double threshold = *a.budget.threshold;
  std::vector<char> hit(reps);
  for_each_index(reps, policy, [&](std::size_t r) {
    hit[r] = engine.construct(n, replication_seed(master, r, 0)).sup_mesh > threshold;
  });
  const ValidityCheck v = proportion("budget", "", 0.0, 0.0, hit);
  a.exceed = v.estimate;
  a.exceed_se = v.se;
  return a;
}

namespace {

Json named(const NamedValues& v) {
  Json j = Json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

Json to_json(const ValidityCheck& v) {
  return Json{{"name", v.name}, {"setting", v.setting}, {"t", v.t}, {"bound", v.bound},
              {"estimate", v.estimate}, {"se", v.se}, {"violated", v.violated()}};
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"se", e.se}, {"exact", e.exact}}; }

Json to_json(const BudgetAudit& a) {
  return Json{{"n", a.n},
              {"epsilon", a.epsilon},
              {"delta", a.delta},
              {"t", a.t},
              {"grid_size", a.grid_size},
              {"mu_n", to_json(a.mu_n)},
              {"mu", to_json(a.mu)},
              {"A2_fit", a.a2_fit},
              {"A4_fit", a.a4_fit},
              {"exceed", a.exceed},
              {"exceed_se", a.exceed_se},
              {"budget", to_json(a.budget)},
              {"holds", a.holds()}};
}

}  // namespace

Json bounds_audit(const ExperimentConfig& c) {
  const ExecPolicy policy{c.workers};
  Json j;
  j["constants"] = named(c.constants.items());
  j["labels"] = Json{{"lambda", c.lambda}, {"gamma", c.gamma}, {"H", c.h},
                     {"note", "target tail levels only, not certified"}};
  Json reports = Json::array();
  reports.push_back(to_json(talagrand_tail(1.0, 4.0, 1.0, 1.0, 0.0, c.constants)));
  reports.push_back(to_json(vc_moment_bound(1e4, 1.0 / 16.0, 1.0, 2.0, 2.0, 1.0, c.constants)));
  reports.push_back(to_json(br_moment_bound(0.25, 1.0, 0.5, 100.0, 1.0, c.constants)));
  reports.push_back(to_json(borell_report(3.0, 1.0)));
  BudgetInputs in;
  in.epsilon = 0.5;
  in.n_eps = 2.0;
  reports.push_back(to_json(error_budget(in, c.constants)));
  reports.push_back(to_json(combined_tail_empirical(1.0, 100.0, 0.25, 1.0, c.constants)));
  reports.push_back(to_json(combined_tail_gaussian(1.5, 100.0, 0.25, c.constants)));
  j["reports"] = reports;
  Json checks = Json::array();
  std::size_t violations = 0;
  for (const auto& v : explicit_constant_checks(c.mc_reps, c.seed, policy)) {
    checks.push_back(to_json(v));
    violations += v.violated() ? 1 : 0;
  }
  j["validity"] = checks;
  j["violations"] = violations;
  if (c.regime.kind == EntropyRegime::Kind::VC) {
    const ClassModel model(c.cls.with_regime(c.regime), c.dist);
    Json audits = Json::array();
    double lo2 = std::numeric_limits<double>::infinity(), hi2 = 0.0, lo4 = lo2, hi4 = 0.0;
    bool all_hold = true;
    for (const std::size_t n : c.n_grid) {
      const auto a = audit_budget(model, n, c.gamma1, c.gamma2, c.replications, c.coupling.mesh_size, c.seed,
                                  c.constants, policy);
      audits.push_back(to_json(a));
      lo2 = std::min(lo2, a.a2_fit);
      hi2 = std::max(hi2, a.a2_fit);
      lo4 = std::min(lo4, a.a4_fit);
      hi4 = std::max(hi4, a.a4_fit);
      all_hold = all_hold && a.holds();
    }
    j["budget"] = audits;
    j["budget_all_hold"] = all_hold;
    j["A2_spread"] = lo2 > 0.0 ? hi2 / lo2 : 0.0;
    j["A4_spread"] = lo4 > 0.0 ? hi4 / lo4 : 0.0;
  }
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const CouplingRealization& r) {
  return Json{{"n", r.n},
              {"epsilon", r.epsilon},
              {"grid_size", r.grid_size},
              {"sup_grid", r.sup_grid},
              {"sup_mesh", r.sup_mesh},
              {"transport_cost", r.transport_cost},
              {"seeds", Json{{"master", r.seeds.master}, {"stream", r.seeds.stream}}}};
}

Json to_json(const BoundReport& r) {
  Json j{{"name", r.name},
         {"inputs", named(r.inputs)},
         {"constants", named(r.constants)},
         {"rhs", r.rhs},
         {"threshold", r.threshold ? Json(*r.threshold) : Json(nullptr)},
         {"preconditions_ok", r.preconditions_ok},
         {"failing_condition", r.failing_condition}};
  return j;
}

Json to_json(const EntropyReport& r) {
  Json j{{"regime", r.regime == EntropyRegime::Kind::VC ? "VC" : "BR"},
         {"epsilons", r.epsilons},
         {"counts", r.counts},
         {"residual", r.residual}};
  if (r.regime == EntropyRegime::Kind::VC) {
    j["c0"] = r.c0;
    j["nu0"] = r.nu0;
  } else {
    j["b0"] = r.b0;
    j["r0"] = r.r0;
  }
  return j;
}

Json to_json(const RateFit& f) {
  return Json{{"model", f.model}, {"x", f.x}, {"y", f.y}, {"slope", f.slope}, {"intercept", f.intercept},
              {"residual", f.residual}, {"comparison", f.comparison}};
}

Json to_json(const GaussResult& r) {
  Json s = Json::array();
  for (const auto& x : r.summary) {
    s.push_back(Json{{"n", x.n}, {"epsilon", x.epsilon}, {"epsilon_capped", x.epsilon_capped},
                     {"grid_size", x.grid_size}, {"median_grid", x.median_grid},
                     {"median_mesh", x.median_mesh}, {"q10_grid", x.q10_grid}, {"q90_grid", x.q90_grid},
                     {"q10_mesh", x.q10_mesh}, {"q90_mesh", x.q90_mesh}, {"failed", x.failed}});
  }
  Json j{{"summary", s}, {"failures", r.failures}, {"attempted", r.attempted}, {"errors", r.errors}};
  j["fit"] = r.fit ? to_json(*r.fit) : Json(nullptr);
  return j;
}

Json to_json(const StrongResult& r) {
  Json s = Json::array();
  for (const auto& x : r.summary) {
    s.push_back(Json{{"N", x.n_blocks}, {"t_N", x.t_n}, {"median_max", x.median_max},
                     {"median_normalized", x.median_normalized}, {"envelope", x.envelope}, {"ratio", x.ratio}});
  }
  return Json{{"summary", s}, {"envelope_drift", r.envelope_drift}, {"trend_slope", r.trend_slope}, {"failures", r.failures},
              {"attempted", r.attempted}, {"errors", r.errors}};
}

std::string gauss_csv(const GaussResult& r) {
  std::ostringstream os;
  os << kGaussCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.rep << ',' << row.seed.to_string() << ',' << format_double(row.epsilon) << ','
       << format_double(row.delta) << ',' << format_double(row.t) << ',' << format_double(row.sup_grid) << ','
       << format_double(row.sup_mesh) << ',' << format_double(row.transport_cost) << '\n';
  }
  return os.str();
}

std::string strong_csv(const StrongResult& r) {
  std::ostringstream os;
  os << kStrongCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.run_id << ',' << row.regime << ',' << row.n_blocks << ',' << format_double(row.t_n) << ','
       << row.m_star << ',' << format_double(row.max_discrepancy) << ',' << format_double(row.normalized) << '\n';
  }
  return os.str();
}

void emit(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory for '" + path + "': " + ec.message());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace epsim

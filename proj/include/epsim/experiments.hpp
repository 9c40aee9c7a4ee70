#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "epsim/bounds.hpp"
#include "epsim/coupling.hpp"
#include "epsim/entropy.hpp"
#include "epsim/strong_approx.hpp"

namespace epsim {

using Json = nlohmann::ordered_json;

FunctionClass parse_class(const Json& j);
Distribution parse_distribution(const Json& j);
EntropyRegime parse_regime(const Json& j);

struct ScheduleSpec {
  ScheduleRegime regime = ScheduleRegime::Thm1;
  Rational alpha{5};
  Rational tau1{1, 7};
  Rational tau2{9, 14};
  Rational kappa{1, 6};
  double beta = 0.7;
  std::vector<std::size_t> n_blocks{4, 5, 6, 7};
};

struct EntropySpec {
  std::vector<double> epsilons{0.2, 0.14, 0.1, 0.07, 0.05};
  CountKind count = CountKind::Covering;
  std::size_t mesh_size = kDefaultMeshSize;
};

/// One experiment, read from a JSON document (schema in README.md).
struct ExperimentConfig {
  std::string kind = "gauss-approx";
  FunctionClass cls = FunctionClass::intervals();
  Distribution dist = Distribution::uniform();
  std::vector<std::size_t> n_grid{256, 1024, 4096, 16384};
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  EntropyRegime regime;
  double br_cap = kDefaultBrCap;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  // Target tail labels only: n^-lambda, t_N^-gamma, (log n)^-H.
  double lambda = 2.0;
  double gamma = 1.0;
  double h = 1.0;
  std::optional<double> epsilon;
  CouplingConfig coupling;
  BoundConstants constants;
  ScheduleSpec schedule;
  StrongConfig strong;
  std::vector<Param> eval_functions;
  double eval_epsilon = 0.3;
  EntropySpec entropy;
  std::size_t mc_reps = 100000;
  std::string out_dir;  // empty: stdout
  std::string format = "csv";
};

/// Throws ConfigError on missing or invalid fields.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

struct RateFit {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double comparison = 0.0;
  std::string model;
};

enum class RateModel { Power, LogPower };

/// log y against log n (power) or log log n (log-power).
RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& y, RateModel model,
                 double comparison = 0.0);

struct GaussRow {
  std::size_t n = 0;
  std::size_t rep = 0;
  SeedSpec seed;
  double epsilon = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double sup_grid = 0.0;
  double sup_mesh = 0.0;
  double transport_cost = 0.0;
};

struct GaussSummary {
  std::size_t n = 0;
  double epsilon = 0.0;
  bool epsilon_capped = false;
  std::size_t grid_size = 0;
  double median_grid = 0.0;
  double median_mesh = 0.0;
  double q10_grid = 0.0;
  double q90_grid = 0.0;
  double q10_mesh = 0.0;
  double q90_mesh = 0.0;
  std::size_t failed = 0;
};

struct GaussResult {
  std::vector<GaussRow> rows;
  std::vector<GaussSummary> summary;
  std::optional<RateFit> fit;
  std::size_t failures = 0;
  std::size_t attempted = 0;
  std::vector<std::string> errors;

  [[nodiscard]] bool failed() const { return failures * 100 > attempted; }
};

/// Replicated couplings for every n of the grid with the regime's
/// epsilon, delta and t.
GaussResult run_gauss_approx(const ExperimentConfig& config);

struct StrongRow {
  std::size_t run_id = 0;
  std::string regime;
  std::size_t n_blocks = 0;
  double t_n = 0.0;
  std::size_t m_star = 0;
  double max_discrepancy = 0.0;
  double normalized = 0.0;
};

struct StrongSummary {
  std::size_t n_blocks = 0;
  double t_n = 0.0;
  double median_max = 0.0;
  double median_normalized = 0.0;
  double envelope = 0.0;  // rate shape at t_N
  double ratio = 0.0;     // median_max / envelope
};

struct StrongResult {
  std::vector<StrongRow> rows;
  std::vector<StrongSummary> summary;
  double envelope_drift = 0.0;  // max ratio / min ratio
  double trend_slope = 0.0;     // log median normalized vs log t_N
  std::size_t failures = 0;
  std::size_t attempted = 0;
  std::vector<std::string> errors;

  [[nodiscard]] bool failed() const { return failures * 100 > attempted; }
};

BlockingSchedule make_schedule(const ScheduleSpec& spec, std::size_t n_blocks);
/// Evaluation functions: configured list, else an epsilon-net at eval_epsilon.
std::vector<Param> strong_functions(const ExperimentConfig& config, const ClassModel& model);
StrongResult run_strong_approx(const ExperimentConfig& config);

EntropyReport run_entropy(const ExperimentConfig& config);

/// Monte Carlo check of an explicit-constant tail bound.
struct ValidityCheck {
  std::string name;
  std::string setting;
  double t = 0.0;
  double bound = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  [[nodiscard]] bool violated() const { return estimate > bound + 3.0 * se; }
};

/// Borell, maximal-inequality (9, 30) and Gaussian partial-sum tail checks
/// on the documented grid, `reps` replications each.
std::vector<ValidityCheck> explicit_constant_checks(std::size_t reps, std::uint64_t seed,
                                                    const ExecPolicy& policy = {});

/// Coupling budget audit at one n: Monte Carlo moduli give the smallest
/// moment-bound constants A2 and A4; the threshold uses them, and the
/// tail of the mesh discrepancy is compared with the budget.
struct BudgetAudit {
  std::size_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double t = 0.0;
  std::size_t grid_size = 0;
  Estimate mu_n;
  Estimate mu;
  double a2_fit = 0.0;
  double a4_fit = 0.0;
  double exceed = 0.0;     // MC probability of exceeding the threshold
  double exceed_se = 0.0;
  BoundReport budget;
  [[nodiscard]] bool holds() const { return exceed <= budget.rhs; }
};

BudgetAudit audit_budget(const ClassModel& model, std::size_t n, double gamma1, double gamma2,
                         std::size_t reps, std::size_t mesh_size, std::uint64_t seed,
                         const BoundConstants& constants = {}, const ExecPolicy& policy = {});

Json bounds_audit(const ExperimentConfig& config);

// Serialization. Output is a pure function of the inputs.
std::string format_double(double v);
Json to_json(const CouplingRealization& r);
Json to_json(const BoundReport& r);
Json to_json(const EntropyReport& r);
Json to_json(const RateFit& f);
Json to_json(const GaussResult& r);
Json to_json(const StrongResult& r);
std::string gauss_csv(const GaussResult& r);
std::string strong_csv(const StrongResult& r);
inline constexpr const char* kGaussCsvHeader = "n,rep,seed,epsilon,delta,t,sup_grid,sup_mesh,transport_cost";
inline constexpr const char* kStrongCsvHeader = "run_id,regime,N,t_N,m_star,max_discrepancy,normalized";

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void emit(const std::string& path, const std::string& content);

}  // namespace epsim

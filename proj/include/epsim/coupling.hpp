#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epsim/bridge.hpp"
#include "epsim/empirical.hpp"
#include "epsim/entropy.hpp"
#include "epsim/function_class.hpp"
#include "epsim/transport.hpp"

namespace epsim {

struct ZaitsevParams {
  double c1 = 1.0;
  double c2 = 1.0;
};

/// C1 N^2 exp(-C2 delta / (N^2 B)), unclamped.
double zaitsev_bound(double n_dim, double b, double delta, const ZaitsevParams& params = {});
/// The bound with B = M sqrt(N/n): C1 N^2 exp(-C2 sqrt(n) delta / (N^{5/2} M)).
double zaitsev_grid_tail(double n, double envelope_m, double n_eps, double delta,
                         const ZaitsevParams& params = {});
inline double clamp_probability(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

/// ((log n)/n)^{1/(2 + 5 nu0)}.
double select_epsilon_vc(double n, double nu0);

struct BrEpsilon {
  double epsilon = 0.0;
  double uncapped = 0.0;
  bool capped = false;
  double induced = 0.0;  // exp(-5 2^{2r} b^2 / (2 eps^{2r})), n^{-1/4} when uncapped
};

inline constexpr double kDefaultBrCap = 0.36787944117144233;  // 1/e

/// (10 b0^2 2^{2 r0} / log n)^{1/(2 r0)}, replaced by `cap` when it reaches it.
BrEpsilon select_epsilon_br(double n, double b0, double r0, double cap = kDefaultBrCap);

struct DeltaT {
  double delta = 0.0;
  double t = 0.0;
};

/// VC: gamma eps sqrt(log(1/eps)); BR: gamma eps^{1 - r0}.
DeltaT select_delta_t(double epsilon, EntropyRegime::Kind regime, double gamma1, double gamma2,
                      std::optional<double> r0 = std::nullopt);

/// How the Y-sum is paired with a Gaussian vector of the grid covariance.
/// Quantile: sequential conditional-quantile transform of the grid cell
/// counts (needs a cell partition). Transport: batch assignment between m
/// Y-sum draws and m Gaussian draws, reading off the match of the observed one.
enum class CouplingMethod { Quantile, Transport };

std::string to_string(CouplingMethod m);
CouplingMethod parse_coupling_method(const std::string& s);

struct CouplingConfig {
  CouplingMethod method = CouplingMethod::Quantile;
  std::size_t ot_batch = 256;
  OtMethod ot_method = OtMethod::Exact;
  std::size_t mesh_size = kDefaultMeshSize;
  std::size_t center_budget = kDefaultCenterBudget;
};

/// Gaussian cell weights W ~ N(0, diag(p) - p p^T) coupled to multinomial
/// counts: each W_j is the conditional Gaussian quantile at the randomized
/// binomial PIT of count j given the earlier cells. Throws NumericError when
/// a zero-probability cell is occupied.
std::vector<double> quantile_cell_weights(const std::vector<double>& probabilities,
                                          const std::vector<std::size_t>& counts, std::size_t n,
                                          Rng& rng);

/// Couples the Y-sum on a fixed list of class members to a Gaussian vector
/// with their covariance.
class GridCoupler {
 public:
  GridCoupler(const ClassModel& model, std::vector<Param> functions,
              CouplingMethod method = CouplingMethod::Quantile, std::size_t ot_batch = 256,
              OtMethod ot_method = OtMethod::Exact);

  struct Outcome {
    std::vector<double> y;
    std::vector<double> z;
    double transport_cost = 0.0;
  };

  [[nodiscard]] Outcome couple(const SamplePath& sample, const SeedSpec& seed) const;

  /// sum_i Y_i with Y_i = n^{-1/2}(h_k(X_i) - E h_k)_k; checks |Y_i| <= M sqrt(N/n).
  [[nodiscard]] std::vector<double> y_sum(const SamplePath& sample) const;

  [[nodiscard]] const BridgeModel& bridge() const { return bridge_; }
  [[nodiscard]] const std::vector<Param>& functions() const { return bridge_.params; }
  [[nodiscard]] const std::vector<double>& means() const { return means_; }
  [[nodiscard]] const std::optional<CellPartition>& cells() const { return cells_; }
  [[nodiscard]] CouplingMethod method() const { return method_; }
  [[nodiscard]] const ClassModel& model() const { return model_; }
  [[nodiscard]] std::size_t size() const { return means_.size(); }

 private:
  [[nodiscard]] std::vector<double> draw_y_sum(std::size_t n, Rng& rng, const SeedSpec& seed) const;

  ClassModel model_;
  CouplingMethod method_;
  std::size_t ot_batch_;
  OtMethod ot_method_;
  std::vector<double> means_;
  std::optional<CellPartition> cells_;
  BridgeModel bridge_;
};

struct CouplingRealization {
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t grid_size = 0;
  std::vector<double> y_sum;  // alpha_n on the grid
  std::vector<double> z_sum;  // coupled Gaussian on the grid
  double sup_grid = 0.0;
  double euclid_grid = 0.0;
  double sup_mesh = 0.0;
  double transport_cost = 0.0;
  // Measured moduli: sup over mesh members f of |alpha(f) - alpha(h_f)| and
  // |G(f) - G(h_f)| with h_f the nearest grid center.
  double modulus_alpha = 0.0;
  double modulus_bridge = 0.0;
  SeedSpec seeds;
};

/// Grid, verification mesh, coupler and conditional extender for one
/// (class, P, epsilon); realizations for any n reuse them.
class CouplingEngine {
 public:
  CouplingEngine(const ClassModel& model, double epsilon, const CouplingConfig& config = {},
                 const ExecPolicy& policy = {});

  [[nodiscard]] CouplingRealization construct(std::size_t n, const SeedSpec& seed) const;

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const std::vector<Param>& mesh() const { return mesh_; }
  [[nodiscard]] const GridCoupler& coupler() const { return coupler_; }
  [[nodiscard]] const ClassModel& model() const { return model_; }

 private:
  [[nodiscard]] std::vector<double> alpha_on_mesh(const SamplePath& sample) const;

  ClassModel model_;
  double epsilon_;
  std::vector<Param> mesh_;
  Grid grid_;
  GridCoupler coupler_;
  ConditionalExtender extender_;
  std::optional<CellPartition> mesh_cells_;
  std::vector<double> mesh_means_;
  std::vector<std::size_t> nearest_center_;
};

CouplingRealization construct_joint(const ClassModel& model, std::size_t n, double epsilon,
                                    const CouplingConfig& config, const SeedSpec& seed);

}  // namespace epsim

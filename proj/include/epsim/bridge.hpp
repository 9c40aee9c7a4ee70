#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epsim/empirical.hpp"
#include "epsim/function_class.hpp"
#include "epsim/rng.hpp"

namespace epsim {

/// L with L L^T = K, from a symmetric eigendecomposition. Eigenvalues in
/// [-1e-9, 0) are clamped to zero and the largest clamp is reported.
struct Factorization {
  Eigen::MatrixXd factor;
  double repair = 0.0;
};

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kSchurTolerance = 1e-7;
inline constexpr double kPinvCutoff = 1e-10;

/// Throws NumericError when K is not symmetric or has an eigenvalue below -1e-9.
Factorization factorize(const Eigen::MatrixXd& k);

/// The P-Brownian bridge restricted to a finite parameter list.
struct BridgeModel {
  std::vector<Param> params;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd factor;
  double repair = 0.0;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(cov.rows()); }
};

BridgeModel make_bridge(const ClassModel& model, std::vector<Param> params);
BridgeModel bridge_from_covariance(const Eigen::MatrixXd& cov);

/// L g for g i.i.d. N(0,1), drawn from `rng` (advances it) or from a fresh seed.
void sample_bridge(const BridgeModel& model, Rng& rng, std::span<double> out);
std::vector<double> sample_bridge(const BridgeModel& model, const SeedSpec& seed);

/// Conditional Gaussian law of new coordinates given grid coordinates:
/// mean W g with W = cross K^+, covariance marginal - W cross^T.
/// The pseudo-inverse drops eigenvalues below 1e-10 of the largest.
class ConditionalExtender {
 public:
  ConditionalExtender() = default;
  ConditionalExtender(const Eigen::MatrixXd& grid_cov, const Eigen::MatrixXd& cross,
                      const Eigen::MatrixXd& marginal);

  [[nodiscard]] std::size_t grid_size() const { return static_cast<std::size_t>(weights_.cols()); }
  [[nodiscard]] std::size_t new_size() const { return static_cast<std::size_t>(weights_.rows()); }
  [[nodiscard]] const Eigen::MatrixXd& weights() const { return weights_; }
  [[nodiscard]] const Eigen::MatrixXd& schur() const { return schur_; }

  void extend(std::span<const double> grid_values, Rng& rng, std::span<double> out) const;

 private:
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd schur_;
  Eigen::MatrixXd schur_factor_;
};

std::vector<double> conditional_extend(const Eigen::MatrixXd& grid_cov, const Eigen::MatrixXd& cross,
                                       const Eigen::MatrixXd& marginal,
                                       std::span<const double> grid_values, const SeedSpec& seed);

/// Mean over reps of sup over the pair set of |G(f) - G(f')|.
Estimate mu_estimate(const ClassModel& model, const PairSet& pairs, std::size_t reps,
                     std::uint64_t master_seed, const ExecPolicy& policy = {});

/// Entropy integral int_0^sigma sqrt(log N(x)) dx.
struct DudleyResult {
  double value = 0.0;
  double entropy_bound = 0.0;  // exp-law only: sqrt(2) b sigma^{1-r} / (1-r)
  std::string method;
};

enum class DudleyMethod { ClosedForm, Quadrature };

/// N(x) = c x^{-v}; log N is taken as max(0, .).
DudleyResult dudley_power(double c, double v, double sigma,
                          DudleyMethod method = DudleyMethod::ClosedForm);
/// log N(x) = b^2 x^{-2r}, r < 1.
DudleyResult dudley_exp(double b, double r, double sigma,
                        DudleyMethod method = DudleyMethod::ClosedForm);

/// Row-major CSV with 17 significant digits.
std::string covariance_csv(const Eigen::MatrixXd& k);

}  // namespace epsim

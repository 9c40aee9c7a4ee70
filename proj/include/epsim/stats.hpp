#pragma once

#include <span>
#include <vector>

namespace epsim {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
};

/// Ordinary least squares y = intercept + slope x. Throws FitError when
/// fewer than two points or all abscissae coincide.
LineFit linear_fit(std::span<const double> x, std::span<const double> y);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

/// Mean and standard error, accumulated in index order.
MeanSe mean_se(std::span<const double> v);
double variance(std::span<const double> v);
/// Linear-interpolated empirical quantile, q in [0,1].
double quantile(std::vector<double> v, double q);
inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace epsim

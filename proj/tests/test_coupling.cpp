#include <gtest/gtest.h>

#include <cmath>

#include "epsim/coupling.hpp"
#include "epsim/empirical.hpp"
#include "epsim/errors.hpp"
#include "epsim/stats.hpp"

using namespace epsim;

namespace {

ClassModel unit_intervals() { return ClassModel(FunctionClass::intervals(), Distribution::uniform()); }

}  // namespace

TEST(Zaitsev, ZeroDeltaIsPrefactor) {
  EXPECT_DOUBLE_EQ(zaitsev_bound(3.0, 0.5, 0.0, {2.0, 1.0}), 18.0);
}

TEST(Zaitsev, HandValue) {
  EXPECT_NEAR(zaitsev_bound(1.0, 1.0, std::log(2.0)), 0.5, 1e-15);
}

TEST(Zaitsev, MonotoneAndScaling) {
  double prev = zaitsev_bound(4.0, 0.3, 0.0);
  for (double d = 0.1; d < 5.0; d += 0.1) {
    const double v = zaitsev_bound(4.0, 0.3, d);
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double c1n2 = 16.0;
  const double e1 = std::log(c1n2 / zaitsev_bound(4.0, 0.3, 1.0));
  const double e2 = std::log(c1n2 / zaitsev_bound(4.0, 0.15, 1.0));
  EXPECT_NEAR(e2, 2.0 * e1, 1e-12);
}

TEST(Zaitsev, GridTailIdentity) {
  Rng rng = make_rng(SeedSpec{1, 0});
  for (int i = 0; i < 200; ++i) {
    const double n = 1.0 + std::floor(1e5 * uniform01(rng));
    const double m = 0.1 + 3.0 * uniform01(rng);
    const double ne = 1.0 + std::floor(50.0 * uniform01(rng));
    const double d = 5.0 * uniform01(rng);
    const ZaitsevParams p{0.5 + uniform01(rng), 0.5 + uniform01(rng)};
    const double a = zaitsev_grid_tail(n, m, ne, d, p);
    const double b = zaitsev_bound(ne, m * std::sqrt(ne / n), d, p);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, b));
  }
}

TEST(Zaitsev, GridTailHandValue) {
  EXPECT_NEAR(zaitsev_grid_tail(100.0, 1.0, 2.0, 1.0), 0.68285510159907225, 1e-14);
  EXPECT_LT(zaitsev_grid_tail(100.0, 1.0, 2.0, 1e6), 1e-300);
}

TEST(SelectEpsilon, VcHandValue) {
  EXPECT_NEAR(select_epsilon_vc(1024.0, 1.0), 0.48986348975574900, 1e-14);
}

TEST(SelectEpsilon, VcDecreasingInN) {
  double prev = select_epsilon_vc(3.0, 1.0);
  for (double n = 4.0; n < 1e7; n *= 1.7) {
    const double v = select_epsilon_vc(n, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double big = select_epsilon_vc(1000.0, 1e6);
  EXPECT_LT(big, 1.0);
  EXPECT_GT(big, 0.999);
}

TEST(SelectEpsilon, BrUncappedAndInduced) {
  const double n = std::exp(30.0);
  const auto r = select_epsilon_br(n, 1.0, 0.75, 0.99);
  EXPECT_FALSE(r.capped);
  // (10 * 2^{3/2} / 30)^{2/3}
  EXPECT_NEAR(r.epsilon, std::pow(10.0 * std::pow(2.0, 1.5) / 30.0, 2.0 / 3.0), 1e-14);
  EXPECT_NEAR(r.epsilon, 0.96153, 5e-5);
  EXPECT_NEAR(r.induced / std::pow(n, -0.25), 1.0, 1e-12);
}

TEST(SelectEpsilon, BrCappedAtDeskScale) {
  const auto r = select_epsilon_br(1e6, 1.0, 0.75);
  EXPECT_TRUE(r.capped);
  EXPECT_GT(r.uncapped, 1.0);
  EXPECT_EQ(r.epsilon, kDefaultBrCap);
}

TEST(SelectDeltaT, HandValues) {
  const auto vc = select_delta_t(std::exp(-1.0), EntropyRegime::Kind::VC, 1.0, 1.0);
  EXPECT_NEAR(vc.delta, 0.36787944117144233, 1e-15);
  EXPECT_NEAR(vc.t, 0.36787944117144233, 1e-15);
  const auto br = select_delta_t(0.25, EntropyRegime::Kind::BR, 2.0, 1.0, 0.5);
  EXPECT_NEAR(br.delta, 1.0, 1e-15);
  const auto a = select_delta_t(0.3, EntropyRegime::Kind::VC, 1.5, 0.7);
  const auto b = select_delta_t(0.3, EntropyRegime::Kind::VC, 3.0, 0.7);
  EXPECT_NEAR(b.delta, 2.0 * a.delta, 1e-15);
  EXPECT_EQ(b.t, a.t);
  EXPECT_THROW((void)select_delta_t(0.3, EntropyRegime::Kind::BR, 1.0, 1.0), DomainError);
}

TEST(GridSum, MatchesEmpiricalProcess) {
  const auto m = ClassModel(FunctionClass::intervals(), Distribution::beta(2, 5));
  const std::vector<Param> grid{{0.1}, {0.3}, {0.55}};
  const GridCoupler c(m, grid);
  const auto s = draw_sample(m.distribution(), 333, SeedSpec{2, 0});
  const auto y = c.y_sum(s);
  const auto a = empirical_process(s, m, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(y[k], a[k], 1e-12);
}

TEST(GridSum, ConstantGridIsZero) {
  std::vector<StepFunction> e{{0.0, 1.0, 0.4, 0.4, "constant"}};
  const ClassModel m(FunctionClass::finite_list(e, 2.0), Distribution::uniform());
  const GridCoupler c(m, {Param{0.0}});
  const auto s = draw_sample(Distribution::uniform(), 50, SeedSpec{3, 0});
  EXPECT_NEAR(c.y_sum(s)[0], 0.0, 1e-14);
}

TEST(GridSum, SummandsWithinEnvelopeScale) {
  const auto m = unit_intervals();
  const std::vector<Param> grid{{0.2}, {0.4}, {0.6}, {0.8}};
  const double n = 200.0;
  const auto s = draw_sample(Distribution::uniform(), 200, SeedSpec{4, 0});
  const auto means = m.means(grid);
  const double bound = m.function_class().envelope() * std::sqrt(grid.size() / n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double y = (m.function_class().evaluate(grid[k], s.point(i)) - means[k]) / std::sqrt(n);
      sq += y * y;
    }
    EXPECT_LE(std::sqrt(sq), bound);
  }
}

TEST(QuantileWeights, SumToZeroAndCovariance) {
  const std::vector<double> p{0.2, 0.5, 0.3};
  const std::size_t n = 50;
  const std::size_t reps = 40000;
  std::vector<std::vector<double>> w(3, std::vector<double>(reps));
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = make_rng(replication_seed(5, r, phase::kQuantile));
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = uniform01(rng);
      ++counts[u < 0.2 ? 0 : (u < 0.7 ? 1 : 2)];
    }
    const auto v = quantile_cell_weights(p, counts, n, rng);
    EXPECT_NEAR(v[0] + v[1] + v[2], 0.0, 1e-12);
    for (int k = 0; k < 3; ++k) w[static_cast<std::size_t>(k)][r] = v[static_cast<std::size_t>(k)];
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const auto& x = w[static_cast<std::size_t>(a)];
      const auto& y = w[static_cast<std::size_t>(b)];
      double c = 0.0;
      for (std::size_t r = 0; r < reps; ++r) c += x[r] * y[r];
      c /= static_cast<double>(reps);
      const double exact = (a == b ? p[static_cast<std::size_t>(a)] : 0.0) -
                           p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(b)];
      EXPECT_NEAR(c, exact, 0.01);
    }
  }
}

TEST(Couple, QuantileGaussianHasGridCovariance) {
  const auto m = unit_intervals();
  const std::vector<Param> grid{{0.25}, {0.5}, {0.75}};
  const GridCoupler c(m, grid);
  const std::size_t reps = 20000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto seed = replication_seed(6, r, 0);
    const auto s = draw_sample(m.distribution(), 30, seed.child(phase::kSample));
    const auto o = c.couple(s, seed);
    const Eigen::Map<const Eigen::VectorXd> z(o.z.data(), 3);
    acc += z * z.transpose();
  }
  acc /= static_cast<double>(reps);
  EXPECT_LE((acc - c.bridge().cov).cwiseAbs().maxCoeff(), 0.015);
}

TEST(Couple, TransportMarginalIsGridGram) {
  const auto m = unit_intervals();
  const std::vector<Param> grid{{0.3}, {0.7}};
  const GridCoupler c(m, grid, CouplingMethod::Transport, 256, OtMethod::Exact);
  const std::size_t reps = 400;
  std::vector<double> z00, z01, z11;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto seed = replication_seed(7, r, 0);
    const auto o = c.couple(draw_sample(m.distribution(), 40, seed.child(phase::kSample)), seed);
    z00.push_back(o.z[0] * o.z[0]);
    z01.push_back(o.z[0] * o.z[1]);
    z11.push_back(o.z[1] * o.z[1]);
  }
  const auto& k = c.bridge().cov;
  const auto a = mean_se(z00), b = mean_se(z01), d = mean_se(z11);
  EXPECT_LE(std::abs(a.mean - k(0, 0)), 5.0 * a.se);
  EXPECT_LE(std::abs(b.mean - k(0, 1)), 5.0 * b.se);
  EXPECT_LE(std::abs(d.mean - k(1, 1)), 5.0 * d.se);
}

TEST(Couple, QuantileNeedsCells) {
  const auto cls = FunctionClass::holder(1.0, 1.0, 2, 2.0);
  const ClassModel m(cls, Distribution::uniform());
  EXPECT_THROW(GridCoupler(m, cls.verification_mesh(3)), UnsupportedError);
  EXPECT_NO_THROW(GridCoupler(m, cls.verification_mesh(3), CouplingMethod::Transport, 32));
}

TEST(Couple, SingleFunctionGapDecays) {
  const auto m = unit_intervals();
  const GridCoupler c(m, {Param{0.37}});
  auto median_gap = [&](std::size_t n) {
    std::vector<double> gaps;
    for (std::size_t r = 0; r < 200; ++r) {
      const auto seed = replication_seed(8, r * 7919 + n, 0);
      const auto o = c.couple(draw_sample(m.distribution(), n, seed.child(phase::kSample)), seed);
      gaps.push_back(std::abs(o.y[0] - o.z[0]));
    }
    return median(gaps);
  };
  EXPECT_LT(median_gap(10000), median_gap(100));
}

TEST(Engine, MeshDecompositionHoldsPerRealization) {
  const auto m = unit_intervals();
  CouplingConfig cfg;
  cfg.mesh_size = 150;
  const CouplingEngine e(m, 0.4, cfg);
  for (std::size_t r = 0; r < 100; ++r) {
    const auto z = e.construct(500, replication_seed(9, r, 0));
    EXPECT_LE(z.sup_mesh, z.sup_grid + z.modulus_alpha + z.modulus_bridge + 1e-12);
    EXPECT_EQ(z.grid_size, e.grid().size());
    EXPECT_NEAR(z.sup_grid, sup_discrepancy(z.y_sum, z.z_sum), 0.0);
  }
}

TEST(Engine, ReproducibleFromSeed) {
  const auto m = unit_intervals();
  CouplingConfig cfg;
  cfg.mesh_size = 100;
  const auto a = construct_joint(m, 300, 0.45, cfg, SeedSpec{10, 2});
  const auto b = construct_joint(m, 300, 0.45, cfg, SeedSpec{10, 2});
  EXPECT_EQ(a.y_sum, b.y_sum);
  EXPECT_EQ(a.z_sum, b.z_sum);
  EXPECT_EQ(a.sup_mesh, b.sup_mesh);
  EXPECT_EQ(a.seeds, (SeedSpec{10, 2}));
}

TEST(Engine, TailDecaysInDelta) {
  const auto m = unit_intervals();
  CouplingConfig cfg;
  cfg.mesh_size = 100;
  const CouplingEngine e(m, 0.45, cfg);
  std::vector<double> gaps;
  for (std::size_t r = 0; r < 400; ++r) gaps.push_back(e.construct(400, replication_seed(11, r, 0)).sup_grid);
  std::vector<double> x, y;
  const double q50 = quantile(gaps, 0.5), q95 = quantile(gaps, 0.95);
  for (double d = q50; d <= q95; d += (q95 - q50) / 10.0) {
    double k = 0.0;
    for (double g : gaps) k += g > d ? 1.0 : 0.0;
    if (k > 0.0) {
      x.push_back(d);
      y.push_back(std::log(k / static_cast<double>(gaps.size())));
    }
  }
  EXPECT_LT(linear_fit(x, y).slope, 0.0);
}

TEST(Method, ParseRoundTrip) {
  EXPECT_EQ(parse_coupling_method(to_string(CouplingMethod::Quantile)), CouplingMethod::Quantile);
  EXPECT_EQ(parse_coupling_method(to_string(CouplingMethod::Transport)), CouplingMethod::Transport);
  EXPECT_THROW((void)parse_coupling_method("kmt"), ConfigError);
}

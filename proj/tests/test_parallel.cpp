#include <gtest/gtest.h>

#include <stdexcept>

#include "epsim/bridge.hpp"
#include "epsim/coupling.hpp"
#include "epsim/empirical.hpp"
#include "epsim/entropy.hpp"
#include "epsim/experiments.hpp"
#include "epsim/parallel.hpp"

using namespace epsim;

namespace {

const ExecPolicy kSerial = ExecPolicy::serial_policy();
const ExecPolicy kTeam{4};

ClassModel intervals_beta() { return ClassModel(FunctionClass::intervals(), Distribution::beta(2.0, 5.0)); }

}  // namespace

TEST(Parallel, ForEachIndexVisitsEverySlotOnce) {
  std::vector<int> hits(1000, 0);
  for_each_index(hits.size(), kTeam, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Parallel, LowestIndexErrorIsRethrown) {
  try {
    for_each_index(100, kTeam, [](std::size_t i) {
      if (i == 17 || i == 80) throw std::runtime_error("at " + std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "at 17");
  }
}

TEST(Parallel, RunIsolatedMatchesSerial) {
  auto fn = [](std::size_t i) -> double {
    if (i % 7 == 3) throw std::runtime_error("bad " + std::to_string(i));
    return static_cast<double>(i * i);
  };
  const auto a = run_isolated<double>(50, kSerial, fn);
  const auto b = run_isolated<double>(50, kTeam, fn);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].error, b[i].error);
    EXPECT_EQ(a[i].value.has_value(), i % 7 != 3);
  }
}

TEST(Parallel, DistanceMatrixIdentical) {
  const auto m = intervals_beta();
  const auto mesh = m.function_class().verification_mesh(150);
  const auto a = m.distance_matrix(mesh, kSerial);
  const auto b = m.distance_matrix(mesh, kTeam);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Parallel, GridIdentical) {
  const auto m = intervals_beta();
  const auto mesh = m.function_class().verification_mesh(120);
  const auto a = build_grid(m, 0.2, mesh, kDefaultCenterBudget, kSerial);
  const auto b = build_grid(m, 0.2, mesh, kDefaultCenterBudget, kTeam);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.centers, b.centers);
}

TEST(Parallel, MuNEstimateIdentical) {
  const auto m = intervals_beta();
  const auto ps = build_pairset(m, 0.25, m.function_class().verification_mesh(20));
  const auto a = mu_n_estimate(m, ps, 64, 200, 99, SignMethod::MonteCarlo, kSerial);
  const auto b = mu_n_estimate(m, ps, 64, 200, 99, SignMethod::MonteCarlo, kTeam);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.se, b.se);
}

TEST(Parallel, MuEstimateIdentical) {
  const auto m = intervals_beta();
  const auto ps = build_pairset(m, 0.25, m.function_class().verification_mesh(20));
  const auto a = mu_estimate(m, ps, 300, 5, kSerial);
  const auto b = mu_estimate(m, ps, 300, 5, kTeam);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.se, b.se);
}

TEST(Parallel, ConstantChecksIdentical) {
  const auto a = explicit_constant_checks(300, 3, kSerial);
  const auto b = explicit_constant_checks(300, 3, kTeam);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].estimate, b[i].estimate) << a[i].name << " " << a[i].setting;
  }
}

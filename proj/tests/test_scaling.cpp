#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "dsb/scaling.hpp"

namespace dsb {
namespace {

std::vector<SizePoint> power_law(double c, double alpha, const std::vector<double>& sizes) {
  std::vector<SizePoint> pts;
  for (const double n : sizes) pts.push_back({n, c * std::pow(n, alpha), 0.0});
  return pts;
}

TEST(FitPowerLaw, NoiselessData) {
  const auto fit = fit_power_law(power_law(2.0, 1.5, {100, 200, 400, 800}));
  EXPECT_NEAR(fit.alpha, 1.5, 1e-12);
  EXPECT_NEAR(fit.log_intercept, std::log10(2.0), 1e-12);
  EXPECT_NEAR(fit.rmse_log, 0.0, 1e-12);
  EXPECT_NEAR(fit.alpha_std, 0.0, 1e-12);
  EXPECT_EQ(fit.point_count, 4u);
  EXPECT_EQ(fit.n_min, 100.0);
  EXPECT_EQ(fit.n_max, 800.0);
}

TEST(FitPowerLaw, TwoPointsDetermineTheLine) {
  const std::vector<SizePoint> pts = {{10, 3.0, 0}, {1000, 30.0, 0}};
  const auto fit = fit_power_law(pts);
  EXPECT_DOUBLE_EQ(fit.alpha, 0.5);
  EXPECT_EQ(fit.alpha_std, 0.0);
  EXPECT_NEAR(fit.rmse_log, 0.0, 1e-15);
}

TEST(FitPowerLaw, OlsSlopeErrorMatchesClosedForm) {
  const std::vector<SizePoint> pts = {{10, 1.0, 0}, {100, 20.0, 0}, {1000, 50.0, 0}};
  const auto fit = fit_power_law(pts);
  // x = 1, 2, 3; y = 0, log10 20, log10 50.
  const double y1 = std::log10(20.0), y2 = std::log10(50.0);
  const double slope = y2 / 2.0;
  const double intercept = (y1 + y2) / 3.0 - 2.0 * slope;
  double ssr = 0.0;
  const double ys[] = {0.0, y1, y2};
  for (int k = 0; k < 3; ++k) ssr += std::pow(ys[k] - intercept - slope * (k + 1), 2);
  EXPECT_NEAR(fit.alpha, slope, 1e-14);
  EXPECT_NEAR(fit.alpha_std, std::sqrt(ssr / 1.0 / 2.0), 1e-14);
  EXPECT_NEAR(fit.rmse_log, std::sqrt(ssr / 3.0), 1e-14);
}

TEST(FitPowerLaw, RangeFilterAndInfiniteMedians) {
  auto pts = power_law(1.0, 2.0, {50, 100, 200, 400, 800, 1600});
  pts[4].median = std::numeric_limits<double>::infinity();
  const auto fit = fit_power_law(pts, {100, 1000});
  EXPECT_EQ(fit.point_count, 3u);
  EXPECT_EQ(fit.excluded_infinite, 1u);
  EXPECT_TRUE(fit.unreliable);  // 1 of 4 in range
  EXPECT_NEAR(fit.alpha, 2.0, 1e-12);
  const auto wide = fit_power_law(pts);
  EXPECT_FALSE(wide.unreliable);  // 1 of 6
}

TEST(FitPowerLaw, TooFewPoints) {
  const std::vector<SizePoint> one = {{10, 1.0, 0}};
  EXPECT_THROW(fit_power_law(one), std::invalid_argument);
  const std::vector<SizePoint> same = {{10, 1.0, 0}, {10, 2.0, 0}};
  EXPECT_THROW(fit_power_law(same), std::invalid_argument);
  const std::vector<SizePoint> inf = {{10, 1.0, 0}, {20, std::numeric_limits<double>::infinity(), 0}};
  EXPECT_THROW(fit_power_law(inf), std::invalid_argument);
}

TEST(FitPowerLaw, ScaleCovariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<SizePoint> pts;
  for (double n = 100; n < 3000; n *= 1.4) pts.push_back({n, std::pow(n, 1.3) * std::pow(10, g(rng)), 0});
  const auto base = fit_power_law(pts);
  auto scaled = pts;
  for (auto& p : scaled) p.median *= 37.0;
  const auto s = fit_power_law(scaled);
  EXPECT_NEAR(s.alpha, base.alpha, 1e-12);
  EXPECT_NEAR(s.alpha_std, base.alpha_std, 1e-12);
  EXPECT_NEAR(s.rmse_log, base.rmse_log, 1e-12);
  EXPECT_NEAR(s.log_intercept - base.log_intercept, std::log10(37.0), 1e-12);
  auto resized = pts;
  for (auto& p : resized) p.n *= 5.0;
  EXPECT_NEAR(fit_power_law(resized).alpha, base.alpha, 1e-12);
}

TEST(FitPowerLaw, NoisyRecoveryAcrossSeeds) {
  // Eleven log-spaced sizes over N = 100..2000. Over a single decade the slope
  // error sigma_log / sqrt(Sxx) is ~0.049 and the 95/100 bar becomes a coin flip.
  std::vector<double> sizes;
  for (int k = 0; k <= 10; ++k) sizes.push_back(100.0 * std::pow(20.0, k / 10.0));
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<SizePoint> pts;
    for (const double n : sizes) pts.push_back({n, 0.01 * std::pow(n, 1.6) * std::pow(10.0, g(rng)), 0});
    within += std::abs(fit_power_law(pts).alpha - 1.6) < 0.1;
  }
  EXPECT_GE(within, 95);
}

TEST(FitPowerLaw, WeightedFitFollowsPrecisePoints) {
  // Three exact points on N^1 with tight errors and one outlier with a huge error.
  std::vector<SizePoint> pts = {{10, 10, 0.01}, {100, 100, 0.1}, {1000, 1000, 1.0}, {10000, 1e6, 1e6}};
  FitOptions weighted;
  weighted.weighted = true;
  const auto w = fit_power_law(pts, {}, weighted);
  const auto plain = fit_power_law(pts);
  EXPECT_TRUE(w.weighted);
  EXPECT_NEAR(w.alpha, 1.0, 0.01);
  EXPECT_GT(plain.alpha, 1.3);
  pts[0].std = 0.0;
  EXPECT_THROW(fit_power_law(pts, {}, weighted), std::invalid_argument);
}

TEST(AlphaVsEpsilon, SharedMediansGiveIdenticalExponents) {
  MedianTable table;
  for (double eps : {0.0075, 0.01, 0.0125})
    for (double n : {100.0, 300.0, 900.0}) table.push_back({"SBM", n, eps, 0.5 * std::pow(n, 1.2), 0.1});
  const std::vector<double> eps = {0.0125, 0.0075, 0.01};
  const auto fits = alpha_vs_epsilon(table, "SBM", eps);
  ASSERT_EQ(fits.size(), 3u);
  for (const auto& f : fits) EXPECT_EQ(f.fit.alpha, fits[0].fit.alpha);
  EXPECT_EQ(fits[0].epsilon, 0.0125);
}

TEST(AlphaVsEpsilon, RecoversConstructedSlopes) {
  MedianTable table;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.02);
  const std::vector<double> eps = {0.001, 0.005, 0.01, 0.02};
  for (const double e : eps)
    for (double n = 100; n <= 2000; n *= 1.5)
      table.push_back({"SBM", n, e, std::pow(n, 1.0 + e) * std::pow(10.0, g(rng)), 0.0});
  for (const auto& f : alpha_vs_epsilon(table, "SBM", eps))
    EXPECT_NEAR(f.fit.alpha, 1.0 + f.epsilon, 3.0 * f.fit.alpha_std + 1e-9);
  const std::vector<double> missing = {0.5};
  EXPECT_THROW(alpha_vs_epsilon(table, "SBM", missing), std::invalid_argument);
}

TEST(ImportMedians, EmptyTableAndRoundTrip) {
  std::istringstream empty("solver,N,eps,median,std\n");
  EXPECT_TRUE(parse_medians(empty).empty());

  MedianTable table = {{"QAC", 142, 0.01, 0.0123, 0.001},
                       {"SBM", 1322, 0.0125, std::numeric_limits<double>::infinity(), 0.0},
                       {"SBM", 2380, 0.0075, 1.0 / 3.0, 0.1}};
  std::ostringstream out;
  export_medians(table, out);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_medians(in), table);
}

TEST(ImportMedians, ExtraColumnsAnyOrderAndSchemaErrors) {
  std::istringstream reordered("eps,note,median,N,std,solver\n0.01,x,2.5,142,0.1,PT\n");
  const auto t = parse_medians(reordered);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].solver, "PT");
  EXPECT_EQ(t[0].n, 142.0);

  const auto row_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_medians(in);
    } catch (const CsvSchemaError& e) {
      return e.row();
    }
    return 999;
  };
  EXPECT_EQ(row_of("solver,N,eps,median\n"), 1u);
  EXPECT_EQ(row_of("solver,N,eps,median,std\nA,1,0.01,1,0\nA,x,0.01,1,0\n"), 3u);
  EXPECT_EQ(row_of("solver,N,eps,median,std\nA,10,0.01,-1,0\n"), 2u);
  EXPECT_EQ(row_of("solver,N,eps,median,std\nA,10,0.01,1\n"), 2u);
  EXPECT_EQ(row_of(""), 0u);
}

TEST(ImportMedians, ElevenSizesFrom142To1322) {
  // Logical sizes L = 5..15 span N = 142..1322 in the reference data.
  std::ostringstream csv;
  csv.precision(17);
  csv << "solver,N,eps,median,std\n";
  const int sizes[] = {142, 200, 270, 350, 442, 546, 660, 786, 922, 1070, 1322};
  for (const int n : sizes) csv << "QAC," << n << ",0.01," << 1e-6 * std::pow(n, 2.0) << ",0\n";
  std::istringstream in(csv.str());
  const auto table = parse_medians(in);
  const auto pts = select_points(table, "QAC", 0.01);
  ASSERT_EQ(pts.size(), 11u);
  EXPECT_EQ(pts.front().n, 142.0);
  EXPECT_EQ(pts.back().n, 1322.0);
  EXPECT_NEAR(fit_power_law(pts).alpha, 2.0, 1e-12);
}

TEST(FitCurve, PlotCsvHasFittedColumn) {
  const auto pts = power_law(3.0, 1.0, {10, 100});
  const auto fit = fit_power_law(pts);
  std::ostringstream out;
  write_fit_curve_csv(pts, fit, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,median,std,fitted");
  for (const double n : {10.0, 100.0}) {
    std::getline(in, line);
    EXPECT_EQ(line.rfind(format_real(n) + "," + format_real(3.0 * n) + ",0,", 0), 0u) << line;
    EXPECT_NEAR(std::stod(line.substr(line.rfind(',') + 1)), 3.0 * n, 1e-9 * n);
  }
}

TEST(PropagatedAlphaStd, ZeroForExactPointsPositiveWithErrors) {
  auto pts = power_law(1.0, 1.5, {100, 200, 400, 800});
  EXPECT_NEAR(propagated_alpha_std(pts, {}, 200, 1), 0.0, 1e-12);
  for (auto& p : pts) p.std = 0.1 * p.median;
  const double s = propagated_alpha_std(pts, {}, 400, 1);
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 0.2);
}

}  // namespace
}  // namespace dsb

#include "ganinv/stats.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "ganinv/errors.hpp"

namespace ganinv::stats {
namespace {

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> xs{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(xs, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(median(xs), 2.5);
  EXPECT_DOUBLE_EQ(quantile(xs, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(xs, 0.75), 3.25);
  const std::vector<double> one{7.0};
  EXPECT_DOUBLE_EQ(quantile(one, 0.3), 7.0);
}

TEST(Quantile, RejectsEmptyAndOutOfRange) {
  EXPECT_THROW(quantile({}, 0.5), InputError);
  const std::vector<double> xs{1.0};
  EXPECT_THROW(quantile(xs, 1.5), InputError);
}

TEST(Summarize, AllFields) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.q25, 2.0);
  EXPECT_DOUBLE_EQ(s.q75, 4.0);
}

TEST(Spearman, MonotoneAndReversed) {
  const std::vector<double> x{0.001, 0.01, 0.05, 0.1};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{1.0, 5.0, 6.0, 100.0}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{9.0, 5.0, 2.0, 1.0}), -1.0);
  // Ties get average ranks: ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
  EXPECT_NEAR(spearman(x, std::vector<double>{1.0, 2.0, 2.0, 3.0}), 0.9486832980505138, 1e-12);
}

TEST(LinearFit, ExactLineAndKnownResiduals) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const auto exact = linear_fit(x, std::vector<double>{1.0, 3.0, 5.0, 7.0});
  EXPECT_DOUBLE_EQ(exact.slope, 2.0);
  EXPECT_DOUBLE_EQ(exact.intercept, 1.0);
  EXPECT_DOUBLE_EQ(exact.r_squared, 1.0);
  // y = (0, 1, 1, 2): slope 0.6, intercept 0.1, SS_res 0.2, SS_tot 2.
  const auto noisy = linear_fit(x, std::vector<double>{0.0, 1.0, 1.0, 2.0});
  EXPECT_NEAR(noisy.slope, 0.6, 1e-12);
  EXPECT_NEAR(noisy.intercept, 0.1, 1e-12);
  EXPECT_NEAR(noisy.r_squared, 0.9, 1e-12);
}

}  // namespace
}  // namespace ganinv::stats

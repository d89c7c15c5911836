#pragma once

#include <span>

namespace ganinv::stats {

double mean(std::span<const double> xs);

/// Linear-interpolation quantile (the R type-7 definition), q in [0, 1].
double quantile(std::span<const double> xs, double q);

inline double median(std::span<const double> xs) { return quantile(xs, 0.5); }

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

Summary summarize(std::span<const double> xs);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace ganinv::stats

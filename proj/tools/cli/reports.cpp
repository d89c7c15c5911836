#include "cli/reports.hpp"

#include <charconv>

namespace ganinv::cli {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

std::string recovery_csv(const RecoveryReport& report) {
  std::string out = "mode,eps,success_rate,n_trials\n";
  for (const auto& row : report.modes) {
    for (std::size_t k = 0; k < kRecoveryThresholds.size(); ++k) {
      out += to_string(row.mode) + ',' + format_double(kRecoveryThresholds[k]) + ',' +
             format_double(row.success[k]) + ',' + std::to_string(report.n_trials) + '\n';
    }
  }
  return out;
}

std::string noise_csv(const NoiseReport& report) {
  std::string out = "mode,variance,median_zerr,mean_zerr,q25,q75,n_trials\n";
  for (const auto& c : report.cells) {
    out += to_string(c.mode) + ',' + format_double(c.variance) + ',' +
           format_double(c.summary.median) + ',' + format_double(c.summary.mean) + ',' +
           format_double(c.summary.q25) + ',' + format_double(c.summary.q75) + ',' +
           std::to_string(report.n_trials) + '\n';
  }
  return out;
}

std::string uniqueness_csv(const UniquenessReport& report) {
  std::string out = "mode,mean_pairwise,m\n";
  for (const auto& row : report.modes) {
    out += to_string(row.mode) + ',' + format_double(row.mean_pairwise) + ',' +
           std::to_string(report.m) + '\n';
  }
  out += "baseline," + format_double(report.baseline) + ',' +
         std::to_string(report.baseline_pairs) + '\n';
  return out;
}

}  // namespace ganinv::cli

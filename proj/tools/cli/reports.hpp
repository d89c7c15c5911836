#pragma once

#include <string>

#include "ganinv/experiments.hpp"

namespace ganinv::cli {

/// Shortest representation that round-trips.
std::string format_double(double v);

/// mode,eps,success_rate,n_trials -- one row per (mode, threshold).
std::string recovery_csv(const RecoveryReport& report);

/// mode,variance,median_zerr,mean_zerr,q25,q75,n_trials
std::string noise_csv(const NoiseReport& report);

/// mode,mean_pairwise,m plus a trailing "baseline,<value>,<pairs>" row.
std::string uniqueness_csv(const UniquenessReport& report);

}  // namespace ganinv::cli

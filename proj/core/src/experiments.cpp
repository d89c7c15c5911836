#include "ganinv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ganinv/errors.hpp"
#include "ganinv/generator.hpp"

namespace ganinv {
namespace {

constexpr std::size_t kModeCount = std::size(kAllModes);

unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

std::string describe(std::size_t trial, ClippingMode mode) {
  return "trial " + std::to_string(trial) + " (" + to_string(mode) + " clipping)";
}

// Runs one inversion, tagging numerical aborts with the trial.
InversionResult tagged_invert(const GeneratorNetwork& net, const ImageTensor& target,
                              const InversionConfig& cfg, std::span<const double> truth,
                              std::size_t trial) {
  try {
    return invert(net, target, cfg, truth);
  } catch (const NumericalError& e) {
    throw e.with_context(describe(trial, cfg.mode));
  }
}

InversionConfig trial_config(const InversionConfig& base, ClippingMode mode,
                             std::uint64_t master_seed, std::size_t index) {
  InversionConfig cfg = base;
  cfg.mode = mode;
  cfg.init_seed = master_seed;
  cfg.stream_index = index;
  cfg.trajectory_stride = 0;
  return cfg;
}

}  // namespace

void run_trials(std::size_t n, unsigned workers,
                const std::function<void(std::size_t)>& job) {
  const unsigned count = resolve_workers(workers, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      if (failed.load()) break;
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LatentVector trial_latent(std::size_t d, std::uint64_t master_seed, std::size_t index) {
  Rng rng = derive_stream(master_seed, index, StreamPurpose::latent);
  return init_latent(d, rng);
}

const ModeRecovery& RecoveryReport::at(ClippingMode mode) const {
  for (const auto& m : modes) {
    if (m.mode == mode) return m;
  }
  throw InputError("recovery report has no row for mode " + to_string(mode));
}

RecoveryReport exp_recovery(const GeneratorNetwork& net, std::size_t n_trials,
                            const InversionConfig& base, std::uint64_t master_seed,
                            const TrialOptions& options) {
  if (n_trials < 1) throw ConfigError("exp_recovery: n_trials must be at least 1");
  validate(base);

  std::vector<LatentVector> truths(n_trials);
  std::vector<ImageTensor> targets(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    truths[t] = trial_latent(net.latent_dim(), master_seed, t);
    targets[t] = evaluate(net, truths[t]);
  }

  std::vector<double> errors(n_trials * kModeCount);
  run_trials(errors.size(), options.workers, [&](std::size_t job) {
    const std::size_t t = job / kModeCount;
    InversionConfig cfg = trial_config(base, kAllModes[job % kModeCount], master_seed, t);
    if (options.init_from_truth) cfg.init_override = truths[t];
    errors[job] = *tagged_invert(net, targets[t], cfg, truths[t], t).z_error;
  });

  RecoveryReport report;
  report.n_trials = n_trials;
  for (std::size_t m = 0; m < kModeCount; ++m) {
    ModeRecovery row;
    row.mode = kAllModes[m];
    row.z_errors.resize(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) row.z_errors[t] = errors[t * kModeCount + m];
    for (std::size_t k = 0; k < kRecoveryThresholds.size(); ++k) {
      const auto hits = std::count_if(row.z_errors.begin(), row.z_errors.end(),
                                      [&](double e) { return e < kRecoveryThresholds[k]; });
      row.success[k] = static_cast<double>(hits) / static_cast<double>(n_trials);
    }
    report.modes.push_back(std::move(row));
  }
  return report;
}

const NoiseCell& NoiseReport::at(ClippingMode mode, std::size_t variance_index) const {
  for (const auto& c : cells) {
    if (c.mode == mode && c.variance == variances.at(variance_index)) return c;
  }
  throw InputError("noise report has no cell for mode " + to_string(mode));
}

NoiseReport exp_noise(const GeneratorNetwork& net, std::span<const double> variances,
                      std::size_t n_trials, const InversionConfig& base,
                      std::uint64_t master_seed, const TrialOptions& options) {
  if (n_trials < 1) throw ConfigError("exp_noise: n_trials must be at least 1");
  if (variances.empty()) throw ConfigError("exp_noise: variance grid is empty");
  for (double v : variances) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("exp_noise: variances must be finite and non-negative");
    }
  }
  validate(base);

  const std::size_t nv = variances.size();
  std::vector<LatentVector> truths(n_trials);
  std::vector<ImageTensor> targets(nv * n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    truths[t] = trial_latent(net.latent_dim(), master_seed, t);
    const ImageTensor clean = evaluate(net, truths[t]);
    for (std::size_t v = 0; v < nv; ++v) {
      ImageTensor noisy = clean;
      if (variances[v] > 0.0) {
        Rng rng = derive_stream(master_seed, t, StreamPurpose::noise, v);
        std::normal_distribution<double> noise(0.0, std::sqrt(variances[v]));
        for (auto& p : noisy.data) p += noise(rng);
      }
      targets[v * n_trials + t] = std::move(noisy);
    }
  }

  std::vector<double> errors(nv * n_trials * kModeCount);
  run_trials(errors.size(), options.workers, [&](std::size_t job) {
    const std::size_t m = job % kModeCount;
    const std::size_t t = (job / kModeCount) % n_trials;
    const std::size_t v = job / (kModeCount * n_trials);
    InversionConfig cfg = trial_config(base, kAllModes[m], master_seed, t);
    if (options.init_from_truth) cfg.init_override = truths[t];
    errors[job] = *tagged_invert(net, targets[v * n_trials + t], cfg, truths[t], t).z_error;
  });

  NoiseReport report;
  report.n_trials = n_trials;
  report.variances.assign(variances.begin(), variances.end());
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t m = 0; m < kModeCount; ++m) {
      NoiseCell cell;
      cell.mode = kAllModes[m];
      cell.variance = variances[v];
      cell.z_errors.resize(n_trials);
      for (std::size_t t = 0; t < n_trials; ++t) {
        cell.z_errors[t] = errors[(v * n_trials + t) * kModeCount + m];
      }
      cell.summary = stats::summarize(cell.z_errors);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

double mean_pairwise_distance(std::span<const LatentVector> vectors) {
  if (vectors.size() < 2) throw InputError("mean_pairwise_distance: need at least 2 vectors");
  const std::size_t d = vectors.front().size();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      if (vectors[i].size() != d || vectors[j].size() != d) {
        throw InputError("mean_pairwise_distance: dimension mismatch");
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = vectors[i][k] - vectors[j][k];
        sq += diff * diff;
      }
      sum += std::sqrt(sq) / static_cast<double>(d);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double baseline_pairwise(std::size_t d, std::size_t n_pairs, Rng& rng) {
  if (d < 1) throw InputError("baseline_pairwise: d must be positive");
  if (n_pairs < 1) throw InputError("baseline_pairwise: n_pairs must be positive");
  double sum = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = uniform_symmetric(rng);
      const double v = uniform_symmetric(rng);
      sq += (u - v) * (u - v);
    }
    sum += std::sqrt(sq) / static_cast<double>(d);
  }
  return sum / static_cast<double>(n_pairs);
}

const ModeUniqueness& UniquenessReport::at(ClippingMode mode) const {
  for (const auto& m : modes) {
    if (m.mode == mode) return m;
  }
  throw InputError("uniqueness report has no row for mode " + to_string(mode));
}

UniquenessReport exp_uniqueness(const GeneratorNetwork& net, const ImageTensor& target,
                                std::size_t m, const InversionConfig& base,
                                std::uint64_t master_seed, std::size_t baseline_pairs,
                                const TrialOptions& options) {
  if (m < 2) throw ConfigError("exp_uniqueness: need at least 2 recoveries");
  validate(base);
  if (!(target.shape == net.output_shape())) {
    throw InputError("exp_uniqueness: target shape " + to_string(target.shape) +
                     " does not match network output " + to_string(net.output_shape()));
  }

  std::vector<LatentVector> recovered(m * kModeCount);
  run_trials(recovered.size(), options.workers, [&](std::size_t job) {
    const std::size_t k = job / kModeCount;
    const std::size_t index = options.shared_init ? 0 : k;
    InversionConfig cfg = trial_config(base, kAllModes[job % kModeCount], master_seed, index);
    try {
      recovered[job] = invert(net, target, cfg).z_recovered;
    } catch (const NumericalError& e) {
      throw e.with_context(describe(k, cfg.mode));
    }
  });

  UniquenessReport report;
  report.m = m;
  for (std::size_t mi = 0; mi < kModeCount; ++mi) {
    ModeUniqueness row;
    row.mode = kAllModes[mi];
    for (std::size_t k = 0; k < m; ++k) {
      row.recovered.push_back(std::move(recovered[k * kModeCount + mi]));
    }
    row.mean_pairwise = mean_pairwise_distance(row.recovered);
    row.pairs = m * (m - 1) / 2;
    report.modes.push_back(std::move(row));
  }
  Rng rng = derive_stream(master_seed, 0, StreamPurpose::baseline);
  report.baseline = baseline_pairwise(net.latent_dim(), baseline_pairs, rng);
  report.baseline_pairs = baseline_pairs;
  return report;
}

ImageTensor unseen_target(GeneratorSpec spec, std::uint64_t unseen_seed,
                          std::uint64_t latent_seed) {
  spec.seed = unseen_seed;
  const GeneratorNetwork other = build(spec);
  return evaluate(other, trial_latent(other.latent_dim(), latent_seed, 0));
}

std::vector<Snapshot> exp_trajectory(const GeneratorNetwork& net, const ImageTensor& target,
                                     const InversionConfig& cfg,
                                     std::span<const long> snapshot_iters,
                                     InversionResult* result) {
  if (!std::is_sorted(snapshot_iters.begin(), snapshot_iters.end())) {
    throw InputError("exp_trajectory: snapshot iterations must be sorted");
  }
  std::vector<Snapshot> snapshots;
  Snapshot last;
  std::size_t pending = 0;
  auto observer = [&](long iter, double loss, std::span<const double>,
                      const ImageTensor& image) {
    while (pending < snapshot_iters.size() && snapshot_iters[pending] < iter) ++pending;
    if (pending < snapshot_iters.size() && snapshot_iters[pending] == iter) {
      snapshots.push_back({iter, loss, image, false});
      ++pending;
    }
    last.iter = iter;
    last.loss = loss;
    last.image = image;
  };
  InversionResult r = invert(net, target, cfg, std::nullopt, observer);
  last.final = true;
  snapshots.push_back(std::move(last));
  if (result != nullptr) *result = std::move(r);
  return snapshots;
}

}  // namespace ganinv

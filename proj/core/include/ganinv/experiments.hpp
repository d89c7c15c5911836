#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ganinv/diffnet.hpp"
#include "ganinv/generator_spec.hpp"
#include "ganinv/inversion.hpp"
#include "ganinv/rng.hpp"
#include "ganinv/stats.hpp"

namespace ganinv {

/// Success thresholds on ||z - z'||^2 / d.
inline constexpr std::array<double, 4> kRecoveryThresholds = {1e-4, 1e-3, 1e-2, 1e-1};

inline constexpr std::array<double, 5> kDefaultNoiseGrid = {0.0, 0.001, 0.01, 0.05, 0.1};

inline constexpr std::array<long, 3> kDefaultSnapshotIters = {0, 100, 20000};

struct TrialOptions {
  /// Worker threads; 0 uses the hardware concurrency. Never affects results.
  unsigned workers = 0;
  /// Test hook: every inversion starts at the ground-truth latent.
  bool init_from_truth = false;
  /// Test hook: every recovery in a uniqueness run uses stream index 0.
  bool shared_init = false;
};

/// Runs job(0) ... job(n - 1) on up to `workers` threads. Jobs must write
/// only to their own slot. If jobs throw, the exception of the lowest index
/// is rethrown after all workers have stopped.
void run_trials(std::size_t n, unsigned workers,
                const std::function<void(std::size_t)>& job);

struct ModeRecovery {
  ClippingMode mode = ClippingMode::none;
  /// success[k] is the fraction of trials with z_error < kRecoveryThresholds[k].
  std::array<double, kRecoveryThresholds.size()> success{};
  /// Indexed by trial.
  std::vector<double> z_errors;
};

struct RecoveryReport {
  std::size_t n_trials = 0;
  /// One entry per clipping mode, in kAllModes order.
  std::vector<ModeRecovery> modes;

  const ModeRecovery& at(ClippingMode mode) const;
};

/// For each trial t: z ~ stream(master_seed, t, latent), target = phi(z),
/// then one inversion per clipping mode from mode-specific init streams.
RecoveryReport exp_recovery(const GeneratorNetwork& net, std::size_t n_trials,
                            const InversionConfig& base, std::uint64_t master_seed,
                            const TrialOptions& options = {});

struct NoiseCell {
  ClippingMode mode = ClippingMode::none;
  double variance = 0.0;
  stats::Summary summary;
  std::vector<double> z_errors;
};

struct NoiseReport {
  std::size_t n_trials = 0;
  std::vector<double> variances;
  /// Variance-major, then kAllModes order.
  std::vector<NoiseCell> cells;

  const NoiseCell& at(ClippingMode mode, std::size_t variance_index) const;
};

/// As exp_recovery, but the target is phi(z) + eta with eta ~ N(0, variance)
/// per pixel, not re-clipped. Trial t uses the same z and init streams at
/// every variance, so variance 0 reproduces exp_recovery exactly.
NoiseReport exp_noise(const GeneratorNetwork& net, std::span<const double> variances,
                      std::size_t n_trials, const InversionConfig& base,
                      std::uint64_t master_seed, const TrialOptions& options = {});

struct ModeUniqueness {
  ClippingMode mode = ClippingMode::none;
  double mean_pairwise = 0.0;
  std::size_t pairs = 0;
  std::vector<LatentVector> recovered;
};

struct UniquenessReport {
  std::size_t m = 0;
  std::vector<ModeUniqueness> modes;
  double baseline = 0.0;
  std::size_t baseline_pairs = 0;

  const ModeUniqueness& at(ClippingMode mode) const;
};

/// Mean of ||a - b|| / d over all unordered pairs.
double mean_pairwise_distance(std::span<const LatentVector> vectors);

/// Monte-Carlo mean of ||u - v|| / d for u, v ~ Uniform([-1, 1]^d).
double baseline_pairwise(std::size_t d, std::size_t n_pairs, Rng& rng);

/// Inverts the same target m times per mode from independent inits and
/// reports the mean pairwise distance of the recovered vectors.
UniquenessReport exp_uniqueness(const GeneratorNetwork& net, const ImageTensor& target,
                                std::size_t m, const InversionConfig& base,
                                std::uint64_t master_seed,
                                std::size_t baseline_pairs = 100000,
                                const TrialOptions& options = {});

/// An image the network did not produce: phi2(z) where phi2 is `spec`
/// rebuilt with `unseen_seed` and z ~ stream(latent_seed, 0, latent).
ImageTensor unseen_target(GeneratorSpec spec, std::uint64_t unseen_seed,
                          std::uint64_t latent_seed);

/// Draws the ground-truth latent for trial `index`.
LatentVector trial_latent(std::size_t d, std::uint64_t master_seed, std::size_t index);

struct Snapshot {
  long iter = 0;
  double loss = 0.0;
  ImageTensor image;
  bool final = false;
};

/// Generator outputs at the requested iterations that the run reaches,
/// followed by the final iterate (final = true).
std::vector<Snapshot> exp_trajectory(const GeneratorNetwork& net, const ImageTensor& target,
                                     const InversionConfig& cfg,
                                     std::span<const long> snapshot_iters,
                                     InversionResult* result = nullptr);

}  // namespace ganinv

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ganinv/diffnet.hpp"
#include "ganinv/rng.hpp"
#include "ganinv/tensor.hpp"

namespace ganinv {

enum class ClippingMode { none, standard, stochastic };

inline constexpr ClippingMode kAllModes[] = {ClippingMode::none, ClippingMode::standard,
                                             ClippingMode::stochastic};

std::string to_string(ClippingMode mode);
ClippingMode parse_clipping_mode(const std::string& text);

/// Box the latent iterate is projected onto.
struct Bounds {
  double lo = -1.0;
  double hi = 1.0;
};

struct InversionConfig {
  ClippingMode mode = ClippingMode::stochastic;
  Bounds bounds;
  double eta0 = 0.1;
  /// Learning rate is multiplied by `decay` every `decay_every` iterations.
  double decay = 0.5;
  long decay_every = 10000;
  long max_iters = 100000;
  /// Converged once the image-space loss is at or below this value.
  double loss_tol = 1e-12;
  /// Seeds the init and clip streams; `stream_index` separates trials that
  /// share a seed.
  std::uint64_t init_seed = 0;
  std::uint64_t stream_index = 0;
  /// Record a trajectory snapshot every this many iterations (0 = off).
  long trajectory_stride = 0;
  /// Test hook: start from this vector instead of a random draw.
  std::optional<LatentVector> init_override;
};

/// Throws ConfigError on the first invalid field.
void validate(const InversionConfig& cfg);

struct TrajectoryPoint {
  long iter = 0;
  double loss = 0.0;
  ImageTensor image;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct InversionResult {
  LatentVector z_recovered;
  double final_loss = 0.0;
  long iters_used = 0;
  bool converged = false;
  /// ||z - z'||^2 / d, present iff a ground truth was supplied.
  std::optional<double> z_error;
  std::vector<TrajectoryPoint> trajectory;

  friend bool operator==(const InversionResult&, const InversionResult&) = default;
};

/// Called once per evaluated iterate, before the step is taken.
using InversionObserver = std::function<void(long iter, double loss, std::span<const double> z,
                                             const ImageTensor& image)>;

/// Each component i.i.d. uniform on [-1, 1].
LatentVector init_latent(std::size_t d, Rng& rng);

/// Projects z onto the box in place. `none` leaves z untouched; `standard`
/// clamps; `stochastic` redraws each out-of-range component uniformly in
/// [lo, hi], consuming one draw per clipped component in index order.
void clip_in_place(std::span<double> z, ClippingMode mode, Bounds bounds, Rng& rng);

/// Copying form of clip_in_place.
std::vector<double> clip(std::span<const double> z, ClippingMode mode, Rng& rng,
                         Bounds bounds = {});

/// eta0 * decay^floor(iter / decay_every).
double learning_rate(const InversionConfig& cfg, long iter);

/// Projected gradient descent on z' minimizing ||target - phi(z')||^2:
///
///   z'_{t+1} = clip(z'_t - eta_t * grad)
///
/// starting from init_latent. Stops with converged = true as soon as the
/// loss at the current iterate is <= loss_tol, or with converged = false
/// after max_iters updates. Deterministic given (net, target, cfg).
/// Throws NumericalError when the loss or gradient becomes non-finite.
InversionResult invert(const GeneratorNetwork& net, const ImageTensor& target,
                       const InversionConfig& cfg,
                       std::optional<std::span<const double>> ground_truth = std::nullopt,
                       const InversionObserver& observer = {});

}  // namespace ganinv

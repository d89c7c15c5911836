#include "ganinv/inversion.hpp"

#include <cmath>

#include "ganinv/errors.hpp"

namespace ganinv {

std::string to_string(ClippingMode mode) {
  switch (mode) {
    case ClippingMode::none:
      return "none";
    case ClippingMode::standard:
      return "standard";
    case ClippingMode::stochastic:
      return "stochastic";
  }
  return "unknown";
}

ClippingMode parse_clipping_mode(const std::string& text) {
  if (text == "none") return ClippingMode::none;
  if (text == "standard") return ClippingMode::standard;
  if (text == "stochastic") return ClippingMode::stochastic;
  throw InputError("unknown clipping mode '" + text +
                   "' (expected none, standard or stochastic)");
}

void validate(const InversionConfig& cfg) {
  if (!(cfg.bounds.lo < cfg.bounds.hi)) throw ConfigError("bounds: lo must be < hi");
  if (!(cfg.eta0 > 0.0) || !std::isfinite(cfg.eta0)) {
    throw ConfigError("eta0 must be positive and finite");
  }
  if (!(cfg.decay > 0.0 && cfg.decay <= 1.0)) throw ConfigError("decay must be in (0, 1]");
  if (cfg.decay_every < 1) throw ConfigError("decay_every must be positive");
  if (cfg.max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (!(cfg.loss_tol >= 0.0)) throw ConfigError("loss_tol must be non-negative");
  if (cfg.trajectory_stride < 0) throw ConfigError("trajectory_stride must be non-negative");
}

LatentVector init_latent(std::size_t d, Rng& rng) {
  LatentVector z(d);
  for (auto& v : z) v = uniform_symmetric(rng);
  return z;
}

void clip_in_place(std::span<double> z, ClippingMode mode, Bounds bounds, Rng& rng) {
  switch (mode) {
    case ClippingMode::none:
      return;
    case ClippingMode::standard:
      for (auto& v : z) v = std::min(bounds.hi, std::max(bounds.lo, v));
      return;
    case ClippingMode::stochastic: {
      std::uniform_real_distribution<double> redraw(bounds.lo, bounds.hi);
      for (auto& v : z) {
        if (v < bounds.lo || v > bounds.hi) v = redraw(rng);
      }
      return;
    }
  }
}

std::vector<double> clip(std::span<const double> z, ClippingMode mode, Rng& rng,
                         Bounds bounds) {
  std::vector<double> out(z.begin(), z.end());
  clip_in_place(out, mode, bounds, rng);
  return out;
}

double learning_rate(const InversionConfig& cfg, long iter) {
  const long steps = iter / cfg.decay_every;
  return cfg.eta0 * std::pow(cfg.decay, static_cast<double>(steps));
}

InversionResult invert(const GeneratorNetwork& net, const ImageTensor& target,
                       const InversionConfig& cfg,
                       std::optional<std::span<const double>> ground_truth,
                       const InversionObserver& observer) {
  validate(cfg);
  if (!(target.shape == net.output_shape()) || target.size() != net.output_shape().size()) {
    throw InputError("invert: target shape " + to_string(target.shape) +
                     " does not match network output " + to_string(net.output_shape()));
  }
  if (ground_truth && ground_truth->size() != net.latent_dim()) {
    throw InputError("invert: ground truth has the wrong dimension");
  }

  Rng init_rng = derive_stream(cfg.init_seed, cfg.stream_index, StreamPurpose::init,
                               static_cast<std::uint64_t>(cfg.mode));
  Rng clip_rng = derive_stream(cfg.init_seed, cfg.stream_index, StreamPurpose::clip,
                               static_cast<std::uint64_t>(cfg.mode));

  InversionResult result;
  LatentVector z;
  if (cfg.init_override) {
    z = *cfg.init_override;
    if (z.size() != net.latent_dim()) {
      throw InputError("invert: init override has the wrong dimension");
    }
  } else {
    z = init_latent(net.latent_dim(), init_rng);
  }

  long iter = 0;
  for (;; ++iter) {
    ForwardResult fwd = forward(net, z);
    const double loss = l2_loss(fwd.image, target);
    if (!std::isfinite(loss)) throw NumericalError(iter, "non-finite loss");
    if (observer) observer(iter, loss, z, fwd.image);

    const bool converged = loss <= cfg.loss_tol;
    const bool exhausted = iter >= cfg.max_iters;
    const bool record = cfg.trajectory_stride > 0 &&
                        (iter % cfg.trajectory_stride == 0 || converged || exhausted);
    if (record) result.trajectory.push_back({iter, loss, fwd.image});
    if (converged || exhausted) {
      result.final_loss = loss;
      result.converged = converged;
      break;
    }

    const std::vector<double> grad = backward_input(net, fwd.tape, target);
    const double eta = learning_rate(cfg, iter);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!std::isfinite(grad[i])) {
        throw NumericalError(iter, "non-finite gradient component " + std::to_string(i) +
                                       " (learning rate " + std::to_string(eta) +
                                       " may be divergent)");
      }
      z[i] -= eta * grad[i];
    }
    for (double v : z) {
      if (!std::isfinite(v)) throw NumericalError(iter, "iterate diverged");
    }
    clip_in_place(z, cfg.mode, cfg.bounds, clip_rng);
  }

  result.iters_used = iter;
  result.z_recovered = std::move(z);
  if (ground_truth) result.z_error = latent_error(*ground_truth, result.z_recovered);
  return result;
}

}  // namespace ganinv

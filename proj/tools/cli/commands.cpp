#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/image_io.hpp"
#include "cli/reports.hpp"
#include "ganinv/errors.hpp"
#include "ganinv/experiments.hpp"
#include "ganinv/generator.hpp"

namespace ganinv::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GenWeightsArgs {
  std::string arch = "mlp";
  std::size_t latent_dim = 100;
  std::vector<std::size_t> hidden{128};
  std::string hidden_act = "tanh";
  std::string out_shape = "1x16x16";
  std::uint64_t seed = 42;
  std::string out;
};

struct OptimizerArgs {
  std::string mode = "stochastic";
  double eta0 = InversionConfig{}.eta0;
  double decay = InversionConfig{}.decay;
  long decay_every = InversionConfig{}.decay_every;
  long max_iters = InversionConfig{}.max_iters;
  double loss_tol = InversionConfig{}.loss_tol;
};

struct InvertArgs {
  std::string net;
  std::string target_image;
  std::optional<std::uint64_t> target_seed;
  std::uint64_t init_seed = 0;
  std::string out;
  std::string snapshots;
};

struct ExpArgs {
  std::string net;
  std::uint64_t seed = 42;
  std::size_t trials = 100;
  unsigned workers = 0;
  std::string out;
  // exp-noise
  std::vector<double> variances{kDefaultNoiseGrid.begin(), kDefaultNoiseGrid.end()};
  // exp-uniqueness
  std::size_t m = 50;
  std::optional<std::uint64_t> unseen_seed;
  std::string target_image;
  std::size_t baseline_pairs = 100000;
};

void add_optimizer_flags(CLI::App& cmd, OptimizerArgs& o) {
  cmd.add_option("--mode", o.mode, "Clipping mode")
      ->check(CLI::IsMember({"none", "standard", "stochastic"}))
      ->capture_default_str();
  cmd.add_option("--eta0", o.eta0, "Initial learning rate")->capture_default_str();
  cmd.add_option("--decay", o.decay, "Learning-rate decay factor")->capture_default_str();
  cmd.add_option("--decay-every", o.decay_every, "Iterations per decay step")
      ->capture_default_str();
  cmd.add_option("--max-iters", o.max_iters, "Iteration budget")->capture_default_str();
  cmd.add_option("--loss-tol", o.loss_tol, "Convergence tolerance on image loss")
      ->capture_default_str();
}

InversionConfig to_config(const OptimizerArgs& o) {
  InversionConfig cfg;
  cfg.mode = parse_clipping_mode(o.mode);
  cfg.eta0 = o.eta0;
  cfg.decay = o.decay;
  cfg.decay_every = o.decay_every;
  cfg.max_iters = o.max_iters;
  cfg.loss_tol = o.loss_tol;
  validate(cfg);
  return cfg;
}

json config_json(const InversionConfig& cfg) {
  return json{{"mode", to_string(cfg.mode)},
              {"bounds", {cfg.bounds.lo, cfg.bounds.hi}},
              {"eta0", cfg.eta0},
              {"decay", cfg.decay},
              {"decay_every", cfg.decay_every},
              {"max_iters", cfg.max_iters},
              {"loss_tol", cfg.loss_tol},
              {"init_seed", cfg.init_seed}};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct LoadedNet {
  GeneratorNetwork net;
  json info;
};

LoadedNet load_net(const std::string& path) {
  const std::string bytes = read_file(path);
  auto net = deserialize(bytes);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  json info{{"file", fs::path(path).filename().string()},
            {"fnv1a64", hex64(fnv1a64({data, bytes.size()}))},
            {"seed", net.seed()},
            {"latent_dim", net.latent_dim()},
            {"output_shape", to_string(net.output_shape())}};
  return {std::move(net), std::move(info)};
}

ImageTensor checked_target(const std::string& path, const GeneratorNetwork& net) {
  ImageTensor target = load_target(path);
  if (target.shape != net.output_shape()) {
    throw FormatError("target", "image shape " + to_string(target.shape) +
                                    " does not match network output " +
                                    to_string(net.output_shape()));
  }
  return target;
}

// The manifest sits next to `out` and records everything needed to rerun.
// Worker count is left out on purpose: it never changes the outputs.
void write_manifest(const std::string& out, const std::string& subcommand,
                    std::uint64_t seed, json config, json outputs) {
  json m{{"tool", "ganinv"},
         {"version", GANINV_VERSION},
         {"subcommand", subcommand},
         {"seed", seed},
         {"config", std::move(config)},
         {"outputs", std::move(outputs)}};
  write_file(out + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::string& out, const std::string& text, std::ostream& stream) {
  if (out.empty()) {
    stream << text;
  } else {
    write_file(out, text);
  }
}

int cmd_gen_weights(const GenWeightsArgs& a, std::ostream& out) {
  GeneratorSpec spec;
  spec.architecture = parse_architecture(a.arch);
  spec.latent_dim = a.latent_dim;
  spec.hidden_sizes = a.hidden;
  spec.hidden_activation = parse_activation(a.hidden_act);
  spec.output_shape = parse_shape(a.out_shape);
  spec.seed = a.seed;
  // dcgan_small has a fixed layout; an untouched --hidden default is dropped.
  if (spec.architecture == Architecture::dcgan_small && a.hidden == GenWeightsArgs{}.hidden) {
    spec.hidden_sizes.clear();
  }
  const auto net = build(spec);
  save(net, a.out);

  json config{{"arch", to_string(spec.architecture)},
              {"latent_dim", spec.latent_dim},
              {"hidden", spec.hidden_sizes},
              {"hidden_act", to_string(spec.hidden_activation)},
              {"out_shape", to_string(spec.output_shape)}};
  write_manifest(a.out, "gen-weights", a.seed, std::move(config),
                 json::array({fs::path(a.out).filename().string()}));
  out << "fingerprint " << format_double(weight_fingerprint(net)) << '\n';
  return kOk;
}

std::string snapshot_name(const Snapshot& s) {
  if (s.final) return "final.pgm";
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06ld.pgm", s.iter);
  return buf;
}

int cmd_invert(const InvertArgs& a, const OptimizerArgs& o, std::ostream& out) {
  if (a.target_image.empty() == !a.target_seed.has_value()) {
    throw InputError("exactly one of --target-image and --target-seed is required");
  }
  InversionConfig cfg = to_config(o);
  cfg.init_seed = a.init_seed;
  const LoadedNet loaded = load_net(a.net);
  const auto& net = loaded.net;

  std::optional<LatentVector> truth;
  ImageTensor target;
  if (a.target_seed) {
    truth = trial_latent(net.latent_dim(), *a.target_seed, 0);
    target = evaluate(net, *truth);
  } else {
    target = checked_target(a.target_image, net);
  }
  std::optional<std::span<const double>> truth_view;
  if (truth) truth_view = std::span<const double>(*truth);

  InversionResult result;
  std::vector<Snapshot> snaps;
  if (a.snapshots.empty()) {
    result = invert(net, target, cfg, truth_view);
  } else {
    snaps = exp_trajectory(net, target, cfg, kDefaultSnapshotIters, &result);
    if (truth) result.z_error = latent_error(*truth, result.z_recovered);
  }

  json j{{"z_recovered", result.z_recovered},
         {"final_loss", result.final_loss},
         {"iters_used", result.iters_used},
         {"converged", result.converged},
         {"z_error", result.z_error ? json(*result.z_error) : json(nullptr)}};
  if (!snaps.empty()) {
    json traj = json::array();
    for (const auto& s : snaps) {
      traj.push_back({{"iter", s.iter}, {"loss", s.loss}, {"final", s.final},
                      {"file", snapshot_name(s)}});
    }
    j["trajectory"] = std::move(traj);
  }
  const std::string text = j.dump(2) + "\n";

  json outputs = json::array();
  if (!a.snapshots.empty()) {
    const fs::path dir(a.snapshots);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError("path", "cannot create '" + dir.string() + "': " + ec.message());
    write_file(dir / "target.pgm", encode_pgm(target));
    outputs.push_back("target.pgm");
    for (const auto& s : snaps) {
      write_file(dir / snapshot_name(s), encode_pgm(s.image));
      outputs.push_back(snapshot_name(s));
    }
  }
  emit(a.out, text, out);
  if (!a.out.empty()) {
    json config = config_json(cfg);
    if (a.target_seed) config["target_seed"] = *a.target_seed;
    else config["target_image"] = fs::path(a.target_image).filename().string();
    config["net"] = loaded.info;
    outputs.insert(outputs.begin(), fs::path(a.out).filename().string());
    write_manifest(a.out, "invert", a.init_seed, std::move(config), std::move(outputs));
  }
  return kOk;
}

int cmd_exp(const std::string& name, const ExpArgs& a, const OptimizerArgs& o,
            std::ostream& out) {
  const InversionConfig cfg = to_config(o);
  const LoadedNet loaded = load_net(a.net);
  const auto& net = loaded.net;
  TrialOptions opts;
  opts.workers = a.workers;

  json config = config_json(cfg);
  config.erase("init_seed");  // per-trial streams derive from --seed
  config["net"] = loaded.info;

  std::string csv;
  if (name == "exp-recovery") {
    config["trials"] = a.trials;
    csv = recovery_csv(exp_recovery(net, a.trials, cfg, a.seed, opts));
  } else if (name == "exp-noise") {
    config["trials"] = a.trials;
    config["variances"] = a.variances;
    csv = noise_csv(exp_noise(net, a.variances, a.trials, cfg, a.seed, opts));
  } else {
    ImageTensor target;
    if (!a.target_image.empty()) {
      target = checked_target(a.target_image, net);
      config["target_image"] = fs::path(a.target_image).filename().string();
    } else {
      if (!net.spec()) {
        throw InputError("network has no spec to rebuild an unseen generator; "
                         "pass --target-image");
      }
      const std::uint64_t unseen = a.unseen_seed.value_or(net.seed() + 1);
      target = unseen_target(*net.spec(), unseen, a.seed);
      config["unseen_seed"] = unseen;
    }
    config["m"] = a.m;
    config["baseline_pairs"] = a.baseline_pairs;
    csv = uniqueness_csv(exp_uniqueness(net, target, a.m, cfg, a.seed, a.baseline_pairs, opts));
  }

  emit(a.out, csv, out);
  if (!a.out.empty()) {
    write_manifest(a.out, name, a.seed, std::move(config),
                   json::array({fs::path(a.out).filename().string()}));
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent recovery for feed-forward generators", "ganinv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GANINV_VERSION);

  GenWeightsArgs gw;
  auto* gen = app.add_subcommand("gen-weights", "Build a seeded generator and save it");
  gen->add_option("--arch", gw.arch, "mlp | dcgan_small")
      ->check(CLI::IsMember({"mlp", "dcgan_small"}))
      ->capture_default_str();
  gen->add_option("--latent-dim", gw.latent_dim, "Latent dimension")->capture_default_str();
  gen->add_option("--hidden", gw.hidden, "Hidden layer sizes (mlp)")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--hidden-act", gw.hidden_act, "tanh | relu")
      ->check(CLI::IsMember({"tanh", "relu"}))
      ->capture_default_str();
  gen->add_option("--out-shape", gw.out_shape, "Output shape CxHxW")->capture_default_str();
  gen->add_option("--seed", gw.seed, "Weight seed")->capture_default_str();
  gen->add_option("--out", gw.out, "Output weight file")->required();

  InvertArgs inv;
  OptimizerArgs inv_opt;
  auto* invc = app.add_subcommand("invert", "Recover a latent vector for one image");
  invc->add_option("--net", inv.net, "Weight file")->required();
  auto* timg = invc->add_option("--target-image", inv.target_image, "PGM or JSON tensor");
  auto* tseed = invc->add_option("--target-seed", inv.target_seed,
                                 "Self-test: invert phi(z) for a seeded z");
  timg->excludes(tseed);
  invc->add_option("--init-seed", inv.init_seed, "Seed of the initial latent")
      ->capture_default_str();
  invc->add_option("--out", inv.out, "Result JSON (stdout if omitted)");
  invc->add_option("--snapshots", inv.snapshots, "Directory for PGM snapshots");
  add_optimizer_flags(*invc, inv_opt);

  ExpArgs ex;
  OptimizerArgs ex_opt;
  std::vector<CLI::App*> exps;
  for (const char* name : {"exp-recovery", "exp-noise", "exp-uniqueness"}) {
    auto* c = app.add_subcommand(name);
    c->add_option("--net", ex.net, "Weight file")->required();
    c->add_option("--seed", ex.seed, "Master seed")->capture_default_str();
    c->add_option("--workers", ex.workers, "Worker threads (0 = all CPUs)")
        ->capture_default_str();
    c->add_option("--out", ex.out, "CSV path (stdout if omitted)");
    add_optimizer_flags(*c, ex_opt);
    exps.push_back(c);
  }
  exps[0]->description("Success rate per clipping mode and threshold");
  exps[0]->add_option("--trials", ex.trials, "Trials")->capture_default_str();
  exps[1]->description("Recovery error under additive Gaussian noise");
  exps[1]->add_option("--trials", ex.trials, "Trials per variance")->capture_default_str();
  exps[1]->add_option("--variances", ex.variances, "Noise variances")
      ->delimiter(',')
      ->capture_default_str();
  exps[2]->description("Spread of repeated recoveries of one target");
  exps[2]->add_option("--m", ex.m, "Recoveries per mode")->capture_default_str();
  exps[2]->add_option("--unseen-seed", ex.unseen_seed,
                      "Seed of the generator producing the target (default: net seed + 1)");
  exps[2]->add_option("--target-image", ex.target_image, "PGM or JSON tensor target");
  exps[2]->add_option("--baseline-pairs", ex.baseline_pairs, "Monte-Carlo pairs")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_weights(gw, out);
    if (invc->parsed()) return cmd_invert(inv, inv_opt, out);
    for (auto* c : exps) {
      if (c->parsed()) return cmd_exp(c->get_name(), ex, ex_opt, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kUsage;
}

}  // namespace ganinv::cli

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Budgets below the 100k default are printed with the line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "ganinv/experiments.hpp"
#include "ganinv/generator.hpp"
#include "ganinv/inversion.hpp"
#include "ganinv/stats.hpp"

namespace {

using namespace ganinv;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 42;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const GeneratorNetwork& reference_net() {
  static const GeneratorNetwork net = build(reference_mlp_spec(kSeed));
  return net;
}

Verdict gradient_oracle() {
  Rng rng(kSeed);
  double worst = 0.0;
  int bad = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto spec = t % 2 == 0 ? reference_mlp_spec(1000 + t) : reference_dcgan_spec(1000 + t);
    const auto net = build(spec);
    const auto z = init_latent(net.latent_dim(), rng);
    ImageTensor target(net.output_shape());
    for (auto& p : target.data) p = uniform_symmetric(rng);
    const auto analytic = backward_input(net, forward(net, z).tape, target);
    const auto numeric = finite_diff_grad(net, z, target, 1e-6);
    double e = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      e = std::max(e, std::abs(analytic[i] - numeric[i]) / (1.0 + std::abs(numeric[i])));
    }
    worst = std::max(worst, e);
    if (!(e <= 1e-5)) ++bad;
  }
  return {bad == 0, "50 triples (mlp + dcgan_small), max rel err " + fmt("%.2e", worst) +
                        " <= 1e-5, failures " + std::to_string(bad)};
}

Verdict clip_suite() {
  Rng rng(kSeed);
  std::uniform_real_distribution<double> wide(-5.0, 5.0);
  std::uniform_real_distribution<double> inside(-1.0, 1.0);
  std::size_t failures = 0;
  std::vector<double> replacements;
  for (int c = 0; c < 10000; ++c) {
    std::vector<double> v(8);
    for (auto& x : v) x = wide(rng);
    Rng r1(c), r2(c);
    const auto once = clip(v, ClippingMode::standard, r1);
    if (clip(once, ClippingMode::standard, r2) != once) ++failures;

    const auto st = clip(v, ClippingMode::stochastic, r1);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (st[i] < -1.0 || st[i] > 1.0) ++failures;
      if (std::abs(v[i]) > 1.0) {
        replacements.push_back(st[i]);
      } else if (st[i] != v[i]) {
        ++failures;
      }
    }

    std::vector<double> f(8);
    for (auto& x : f) x = inside(rng);
    if (clip(f, ClippingMode::stochastic, r1) != f || clip(f, ClippingMode::standard, r1) != f ||
        clip(f, ClippingMode::none, r1) != f) {
      ++failures;
    }
  }
  std::sort(replacements.begin(), replacements.end());
  const auto distinct =
      std::unique(replacements.begin(), replacements.end()) - replacements.begin();
  const bool degenerate = distinct < 2;
  return {failures == 0 && !degenerate,
          "10^4 cases, failures " + std::to_string(failures) + ", distinct stochastic values " +
              std::to_string(distinct)};
}

RecoveryReport& table_report() {
  static RecoveryReport report = exp_recovery(reference_net(), 100, InversionConfig{}, kSeed);
  return report;
}

Verdict table_analogue() {
  const auto& r = table_report();
  const auto& none = r.at(ClippingMode::none).success;
  const auto& standard = r.at(ClippingMode::standard).success;
  const auto& stochastic = r.at(ClippingMode::stochastic).success;
  bool ok = stochastic[2] == 1.0 && stochastic[0] >= 0.95;
  std::ostringstream d;
  d << "100 trials, budget 100000;";
  for (std::size_t k = 0; k < kRecoveryThresholds.size(); ++k) {
    ok = ok && stochastic[k] + 0.02 >= standard[k] && standard[k] + 0.02 >= none[k];
    d << " eps " << kRecoveryThresholds[k] << ": " << none[k] << "/" << standard[k] << "/"
      << stochastic[k];
  }
  d << " (none/standard/stochastic)";
  return {ok, d.str()};
}

Verdict threshold_monotone() {
  // The full-budget table plus a short-budget run where rates are fractional.
  InversionConfig shortcfg;
  shortcfg.max_iters = 300;
  const RecoveryReport reports[] = {table_report(),
                                    exp_recovery(reference_net(), 100, shortcfg, kSeed + 1)};
  std::size_t checked = 0;
  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& m : r.modes) {
      for (std::size_t k = 0; k + 1 < m.success.size(); ++k, ++checked) {
        ok = ok && m.success[k] <= m.success[k + 1];
      }
    }
  }
  const auto& s = reports[1].at(ClippingMode::stochastic).success;
  return {ok, std::to_string(checked) + " adjacent pairs over 2 reports; short-budget stochastic " +
                  fmt("%.2f", s[0]) + ".." + fmt("%.2f", s[3])};
}

Verdict baseline() {
  Rng rng = derive_stream(kSeed, 0, StreamPurpose::baseline);
  const double b = baseline_pairwise(100, 100000, rng);
  return {b >= 0.0805 && b <= 0.0825, "baseline_pairwise(100, 1e5) = " + fmt("%.5f", b) +
                                          " in [0.0805, 0.0825]"};
}

Verdict noise_trend() {
  const std::vector<double> grid{0.001, 0.01, 0.05, 0.1};
  InversionConfig cfg;
  cfg.max_iters = 20000;
  const auto report = exp_noise(reference_net(), grid, 30, cfg, kSeed);
  std::vector<double> med;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    med.push_back(report.at(ClippingMode::stochastic, v).summary.median);
  }
  bool increasing = true;
  for (std::size_t i = 0; i + 1 < med.size(); ++i) increasing = increasing && med[i] < med[i + 1];
  const auto fit = stats::linear_fit(grid, med);
  std::ostringstream d;
  d << "30 trials, budget 20000; stochastic medians";
  for (double m : med) d << ' ' << fmt("%.3g", m);
  d << ", R^2 " << fmt("%.3f", fit.r_squared) << " (>= 0.8)";
  return {increasing && fit.r_squared >= 0.8, d.str()};
}

Verdict uniqueness() {
  const auto target = unseen_target(reference_mlp_spec(kSeed), kSeed + 1, kSeed);
  InversionConfig cfg;
  cfg.max_iters = 20000;
  const auto report = exp_uniqueness(reference_net(), target, 50, cfg, kSeed);
  const double s = report.at(ClippingMode::stochastic).mean_pairwise;
  const double bound = 0.01 * report.baseline;
  return {s < bound, "m 50, budget 20000; stochastic " + fmt("%.3g", s) + " vs bound " +
                         fmt("%.3g", bound) + " (standard " +
                         fmt("%.3g", report.at(ClippingMode::standard).mean_pairwise) +
                         ", none " + fmt("%.3g", report.at(ClippingMode::none).mean_pairwise) +
                         ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Verdict cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "ganinv_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string exe = GANINV_EXE;
  const std::string net = (dir / "g.net").string();
  auto sh = [&](const std::string& args) {
    return std::system(("\"" + exe + "\" " + args + " > /dev/null 2>&1").c_str());
  };
  if (sh("gen-weights --seed 42 --out " + net) != 0) return {false, "gen-weights failed"};

  struct Case {
    std::string args;
    std::string file;
  };
  const std::vector<Case> cases = {
      {"exp-recovery --net " + net + " --trials 6 --max-iters 2000", "rec.csv"},
      {"exp-noise --net " + net + " --trials 4 --max-iters 1000", "noise.csv"},
      {"exp-uniqueness --net " + net + " --m 4 --max-iters 1000", "uniq.csv"},
  };
  std::size_t compared = 0;
  for (const auto& c : cases) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path sub = dir / ("run" + std::to_string(run));
      fs::create_directories(sub);
      const auto out = (sub / c.file).string();
      const char* workers = run == 0 ? "1" : "3";
      if (sh(c.args + " --workers " + workers + " --out " + out) != 0) {
        return {false, c.file + ": run failed"};
      }
      outputs[run] = slurp(out) + slurp(out + ".manifest.json");
    }
    if (outputs[0] != outputs[1]) return {false, c.file + " differs between --workers 1 and 3"};
    ++compared;
  }
  std::string inv[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path sub = dir / ("run" + std::to_string(run));
    const auto out = (sub / "inv.json").string();
    if (sh("invert --net " + net + " --target-seed 3 --max-iters 3000 --out " + out +
           " --snapshots " + (sub / "snaps").string()) != 0) {
      return {false, "invert failed"};
    }
    inv[run] = slurp(out) + slurp(out + ".manifest.json") + slurp(sub / "snaps" / "final.pgm");
  }
  if (inv[0] != inv[1]) return {false, "invert outputs differ"};
  ++compared;
  fs::remove_all(dir);
  return {true, std::to_string(compared) + " subcommands byte-identical across repeat runs"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const Criterion criteria[] = {
      {"gradient oracle", gradient_oracle},
      {"clipping suite", clip_suite},
      {"recovery table", table_analogue},
      {"threshold monotonicity", threshold_monotone},
      {"baseline pairwise distance", baseline},
      {"noise trend", noise_trend},
      {"uniqueness", uniqueness},
      {"cli determinism", cli_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %d. %-27s %s [%.0fs]\n", v.pass ? "PASS" : "FAIL", index, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}

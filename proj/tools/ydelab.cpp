#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "ydl/config.hpp"
#include "ydl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "ydelab: pathwise numerical laboratory for delay equations driven by "
      "Hölder-rough noise"};
  app.fallthrough();

  ydl::RunOptions opts;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", opts.config_path, "JSON experiment config")->required();
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "override the config's base seed");
  CLI::Option* out_opt =
      app.add_option("--out-dir", out_dir, "override the config's output directory");
  app.add_option("--threads", opts.threads, "worker threads (default 1)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--kernels", opts.kernels,
                 "pair-scan backend: auto | scalar | avx2 (default auto)")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  app.add_subcommand("noise", "sample the driver ensemble and summarize its norms");
  app.add_subcommand("solve", "integrate one trajectory and emit per-interval norms");
  app.add_subcommand("bounds", "calibrate and verify the per-interval estimates");
  app.add_subcommand("ghat", "ergodic average of the contraction log-factor");
  app.add_subcommand("epsilon", "bisect for the certified smallness amplitude");
  app.add_subcommand("pullback", "transport a ball cloud from depth -n r to time 0");
  app.add_subcommand("singleton", "two-point contraction experiment (pullback + forward)");
  app.add_subcommand("tempered", "growth-rate diagnostics along shifted windows");
  app.add_subcommand("bounded-g", "block contraction scan for saturating diffusion");
  app.add_subcommand("all", "run every operation the config supports");
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_dir = out_dir;
  for (const CLI::App* sub : app.get_subcommands()) opts.subcommand = sub->get_name();

  return ydl::run_experiment(opts);
}

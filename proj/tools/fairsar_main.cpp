#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairsar/config.hpp"
#include "fairsar/runner.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  long seed = -1;
  std::string out;
  std::string algo;
  std::string ablation;
  std::string tau;
};

void add_common(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "path to the run config")->required();
  cmd->add_option("--seed", args.seed, "override stream and algo seeds");
  cmd->add_option("--out", args.out, "override output directory");
  cmd->add_option("--algo", args.algo, "override algorithm")
      ->check(CLI::IsMember({"fairsaoml", "masked", "staticpd", "ogd"}));
  cmd->add_option("--ablation", args.ablation, "override ablation")
      ->check(CLI::IsMember({"none", "no_weights", "no_base"}));
  cmd->add_option("--tau", args.tau, "override eval tau list (comma separated)");
}

fairsar::Config load_with_overrides(const CliArgs& args) {
  fairsar::Config cfg = fairsar::parse_config(args.config_path);
  if (args.seed >= 0) {
    cfg.stream.seed = static_cast<std::uint64_t>(args.seed);
    cfg.algo.seed = static_cast<std::uint64_t>(args.seed);
  }
  if (!args.out.empty()) cfg.out.dir = args.out;
  if (!args.algo.empty()) cfg.algo.name = args.algo;
  if (!args.ablation.empty()) cfg.algo.ablation = args.ablation;
  if (!args.tau.empty()) cfg.eval.tau = args.tau;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-aware strongly adaptive online meta-learning harness"};
  app.require_subcommand(1);

  CliArgs run_args, gen_args, cmp_args;
  CLI::App* run = app.add_subcommand("run", "execute one algorithm over one stream");
  add_common(run, run_args);
  CLI::App* gen = app.add_subcommand("gen", "write the configured synthetic stream to CSV");
  add_common(gen, gen_args);
  CLI::App* cmp = app.add_subcommand("compare", "run the algorithm suite on one stream");
  add_common(cmp, cmp_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      fairsar::Config cfg;
      try {
        cfg = load_with_overrides(run_args);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      return fairsar::run_command(cfg);
    }
    if (gen->parsed()) {
      fairsar::Config cfg;
      try {
        cfg = load_with_overrides(gen_args);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      return fairsar::gen_command(cfg);
    }
    fairsar::Config cfg;
    try {
      cfg = load_with_overrides(cmp_args);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    return fairsar::compare_command(cfg);
  } catch (const fairsar::schema_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

#include <CLI11.hpp>
#include <iostream>

#include "snlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Schroedinger-Newton and gravitational-entanglement experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SNLAB_VERSION);

  struct Sub {
    const char* name;
    snlab::ExperimentKind kind;
    const char* help;
  };
  const Sub subs[] = {
      {"gaussian", snlab::ExperimentKind::gaussian_correlations, "Entanglement and mutual information of two trapped masses"},
      {"sn-effective", snlab::ExperimentKind::sn_effective, "Effective single-particle SN evolution on an (s, z) grid"},
      {"bipartite", snlab::ExperimentKind::bipartite_oracle, "Two-particle 1D evolution: product-form check"},
      {"signaling", snlab::ExperimentKind::signaling, "Pure- vs mixed-state SN for two decompositions of one mixture"},
      {"sweep", snlab::ExperimentKind::sweep, "Run a base config over a list of parameter values"},
  };
  std::string config, out;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (const Sub& s : subs)
    if (app.got_subcommand(s.name)) return snlab::run_cli(s.kind, config, out);
  return 2;
}

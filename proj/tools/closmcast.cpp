#include <cstdlib>
#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "closmcast/experiments.hpp"
#include "closmcast/version.hpp"

namespace {

// One shared bag of option values: exactly one subcommand parses per run, so
// the bindings never conflict. Presence is checked through sub->count() so a
// config file only loses to flags the user actually typed.
struct CommonArgs {
  std::string config;
  std::string preset;
  std::string out;
  uint64_t seed = 0;
  std::vector<uint64_t> d;
  std::vector<uint32_t> k;
  uint32_t groups = 0;
  uint64_t flow_pkts = 0;
  bool verbose = false;
  uint32_t n = 0, m = 0, l = 0, s = 0, u = 0;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "key=value config file, applied before other flags");
  sub->add_option("--seed", args.seed, "master RNG seed (default 42, env CLOSMCAST_SEED)");
  sub->add_option("--out", args.out, "output directory for CSV files (default .)");
  sub->add_option("--preset", args.preset, "topology preset: paper or fig1");
  sub->add_option("--d", args.d, "group sizes, comma separated")->delimiter(',');
  sub->add_option("--k", args.k, "header copy counts, comma separated")->delimiter(',');
  sub->add_option("--groups", args.groups, "random groups per d value (default 100)");
  sub->add_option("--flow-pkts", args.flow_pkts, "packets per flow in the load model (default 1000)");
  sub->add_flag("--verbose", args.verbose, "also emit per-group CSV rows and link traces");
  sub->add_option("--n", args.n, "pods");
  sub->add_option("--m", args.m, "leaves per pod");
  sub->add_option("--l", args.l, "hosts per leaf");
  sub->add_option("--s", args.s, "spines per pod");
  sub->add_option("--u", args.u, "core uplinks per spine");
}

// Precedence, lowest to highest: built-in defaults, CLOSMCAST_SEED, config
// file, explicit flags. --preset applies before the individual dimension
// overrides so "--preset fig1 --l 8" means fig1 with wider leaves.
closmcast::ExperimentConfig build_config(const CLI::App* sub, const CommonArgs& args) {
  closmcast::ExperimentConfig cfg;
  if (const char* env = std::getenv("CLOSMCAST_SEED")) {
    cfg.seed = std::stoull(env);
  }
  if (sub->count("--config")) closmcast::apply_config_file(args.config, cfg);
  if (sub->count("--preset")) closmcast::apply_preset(args.preset, cfg);
  if (sub->count("--n")) cfg.topo.n = args.n;
  if (sub->count("--m")) cfg.topo.m = args.m;
  if (sub->count("--l")) cfg.topo.l = args.l;
  if (sub->count("--s")) cfg.topo.s = args.s;
  if (sub->count("--u")) cfg.topo.u = args.u;
  if (sub->count("--seed")) cfg.seed = args.seed;
  if (sub->count("--out")) cfg.out_dir = args.out;
  if (sub->count("--d")) cfg.d_list = args.d;
  if (sub->count("--k")) cfg.k_list = args.k;
  if (sub->count("--groups")) cfg.n_groups = args.groups;
  if (sub->count("--flow-pkts")) cfg.flow_pkts = args.flow_pkts;
  if (args.verbose) cfg.verbose = true;
  return cfg;
}

void fill_defaults(closmcast::ExperimentConfig& cfg, std::vector<uint64_t> d,
                   std::vector<uint32_t> k) {
  if (cfg.d_list.empty()) cfg.d_list = std::move(d);
  if (cfg.k_list.empty()) cfg.k_list = std::move(k);
}

void print_replay(const closmcast::Fig1Replay& rep) {
  std::cout << "topology: 4 pods x 2 leaves/pod x 4 hosts/leaf, source host "
            << rep.group.source << "\n";
  std::cout << "members:";
  for (uint64_t h : rep.group.members) std::cout << ' ' << h;
  std::cout << "\n";
  std::cout << "extra transmissions, two clustered copies  : " << rep.et_bert << "\n";
  std::cout << "extra transmissions, single header, OR rule: " << rep.et_elmo_or << "\n";
  std::cout << "extra transmissions, single header, 1111   : " << rep.et_elmo_stated << "\n";
  std::cout << "simulated extra deliveries: single=" << rep.sim_extra_elmo
            << " clustered=" << rep.sim_extra_bert << "\n";
  std::cout << "upstream packets per layer (single / clustered):\n";
  const char* names[3] = {"host->leaf ", "leaf->spine", "spine->core"};
  for (int layer = 0; layer < 3; ++layer) {
    std::cout << "  " << names[layer] << "  " << rep.elmo_upstream[layer] << " / "
              << rep.bert_upstream[layer] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"source-routed multicast encoders for three-tier Clos fabrics"};
  app.set_version_flag("--version", std::string("closmcast ") + closmcast::kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* fig3 = app.add_subcommand("fig3", "savings sweep over d and k (et.csv)");
  CLI::App* fig4 = app.add_subcommand("fig4", "savings over d at fixed k (et.csv)");
  CLI::App* fig5 = app.add_subcommand("fig5", "downstream header size vs k (header.csv)");
  CLI::App* fig67 = app.add_subcommand("fig67", "per-link load statistics vs k (linkload.csv)");
  CLI::App* custom = app.add_subcommand("custom", "all three experiments with explicit d/k");
  for (CLI::App* sub : {fig3, fig4, fig5, fig67, custom}) add_common(sub, args);

  uint64_t replay_seed = 42;
  CLI::App* replay = app.add_subcommand("replay-fig1", "pinned 4-pod walkthrough with known counts");
  replay->add_option("--seed", replay_seed, "seed for the path draws (default 42)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (replay->parsed()) {
      if (!replay->count("--seed")) {
        if (const char* env = std::getenv("CLOSMCAST_SEED")) replay_seed = std::stoull(env);
      }
      print_replay(closmcast::replay_fig1(replay_seed));
      return 0;
    }
    CLI::App* sub = app.get_subcommands().front();
    closmcast::ExperimentConfig cfg = build_config(sub, args);
    if (sub == fig3) {
      fill_defaults(cfg, {100, 200, 300, 400, 500}, {2, 4, 6, 8, 10, 12});
      closmcast::run_fig3(cfg);
    } else if (sub == fig4) {
      fill_defaults(cfg, {100, 200, 300, 400, 500}, {5});
      closmcast::run_fig4(cfg);
    } else if (sub == fig5) {
      fill_defaults(cfg, {2000}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
      closmcast::run_fig5(cfg);
    } else if (sub == fig67) {
      fill_defaults(cfg, {2000}, {1, 2, 4, 6, 8, 10, 12});
      closmcast::run_fig67(cfg);
    } else {
      if (cfg.d_list.empty() || cfg.k_list.empty()) {
        throw std::invalid_argument("custom requires explicit --d and --k (or config values)");
      }
      closmcast::run_custom(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

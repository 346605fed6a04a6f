#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "closmcast/analytics.hpp"
#include "closmcast/group.hpp"
#include "closmcast/topology.hpp"

namespace closmcast {

struct ExperimentConfig {
  TopologyParams topo = paper_preset();
  std::vector<uint64_t> d_list;
  std::vector<uint32_t> k_list;
  uint32_t n_groups = 100;
  uint64_t flow_pkts = 1000;
  uint64_t seed = 42;
  std::string out_dir = ".";
  bool verbose = false;
  uint32_t kmeans_restarts = 10;
  uint32_t kmeans_max_iter = 100;

  void validate() const;  // throws on empty lists / zero counts
};

// key=value config file ('#' comments, lists comma-separated). Recognized
// keys: preset, n, m, l, s, u, d, k, n_groups, flow_pkts, seed, out, verbose,
// kmeans_restarts, kmeans_max_iter. Unknown keys are errors.
void apply_config_file(const std::string& path, ExperimentConfig& cfg);

// preset name "paper" or "fig1".
void apply_preset(const std::string& name, ExperimentConfig& cfg);

// Experiment runners. Each writes one CSV (custom writes all three) into
// cfg.out_dir; reruns with identical config+seed are byte-identical.
void run_fig3(const ExperimentConfig& cfg);   // et.csv
void run_fig4(const ExperimentConfig& cfg);   // et.csv
void run_fig5(const ExperimentConfig& cfg);   // header.csv
void run_fig67(const ExperimentConfig& cfg);  // linkload.csv
void run_custom(const ExperimentConfig& cfg);

// Pinned small-topology walkthrough used as the golden end-to-end check:
// 4 pods x 2 leaves x 4 ports, source host 0, members
// {3, 13, 14, 18, 24, 25, 28}, clusters {pods 1,2} and {pod 3}.
struct Fig1Replay {
  MulticastGroup group;
  uint64_t et_bert = 0;
  uint64_t et_elmo_or = 0;      // OR-rule shared bitmap (1110)
  uint64_t et_elmo_stated = 0;  // all-ones shared bitmap (1111)
  uint64_t sim_extra_bert = 0;
  uint64_t sim_extra_elmo = 0;
  std::array<uint64_t, 3> elmo_upstream{};  // up-direction packets per layer
  std::array<uint64_t, 3> bert_upstream{};
};

Fig1Replay replay_fig1(uint64_t seed = 42);

}  // namespace closmcast

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "closmcast/clustering.hpp"
#include "closmcast/encoder.hpp"
#include "closmcast/forwarding.hpp"
#include "closmcast/group.hpp"
#include "closmcast/topology.hpp"

namespace closmcast {

// Extra transmissions of the single shared downstream-leaf rule: sum over
// member-hosting leaves in destination pods of hamming(leaf bitmap, M) with
// M = OR of those bitmaps.
uint64_t et_elmo(const Topology& topo, const MulticastGroup& grp);

// Per-cluster version: each cluster u contributes hamming sums against its own
// OR rule M^u over the cluster's member leaves.
uint64_t et_bert(const Topology& topo, const MulticastGroup& grp, const ClusterAssignment& asg);

// Extra transmissions if the shared downstream-leaf rule were `rule` instead
// of the OR of the member bitmaps (rule width l).
uint64_t et_with_shared_rule(const Topology& topo, const MulticastGroup& grp, const BitVec& rule);

struct HeaderStats {
  double mean_bits = 0.0;
  uint64_t total_bits = 0;
  std::vector<uint64_t> per_copy_bits;
};

HeaderStats header_stats(const std::vector<PacketHeader>& headers, const Topology& topo);
// Same statistics over core + downstream-spine + downstream-leaf rules only.
HeaderStats downstream_header_stats(const std::vector<PacketHeader>& headers,
                                    const Topology& topo);

struct LoadStat {
  double mean = 0.0;
  double stddev = 0.0;  // population, over all links of the layer/direction
  double max = 0.0;
};

struct LinkLoadReport {
  LoadStat stats[3][2];  // [layer][dir]

  LoadStat& at(LinkLayer layer, LinkDir dir) {
    return stats[static_cast<int>(layer)][static_cast<int>(dir)];
  }
  const LoadStat& at(LinkLayer layer, LinkDir dir) const {
    return stats[static_cast<int>(layer)][static_cast<int>(dir)];
  }
};

// Unit-traffic model: each traversal of a directed link contributes
// (1 + remaining_header_bits / elmo_ref_bits) * flow_pkts units, so the
// launch packet of the reference single-header encoding carries exactly
// 2 * flow_pkts on its host->leaf link. elmo_ref_bits is the full header size
// of the same group's single-packet encoding.
LinkLoadReport link_loads(const DeliveryReport& report, const Topology& topo,
                          uint64_t flow_pkts, const std::vector<PacketHeader>& headers,
                          uint64_t elmo_ref_bits);

struct SavingsCell {
  uint64_t d = 0;
  uint32_t k = 0;
  double mean_savings = 0.0;
  double mean_et_elmo = 0.0;
  double mean_et_bert = 0.0;
  uint32_t n_used = 0;  // groups with et_elmo > 0
};

// Per-group detail backing a savings sweep (one entry per generated group).
struct EtDetail {
  uint64_t d = 0;
  uint32_t group_id = 0;
  uint64_t et_elmo = 0;
  bool used = true;
  std::map<uint32_t, uint64_t> et_bert_by_k;
};

// Monte Carlo mean savings 1 - et_bert/et_elmo per (d, k) cell. Groups are
// generated once per (d, group index) and shared across k values; groups with
// et_elmo = 0 are skipped from the means and logged to stderr.
std::vector<SavingsCell> savings_curve(const Topology& topo,
                                       const std::vector<uint64_t>& d_values,
                                       const std::vector<uint32_t>& k_values,
                                       uint32_t n_groups, uint64_t seed,
                                       uint32_t kmeans_restarts = 10,
                                       uint32_t kmeans_max_iter = 100,
                                       std::vector<EtDetail>* detail = nullptr);

}  // namespace closmcast

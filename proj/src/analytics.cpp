#include "closmcast/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "closmcast/rng.hpp"

namespace closmcast {

namespace {

// Sum of hamming(L_i, rule) over one set of member leaves.
uint64_t et_against(const std::vector<const LeafMembers*>& leaves, const BitVec& rule) {
  uint64_t total = 0;
  for (const LeafMembers* lm : leaves) total += hamming(lm->ports, rule);
  return total;
}

std::vector<const LeafMembers*> collect_dest_leaves(const GroupLayout& layout) {
  std::vector<const LeafMembers*> leaves;
  for (const auto& [pod, pod_leaves] : layout.dest) {
    (void)pod;
    for (const auto& lm : pod_leaves) leaves.push_back(&lm);
  }
  return leaves;
}

BitVec or_of(const std::vector<const LeafMembers*>& leaves, uint32_t width) {
  BitVec rule(width);
  for (const LeafMembers* lm : leaves) rule |= lm->ports;
  return rule;
}

}  // namespace

uint64_t et_elmo(const Topology& topo, const MulticastGroup& grp) {
  const GroupLayout layout = GroupLayout::build(topo, grp);
  const auto leaves = collect_dest_leaves(layout);
  if (leaves.empty()) return 0;
  return et_against(leaves, or_of(leaves, topo.params().l));
}

uint64_t et_bert(const Topology& topo, const MulticastGroup& grp, const ClusterAssignment& asg) {
  const GroupLayout layout = GroupLayout::build(topo, grp);
  if (layout.dest_pods.empty()) return 0;
  for (uint32_t pod : layout.dest_pods) {
    if (asg.assignment.find(pod) == asg.assignment.end()) {
      throw std::invalid_argument("et_bert: assignment missing destination pod " +
                                  std::to_string(pod));
    }
  }
  uint64_t total = 0;
  for (const auto& cluster : asg.clusters()) {
    std::vector<const LeafMembers*> leaves;
    for (uint32_t pod : cluster) {
      auto it = layout.dest.find(pod);
      if (it == layout.dest.end()) {
        throw std::invalid_argument("et_bert: assignment pod " + std::to_string(pod) +
                                    " is not a destination pod");
      }
      for (const auto& lm : it->second) leaves.push_back(&lm);
    }
    if (leaves.empty()) continue;
    total += et_against(leaves, or_of(leaves, topo.params().l));
  }
  return total;
}

uint64_t et_with_shared_rule(const Topology& topo, const MulticastGroup& grp,
                             const BitVec& rule) {
  if (rule.width() != topo.params().l) {
    throw std::invalid_argument("et_with_shared_rule: rule width must be l");
  }
  const GroupLayout layout = GroupLayout::build(topo, grp);
  return et_against(collect_dest_leaves(layout), rule);
}

namespace {

HeaderStats stats_over(const std::vector<PacketHeader>& headers, const Topology& topo,
                       uint64_t (*size_fn)(const PacketHeader&, const Topology&)) {
  if (headers.empty()) {
    throw std::invalid_argument("header_stats: empty header list");
  }
  HeaderStats stats;
  stats.per_copy_bits.reserve(headers.size());
  for (const auto& header : headers) {
    const uint64_t bits = size_fn(header, topo);
    stats.per_copy_bits.push_back(bits);
    stats.total_bits += bits;
  }
  stats.mean_bits = static_cast<double>(stats.total_bits) / headers.size();
  return stats;
}

}  // namespace

HeaderStats header_stats(const std::vector<PacketHeader>& headers, const Topology& topo) {
  return stats_over(headers, topo, &header_bits);
}

HeaderStats downstream_header_stats(const std::vector<PacketHeader>& headers,
                                    const Topology& topo) {
  return stats_over(headers, topo, &downstream_header_bits);
}

LinkLoadReport link_loads(const DeliveryReport& report, const Topology& topo,
                          uint64_t flow_pkts, const std::vector<PacketHeader>& headers,
                          uint64_t elmo_ref_bits) {
  if (report.n_copies != headers.size()) {
    throw std::invalid_argument("link_loads: report does not match the header list");
  }
  if (elmo_ref_bits == 0) {
    throw std::invalid_argument("link_loads: reference header size must be nonzero");
  }
  LinkLoadReport out;
  for (int layer = 0; layer < 3; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      const auto& packets = report.link_packets[layer][dir];
      const auto& bits = report.link_bits[layer][dir];
      const uint64_t expect =
          topo.link_count(static_cast<LinkLayer>(layer), static_cast<LinkDir>(dir));
      if (packets.size() != expect || bits.size() != expect) {
        throw std::invalid_argument("link_loads: report link table does not match topology");
      }
      double sum = 0.0, sumsq = 0.0, max = 0.0;
      for (uint64_t i = 0; i < expect; ++i) {
        const double load =
            flow_pkts * (static_cast<double>(packets[i]) +
                         static_cast<double>(bits[i]) / static_cast<double>(elmo_ref_bits));
        sum += load;
        sumsq += load * load;
        if (load > max) max = load;
      }
      LoadStat& stat = out.stats[layer][dir];
      const double n = static_cast<double>(expect);
      stat.mean = sum / n;
      const double var = sumsq / n - stat.mean * stat.mean;
      stat.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
      stat.max = max;
    }
  }
  return out;
}

std::vector<SavingsCell> savings_curve(const Topology& topo,
                                       const std::vector<uint64_t>& d_values,
                                       const std::vector<uint32_t>& k_values,
                                       uint32_t n_groups, uint64_t seed,
                                       uint32_t kmeans_restarts, uint32_t kmeans_max_iter,
                                       std::vector<EtDetail>* detail) {
  if (d_values.empty() || k_values.empty() || n_groups < 1) {
    throw std::invalid_argument("savings_curve: empty sweep");
  }
  std::vector<SavingsCell> cells;
  for (uint64_t d : d_values) {
    struct Accum {
      double savings = 0, et_b = 0;
      uint32_t n = 0;
    };
    std::map<uint32_t, Accum> by_k;
    double elmo_sum = 0;
    uint32_t n_used = 0;
    for (uint32_t i = 0; i < n_groups; ++i) {
      const uint64_t stream_index = (d << 32) | i;
      const MulticastGroup grp =
          generate_group(topo, d, derive_seed(seed, seed_stream::kGroupGen, stream_index), i);
      const uint64_t ete = et_elmo(topo, grp);
      EtDetail det;
      det.d = d;
      det.group_id = i;
      det.et_elmo = ete;
      if (ete == 0) {
        det.used = false;
        std::cerr << "note: skipping group id=" << i << " d=" << d
                  << " (no extra transmissions under the shared rule)\n";
        if (detail) detail->push_back(std::move(det));
        continue;
      }
      n_used += 1;
      elmo_sum += static_cast<double>(ete);
      const auto vectors = destination_pod_vectors(topo, grp);
      for (uint32_t k : k_values) {
        uint64_t etb = 0;
        if (!vectors.empty()) {
          const ClusterAssignment asg =
              kmeans_hamming(vectors, k, derive_seed(seed, seed_stream::kKMeans, stream_index),
                             kmeans_max_iter, kmeans_restarts);
          etb = et_bert(topo, grp, asg);
        }
        Accum& acc = by_k[k];
        acc.savings += 1.0 - static_cast<double>(etb) / static_cast<double>(ete);
        acc.et_b += static_cast<double>(etb);
        acc.n += 1;
        det.et_bert_by_k[k] = etb;
      }
      if (detail) detail->push_back(std::move(det));
    }
    for (uint32_t k : k_values) {
      SavingsCell cell;
      cell.d = d;
      cell.k = k;
      cell.n_used = n_used;
      if (n_used > 0) {
        const Accum& acc = by_k[k];
        cell.mean_savings = acc.savings / acc.n;
        cell.mean_et_bert = acc.et_b / acc.n;
        cell.mean_et_elmo = elmo_sum / n_used;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace closmcast

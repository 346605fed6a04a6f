#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "closmcast/bitvec.hpp"
#include "closmcast/topology.hpp"

namespace closmcast {

// A multicast group: one source host plus d distinct member hosts (source
// excluded). Members are kept sorted so groups are canonical values.
struct MulticastGroup {
  uint32_t id = 0;
  uint64_t source = 0;
  std::vector<uint64_t> members;

  bool operator==(const MulticastGroup&) const = default;
};

// Uniform source, then d members drawn uniformly without replacement from the
// remaining hosts. Deterministic for a fixed seed.
MulticastGroup generate_group(const Topology& topo, uint64_t d, uint64_t seed, uint32_t id = 0);

// l-bit port occupancy of one leaf: bit p set iff port p serves a member.
BitVec leaf_bitmap(const Topology& topo, const MulticastGroup& grp, uint32_t pod, uint32_t leaf);

// (m*l)-bit concatenation of the pod's leaf bitmaps in leaf order.
BitVec pod_vector(const Topology& topo, const MulticastGroup& grp, uint32_t pod);

// Pods holding at least one member, excluding the source's pod. Sorted.
std::vector<uint32_t> destination_pods(const Topology& topo, const MulticastGroup& grp);

// pod -> pod_vector for every destination pod (all vectors nonzero).
std::map<uint32_t, BitVec> destination_pod_vectors(const Topology& topo, const MulticastGroup& grp);

// Per-leaf member layout, precomputed once per group so the encoder and the
// closed-form metrics never re-scan the member list.
struct LeafMembers {
  uint32_t pod = 0;
  uint32_t leaf = 0;         // pod-local
  uint32_t leaf_global = 0;  // pod*m + leaf
  BitVec ports;              // width l
};

struct GroupLayout {
  uint32_t source_pod = 0;
  uint32_t source_leaf = 0;  // pod-local
  uint32_t source_port = 0;
  BitVec source_leaf_ports;                   // member ports on the source leaf (width l)
  std::vector<LeafMembers> source_pod_other;  // member leaves in the source pod, source leaf excluded
  std::vector<uint32_t> dest_pods;            // sorted
  std::map<uint32_t, std::vector<LeafMembers>> dest;  // destination pod -> member leaves

  static GroupLayout build(const Topology& topo, const MulticastGroup& grp);
};

// Line-oriented fixture form: `g <id> src <host> members <h>,<h>,...`
void write_groups(std::ostream& os, const std::vector<MulticastGroup>& groups);
std::vector<MulticastGroup> read_groups(std::istream& is);  // throws on parse error

}  // namespace closmcast

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "closmcast/bitvec.hpp"
#include "closmcast/clustering.hpp"
#include "closmcast/group.hpp"
#include "closmcast/topology.hpp"

namespace closmcast {

// Where in the packet's journey a rule is consumed. Wire encoding uses the
// numeric values below (3 bits).
enum class RuleScope : uint8_t {
  UpstreamLeaf = 0,
  UpstreamSpine = 1,
  Core = 2,
  DownstreamSpine = 3,
  DownstreamLeaf = 4,
};

const char* rule_scope_name(RuleScope scope);

// One packet-carried forwarding rule.
//   bitmap width: l (leaf scopes), m (upstream-spine: pod-local leaves to send
//   down to; downstream-spine: same), n (core: pods).
//   switch_ids: layer-local switch IDs, nonempty iff downstream scope.
//   multipath: upstream scopes only — also forward up one ECMP-chosen uplink.
struct PRule {
  RuleScope scope = RuleScope::UpstreamLeaf;
  bool multipath = false;
  std::vector<uint32_t> switch_ids;
  BitVec bitmap;

  bool operator==(const PRule&) const = default;
};

// One packet copy: envelope plus ordered rules
// [upstream-leaf?, upstream-spine?, core?, downstream-spine*, downstream-leaf*],
// downstream rules sorted by (scope, first switch ID).
struct PacketHeader {
  uint32_t group_id = 0;
  uint32_t copy_index = 0;
  std::vector<PRule> rules;

  bool operator==(const PacketHeader&) const = default;

  const PRule* find_scope(RuleScope scope) const;  // first rule of scope, or nullptr
};

// Bitwise OR; throws on empty input or width mismatch.
BitVec combine_or(const std::vector<BitVec>& bitmaps);

// Single-packet encoding: exact upstream rules, one core rule over destination
// pods, one exact downstream-spine rule per destination pod, one shared
// downstream-leaf rule (bitmap = OR over all destination member-leaf bitmaps),
// plus exact downstream-leaf rules for source-pod member leaves other than the
// source leaf (those are reached on the upstream path's way down).
PacketHeader encode_elmo(const Topology& topo, const MulticastGroup& grp);

// One packet copy per cluster. Copy 0 is the designated copy and carries the
// source-pod delivery rules; other copies carry empty-bitmap upstream rules
// with only the multipath flag. Each copy's downstream rules cover exactly its
// cluster's pods, with the shared leaf bitmap OR-ed over that cluster only.
// An assignment with k_effective = 0 (no destination pods) yields the single
// designated copy.
std::vector<PacketHeader> encode_bert(const Topology& topo, const MulticastGroup& grp,
                                      const ClusterAssignment& asg);

// Size model, in bits:
//   upstream-leaf = l + 1, upstream-spine = m + 1, core = n,
//   downstream-spine = |ids| * id_spine + m, downstream-leaf = |ids| * id_leaf + l,
//   id widths = ceil(log2(layer population)), min 1.
uint64_t rule_bits(const PRule& rule, const Topology& topo);
uint64_t header_bits(const PacketHeader& header, const Topology& topo);
// Core + downstream-spine + downstream-leaf rules only.
uint64_t downstream_header_bits(const PacketHeader& header, const Topology& topo);

// Wire form (see FORMAT.md): 1-byte version, 2-byte big-endian group ID,
// 1-byte copy index, then each rule as
//   [scope:3][multipath:1][id-count:8][ids: id-count * id_width][bitmap: scope width]
// packed MSB-first and zero-padded to a byte boundary.
std::vector<uint8_t> serialize_header(const PacketHeader& header, const Topology& topo);
PacketHeader deserialize_header(const std::vector<uint8_t>& bytes, const Topology& topo);

struct DecodeError : std::runtime_error {
  size_t byte_offset;
  DecodeError(const std::string& what, size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

}  // namespace closmcast

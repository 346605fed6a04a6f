#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "closmcast/encoder.hpp"
#include "closmcast/topology.hpp"

namespace closmcast {

enum class SwitchLayer : uint8_t { Leaf, Spine, Core };
enum class Arrival : uint8_t { FromHost, FromBelow, FromAbove };

struct SwitchContext {
  SwitchLayer layer = SwitchLayer::Leaf;
  uint32_t switch_id = 0;  // global ID within the layer
  Arrival arrival = Arrival::FromHost;
};

struct Egress {
  enum class Kind : uint8_t { ToHost, ToLeaf, ToSpine, ToCore };
  Kind kind = Kind::ToHost;
  uint64_t target = 0;  // host ID for ToHost, global switch ID otherwise
  LinkLayer link_layer = LinkLayer::HostLeaf;
  LinkDir dir = LinkDir::Down;
  uint64_t link = 0;  // directed link ID
};

// Per-flow ECMP: the hash depends only on (group, copy, stage, seed), so every
// packet of a flow takes the same single path.
struct EcmpPolicy {
  uint64_t seed = 0;
  uint32_t choose_spine(uint32_t group_id, uint32_t copy_index, uint32_t s) const;
  uint32_t choose_uplink(uint32_t group_id, uint32_t copy_index, uint32_t u) const;
};

// Deterministic pick from `options` by hash of (group, copy, seed).
uint64_t ecmp_choose(uint32_t group_id, uint32_t copy_index,
                     const std::vector<uint64_t>& options, uint64_t seed);

struct ProcessResult {
  PacketHeader stripped;
  std::vector<Egress> egress;
};

// One switch hop: match the applicable rule for this context, emit egress
// directives, and strip the consumed rule. Downstream-leaf rules are shared
// across the covered leaves and ride to delivery un-stripped (each covered
// leaf is a final hop of some replica).
ProcessResult process_at_switch(const PacketHeader& header, const SwitchContext& ctx,
                                const Topology& topo, const EcmpPolicy& ecmp);

struct DeliveryReport {
  uint32_t n_copies = 0;
  std::vector<std::map<uint64_t, uint32_t>> deliveries_by_copy;  // per copy: host -> count
  // Indexed [layer][dir][link ID]. link_bits accumulates the header bits each
  // traversal carried (after the sending node stripped its rule).
  std::array<std::array<std::vector<uint64_t>, 2>, 3> link_packets;
  std::array<std::array<std::vector<uint64_t>, 2>, 3> link_bits;
  std::array<std::array<uint64_t, 2>, 3> layer_packets{};

  uint64_t total_deliveries() const;
  uint64_t deliveries_to(uint64_t host) const;
  // Deliveries to hosts outside the (sorted) member list.
  uint64_t extra_deliveries(const std::vector<uint64_t>& sorted_members) const;

  bool operator==(const DeliveryReport&) const = default;
};

// Full walk of every header copy from the source host's hypervisor. Launching
// a copy costs one host->leaf transmission carrying the full header.
DeliveryReport simulate_delivery(const Topology& topo, const std::vector<PacketHeader>& headers,
                                 uint64_t source, uint64_t seed);

// Same walk driven hop-by-hop through process_at_switch with materialized
// intermediate headers. Slower; used as the equivalence oracle in tests.
DeliveryReport simulate_delivery_reference(const Topology& topo,
                                           const std::vector<PacketHeader>& headers,
                                           uint64_t source, uint64_t seed);

}  // namespace closmcast

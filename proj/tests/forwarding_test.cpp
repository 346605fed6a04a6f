#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "closmcast/clustering.hpp"
#include "closmcast/encoder.hpp"
#include "closmcast/forwarding.hpp"
#include "closmcast/group.hpp"
#include "closmcast/rng.hpp"

using namespace closmcast;

namespace {

MulticastGroup walkthrough_group() {
  MulticastGroup grp;
  grp.id = 1;
  grp.source = 0;
  grp.members = {3, 13, 14, 18, 24, 25, 28};
  return grp;
}

ClusterAssignment walkthrough_split(const Topology& topo, const MulticastGroup& grp) {
  const auto vectors = destination_pod_vectors(topo, grp);
  ClusterAssignment asg;
  asg.k_requested = 2;
  asg.k_effective = 2;
  asg.assignment = {{1, 0}, {2, 0}, {3, 1}};
  asg.centroids = {centroid({vectors.at(1), vectors.at(2)}), centroid({vectors.at(3)})};
  asg.cost = cluster_cost(asg, vectors);
  return asg;
}

}  // namespace

TEST_CASE("walkthrough deliveries and extras") {
  const Topology topo(fig1_preset());
  const MulticastGroup grp = walkthrough_group();

  const std::vector<PacketHeader> elmo{encode_elmo(topo, grp)};
  const DeliveryReport er = simulate_delivery(topo, elmo, grp.source, 42);
  CHECK(er.n_copies == 1);
  for (uint64_t h : grp.members) CHECK(er.deliveries_to(h) == 1);
  CHECK(er.extra_deliveries(grp.members) == 6);
  CHECK(er.total_deliveries() == 13);

  const auto bert = encode_bert(topo, grp, walkthrough_split(topo, grp));
  const DeliveryReport br = simulate_delivery(topo, bert, grp.source, 42);
  CHECK(br.n_copies == 2);
  for (uint64_t h : grp.members) CHECK(br.deliveries_to(h) == 1);
  CHECK(br.extra_deliveries(grp.members) == 2);
  CHECK(br.total_deliveries() == 9);

  // One packet per upstream layer for the single header; one per copy for the
  // clustered pair.
  for (int layer = 0; layer < 3; ++layer) {
    CHECK(er.layer_packets[layer][0] == 1);
    CHECK(br.layer_packets[layer][0] == 2);
  }
  // Downstream: core fans out to one spine per destination pod either way.
  CHECK(er.layer_packets[static_cast<int>(LinkLayer::SpineCore)][1] == 3);
  CHECK(br.layer_packets[static_cast<int>(LinkLayer::SpineCore)][1] == 3);
  CHECK(er.layer_packets[static_cast<int>(LinkLayer::LeafSpine)][1] == 4);
  CHECK(br.layer_packets[static_cast<int>(LinkLayer::LeafSpine)][1] == 4);
  CHECK(er.layer_packets[static_cast<int>(LinkLayer::HostLeaf)][1] == 13);
  CHECK(br.layer_packets[static_cast<int>(LinkLayer::HostLeaf)][1] == 9);

  // Bit accounting: the launch carries the whole 52-bit header; the copy
  // delivered on the source leaf has only the consumed entry rule removed.
  CHECK(er.link_packets[0][0][0] == 1);
  CHECK(er.link_bits[0][0][0] == 52);
  CHECK(er.link_packets[0][1][3] == 1);
  CHECK(er.link_bits[0][1][3] == 47);
}

TEST_CASE("hop-by-hop rule consumption") {
  const Topology topo(fig1_preset());
  const PacketHeader hdr = encode_elmo(topo, walkthrough_group());
  const EcmpPolicy ecmp{42};

  // Source leaf: deliver locally, pick one spine, shed the entry rule.
  const ProcessResult at_leaf = process_at_switch(hdr, {SwitchLayer::Leaf, 0, Arrival::FromHost},
                                                  topo, ecmp);
  REQUIRE(at_leaf.egress.size() == 2);
  CHECK(at_leaf.egress[0].kind == Egress::Kind::ToHost);
  CHECK(at_leaf.egress[0].target == 3);
  CHECK(at_leaf.egress[1].kind == Egress::Kind::ToSpine);
  const uint32_t spine = ecmp.choose_spine(hdr.group_id, hdr.copy_index, 2);
  CHECK(at_leaf.egress[1].target == spine);
  REQUIRE(at_leaf.stripped.rules.size() == 6);
  CHECK(at_leaf.stripped.rules[0].scope == RuleScope::UpstreamSpine);

  // Pod spine going up: nothing to deliver in this pod, continue to a core.
  const ProcessResult at_spine = process_at_switch(
      at_leaf.stripped, {SwitchLayer::Spine, spine, Arrival::FromBelow}, topo, ecmp);
  REQUIRE(at_spine.egress.size() == 1);
  CHECK(at_spine.egress[0].kind == Egress::Kind::ToCore);
  REQUIRE(at_spine.stripped.rules.size() == 5);

  // Core: replicate to spine `a` of each destination pod.
  const uint32_t core = static_cast<uint32_t>(at_spine.egress[0].target);
  const ProcessResult at_core = process_at_switch(
      at_spine.stripped, {SwitchLayer::Core, core, Arrival::FromBelow}, topo, ecmp);
  REQUIRE(at_core.egress.size() == 3);
  const uint32_t a = core / 2;
  CHECK(at_core.egress[0].target == topo.spine_global(1, a));
  CHECK(at_core.egress[1].target == topo.spine_global(2, a));
  CHECK(at_core.egress[2].target == topo.spine_global(3, a));
  REQUIRE(at_core.stripped.rules.size() == 4);

  // Destination spine: only its own pod's rule is consumed.
  const ProcessResult at_dspine = process_at_switch(
      at_core.stripped, {SwitchLayer::Spine, topo.spine_global(1, a), Arrival::FromAbove}, topo,
      ecmp);
  REQUIRE(at_dspine.egress.size() == 1);
  CHECK(at_dspine.egress[0].kind == Egress::Kind::ToLeaf);
  CHECK(at_dspine.egress[0].target == 3);
  REQUIRE(at_dspine.stripped.rules.size() == 3);
  CHECK(at_dspine.stripped.rules[0].switch_ids == std::vector<uint32_t>{4, 5});

  // Destination leaf: deliver the shared bitmap, keep the rule for siblings.
  const ProcessResult at_dleaf = process_at_switch(
      at_dspine.stripped, {SwitchLayer::Leaf, 3, Arrival::FromAbove}, topo, ecmp);
  REQUIRE(at_dleaf.egress.size() == 3);
  std::vector<uint64_t> hosts;
  for (const Egress& e : at_dleaf.egress) hosts.push_back(e.target);
  CHECK(hosts == std::vector<uint64_t>{12, 13, 14});
  CHECK(at_dleaf.stripped == at_dspine.stripped);

  // A leaf the rule does not cover forwards nothing.
  const ProcessResult off_path = process_at_switch(
      at_dspine.stripped, {SwitchLayer::Leaf, 5, Arrival::FromAbove}, topo, ecmp);
  CHECK(off_path.egress.empty());
  CHECK(off_path.stripped == at_dspine.stripped);
}

TEST_CASE("impossible switch contexts are rejected") {
  const Topology topo(fig1_preset());
  const PacketHeader hdr = encode_elmo(topo, walkthrough_group());
  const EcmpPolicy ecmp{1};
  CHECK_THROWS_AS(process_at_switch(hdr, {SwitchLayer::Leaf, 0, Arrival::FromBelow}, topo, ecmp),
                  std::invalid_argument);
  CHECK_THROWS_AS(process_at_switch(hdr, {SwitchLayer::Spine, 0, Arrival::FromHost}, topo, ecmp),
                  std::invalid_argument);
  CHECK_THROWS_AS(process_at_switch(hdr, {SwitchLayer::Core, 0, Arrival::FromAbove}, topo, ecmp),
                  std::invalid_argument);
}

TEST_CASE("per-flow path choice is deterministic and roughly uniform") {
  const std::vector<uint64_t> options = [] {
    std::vector<uint64_t> v(24);
    for (uint64_t i = 0; i < 24; ++i) v[i] = 100 + i;
    return v;
  }();

  std::map<uint64_t, uint32_t> counts;
  for (uint32_t g = 0; g < 10000; ++g) {
    const uint64_t pick = ecmp_choose(g, 0, options, 7);
    CHECK(pick == ecmp_choose(g, 0, options, 7));
    ++counts[pick];
  }
  REQUIRE(counts.size() == 24);
  for (const auto& [opt, count] : counts) {
    CHECK(count > 10000 / 24 * 0.85);
    CHECK(count < 10000 / 24 * 1.15);
  }

  CHECK_THROWS_AS(ecmp_choose(1, 0, {}, 7), std::invalid_argument);

  // Copies of one group can take different paths; packets of one copy cannot.
  const EcmpPolicy ecmp{3};
  std::set<uint32_t> spines;
  for (uint32_t copy = 0; copy < 16; ++copy) spines.insert(ecmp.choose_spine(5, copy, 24));
  CHECK(spines.size() > 1);
  for (uint32_t s : spines) CHECK(s < 24);
}

TEST_CASE("fast walker matches the hop-by-hop reference everywhere") {
  Rng rng(555);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const TopologyParams params{
        2 + static_cast<uint32_t>(rng.bounded(4)), 1 + static_cast<uint32_t>(rng.bounded(3)),
        2 + static_cast<uint32_t>(rng.bounded(4)), 1 + static_cast<uint32_t>(rng.bounded(2)),
        1 + static_cast<uint32_t>(rng.bounded(2))};
    const Topology topo(params);
    const uint64_t d = 1 + rng.bounded(std::min<uint64_t>(topo.host_count() - 1, 16));
    const MulticastGroup grp = generate_group(topo, d, rng.next(), trial);
    const uint64_t sim_seed = rng.next();

    const std::vector<PacketHeader> elmo{encode_elmo(topo, grp)};
    CHECK(simulate_delivery(topo, elmo, grp.source, sim_seed) ==
          simulate_delivery_reference(topo, elmo, grp.source, sim_seed));

    const auto vectors = destination_pod_vectors(topo, grp);
    if (vectors.empty()) continue;
    for (uint32_t k = 1; k <= 4; ++k) {
      const auto headers = encode_bert(topo, grp, kmeans_hamming(vectors, k, sim_seed + k));
      const DeliveryReport fast = simulate_delivery(topo, headers, grp.source, sim_seed);
      const DeliveryReport slow = simulate_delivery_reference(topo, headers, grp.source, sim_seed);
      CHECK(fast == slow);
      ++compared;

      // Every member is reached exactly once no matter how we split.
      for (uint64_t h : grp.members) CHECK(fast.deliveries_to(h) == 1);
      CHECK(fast.total_deliveries() == d + fast.extra_deliveries(grp.members));
    }
  }
  CHECK(compared > 50);
}

#include "closmcast/forwarding.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "closmcast/rng.hpp"

namespace closmcast {

namespace {

uint64_t ecmp_hash(uint32_t group_id, uint32_t copy_index, uint64_t seed) {
  return derive_seed(seed, group_id, copy_index);
}

void check_bitmap_width(const PRule& rule, uint32_t expected) {
  if (rule.bitmap.width() != expected) {
    throw std::invalid_argument(std::string("rule bitmap width ") +
                                std::to_string(rule.bitmap.width()) +
                                " inconsistent with topology (expected " +
                                std::to_string(expected) + " for " +
                                rule_scope_name(rule.scope) + ")");
  }
}

bool rule_covers(const PRule& rule, uint32_t switch_id) {
  return std::binary_search(rule.switch_ids.begin(), rule.switch_ids.end(), switch_id);
}

}  // namespace

uint32_t EcmpPolicy::choose_spine(uint32_t group_id, uint32_t copy_index, uint32_t s) const {
  if (s <= 1) return 0;
  return static_cast<uint32_t>(
      ecmp_hash(group_id, copy_index, derive_seed(seed, seed_stream::kEcmpSpine, 0)) % s);
}

uint32_t EcmpPolicy::choose_uplink(uint32_t group_id, uint32_t copy_index, uint32_t u) const {
  if (u <= 1) return 0;
  return static_cast<uint32_t>(
      ecmp_hash(group_id, copy_index, derive_seed(seed, seed_stream::kEcmpCore, 0)) % u);
}

uint64_t ecmp_choose(uint32_t group_id, uint32_t copy_index,
                     const std::vector<uint64_t>& options, uint64_t seed) {
  if (options.empty()) {
    throw std::invalid_argument("ecmp_choose: empty option set");
  }
  return options[ecmp_hash(group_id, copy_index, seed) % options.size()];
}

ProcessResult process_at_switch(const PacketHeader& header, const SwitchContext& ctx,
                                const Topology& topo, const EcmpPolicy& ecmp) {
  const auto& p = topo.params();
  ProcessResult res;
  res.stripped = header;

  auto strip = [&res](const PRule* rule) {
    for (auto it = res.stripped.rules.begin(); it != res.stripped.rules.end(); ++it) {
      if (&*it == rule) {
        res.stripped.rules.erase(it);
        return;
      }
    }
  };

  if (ctx.layer == SwitchLayer::Leaf && ctx.arrival == Arrival::FromHost) {
    const uint32_t pod = topo.pod_of_leaf(ctx.switch_id);
    const PRule* rule = res.stripped.find_scope(RuleScope::UpstreamLeaf);
    if (rule != nullptr) {
      check_bitmap_width(*rule, p.l);
      rule->bitmap.for_each_set([&](uint32_t port) {
        const uint64_t host = static_cast<uint64_t>(ctx.switch_id) * p.l + port;
        res.egress.push_back({Egress::Kind::ToHost, host, LinkLayer::HostLeaf, LinkDir::Down, host});
      });
      if (rule->multipath) {
        const uint32_t a = ecmp.choose_spine(header.group_id, header.copy_index, p.s);
        res.egress.push_back({Egress::Kind::ToSpine, topo.spine_global(pod, a),
                              LinkLayer::LeafSpine, LinkDir::Up,
                              static_cast<uint64_t>(ctx.switch_id) * p.s + a});
      }
      strip(rule);
    }
    return res;
  }

  if (ctx.layer == SwitchLayer::Spine && ctx.arrival == Arrival::FromBelow) {
    const uint32_t pod = topo.pod_of_spine(ctx.switch_id);
    const uint32_t a = ctx.switch_id % p.s;
    const PRule* rule = res.stripped.find_scope(RuleScope::UpstreamSpine);
    if (rule != nullptr) {
      check_bitmap_width(*rule, p.m);
      rule->bitmap.for_each_set([&](uint32_t leaf) {
        const uint32_t lg = topo.leaf_global(pod, leaf);
        res.egress.push_back({Egress::Kind::ToLeaf, lg, LinkLayer::LeafSpine, LinkDir::Down,
                              static_cast<uint64_t>(lg) * p.s + a});
      });
      if (rule->multipath) {
        const uint32_t b = ecmp.choose_uplink(header.group_id, header.copy_index, p.u);
        res.egress.push_back({Egress::Kind::ToCore, topo.core_id(a, b), LinkLayer::SpineCore,
                              LinkDir::Up, static_cast<uint64_t>(ctx.switch_id) * p.u + b});
      }
      strip(rule);
    }
    return res;
  }

  if (ctx.layer == SwitchLayer::Core && ctx.arrival == Arrival::FromBelow) {
    const uint32_t a = ctx.switch_id / p.u;
    const uint32_t b = ctx.switch_id % p.u;
    const PRule* rule = res.stripped.find_scope(RuleScope::Core);
    if (rule != nullptr) {
      check_bitmap_width(*rule, p.n);
      rule->bitmap.for_each_set([&](uint32_t pod) {
        const uint32_t sp = topo.spine_global(pod, a);
        res.egress.push_back({Egress::Kind::ToSpine, sp, LinkLayer::SpineCore, LinkDir::Down,
                              static_cast<uint64_t>(sp) * p.u + b});
      });
      strip(rule);
    }
    return res;
  }

  if (ctx.layer == SwitchLayer::Spine && ctx.arrival == Arrival::FromAbove) {
    const uint32_t pod = topo.pod_of_spine(ctx.switch_id);
    const uint32_t a = ctx.switch_id % p.s;
    for (const auto& rule : res.stripped.rules) {
      if (rule.scope != RuleScope::DownstreamSpine || !rule_covers(rule, ctx.switch_id)) continue;
      check_bitmap_width(rule, p.m);
      rule.bitmap.for_each_set([&](uint32_t leaf) {
        const uint32_t lg = topo.leaf_global(pod, leaf);
        res.egress.push_back({Egress::Kind::ToLeaf, lg, LinkLayer::LeafSpine, LinkDir::Down,
                              static_cast<uint64_t>(lg) * p.s + a});
      });
      strip(&rule);
      return res;
    }
    return res;
  }

  if (ctx.layer == SwitchLayer::Leaf && ctx.arrival == Arrival::FromAbove) {
    for (const auto& rule : res.stripped.rules) {
      if (rule.scope != RuleScope::DownstreamLeaf || !rule_covers(rule, ctx.switch_id)) continue;
      check_bitmap_width(rule, p.l);
      rule.bitmap.for_each_set([&](uint32_t port) {
        const uint64_t host = static_cast<uint64_t>(ctx.switch_id) * p.l + port;
        res.egress.push_back({Egress::Kind::ToHost, host, LinkLayer::HostLeaf, LinkDir::Down, host});
      });
      // Shared across covered leaves: retained, never stripped.
      return res;
    }
    return res;
  }

  throw std::invalid_argument("process_at_switch: invalid layer/arrival combination");
}

uint64_t DeliveryReport::total_deliveries() const {
  uint64_t total = 0;
  for (const auto& per_copy : deliveries_by_copy) {
    for (const auto& [host, count] : per_copy) {
      (void)host;
      total += count;
    }
  }
  return total;
}

uint64_t DeliveryReport::deliveries_to(uint64_t host) const {
  uint64_t total = 0;
  for (const auto& per_copy : deliveries_by_copy) {
    auto it = per_copy.find(host);
    if (it != per_copy.end()) total += it->second;
  }
  return total;
}

uint64_t DeliveryReport::extra_deliveries(const std::vector<uint64_t>& sorted_members) const {
  uint64_t extra = 0;
  for (const auto& per_copy : deliveries_by_copy) {
    for (const auto& [host, count] : per_copy) {
      if (!std::binary_search(sorted_members.begin(), sorted_members.end(), host)) {
        extra += count;
      }
    }
  }
  return extra;
}

namespace {

DeliveryReport make_report(const Topology& topo, uint32_t n_copies) {
  DeliveryReport rep;
  rep.n_copies = n_copies;
  rep.deliveries_by_copy.resize(n_copies);
  for (int layer = 0; layer < 3; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      const uint64_t count = topo.link_count(static_cast<LinkLayer>(layer),
                                             static_cast<LinkDir>(dir));
      rep.link_packets[layer][dir].assign(count, 0);
      rep.link_bits[layer][dir].assign(count, 0);
    }
  }
  return rep;
}

struct Counter {
  DeliveryReport* rep;
  void operator()(LinkLayer layer, LinkDir dir, uint64_t link, uint64_t bits) const {
    const int la = static_cast<int>(layer);
    const int d = static_cast<int>(dir);
    rep->link_packets[la][d][link] += 1;
    rep->link_bits[la][d][link] += bits;
    rep->layer_packets[la][d] += 1;
  }
};

}  // namespace

DeliveryReport simulate_delivery(const Topology& topo, const std::vector<PacketHeader>& headers,
                                 uint64_t source, uint64_t seed) {
  const auto& p = topo.params();
  DeliveryReport rep = make_report(topo, static_cast<uint32_t>(headers.size()));
  Counter count{&rep};
  const HostLocator src = topo.locate_host(source);
  const uint32_t src_leaf_global = topo.leaf_global(src.pod, src.leaf);
  const EcmpPolicy ecmp{seed};

  for (size_t ci = 0; ci < headers.size(); ++ci) {
    const PacketHeader& header = headers[ci];
    auto& deliveries = rep.deliveries_by_copy[ci];

    // Index downstream rules once per copy.
    std::map<uint32_t, const PRule*> dspine_by_pod;   // destination pod -> rule
    std::map<uint32_t, const PRule*> dleaf_by_leaf;   // global leaf -> rule
    for (const auto& rule : header.rules) {
      if (rule.scope == RuleScope::DownstreamSpine) {
        dspine_by_pod.emplace(topo.pod_of_spine(rule.switch_ids.front()), &rule);
      } else if (rule.scope == RuleScope::DownstreamLeaf) {
        for (uint32_t lg : rule.switch_ids) dleaf_by_leaf.emplace(lg, &rule);
      }
    }
    auto deliver_at_leaf = [&](uint32_t leaf_global, uint64_t bits) {
      auto it = dleaf_by_leaf.find(leaf_global);
      if (it == dleaf_by_leaf.end()) return;
      it->second->bitmap.for_each_set([&](uint32_t port) {
        const uint64_t host = static_cast<uint64_t>(leaf_global) * p.l + port;
        deliveries[host] += 1;
        count(LinkLayer::HostLeaf, LinkDir::Down, host, bits);
      });
    };

    uint64_t bits = header_bits(header, topo);
    count(LinkLayer::HostLeaf, LinkDir::Up, source, bits);

    // Source leaf.
    const PRule* uleaf = header.find_scope(RuleScope::UpstreamLeaf);
    if (uleaf == nullptr) continue;
    check_bitmap_width(*uleaf, p.l);
    bits -= rule_bits(*uleaf, topo);
    uleaf->bitmap.for_each_set([&](uint32_t port) {
      const uint64_t host = static_cast<uint64_t>(src_leaf_global) * p.l + port;
      deliveries[host] += 1;
      count(LinkLayer::HostLeaf, LinkDir::Down, host, bits);
    });
    if (!uleaf->multipath) continue;
    const uint32_t a = ecmp.choose_spine(header.group_id, header.copy_index, p.s);
    count(LinkLayer::LeafSpine, LinkDir::Up,
          static_cast<uint64_t>(src_leaf_global) * p.s + a, bits);

    // Source-pod spine.
    const PRule* uspine = header.find_scope(RuleScope::UpstreamSpine);
    if (uspine == nullptr) continue;
    check_bitmap_width(*uspine, p.m);
    bits -= rule_bits(*uspine, topo);
    uspine->bitmap.for_each_set([&](uint32_t leaf) {
      const uint32_t lg = topo.leaf_global(src.pod, leaf);
      count(LinkLayer::LeafSpine, LinkDir::Down, static_cast<uint64_t>(lg) * p.s + a, bits);
      deliver_at_leaf(lg, bits);
    });
    if (!uspine->multipath) continue;
    const uint32_t b = ecmp.choose_uplink(header.group_id, header.copy_index, p.u);
    count(LinkLayer::SpineCore, LinkDir::Up,
          static_cast<uint64_t>(topo.spine_global(src.pod, a)) * p.u + b, bits);

    // Core (a, b).
    const PRule* core = header.find_scope(RuleScope::Core);
    if (core == nullptr) continue;
    check_bitmap_width(*core, p.n);
    bits -= rule_bits(*core, topo);
    core->bitmap.for_each_set([&](uint32_t pod) {
      const uint32_t sp = topo.spine_global(pod, a);
      count(LinkLayer::SpineCore, LinkDir::Down, static_cast<uint64_t>(sp) * p.u + b, bits);
      auto it = dspine_by_pod.find(pod);
      if (it == dspine_by_pod.end()) return;
      const uint64_t bits_after_spine = bits - rule_bits(*it->second, topo);
      it->second->bitmap.for_each_set([&](uint32_t leaf) {
        const uint32_t lg = topo.leaf_global(pod, leaf);
        count(LinkLayer::LeafSpine, LinkDir::Down,
              static_cast<uint64_t>(lg) * p.s + a, bits_after_spine);
        deliver_at_leaf(lg, bits_after_spine);
      });
    });
  }
  return rep;
}

DeliveryReport simulate_delivery_reference(const Topology& topo,
                                           const std::vector<PacketHeader>& headers,
                                           uint64_t source, uint64_t seed) {
  DeliveryReport rep = make_report(topo, static_cast<uint32_t>(headers.size()));
  Counter count{&rep};
  const HostLocator src = topo.locate_host(source);
  const uint32_t src_leaf_global = topo.leaf_global(src.pod, src.leaf);
  const EcmpPolicy ecmp{seed};

  struct InFlight {
    PacketHeader header;
    SwitchContext ctx;
    uint32_t copy;
    uint32_t hops;
  };
  std::deque<InFlight> queue;
  for (size_t ci = 0; ci < headers.size(); ++ci) {
    count(LinkLayer::HostLeaf, LinkDir::Up, source, header_bits(headers[ci], topo));
    queue.push_back({headers[ci],
                     {SwitchLayer::Leaf, src_leaf_global, Arrival::FromHost},
                     static_cast<uint32_t>(ci), 1});
  }
  while (!queue.empty()) {
    InFlight flight = std::move(queue.front());
    queue.pop_front();
    if (flight.hops > 5) {
      throw std::logic_error("simulate_delivery_reference: path exceeded 5 hops");
    }
    ProcessResult res = process_at_switch(flight.header, flight.ctx, topo, ecmp);
    const uint64_t bits = header_bits(res.stripped, topo);
    for (const auto& egress : res.egress) {
      count(egress.link_layer, egress.dir, egress.link, bits);
      switch (egress.kind) {
        case Egress::Kind::ToHost:
          rep.deliveries_by_copy[flight.copy][egress.target] += 1;
          break;
        case Egress::Kind::ToLeaf:
          queue.push_back({res.stripped,
                           {SwitchLayer::Leaf, static_cast<uint32_t>(egress.target),
                            Arrival::FromAbove},
                           flight.copy, flight.hops + 1});
          break;
        case Egress::Kind::ToSpine:
          queue.push_back({res.stripped,
                           {SwitchLayer::Spine, static_cast<uint32_t>(egress.target),
                            flight.ctx.layer == SwitchLayer::Leaf ? Arrival::FromBelow
                                                                  : Arrival::FromAbove},
                           flight.copy, flight.hops + 1});
          break;
        case Egress::Kind::ToCore:
          queue.push_back({res.stripped,
                           {SwitchLayer::Core, static_cast<uint32_t>(egress.target),
                            Arrival::FromBelow},
                           flight.copy, flight.hops + 1});
          break;
      }
    }
  }
  return rep;
}

}  // namespace closmcast

#include "closmcast/encoder.hpp"

#include <algorithm>

namespace closmcast {

namespace {

// Builds one packet copy covering `pods` (a subset of the destination pods).
// The designated copy additionally carries the source-pod delivery rules:
// member ports on the source leaf, the upstream-spine leaf bitmap, and one
// exact downstream-leaf rule per source-pod member leaf off the source leaf.
PacketHeader build_copy(const Topology& topo, const MulticastGroup& grp,
                        const GroupLayout& layout, uint32_t copy_index,
                        const std::vector<uint32_t>& pods, bool designated) {
  const auto& p = topo.params();
  PacketHeader header;
  header.group_id = grp.id;
  header.copy_index = copy_index;

  const bool has_dest = !pods.empty();
  const bool serves_src_pod = designated && !layout.source_pod_other.empty();
  const bool goes_up = has_dest || serves_src_pod;

  // Upstream leaf rule: always present (it is the packet's entry rule).
  {
    PRule rule;
    rule.scope = RuleScope::UpstreamLeaf;
    rule.multipath = goes_up;
    rule.bitmap = designated ? layout.source_leaf_ports : BitVec(p.l);
    header.rules.push_back(std::move(rule));
  }

  if (goes_up) {
    PRule rule;
    rule.scope = RuleScope::UpstreamSpine;
    rule.multipath = has_dest;
    rule.bitmap = BitVec(p.m);
    if (designated) {
      for (const auto& lm : layout.source_pod_other) rule.bitmap.set(lm.leaf);
    }
    header.rules.push_back(std::move(rule));
  }

  if (has_dest) {
    PRule core;
    core.scope = RuleScope::Core;
    core.bitmap = BitVec(p.n);
    for (uint32_t pod : pods) core.bitmap.set(pod);
    header.rules.push_back(std::move(core));

    // One exact spine rule per covered pod. The ECMP core choice decides which
    // spine row receives the packet, so the rule lists every spine of the pod.
    for (uint32_t pod : pods) {
      PRule rule;
      rule.scope = RuleScope::DownstreamSpine;
      rule.switch_ids.reserve(p.s);
      for (uint32_t a = 0; a < p.s; ++a) rule.switch_ids.push_back(topo.spine_global(pod, a));
      rule.bitmap = BitVec(p.m);
      for (const auto& lm : layout.dest.at(pod)) rule.bitmap.set(lm.leaf);
      header.rules.push_back(std::move(rule));
    }
  }

  // Downstream leaf rules: one shared OR rule over the covered pods' member
  // leaves, plus (designated copy) exact per-leaf rules for source-pod
  // receivers. Sorted by first switch ID.
  std::vector<PRule> leaf_rules;
  if (has_dest) {
    PRule shared;
    shared.scope = RuleScope::DownstreamLeaf;
    shared.bitmap = BitVec(p.l);
    for (uint32_t pod : pods) {
      for (const auto& lm : layout.dest.at(pod)) {
        shared.switch_ids.push_back(lm.leaf_global);
        shared.bitmap |= lm.ports;
      }
    }
    std::sort(shared.switch_ids.begin(), shared.switch_ids.end());
    leaf_rules.push_back(std::move(shared));
  }
  if (serves_src_pod) {
    for (const auto& lm : layout.source_pod_other) {
      PRule rule;
      rule.scope = RuleScope::DownstreamLeaf;
      rule.switch_ids.push_back(lm.leaf_global);
      rule.bitmap = lm.ports;
      leaf_rules.push_back(std::move(rule));
    }
  }
  std::sort(leaf_rules.begin(), leaf_rules.end(), [](const PRule& a, const PRule& b) {
    return a.switch_ids.front() < b.switch_ids.front();
  });
  for (auto& rule : leaf_rules) header.rules.push_back(std::move(rule));

  return header;
}

}  // namespace

const char* rule_scope_name(RuleScope scope) {
  switch (scope) {
    case RuleScope::UpstreamLeaf:
      return "upstream-leaf";
    case RuleScope::UpstreamSpine:
      return "upstream-spine";
    case RuleScope::Core:
      return "core";
    case RuleScope::DownstreamSpine:
      return "downstream-spine";
    case RuleScope::DownstreamLeaf:
      return "downstream-leaf";
  }
  return "?";
}

const PRule* PacketHeader::find_scope(RuleScope scope) const {
  for (const auto& rule : rules) {
    if (rule.scope == scope) return &rule;
  }
  return nullptr;
}

BitVec combine_or(const std::vector<BitVec>& bitmaps) {
  if (bitmaps.empty()) {
    throw std::invalid_argument("combine_or: empty input");
  }
  BitVec out = bitmaps[0];
  for (size_t i = 1; i < bitmaps.size(); ++i) out |= bitmaps[i];
  return out;
}

PacketHeader encode_elmo(const Topology& topo, const MulticastGroup& grp) {
  const GroupLayout layout = GroupLayout::build(topo, grp);
  return build_copy(topo, grp, layout, 0, layout.dest_pods, true);
}

std::vector<PacketHeader> encode_bert(const Topology& topo, const MulticastGroup& grp,
                                      const ClusterAssignment& asg) {
  const GroupLayout layout = GroupLayout::build(topo, grp);
  for (uint32_t pod : layout.dest_pods) {
    if (asg.assignment.find(pod) == asg.assignment.end()) {
      throw std::invalid_argument("encode_bert: assignment missing destination pod " +
                                  std::to_string(pod));
    }
  }
  for (const auto& [pod, cluster] : asg.assignment) {
    (void)cluster;
    if (layout.dest.find(pod) == layout.dest.end()) {
      throw std::invalid_argument("encode_bert: assignment pod " + std::to_string(pod) +
                                  " is not a destination pod");
    }
  }
  std::vector<PacketHeader> headers;
  if (asg.k_effective == 0) {
    // No destination pods: the designated copy alone serves the source pod.
    headers.push_back(build_copy(topo, grp, layout, 0, {}, true));
    return headers;
  }
  const auto clusters = asg.clusters();
  headers.reserve(clusters.size());
  for (uint32_t c = 0; c < clusters.size(); ++c) {
    headers.push_back(build_copy(topo, grp, layout, c, clusters[c], c == 0));
  }
  return headers;
}

uint64_t rule_bits(const PRule& rule, const Topology& topo) {
  const auto& p = topo.params();
  switch (rule.scope) {
    case RuleScope::UpstreamLeaf:
      return p.l + 1;
    case RuleScope::UpstreamSpine:
      return p.m + 1;
    case RuleScope::Core:
      return p.n;
    case RuleScope::DownstreamSpine:
      return rule.switch_ids.size() * topo.id_width_spine() + p.m;
    case RuleScope::DownstreamLeaf:
      return rule.switch_ids.size() * topo.id_width_leaf() + p.l;
  }
  throw std::invalid_argument("rule_bits: invalid scope");
}

uint64_t header_bits(const PacketHeader& header, const Topology& topo) {
  uint64_t total = 0;
  for (const auto& rule : header.rules) total += rule_bits(rule, topo);
  return total;
}

uint64_t downstream_header_bits(const PacketHeader& header, const Topology& topo) {
  uint64_t total = 0;
  for (const auto& rule : header.rules) {
    if (rule.scope == RuleScope::Core || rule.scope == RuleScope::DownstreamSpine ||
        rule.scope == RuleScope::DownstreamLeaf) {
      total += rule_bits(rule, topo);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Wire form. MSB-first bit packing; see FORMAT.md for the worked example.

namespace {

constexpr uint8_t kWireVersion = 1;

struct BitWriter {
  std::vector<uint8_t> bytes;
  uint32_t bit_pos = 0;  // bits used in the last byte

  void put(uint64_t value, uint32_t nbits) {
    for (uint32_t i = nbits; i-- > 0;) {
      if (bit_pos == 0) bytes.push_back(0);
      const uint32_t free_bit = 7 - bit_pos;
      bytes.back() |= static_cast<uint8_t>(((value >> i) & 1u) << free_bit);
      bit_pos = (bit_pos + 1) % 8;
    }
  }

  void put_bitmap(const BitVec& bitmap) {
    for (uint32_t b = 0; b < bitmap.width(); ++b) put(bitmap.test(b) ? 1 : 0, 1);
  }
};

struct BitReader {
  const std::vector<uint8_t>* bytes;
  size_t bit_pos;  // absolute bit index

  size_t bits_total() const { return bytes->size() * 8; }
  size_t bits_left() const { return bits_total() - bit_pos; }
  size_t byte_offset() const { return bit_pos / 8; }

  uint64_t get(uint32_t nbits) {
    if (bits_left() < nbits) {
      throw DecodeError("truncated header", byte_offset());
    }
    uint64_t value = 0;
    for (uint32_t i = 0; i < nbits; ++i) {
      const uint8_t byte = (*bytes)[bit_pos / 8];
      value = (value << 1) | ((byte >> (7 - bit_pos % 8)) & 1u);
      ++bit_pos;
    }
    return value;
  }

  BitVec get_bitmap(uint32_t width) {
    BitVec bitmap(width);
    for (uint32_t b = 0; b < width; ++b) {
      if (get(1)) bitmap.set(b);
    }
    return bitmap;
  }
};

struct ScopeLayout {
  uint32_t bitmap_width;
  uint32_t id_width;  // 0 = IDs not allowed for this scope
};

ScopeLayout scope_layout(RuleScope scope, const Topology& topo) {
  const auto& p = topo.params();
  switch (scope) {
    case RuleScope::UpstreamLeaf:
      return {p.l, 0};
    case RuleScope::UpstreamSpine:
      return {p.m, 0};
    case RuleScope::Core:
      return {p.n, 0};
    case RuleScope::DownstreamSpine:
      return {p.m, topo.id_width_spine()};
    case RuleScope::DownstreamLeaf:
      return {p.l, topo.id_width_leaf()};
  }
  throw std::invalid_argument("invalid rule scope");
}

uint32_t scope_population(RuleScope scope, const Topology& topo) {
  return scope == RuleScope::DownstreamSpine ? topo.spine_count() : topo.leaf_count();
}

}  // namespace

std::vector<uint8_t> serialize_header(const PacketHeader& header, const Topology& topo) {
  if (header.group_id > 0xFFFF) {
    throw std::invalid_argument("serialize_header: group ID exceeds 16-bit wire capacity");
  }
  if (header.copy_index > 0xFF) {
    throw std::invalid_argument("serialize_header: copy index exceeds 8-bit wire capacity");
  }
  BitWriter w;
  w.put(kWireVersion, 8);
  w.put(header.group_id, 16);
  w.put(header.copy_index, 8);
  for (const auto& rule : header.rules) {
    const ScopeLayout layout = scope_layout(rule.scope, topo);
    if (layout.id_width == 0 && !rule.switch_ids.empty()) {
      throw std::invalid_argument("serialize_header: switch IDs not allowed for scope");
    }
    if (layout.id_width != 0 && rule.switch_ids.empty()) {
      throw std::invalid_argument("serialize_header: downstream rule without switch IDs");
    }
    if (rule.switch_ids.size() > 0xFF) {
      throw std::invalid_argument("serialize_header: rule exceeds 8-bit ID-count capacity (" +
                                  std::to_string(rule.switch_ids.size()) + " IDs)");
    }
    if (rule.bitmap.width() != layout.bitmap_width) {
      throw std::invalid_argument("serialize_header: bitmap width mismatch for scope");
    }
    w.put(static_cast<uint8_t>(rule.scope), 3);
    w.put(rule.multipath ? 1 : 0, 1);
    w.put(rule.switch_ids.size(), 8);
    for (uint32_t id : rule.switch_ids) {
      if (layout.id_width < 32 && id >= (1u << layout.id_width)) {
        throw std::invalid_argument("serialize_header: switch ID does not fit ID width");
      }
      w.put(id, layout.id_width);
    }
    w.put_bitmap(rule.bitmap);
  }
  return std::move(w.bytes);
}

PacketHeader deserialize_header(const std::vector<uint8_t>& bytes, const Topology& topo) {
  BitReader r{&bytes, 0};
  if (bytes.size() < 4) {
    throw DecodeError("header shorter than 4-byte envelope", bytes.size());
  }
  const uint64_t version = r.get(8);
  if (version != kWireVersion) {
    throw DecodeError("unsupported wire version " + std::to_string(version), 0);
  }
  PacketHeader header;
  header.group_id = static_cast<uint32_t>(r.get(16));
  header.copy_index = static_cast<uint32_t>(r.get(8));

  // Rules occupy at least 13 bits (3+1+8 plus a nonempty bitmap), and trailing
  // padding is at most 7 bits, so "8 or more bits left" means another rule.
  while (r.bits_left() >= 8) {
    const size_t rule_start = r.byte_offset();
    const uint64_t scope_raw = r.get(3);
    if (scope_raw > 4) {
      throw DecodeError("invalid rule scope " + std::to_string(scope_raw), rule_start);
    }
    PRule rule;
    rule.scope = static_cast<RuleScope>(scope_raw);
    rule.multipath = r.get(1) != 0;
    const uint64_t id_count = r.get(8);
    const ScopeLayout layout = scope_layout(rule.scope, topo);
    if (layout.id_width == 0 && id_count != 0) {
      throw DecodeError("switch IDs present on a scope that forbids them", rule_start);
    }
    if (layout.id_width != 0 && id_count == 0) {
      throw DecodeError("downstream rule without switch IDs", rule_start);
    }
    for (uint64_t i = 0; i < id_count; ++i) {
      const uint32_t id = static_cast<uint32_t>(r.get(layout.id_width));
      if (id >= scope_population(rule.scope, topo)) {
        throw DecodeError("switch ID " + std::to_string(id) + " out of range", rule_start);
      }
      rule.switch_ids.push_back(id);
    }
    rule.bitmap = r.get_bitmap(layout.bitmap_width);
    header.rules.push_back(std::move(rule));
  }
  while (r.bits_left() > 0) {
    if (r.get(1) != 0) {
      throw DecodeError("nonzero padding", r.byte_offset());
    }
  }
  return header;
}

}  // namespace closmcast


#include "closmcast/group.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "closmcast/rng.hpp"

namespace closmcast {

MulticastGroup generate_group(const Topology& topo, uint64_t d, uint64_t seed, uint32_t id) {
  const uint64_t hosts = topo.host_count();
  if (d < 1 || d > hosts - 1) {
    throw std::invalid_argument("group size d=" + std::to_string(d) +
                                " out of range [1, " + std::to_string(hosts - 1) + "]");
  }
  Rng rng(seed);
  MulticastGroup grp;
  grp.id = id;
  grp.source = rng.bounded(hosts);

  // Partial Fisher-Yates over all hosts except the source: uniform without
  // replacement for any d up to hosts-1.
  std::vector<uint64_t> pool;
  pool.reserve(hosts - 1);
  for (uint64_t h = 0; h < hosts; ++h) {
    if (h != grp.source) pool.push_back(h);
  }
  grp.members.reserve(d);
  for (uint64_t i = 0; i < d; ++i) {
    const uint64_t j = i + rng.bounded(pool.size() - i);
    std::swap(pool[i], pool[j]);
    grp.members.push_back(pool[i]);
  }
  std::sort(grp.members.begin(), grp.members.end());
  return grp;
}

BitVec leaf_bitmap(const Topology& topo, const MulticastGroup& grp, uint32_t pod, uint32_t leaf) {
  const auto& p = topo.params();
  if (pod >= p.n || leaf >= p.m) {
    throw std::out_of_range("leaf_bitmap: pod/leaf index out of range");
  }
  BitVec bits(p.l);
  const uint64_t base = (static_cast<uint64_t>(pod) * p.m + leaf) * p.l;
  // Members are sorted, so the leaf's hosts form a contiguous ID range.
  auto it = std::lower_bound(grp.members.begin(), grp.members.end(), base);
  for (; it != grp.members.end() && *it < base + p.l; ++it) {
    bits.set(static_cast<uint32_t>(*it - base));
  }
  return bits;
}

BitVec pod_vector(const Topology& topo, const MulticastGroup& grp, uint32_t pod) {
  const auto& p = topo.params();
  if (pod >= p.n) {
    throw std::out_of_range("pod_vector: pod index out of range");
  }
  BitVec bits(p.m * p.l);
  const uint64_t base = static_cast<uint64_t>(pod) * p.m * p.l;
  auto it = std::lower_bound(grp.members.begin(), grp.members.end(), base);
  for (; it != grp.members.end() && *it < base + static_cast<uint64_t>(p.m) * p.l; ++it) {
    bits.set(static_cast<uint32_t>(*it - base));
  }
  return bits;
}

std::vector<uint32_t> destination_pods(const Topology& topo, const MulticastGroup& grp) {
  const uint32_t source_pod = topo.locate_host(grp.source).pod;
  std::vector<uint32_t> pods;
  uint32_t last = UINT32_MAX;
  for (uint64_t member : grp.members) {
    const uint32_t pod = topo.locate_host(member).pod;
    if (pod != last) {
      if (pod != source_pod) pods.push_back(pod);
      last = pod;
    }
  }
  return pods;  // members sorted => pods sorted and unique
}

std::map<uint32_t, BitVec> destination_pod_vectors(const Topology& topo,
                                                   const MulticastGroup& grp) {
  std::map<uint32_t, BitVec> vectors;
  for (uint32_t pod : destination_pods(topo, grp)) {
    vectors.emplace(pod, pod_vector(topo, grp, pod));
  }
  return vectors;
}

GroupLayout GroupLayout::build(const Topology& topo, const MulticastGroup& grp) {
  const auto& p = topo.params();
  GroupLayout layout;
  const HostLocator src = topo.locate_host(grp.source);
  layout.source_pod = src.pod;
  layout.source_leaf = src.leaf;
  layout.source_port = src.port;
  layout.source_leaf_ports = BitVec(p.l);

  // One pass over the sorted member list, chunked by leaf.
  size_t i = 0;
  while (i < grp.members.size()) {
    const uint64_t leaf_global = grp.members[i] / p.l;
    BitVec ports(p.l);
    while (i < grp.members.size() && grp.members[i] / p.l == leaf_global) {
      ports.set(static_cast<uint32_t>(grp.members[i] % p.l));
      ++i;
    }
    LeafMembers lm;
    lm.pod = static_cast<uint32_t>(leaf_global / p.m);
    lm.leaf = static_cast<uint32_t>(leaf_global % p.m);
    lm.leaf_global = static_cast<uint32_t>(leaf_global);
    lm.ports = ports;
    if (lm.pod == layout.source_pod) {
      if (lm.leaf == layout.source_leaf) {
        layout.source_leaf_ports = ports;
      } else {
        layout.source_pod_other.push_back(std::move(lm));
      }
    } else {
      auto& vec = layout.dest[lm.pod];
      vec.push_back(std::move(lm));
    }
  }
  layout.dest_pods.reserve(layout.dest.size());
  for (const auto& [pod, leaves] : layout.dest) {
    (void)leaves;
    layout.dest_pods.push_back(pod);
  }
  return layout;
}

void write_groups(std::ostream& os, const std::vector<MulticastGroup>& groups) {
  for (const auto& grp : groups) {
    os << "g " << grp.id << " src " << grp.source << " members ";
    for (size_t i = 0; i < grp.members.size(); ++i) {
      if (i) os << ',';
      os << grp.members[i];
    }
    os << '\n';
  }
}

std::vector<MulticastGroup> read_groups(std::istream& is) {
  std::vector<MulticastGroup> groups;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag, src_kw, members_kw, members_csv;
    MulticastGroup grp;
    if (!(ls >> tag >> grp.id >> src_kw >> grp.source >> members_kw >> members_csv) ||
        tag != "g" || src_kw != "src" || members_kw != "members") {
      throw std::runtime_error("group fixture parse error at line " + std::to_string(line_no));
    }
    std::istringstream ms(members_csv);
    std::string tok;
    while (std::getline(ms, tok, ',')) {
      if (tok.empty()) {
        throw std::runtime_error("group fixture parse error at line " + std::to_string(line_no));
      }
      grp.members.push_back(std::stoull(tok));
    }
    if (grp.members.empty()) {
      throw std::runtime_error("group fixture with no members at line " + std::to_string(line_no));
    }
    std::sort(grp.members.begin(), grp.members.end());
    groups.push_back(std::move(grp));
  }
  return groups;
}

}  // namespace closmcast

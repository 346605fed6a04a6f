#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace closmcast {

// Three-tier Clos parameters.
//   n: pods
//   m: leaf switches per pod
//   l: downstream (host-facing) ports per leaf
//   s: spine switches per pod
//   u: uplinks per spine (core count = s*u)
struct TopologyParams {
  uint32_t n = 1;
  uint32_t m = 1;
  uint32_t l = 1;
  uint32_t s = 1;
  uint32_t u = 1;

  // Throws std::invalid_argument naming the violated field.
  void validate() const;

  bool operator==(const TopologyParams&) const = default;
};

// Built-in parameter sets.
TopologyParams paper_preset();  // n=24, m=24, l=48, s=24, u=24 -> 27,648 hosts
TopologyParams fig1_preset();   // n=4,  m=2,  l=4,  s=2,  u=2  -> 32 hosts

struct HostLocator {
  uint32_t pod = 0;
  uint32_t leaf = 0;  // pod-local leaf index
  uint32_t port = 0;  // leaf-local port index

  bool operator==(const HostLocator&) const = default;
};

enum class LinkLayer : uint8_t { HostLeaf = 0, LeafSpine = 1, SpineCore = 2 };
enum class LinkDir : uint8_t { Up = 0, Down = 1 };

const char* link_layer_name(LinkLayer layer);  // "host_leaf" / "leaf_spine" / "spine_core"
const char* link_dir_name(LinkDir dir);        // "up" / "down"

// Immutable topology with dense 0-based IDs per layer.
//
// ID scheme:
//   host                 = ((pod*m) + leaf)*l + port
//   global leaf          = pod*m + leaf
//   global spine         = pod*s + a            (a = pod-local spine index)
//   core (a, b)          = a*u + b              (core (a,b) <-> spine a of every pod)
//
// Directed link IDs (same ID space for up and down):
//   host-leaf   link = host ID                       (count n*m*l)
//   leaf-spine  link = global_leaf*s + a             (count n*m*s)
//   spine-core  link = global_spine*u + b            (count n*s*u)
class Topology {
 public:
  explicit Topology(TopologyParams params);

  const TopologyParams& params() const { return params_; }

  uint64_t host_count() const { return host_count_; }
  uint32_t leaf_count() const { return leaf_count_; }
  uint32_t spine_count() const { return spine_count_; }
  uint32_t core_count() const { return core_count_; }

  HostLocator locate_host(uint64_t host) const;  // throws std::out_of_range
  uint64_t host_id(const HostLocator& loc) const;

  uint32_t leaf_global(uint32_t pod, uint32_t leaf) const { return pod * params_.m + leaf; }
  uint32_t spine_global(uint32_t pod, uint32_t a) const { return pod * params_.s + a; }
  uint32_t core_id(uint32_t a, uint32_t b) const { return a * params_.u + b; }

  uint32_t pod_of_leaf(uint32_t leaf_global) const { return leaf_global / params_.m; }
  uint32_t pod_of_spine(uint32_t spine_global) const { return spine_global / params_.s; }

  uint64_t link_count(LinkLayer layer, LinkDir dir) const;
  std::vector<uint64_t> links_in_layer(LinkLayer layer, LinkDir dir) const;

  // Bits needed to name one switch in the layer: ceil(log2(population)), min 1.
  uint32_t id_width_leaf() const { return id_width_leaf_; }
  uint32_t id_width_spine() const { return id_width_spine_; }

  std::string describe() const;

 private:
  TopologyParams params_;
  uint64_t host_count_ = 0;
  uint32_t leaf_count_ = 0;
  uint32_t spine_count_ = 0;
  uint32_t core_count_ = 0;
  uint32_t id_width_leaf_ = 1;
  uint32_t id_width_spine_ = 1;
};

}  // namespace closmcast

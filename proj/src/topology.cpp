#include "closmcast/topology.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace closmcast {

namespace {

uint32_t id_width_for(uint64_t population) {
  uint32_t bits = 0;
  uint64_t capacity = 1;
  while (capacity < population) {
    capacity <<= 1;
    ++bits;
  }
  return bits < 1 ? 1 : bits;
}

}  // namespace

void TopologyParams::validate() const {
  auto check = [](uint32_t value, const char* field) {
    if (value < 1) {
      throw std::invalid_argument(std::string("topology parameter '") + field +
                                  "' must be >= 1");
    }
  };
  check(n, "n");
  check(m, "m");
  check(l, "l");
  check(s, "s");
  check(u, "u");
}

TopologyParams paper_preset() { return TopologyParams{24, 24, 48, 24, 24}; }

TopologyParams fig1_preset() { return TopologyParams{4, 2, 4, 2, 2}; }

Topology::Topology(TopologyParams params) : params_(params) {
  params_.validate();
  host_count_ = static_cast<uint64_t>(params_.n) * params_.m * params_.l;
  leaf_count_ = params_.n * params_.m;
  spine_count_ = params_.n * params_.s;
  core_count_ = params_.s * params_.u;
  id_width_leaf_ = id_width_for(leaf_count_);
  id_width_spine_ = id_width_for(spine_count_);
}

HostLocator Topology::locate_host(uint64_t host) const {
  if (host >= host_count_) {
    throw std::out_of_range("host ID " + std::to_string(host) + " out of range (hosts " +
                            std::to_string(host_count_) + ")");
  }
  const uint64_t leaf_global = host / params_.l;
  HostLocator loc;
  loc.port = static_cast<uint32_t>(host % params_.l);
  loc.pod = static_cast<uint32_t>(leaf_global / params_.m);
  loc.leaf = static_cast<uint32_t>(leaf_global % params_.m);
  return loc;
}

uint64_t Topology::host_id(const HostLocator& loc) const {
  if (loc.pod >= params_.n || loc.leaf >= params_.m || loc.port >= params_.l) {
    throw std::out_of_range("host locator out of range");
  }
  return (static_cast<uint64_t>(loc.pod) * params_.m + loc.leaf) * params_.l + loc.port;
}

uint64_t Topology::link_count(LinkLayer layer, LinkDir) const {
  switch (layer) {
    case LinkLayer::HostLeaf:
      return host_count_;
    case LinkLayer::LeafSpine:
      return static_cast<uint64_t>(leaf_count_) * params_.s;
    case LinkLayer::SpineCore:
      return static_cast<uint64_t>(spine_count_) * params_.u;
  }
  throw std::invalid_argument("invalid link layer");
}

std::vector<uint64_t> Topology::links_in_layer(LinkLayer layer, LinkDir dir) const {
  std::vector<uint64_t> links(link_count(layer, dir));
  std::iota(links.begin(), links.end(), 0);
  return links;
}

const char* link_layer_name(LinkLayer layer) {
  switch (layer) {
    case LinkLayer::HostLeaf:
      return "host_leaf";
    case LinkLayer::LeafSpine:
      return "leaf_spine";
    case LinkLayer::SpineCore:
      return "spine_core";
  }
  return "?";
}

const char* link_dir_name(LinkDir dir) {
  return dir == LinkDir::Up ? "up" : "down";
}

std::string Topology::describe() const {
  std::ostringstream os;
  os << "clos n=" << params_.n << " m=" << params_.m << " l=" << params_.l
     << " s=" << params_.s << " u=" << params_.u << " hosts=" << host_count_
     << " leaves=" << leaf_count_ << " spines=" << spine_count_
     << " cores=" << core_count_;
  return os.str();
}

}  // namespace closmcast

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "closmcast/group.hpp"

using namespace closmcast;

TEST_CASE("generated groups are canonical and deterministic") {
  const Topology topo(fig1_preset());
  const MulticastGroup a = generate_group(topo, 7, 1234, 9);
  const MulticastGroup b = generate_group(topo, 7, 1234, 9);
  CHECK(a == b);
  CHECK(a.id == 9);
  CHECK(a.members.size() == 7);
  CHECK(std::is_sorted(a.members.begin(), a.members.end()));
  CHECK(std::set<uint64_t>(a.members.begin(), a.members.end()).size() == 7);
  for (uint64_t h : a.members) {
    CHECK(h < topo.host_count());
    CHECK(h != a.source);
  }

  const MulticastGroup c = generate_group(topo, 7, 1235, 9);
  CHECK(a != c);
}

TEST_CASE("group size bounds") {
  const Topology topo(fig1_preset());
  CHECK_THROWS_AS(generate_group(topo, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_group(topo, 32, 1), std::invalid_argument);
  const MulticastGroup full = generate_group(topo, 31, 1);
  CHECK(full.members.size() == 31);  // everyone but the source
}

TEST_CASE("leaf bitmap and pod vector agree with a brute-force scan") {
  const Topology topo(fig1_preset());
  MulticastGroup grp;
  grp.source = 0;
  grp.members = {3, 13, 14, 18, 24, 25, 28};

  for (uint32_t pod = 0; pod < 4; ++pod) {
    BitVec concat(0);
    for (uint32_t leaf = 0; leaf < 2; ++leaf) {
      BitVec expect(4);
      for (uint64_t h : grp.members) {
        const HostLocator loc = topo.locate_host(h);
        if (loc.pod == pod && loc.leaf == leaf) expect.set(loc.port);
      }
      CHECK(leaf_bitmap(topo, grp, pod, leaf) == expect);
      concat.append(expect);
    }
    CHECK(pod_vector(topo, grp, pod) == concat);
  }

  // Pinned spot checks: host 3 is port 3 of leaf 0, pod 0; hosts 13, 14 are
  // ports 1, 2 of leaf 1, pod 1.
  CHECK(leaf_bitmap(topo, grp, 0, 0).to_string() == "0001");
  CHECK(leaf_bitmap(topo, grp, 1, 1).to_string() == "0110");
  CHECK(pod_vector(topo, grp, 1).to_string() == "00000110");
}

TEST_CASE("destination pods exclude the source pod") {
  const Topology topo(fig1_preset());
  MulticastGroup grp;
  grp.source = 0;
  grp.members = {3, 13, 14, 18, 24, 25, 28};
  CHECK(destination_pods(topo, grp) == std::vector<uint32_t>{1, 2, 3});

  const auto vectors = destination_pod_vectors(topo, grp);
  REQUIRE(vectors.size() == 3);
  for (const auto& [pod, vec] : vectors) {
    CHECK(vec == pod_vector(topo, grp, pod));
    CHECK(vec.any());
  }

  grp.members = {3};  // member in the source pod only
  CHECK(destination_pods(topo, grp).empty());
  CHECK(destination_pod_vectors(topo, grp).empty());
}

TEST_CASE("layout gathers per-leaf membership once") {
  const Topology topo(fig1_preset());
  MulticastGroup grp;
  grp.source = 5;  // pod 0, leaf 1, port 1
  grp.members = {4, 6, 1, 13, 14, 30};

  std::sort(grp.members.begin(), grp.members.end());
  const GroupLayout layout = GroupLayout::build(topo, grp);
  CHECK(layout.source_pod == 0);
  CHECK(layout.source_leaf == 1);
  CHECK(layout.source_port == 1);
  CHECK(layout.source_leaf_ports.to_string() == "1010");  // members 4 and 6

  REQUIRE(layout.source_pod_other.size() == 1);
  CHECK(layout.source_pod_other[0].leaf_global == 0);
  CHECK(layout.source_pod_other[0].ports.to_string() == "0100");  // member 1

  CHECK(layout.dest_pods == std::vector<uint32_t>{1, 3});
  REQUIRE(layout.dest.at(1).size() == 1);
  CHECK(layout.dest.at(1)[0].leaf_global == 3);
  CHECK(layout.dest.at(1)[0].ports.to_string() == "0110");
  REQUIRE(layout.dest.at(3).size() == 1);
  CHECK(layout.dest.at(3)[0].leaf_global == 7);
  CHECK(layout.dest.at(3)[0].ports.to_string() == "0010");  // member 30
}

TEST_CASE("member draws cover leaves like uniform sampling should") {
  const Topology topo(paper_preset());
  const uint64_t d = 500;
  const int trials = 200;
  double covered_sum = 0;
  for (int t = 0; t < trials; ++t) {
    const MulticastGroup grp = generate_group(topo, d, 90000 + t);
    std::set<uint32_t> leaves;
    for (uint64_t h : grp.members) {
      const HostLocator loc = topo.locate_host(h);
      leaves.insert(topo.leaf_global(loc.pod, loc.leaf));
    }
    covered_sum += static_cast<double>(leaves.size());
  }
  const double covered = covered_sum / trials;
  // 576 leaves, 500 draws: E[distinct leaves] ~= 576 * (1 - (1 - 1/576)^500).
  const double expect = 576.0 * (1.0 - std::pow(1.0 - 1.0 / 576.0, 500.0));
  CHECK(covered == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("fixture lines round trip") {
  const Topology topo(fig1_preset());
  std::vector<MulticastGroup> groups;
  groups.push_back(generate_group(topo, 7, 11, 0));
  groups.push_back(generate_group(topo, 3, 12, 1));

  std::stringstream buf;
  write_groups(buf, groups);
  const auto back = read_groups(buf);
  CHECK(back == groups);
}

TEST_CASE("fixture parse errors carry the line number") {
  std::istringstream bad("g 0 src 1 members 2,3\nnot a group line\n");
  CHECK_THROWS_WITH_AS(read_groups(bad), doctest::Contains("line 2"), std::runtime_error);

  std::istringstream empty_members("g 0 src 1 members 2,,3\n");
  CHECK_THROWS_AS(read_groups(empty_members), std::runtime_error);

  std::istringstream commented("# header\n\ng 4 src 2 members 9\n");
  const auto groups = read_groups(commented);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].id == 4);
  CHECK(groups[0].source == 2);
  CHECK(groups[0].members == std::vector<uint64_t>{9});
}

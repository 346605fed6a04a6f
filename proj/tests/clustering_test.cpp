#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "closmcast/bitvec.hpp"
#include "closmcast/clustering.hpp"
#include "closmcast/rng.hpp"

using namespace closmcast;

namespace {

std::map<uint32_t, BitVec> vectors_from(const std::vector<const char*>& rows) {
  std::map<uint32_t, BitVec> out;
  for (uint32_t i = 0; i < rows.size(); ++i) out.emplace(i, BitVec::from_string(rows[i]));
  return out;
}

}  // namespace

TEST_CASE("majority centroid, ties round down") {
  CHECK(centroid({BitVec::from_string("1010"), BitVec::from_string("1011"),
                  BitVec::from_string("0011")})
            .to_string() == "1011");
  CHECK(centroid({BitVec::from_string("10"), BitVec::from_string("01")}).to_string() == "00");
  CHECK(centroid({BitVec::from_string("110")}).to_string() == "110");
  CHECK_THROWS_AS(centroid({}), std::invalid_argument);
  CHECK_THROWS_AS(centroid({BitVec(3), BitVec(4)}), std::invalid_argument);
}

TEST_CASE("two well-separated pairs are split exactly") {
  const auto vectors =
      vectors_from({"000011", "000010", "110000", "100000"});
  const ClusterAssignment asg = kmeans_hamming(vectors, 2, 7);

  CHECK(asg.k_requested == 2);
  CHECK(asg.k_effective == 2);
  auto clusters = asg.clusters();
  std::sort(clusters.begin(), clusters.end());
  CHECK(clusters == std::vector<std::vector<uint32_t>>{{0, 1}, {2, 3}});
  CHECK(asg.cost == 2);
  CHECK(asg.cost == cluster_cost(asg, vectors));
  CHECK(asg.inertia == doctest::Approx(1.0));

  // Both binary centroids are the frequent member of their pair.
  std::vector<std::string> cents;
  for (const BitVec& c : asg.centroids) cents.push_back(c.to_string());
  std::sort(cents.begin(), cents.end());
  CHECK(cents == std::vector<std::string>{"000010", "100000"});
}

TEST_CASE("k=1 collapses to the global majority") {
  const auto vectors = vectors_from({"1100", "1010", "1001"});
  const ClusterAssignment asg = kmeans_hamming(vectors, 1, 3);
  CHECK(asg.k_effective == 1);
  for (const auto& [pod, cluster] : asg.assignment) CHECK(cluster == 0);
  REQUIRE(asg.centroids.size() == 1);
  CHECK(asg.centroids[0].to_string() == "1000");
  CHECK(asg.cost == 3);  // one stray bit per vector
}

TEST_CASE("k at or above the pod count degenerates to singletons") {
  const auto vectors = vectors_from({"10", "01", "11"});
  for (uint32_t k : {3u, 7u}) {
    const ClusterAssignment asg = kmeans_hamming(vectors, k, 5);
    CHECK(asg.k_requested == k);
    CHECK(asg.k_effective == 3);
    CHECK(asg.cost == 0);
    CHECK(asg.inertia == 0.0);
    for (const auto& [pod, cluster] : asg.assignment) {
      CHECK(asg.centroids[cluster] == vectors.at(pod));
    }
  }
}

TEST_CASE("same seed, same answer; diagnostics are consistent") {
  std::map<uint32_t, BitVec> vectors;
  Rng rng(99);
  for (uint32_t pod = 0; pod < 12; ++pod) {
    BitVec v(24);
    for (uint32_t b = 0; b < 24; ++b) {
      if (rng.bounded(4) == 0) v.set(b);
    }
    if (v.none()) v.set(pod);
    vectors.emplace(pod, v);
  }

  const ClusterAssignment a = kmeans_hamming(vectors, 4, 2024, 100, 6);
  const ClusterAssignment b = kmeans_hamming(vectors, 4, 2024, 100, 6);
  CHECK(a.assignment == b.assignment);
  CHECK(a.cost == b.cost);
  CHECK(a.inertia == b.inertia);
  CHECK(a.chosen_restart == b.chosen_restart);

  REQUIRE(a.restart_inertias.size() == 6);
  double best = a.restart_inertias[0];
  uint32_t best_idx = 0;
  for (uint32_t r = 1; r < 6; ++r) {
    if (a.restart_inertias[r] < best) {
      best = a.restart_inertias[r];
      best_idx = r;
    }
  }
  CHECK(a.chosen_restart == best_idx);
  CHECK(a.inertia == best);
  CHECK(a.inertia == a.restart_inertias[a.chosen_restart]);

  REQUIRE_FALSE(a.inertia_history.empty());
  for (size_t i = 1; i < a.inertia_history.size(); ++i) {
    CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-9);
  }
  CHECK(a.inertia_history.back() == a.inertia);

  // Structural sanity: every pod assigned, every cluster nonempty.
  CHECK(a.assignment.size() == vectors.size());
  std::vector<uint32_t> sizes(a.k_effective, 0);
  for (const auto& [pod, cluster] : a.assignment) {
    REQUIRE(cluster < a.k_effective);
    ++sizes[cluster];
  }
  for (uint32_t size : sizes) CHECK(size > 0);
  CHECK(a.cost == cluster_cost(a, vectors));
}

TEST_CASE("input validation") {
  const auto vectors = vectors_from({"10", "01"});
  CHECK_THROWS_AS(kmeans_hamming({}, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(kmeans_hamming(vectors, 0, 1), std::invalid_argument);

  auto bad_width = vectors;
  bad_width.emplace(2, BitVec::from_string("111"));
  CHECK_THROWS_AS(kmeans_hamming(bad_width, 2, 1), std::invalid_argument);

  auto zero = vectors;
  zero.emplace(2, BitVec(2));
  CHECK_THROWS_AS(kmeans_hamming(zero, 2, 1), std::invalid_argument);

  ClusterAssignment missing;
  missing.k_requested = missing.k_effective = 1;
  missing.assignment = {{0, 0}};
  missing.centroids = {BitVec::from_string("10")};
  CHECK_THROWS_AS(cluster_cost(missing, vectors), std::invalid_argument);
}

TEST_CASE("clusters() lists pods sorted per cluster") {
  const auto vectors = vectors_from({"0011", "0011", "1100", "0011", "1100"});
  const ClusterAssignment asg = kmeans_hamming(vectors, 2, 31);
  const auto clusters = asg.clusters();
  REQUIRE(clusters.size() == 2);
  size_t total = 0;
  for (const auto& members : clusters) {
    CHECK(std::is_sorted(members.begin(), members.end()));
    total += members.size();
  }
  CHECK(total == 5);
  // Identical vectors always land together at the optimum.
  const uint32_t c0 = asg.assignment.at(0);
  CHECK(asg.assignment.at(1) == c0);
  CHECK(asg.assignment.at(3) == c0);
  CHECK(asg.assignment.at(2) == asg.assignment.at(4));
  CHECK(asg.assignment.at(2) != c0);
  CHECK(asg.cost == 0);
}

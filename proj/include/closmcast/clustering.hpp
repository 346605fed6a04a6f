#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "closmcast/bitvec.hpp"

namespace closmcast {

// Result of clustering destination-pod vectors.
struct ClusterAssignment {
  uint32_t k_requested = 0;
  uint32_t k_effective = 0;                 // min(k_requested, #pods)
  std::map<uint32_t, uint32_t> assignment;  // pod -> cluster in [0, k_effective)
  std::vector<BitVec> centroids;            // per-bit majority of the cluster, ties -> 0
  uint64_t cost = 0;                        // sum of Hamming distances to the majority centroids

  // Optimization diagnostics. `inertia` is the within-cluster sum of squared
  // Euclidean distances to the fractional mean centroids — on binary data the
  // Lloyd objective for Hamming distance — recorded per iteration of the
  // winning restart and per restart for selection.
  double inertia = 0.0;
  std::vector<double> inertia_history;
  std::vector<double> restart_inertias;
  uint32_t chosen_restart = 0;

  // Pods per cluster, each sorted ascending.
  std::vector<std::vector<uint32_t>> clusters() const;
};

// Per-bit majority vote; a bit is set iff strictly more than half of the
// members set it (ties -> 0). Throws on empty input or width mismatch.
BitVec centroid(const std::vector<BitVec>& members);

// Sum over pods of hamming(vector, centroid of its cluster), recomputed from
// scratch. Throws if the assignment does not cover the vector keys.
uint64_t cluster_cost(const ClusterAssignment& assignment,
                      const std::map<uint32_t, BitVec>& vectors);

// Lloyd K-Means over binary pod vectors. Distances inside the loop are exact
// integer squared-Euclidean distances to fractional mean centroids, which on
// binary points coincide with Hamming distance up to the usual mean-centroid
// relaxation; inertia is therefore non-increasing per iteration (asserted).
// Initialization is a seeded random partition; empty clusters are repaired by
// stealing the worst-fitting pod (ties: lowest pod ID); assignment ties take
// the lowest cluster index; the best of `restarts` runs by final inertia is
// returned (ties: lowest restart index). Fully deterministic for a fixed seed.
ClusterAssignment kmeans_hamming(const std::map<uint32_t, BitVec>& vectors, uint32_t k,
                                 uint64_t seed, uint32_t max_iter = 100,
                                 uint32_t restarts = 10);

}  // namespace closmcast

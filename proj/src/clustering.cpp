#include "closmcast/clustering.hpp"

#include <algorithm>
#include <stdexcept>

#include "closmcast/rng.hpp"

namespace closmcast {

namespace {

// Working state for one restart. Pods are referenced by dense index into
// `points`; cluster stats are maintained incrementally as pods move.
struct LloydState {
  uint32_t width = 0;
  uint32_t k = 0;
  const std::vector<BitVec>* points = nullptr;
  std::vector<uint32_t> popcounts;             // per point
  std::vector<uint32_t> assign;                // point -> cluster
  std::vector<uint32_t> size;                  // per cluster
  std::vector<std::vector<uint32_t>> sums;     // per cluster: per-bit member count
  std::vector<uint64_t> sqsum;                 // per cluster: sum of per-bit counts squared

  void init(const std::vector<BitVec>& pts, uint32_t k_eff) {
    width = pts[0].width();
    k = k_eff;
    points = &pts;
    popcounts.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) popcounts[i] = pts[i].popcount();
    assign.assign(pts.size(), 0);
    size.assign(k, 0);
    sums.assign(k, std::vector<uint32_t>(width, 0));
    sqsum.assign(k, 0);
  }

  void add_point(uint32_t p, uint32_t c) {
    assign[p] = c;
    size[c] += 1;
    auto& sum = sums[c];
    uint64_t& q = sqsum[c];
    (*points)[p].for_each_set([&](uint32_t b) {
      q -= static_cast<uint64_t>(sum[b]) * sum[b];
      sum[b] += 1;
      q += static_cast<uint64_t>(sum[b]) * sum[b];
    });
  }

  void remove_point(uint32_t p) {
    const uint32_t c = assign[p];
    size[c] -= 1;
    auto& sum = sums[c];
    uint64_t& q = sqsum[c];
    (*points)[p].for_each_set([&](uint32_t b) {
      q -= static_cast<uint64_t>(sum[b]) * sum[b];
      sum[b] -= 1;
      q += static_cast<uint64_t>(sum[b]) * sum[b];
    });
  }

  // Squared distance to cluster c's fractional mean, scaled by size[c]^2:
  //   |C|^2 * d^2(x, mean(C)) = pc(x)*|C|^2 - 2*|C|*<x, S_C> + sum_b S_C[b]^2
  // Exact in uint64 for all realistic widths/sizes; comparisons across
  // clusters cross-multiply by the other cluster's size^2 in 128-bit.
  uint64_t scaled_dist2(uint32_t p, uint32_t c) const {
    const uint64_t n = size[c];
    uint64_t dot = 0;
    const auto& sum = sums[c];
    (*points)[p].for_each_set([&](uint32_t b) { dot += sum[b]; });
    return popcounts[p] * n * n - 2 * n * dot + sqsum[c];
  }

  // dist2(p, a) < dist2(p, b), exactly.
  bool closer(uint64_t da, uint32_t ca, uint64_t db, uint32_t cb) const {
    const unsigned __int128 lhs =
        static_cast<unsigned __int128>(da) * size[cb] * size[cb];
    const unsigned __int128 rhs =
        static_cast<unsigned __int128>(db) * size[ca] * size[ca];
    return lhs < rhs;
  }

  uint32_t nearest_cluster(uint32_t p) const {
    uint32_t best = 0;
    uint64_t best_d = scaled_dist2(p, 0);
    for (uint32_t c = 1; c < k; ++c) {
      const uint64_t d = scaled_dist2(p, c);
      if (closer(d, c, best_d, best)) {
        best = c;
        best_d = d;
      }
    }
    return best;
  }

  // Move the worst-fitting pod (largest distance to its own centroid, from
  // clusters that can spare one) into each empty cluster.
  void repair_empty() {
    for (uint32_t c = 0; c < k; ++c) {
      if (size[c] != 0) continue;
      uint32_t worst = UINT32_MAX;
      uint64_t worst_d = 0;
      for (uint32_t p = 0; p < assign.size(); ++p) {
        if (size[assign[p]] < 2) continue;
        const uint64_t d = scaled_dist2(p, assign[p]);
        if (worst == UINT32_MAX || closer(worst_d, assign[worst], d, assign[p])) {
          worst = p;
          worst_d = d;
        }
      }
      if (worst == UINT32_MAX) {
        // #pods >= k guarantees a donor cluster of size >= 2 exists.
        throw std::logic_error("kmeans_hamming: no donor pod for empty cluster");
      }
      remove_point(worst);
      add_point(worst, c);
    }
  }

  double inertia() const {
    double total = 0.0;
    for (uint32_t p = 0; p < assign.size(); ++p) {
      const uint32_t c = assign[p];
      const double n = static_cast<double>(size[c]);
      total += static_cast<double>(scaled_dist2(p, c)) / (n * n);
    }
    return total;
  }
};

struct RestartResult {
  std::vector<uint32_t> assign;
  double inertia = 0.0;
  std::vector<double> history;
};

RestartResult run_restart(const std::vector<BitVec>& points, uint32_t k_eff, uint64_t seed,
                          uint32_t max_iter) {
  LloydState st;
  st.init(points, k_eff);

  Rng rng(seed);
  for (uint32_t p = 0; p < points.size(); ++p) {
    st.add_point(p, static_cast<uint32_t>(rng.bounded(k_eff)));
  }
  st.repair_empty();

  RestartResult res;
  res.history.push_back(st.inertia());
  for (uint32_t iter = 0; iter < max_iter; ++iter) {
    // Assignment step against frozen centroids (sizes/sums snapshot).
    std::vector<uint32_t> next(points.size());
    bool changed = false;
    for (uint32_t p = 0; p < points.size(); ++p) {
      next[p] = st.nearest_cluster(p);
      if (next[p] != st.assign[p]) changed = true;
    }
    if (!changed) break;
    for (uint32_t p = 0; p < points.size(); ++p) {
      if (next[p] != st.assign[p]) {
        st.remove_point(p);
        st.add_point(p, next[p]);
      }
    }
    st.repair_empty();
    const double now = st.inertia();
    // Lloyd monotonicity (repair also only reduces the objective); the slack
    // covers double rounding in the recorded history values only.
    if (now > res.history.back() * (1.0 + 1e-12) + 1e-9) {
      throw std::logic_error("kmeans_hamming: objective increased across an iteration");
    }
    res.history.push_back(now);
  }
  res.assign = st.assign;
  res.inertia = res.history.back();
  return res;
}

}  // namespace

std::vector<std::vector<uint32_t>> ClusterAssignment::clusters() const {
  std::vector<std::vector<uint32_t>> out(k_effective);
  for (const auto& [pod, cluster] : assignment) out[cluster].push_back(pod);
  return out;
}

BitVec centroid(const std::vector<BitVec>& members) {
  if (members.empty()) {
    throw std::invalid_argument("centroid: empty input");
  }
  const uint32_t width = members[0].width();
  std::vector<uint32_t> counts(width, 0);
  for (const auto& v : members) {
    if (v.width() != width) {
      throw std::invalid_argument("centroid: width mismatch");
    }
    v.for_each_set([&](uint32_t b) { counts[b] += 1; });
  }
  BitVec c(width);
  for (uint32_t b = 0; b < width; ++b) {
    if (2ull * counts[b] > members.size()) c.set(b);
  }
  return c;
}

uint64_t cluster_cost(const ClusterAssignment& assignment,
                      const std::map<uint32_t, BitVec>& vectors) {
  uint64_t total = 0;
  for (const auto& [pod, vec] : vectors) {
    auto it = assignment.assignment.find(pod);
    if (it == assignment.assignment.end()) {
      throw std::invalid_argument("cluster_cost: pod " + std::to_string(pod) +
                                  " missing from assignment");
    }
    total += hamming(vec, assignment.centroids.at(it->second));
  }
  return total;
}

ClusterAssignment kmeans_hamming(const std::map<uint32_t, BitVec>& vectors, uint32_t k,
                                 uint64_t seed, uint32_t max_iter, uint32_t restarts) {
  if (vectors.empty()) {
    throw std::invalid_argument("kmeans_hamming: empty input");
  }
  if (k < 1) {
    throw std::invalid_argument("kmeans_hamming: k must be >= 1");
  }
  if (restarts < 1) restarts = 1;
  if (max_iter < 1) max_iter = 1;

  std::vector<uint32_t> pods;
  std::vector<BitVec> points;
  pods.reserve(vectors.size());
  points.reserve(vectors.size());
  const uint32_t width = vectors.begin()->second.width();
  for (const auto& [pod, vec] : vectors) {
    if (vec.width() != width) {
      throw std::invalid_argument("kmeans_hamming: width mismatch");
    }
    if (vec.none()) {
      throw std::invalid_argument("kmeans_hamming: zero vector for pod " + std::to_string(pod));
    }
    pods.push_back(pod);
    points.push_back(vec);
  }

  ClusterAssignment out;
  out.k_requested = k;
  out.k_effective = static_cast<uint32_t>(std::min<size_t>(k, pods.size()));

  std::vector<uint32_t> final_assign(points.size());
  if (out.k_effective == pods.size()) {
    // Every pod its own cluster; no search needed and cost is zero.
    for (uint32_t p = 0; p < points.size(); ++p) final_assign[p] = p;
    out.restart_inertias.assign(1, 0.0);
    out.inertia_history.assign(1, 0.0);
    out.inertia = 0.0;
    out.chosen_restart = 0;
  } else {
    RestartResult best;
    uint32_t best_index = 0;
    for (uint32_t r = 0; r < restarts; ++r) {
      RestartResult res =
          run_restart(points, out.k_effective, derive_seed(seed, seed_stream::kKMeans, r),
                      max_iter);
      out.restart_inertias.push_back(res.inertia);
      if (r == 0 || res.inertia < best.inertia) {
        best = std::move(res);
        best_index = r;
      }
    }
    final_assign = best.assign;
    out.inertia = best.inertia;
    out.inertia_history = std::move(best.history);
    out.chosen_restart = best_index;
  }

  for (uint32_t p = 0; p < pods.size(); ++p) {
    out.assignment[pods[p]] = final_assign[p];
  }
  std::vector<std::vector<BitVec>> members(out.k_effective);
  for (uint32_t p = 0; p < points.size(); ++p) {
    members[final_assign[p]].push_back(points[p]);
  }
  out.centroids.reserve(out.k_effective);
  for (uint32_t c = 0; c < out.k_effective; ++c) {
    out.centroids.push_back(centroid(members[c]));
  }
  out.cost = cluster_cost(out, vectors);
  return out;
}

}  // namespace closmcast

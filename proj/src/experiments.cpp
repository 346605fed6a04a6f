#include "closmcast/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "closmcast/clustering.hpp"
#include "closmcast/encoder.hpp"
#include "closmcast/forwarding.hpp"
#include "closmcast/rng.hpp"
#include "closmcast/version.hpp"

namespace closmcast {

namespace {

constexpr uint32_t kAggregateRowId = static_cast<uint32_t>(-1);  // printed as -1

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open output file " + path);
  }
  os << "# closmcast " << kVersion << " n=" << cfg.topo.n << " m=" << cfg.topo.m
     << " l=" << cfg.topo.l << " s=" << cfg.topo.s << " u=" << cfg.topo.u
     << " seed=" << cfg.seed << "\n";
  os << std::fixed << std::setprecision(6);
  return os;
}

uint64_t group_stream_index(uint64_t d, uint32_t i) { return (d << 32) | i; }

MulticastGroup make_group(const Topology& topo, const ExperimentConfig& cfg, uint64_t d,
                          uint32_t i) {
  return generate_group(
      topo, d, derive_seed(cfg.seed, seed_stream::kGroupGen, group_stream_index(d, i)), i);
}

ClusterAssignment cluster_group(const ExperimentConfig& cfg,
                                const std::map<uint32_t, BitVec>& vectors, uint64_t d,
                                uint32_t i, uint32_t k) {
  if (vectors.empty()) {
    ClusterAssignment asg;
    asg.k_requested = k;
    asg.k_effective = 0;
    return asg;
  }
  return kmeans_hamming(vectors, k,
                        derive_seed(cfg.seed, seed_stream::kKMeans, group_stream_index(d, i)),
                        cfg.kmeans_max_iter, cfg.kmeans_restarts);
}

void write_et_csv(const ExperimentConfig& cfg, const std::vector<SavingsCell>& cells,
                  const std::vector<EtDetail>& detail) {
  std::ofstream os = open_csv(cfg, "et.csv");
  os << "seed,group_id,d,k,et_elmo,et_bert,savings\n";
  for (uint64_t d : cfg.d_list) {
    const SavingsCell* first = nullptr;
    for (const auto& cell : cells) {
      if (cell.d == d) {
        first = &cell;
        break;
      }
    }
    // Baseline aggregate row (k=0 marks the single-packet scheme).
    os << cfg.seed << ",-1," << d << ",0," << (first ? first->mean_et_elmo : 0.0)
       << ",0.000000,0.000000\n";
    if (cfg.verbose) {
      for (const auto& det : detail) {
        if (det.d != d) continue;
        os << cfg.seed << ',' << det.group_id << ',' << d << ",0," << det.et_elmo << ",0,";
        if (det.used) {
          os << "0.000000";
        } else {
          os << "nan";
        }
        os << "\n";
      }
    }
    for (uint32_t k : cfg.k_list) {
      for (const auto& cell : cells) {
        if (cell.d != d || cell.k != k) continue;
        os << cfg.seed << ",-1," << d << ',' << k << ',' << cell.mean_et_elmo << ','
           << cell.mean_et_bert << ',' << cell.mean_savings << "\n";
      }
      if (cfg.verbose) {
        for (const auto& det : detail) {
          if (det.d != d || !det.used) continue;
          auto it = det.et_bert_by_k.find(k);
          if (it == det.et_bert_by_k.end()) continue;
          const double savings =
              1.0 - static_cast<double>(it->second) / static_cast<double>(det.et_elmo);
          os << cfg.seed << ',' << det.group_id << ',' << d << ',' << k << ',' << det.et_elmo
             << ',' << it->second << ',' << savings << "\n";
        }
      }
    }
  }
  if (!os) {
    throw std::runtime_error("failed writing et.csv in " + cfg.out_dir);
  }
}

void run_et(const ExperimentConfig& cfg) {
  cfg.validate();
  const Topology topo(cfg.topo);
  std::vector<EtDetail> detail;
  const std::vector<SavingsCell> cells =
      savings_curve(topo, cfg.d_list, cfg.k_list, cfg.n_groups, cfg.seed, cfg.kmeans_restarts,
                    cfg.kmeans_max_iter, &detail);
  write_et_csv(cfg, cells, detail);
}

void run_header(const ExperimentConfig& cfg) {
  cfg.validate();
  const Topology topo(cfg.topo);
  std::ofstream os = open_csv(cfg, "header.csv");
  os << "seed,group_id,d,k,elmo_bits,bert_mean_bits,bert_total_bits,reduction\n";
  for (uint64_t d : cfg.d_list) {
    struct Row {
      uint32_t group_id;
      uint64_t elmo_bits;
      double bert_mean;
      uint64_t bert_total;
    };
    std::map<uint32_t, std::vector<Row>> rows_by_k;
    for (uint32_t i = 0; i < cfg.n_groups; ++i) {
      const MulticastGroup grp = make_group(topo, cfg, d, i);
      const PacketHeader elmo = encode_elmo(topo, grp);
      const uint64_t elmo_down = downstream_header_bits(elmo, topo);
      if (elmo_down == 0) {
        std::cerr << "note: skipping group id=" << i << " d=" << d
                  << " (no downstream rules)\n";
        continue;
      }
      const auto vectors = destination_pod_vectors(topo, grp);
      for (uint32_t k : cfg.k_list) {
        const ClusterAssignment asg = cluster_group(cfg, vectors, d, i, k);
        const auto headers = encode_bert(topo, grp, asg);
        const HeaderStats stats = downstream_header_stats(headers, topo);
        rows_by_k[k].push_back({i, elmo_down, stats.mean_bits, stats.total_bits});
      }
    }
    for (uint32_t k : cfg.k_list) {
      const auto& rows = rows_by_k[k];
      if (rows.empty()) continue;
      double elmo_sum = 0, mean_sum = 0, total_sum = 0;
      for (const Row& row : rows) {
        elmo_sum += static_cast<double>(row.elmo_bits);
        mean_sum += row.bert_mean;
        total_sum += static_cast<double>(row.bert_total);
      }
      const double n = static_cast<double>(rows.size());
      const double elmo_mean = elmo_sum / n;
      const double bert_mean = mean_sum / n;
      os << cfg.seed << ",-1," << d << ',' << k << ',' << elmo_mean << ',' << bert_mean << ','
         << total_sum / n << ',' << 1.0 - bert_mean / elmo_mean << "\n";
      if (cfg.verbose) {
        for (const Row& row : rows) {
          os << cfg.seed << ',' << row.group_id << ',' << d << ',' << k << ',' << row.elmo_bits
             << ',' << row.bert_mean << ',' << row.bert_total << ','
             << 1.0 - row.bert_mean / static_cast<double>(row.elmo_bits) << "\n";
        }
      }
    }
  }
  if (!os) {
    throw std::runtime_error("failed writing header.csv in " + cfg.out_dir);
  }
}

struct LoadAccum {
  double mean = 0, stddev = 0, max = 0;
  uint32_t n = 0;

  void add(const LoadStat& stat) {
    mean += stat.mean;
    stddev += stat.stddev;
    max += stat.max;
    n += 1;
  }
};

void write_load_rows(std::ostream& os, const ExperimentConfig& cfg, uint64_t d, uint32_t k,
                     const char* scheme, uint32_t group_id, const LoadStat (*stats)[2]) {
  for (int layer = 0; layer < 3; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      const LoadStat& st = stats[layer][dir];
      os << cfg.seed << ',';
      if (group_id == kAggregateRowId) {
        os << "-1";
      } else {
        os << group_id;
      }
      os << ',' << d << ',' << k << ',' << scheme << ','
         << link_layer_name(static_cast<LinkLayer>(layer)) << ','
         << link_dir_name(static_cast<LinkDir>(dir)) << ',' << st.mean << ',' << st.stddev
         << ',' << st.max << "\n";
    }
  }
}

void dump_link_trace(const ExperimentConfig& cfg, const std::string& name,
                     const DeliveryReport& rep) {
  std::ofstream os = open_csv(cfg, name);
  os << "link_id,layer,direction,packets\n";
  for (int layer = 0; layer < 3; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      const auto& packets = rep.link_packets[layer][dir];
      for (uint64_t link = 0; link < packets.size(); ++link) {
        if (packets[link] == 0) continue;  // nonzero links only
        os << link << ',' << link_layer_name(static_cast<LinkLayer>(layer)) << ','
           << link_dir_name(static_cast<LinkDir>(dir)) << ',' << packets[link] << "\n";
      }
    }
  }
}

void run_load(const ExperimentConfig& cfg) {
  cfg.validate();
  const Topology topo(cfg.topo);
  std::ofstream os = open_csv(cfg, "linkload.csv");
  os << "seed,group_id,d,k,scheme,layer,direction,mean,std,max\n";
  for (uint64_t d : cfg.d_list) {
    LoadAccum elmo_acc[3][2];
    std::map<uint32_t, std::array<std::array<LoadAccum, 2>, 3>> bert_acc;
    std::ostringstream vs;
    vs << std::fixed << std::setprecision(6);
    for (uint32_t i = 0; i < cfg.n_groups; ++i) {
      const MulticastGroup grp = make_group(topo, cfg, d, i);
      const uint64_t sim_seed =
          derive_seed(cfg.seed, seed_stream::kSim, group_stream_index(d, i));
      const PacketHeader elmo = encode_elmo(topo, grp);
      const uint64_t elmo_bits = header_bits(elmo, topo);
      const std::vector<PacketHeader> elmo_headers{elmo};
      const DeliveryReport elmo_rep = simulate_delivery(topo, elmo_headers, grp.source, sim_seed);
      const LinkLoadReport elmo_loads =
          link_loads(elmo_rep, topo, cfg.flow_pkts, elmo_headers, elmo_bits);
      for (int layer = 0; layer < 3; ++layer) {
        for (int dir = 0; dir < 2; ++dir) {
          elmo_acc[layer][dir].add(elmo_loads.stats[layer][dir]);
        }
      }
      if (cfg.verbose) {
        write_load_rows(vs, cfg, d, 0, "elmo", i, elmo_loads.stats);
        if (i == 0) {
          dump_link_trace(cfg, "linktrace_elmo_d" + std::to_string(d) + ".csv", elmo_rep);
        }
      }
      const auto vectors = destination_pod_vectors(topo, grp);
      for (uint32_t k : cfg.k_list) {
        const ClusterAssignment asg = cluster_group(cfg, vectors, d, i, k);
        const auto headers = encode_bert(topo, grp, asg);
        const DeliveryReport rep = simulate_delivery(topo, headers, grp.source, sim_seed);
        const LinkLoadReport loads = link_loads(rep, topo, cfg.flow_pkts, headers, elmo_bits);
        auto& acc = bert_acc[k];
        for (int layer = 0; layer < 3; ++layer) {
          for (int dir = 0; dir < 2; ++dir) {
            acc[layer][dir].add(loads.stats[layer][dir]);
          }
        }
        if (cfg.verbose) {
          write_load_rows(vs, cfg, d, k, "bert", i, loads.stats);
          if (i == 0) {
            dump_link_trace(
                cfg, "linktrace_bert_d" + std::to_string(d) + "_k" + std::to_string(k) + ".csv",
                rep);
          }
        }
      }
    }
    LoadStat elmo_mean[3][2] = {};
    for (int layer = 0; layer < 3; ++layer) {
      for (int dir = 0; dir < 2; ++dir) {
        const LoadAccum& a = elmo_acc[layer][dir];
        if (a.n > 0) elmo_mean[layer][dir] = {a.mean / a.n, a.stddev / a.n, a.max / a.n};
      }
    }
    write_load_rows(os, cfg, d, 0, "elmo", kAggregateRowId, elmo_mean);
    for (uint32_t k : cfg.k_list) {
      LoadStat bert_mean[3][2] = {};
      const auto& acc = bert_acc[k];
      for (int layer = 0; layer < 3; ++layer) {
        for (int dir = 0; dir < 2; ++dir) {
          const LoadAccum& a = acc[layer][dir];
          if (a.n > 0) bert_mean[layer][dir] = {a.mean / a.n, a.stddev / a.n, a.max / a.n};
        }
      }
      write_load_rows(os, cfg, d, k, "bert", kAggregateRowId, bert_mean);
    }
    if (cfg.verbose) os << vs.str();
  }
  if (!os) {
    throw std::runtime_error("failed writing linkload.csv in " + cfg.out_dir);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  topo.validate();
  if (d_list.empty()) {
    throw std::invalid_argument("experiment requires a nonempty d list");
  }
  if (k_list.empty()) {
    throw std::invalid_argument("experiment requires a nonempty k list");
  }
  if (n_groups < 1) {
    throw std::invalid_argument("n_groups must be >= 1");
  }
  if (flow_pkts < 1) {
    throw std::invalid_argument("flow_pkts must be >= 1");
  }
  for (uint32_t k : k_list) {
    if (k < 1) {
      throw std::invalid_argument("k values must be >= 1");
    }
  }
}

void apply_preset(const std::string& name, ExperimentConfig& cfg) {
  if (name == "paper") {
    cfg.topo = paper_preset();
  } else if (name == "fig1") {
    cfg.topo = fig1_preset();
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (expected paper or fig1)");
  }
}

namespace {

std::vector<uint64_t> parse_u64_list(const std::string& value) {
  std::vector<uint64_t> out;
  std::istringstream is(value);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoull(tok));
  }
  return out;
}

}  // namespace

void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open config file " + path);
  }
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string text) {
      const auto begin = text.find_first_not_of(" \t");
      if (begin == std::string::npos) return std::string();
      const auto end = text.find_last_not_of(" \t");
      return text.substr(begin, end - begin + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "preset") {
        apply_preset(value, cfg);
      } else if (key == "n") {
        cfg.topo.n = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "m") {
        cfg.topo.m = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "l") {
        cfg.topo.l = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "s") {
        cfg.topo.s = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "u") {
        cfg.topo.u = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "d") {
        cfg.d_list = parse_u64_list(value);
      } else if (key == "k") {
        cfg.k_list.clear();
        for (uint64_t v : parse_u64_list(value)) {
          cfg.k_list.push_back(static_cast<uint32_t>(v));
        }
      } else if (key == "n_groups") {
        cfg.n_groups = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "flow_pkts") {
        cfg.flow_pkts = std::stoull(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "out") {
        cfg.out_dir = value;
      } else if (key == "verbose") {
        cfg.verbose = (value == "1" || value == "true" || value == "yes");
      } else if (key == "kmeans_restarts") {
        cfg.kmeans_restarts = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "kmeans_max_iter") {
        cfg.kmeans_max_iter = static_cast<uint32_t>(std::stoul(value));
      } else {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" +
                                 key + "'");
      }
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value for '" +
                               key + "': " + e.what());
    }
  }
}

void run_fig3(const ExperimentConfig& cfg) { run_et(cfg); }

void run_fig4(const ExperimentConfig& cfg) { run_et(cfg); }

void run_fig5(const ExperimentConfig& cfg) { run_header(cfg); }

void run_fig67(const ExperimentConfig& cfg) { run_load(cfg); }

void run_custom(const ExperimentConfig& cfg) {
  run_et(cfg);
  run_header(cfg);
  run_load(cfg);
}

Fig1Replay replay_fig1(uint64_t seed) {
  const Topology topo(fig1_preset());
  Fig1Replay out;
  out.group.id = 1;
  out.group.source = 0;
  out.group.members = {3, 13, 14, 18, 24, 25, 28};

  const auto vectors = destination_pod_vectors(topo, out.group);
  ClusterAssignment asg;
  asg.k_requested = 2;
  asg.k_effective = 2;
  asg.assignment = {{1, 0}, {2, 0}, {3, 1}};
  asg.centroids = {centroid({vectors.at(1), vectors.at(2)}), centroid({vectors.at(3)})};
  asg.cost = cluster_cost(asg, vectors);

  out.et_bert = et_bert(topo, out.group, asg);
  out.et_elmo_or = et_elmo(topo, out.group);
  out.et_elmo_stated = et_with_shared_rule(topo, out.group, BitVec::from_string("1111"));

  const uint64_t sim_seed = derive_seed(seed, seed_stream::kSim, 1);
  const std::vector<PacketHeader> elmo_headers{encode_elmo(topo, out.group)};
  const DeliveryReport elmo_rep = simulate_delivery(topo, elmo_headers, out.group.source, sim_seed);
  out.sim_extra_elmo = elmo_rep.extra_deliveries(out.group.members);

  const auto bert_headers = encode_bert(topo, out.group, asg);
  const DeliveryReport bert_rep = simulate_delivery(topo, bert_headers, out.group.source, sim_seed);
  out.sim_extra_bert = bert_rep.extra_deliveries(out.group.members);

  for (int layer = 0; layer < 3; ++layer) {
    out.elmo_upstream[layer] = elmo_rep.layer_packets[layer][static_cast<int>(LinkDir::Up)];
    out.bert_upstream[layer] = bert_rep.layer_packets[layer][static_cast<int>(LinkDir::Up)];
  }
  return out;
}

}  // namespace closmcast

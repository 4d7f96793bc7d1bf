#pragma once

#include <vector>

#include "fairassign/instance.hpp"

namespace fairassign {

/// Dinic max-flow on a small integer-capacity network.
class MaxFlowNetwork {
 public:
  explicit MaxFlowNetwork(int num_nodes);

  void add_edge(int from, int to, long long capacity);
  long long max_flow(int source, int sink);
  /// Flow currently carried by the k-th arc added via add_edge.
  long long flow_through(int k) const;

 private:
  struct Arc {
    int to;
    long long cap;
    int rev;  // index of the reverse arc in adj_[to]
  };
  bool bfs(int source, int sink);
  long long dfs(int v, int sink, long long pushed);

  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<int, int>> arc_ref_;  // add_edge order -> (node, index)
  std::vector<int> level_, iter_;
};

/// Size of a maximum many-to-one matching (students to schools, school j
/// holding up to C_j students) restricted to edges with rank <= max_rank.
/// With max_rank <= 0 all edges qualify.
long long max_matching_size(const Instance& inst, int max_rank);

/// One feasible integral assignment (edge index per student) respecting
/// all capacities, found by max flow.  Throws InfeasibleError when the
/// instance admits no full assignment.
std::vector<int> feasible_assignment(const Instance& inst);

}  // namespace fairassign

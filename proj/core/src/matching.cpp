#include "fairassign/matching.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace fairassign {

MaxFlowNetwork::MaxFlowNetwork(int num_nodes)
    : adj_(num_nodes), level_(num_nodes), iter_(num_nodes) {}

void MaxFlowNetwork::add_edge(int from, int to, long long capacity) {
  arc_ref_.push_back({from, static_cast<int>(adj_[from].size())});
  adj_[from].push_back({to, capacity, static_cast<int>(adj_[to].size())});
  adj_[to].push_back({from, 0, static_cast<int>(adj_[from].size()) - 1});
}

long long MaxFlowNetwork::flow_through(int k) const {
  const auto [node, idx] = arc_ref_[k];
  const Arc& a = adj_[node][idx];
  return adj_[a.to][a.rev].cap;  // reverse capacity accumulates the pushed flow
}

bool MaxFlowNetwork::bfs(int source, int sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<int> q;
  level_[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (const Arc& a : adj_[v])
      if (a.cap > 0 && level_[a.to] < 0) {
        level_[a.to] = level_[v] + 1;
        q.push(a.to);
      }
  }
  return level_[sink] >= 0;
}

long long MaxFlowNetwork::dfs(int v, int sink, long long pushed) {
  if (v == sink) return pushed;
  for (int& i = iter_[v]; i < static_cast<int>(adj_[v].size()); ++i) {
    Arc& a = adj_[v][i];
    if (a.cap <= 0 || level_[a.to] != level_[v] + 1) continue;
    const long long got = dfs(a.to, sink, std::min(pushed, a.cap));
    if (got > 0) {
      a.cap -= got;
      adj_[a.to][a.rev].cap += got;
      return got;
    }
  }
  return 0;
}

long long MaxFlowNetwork::max_flow(int source, int sink) {
  long long flow = 0;
  while (bfs(source, sink)) {
    std::fill(iter_.begin(), iter_.end(), 0);
    while (long long f = dfs(source, sink, std::numeric_limits<long long>::max())) flow += f;
  }
  return flow;
}

long long max_matching_size(const Instance& inst, int max_rank) {
  const int source = inst.n_students + inst.n_schools;
  const int sink = source + 1;
  MaxFlowNetwork net(inst.n_students + inst.n_schools + 2);
  for (int i = 0; i < inst.n_students; ++i) net.add_edge(source, i, 1);
  for (int j = 0; j < inst.n_schools; ++j)
    net.add_edge(inst.n_students + j, sink, inst.capacities[j]);
  for (const Edge& e : inst.edges)
    if (max_rank <= 0 || e.rank <= max_rank)
      net.add_edge(e.student, inst.n_students + e.school, 1);
  return net.max_flow(source, sink);
}

std::vector<int> feasible_assignment(const Instance& inst) {
  const int source = inst.n_students + inst.n_schools;
  const int sink = source + 1;
  MaxFlowNetwork net(inst.n_students + inst.n_schools + 2);
  for (int i = 0; i < inst.n_students; ++i) net.add_edge(source, i, 1);
  for (int j = 0; j < inst.n_schools; ++j)
    net.add_edge(inst.n_students + j, sink, inst.capacities[j]);
  const int base = inst.n_students + inst.n_schools;
  for (const Edge& e : inst.edges) net.add_edge(e.student, inst.n_students + e.school, 1);
  if (net.max_flow(source, sink) != inst.n_students)
    throw InfeasibleError("feasible_assignment: no full assignment within capacities");
  std::vector<int> assign(inst.n_students, -1);
  for (int e = 0; e < inst.num_edges(); ++e)
    if (net.flow_through(base + e) > 0) assign[inst.edges[e].student] = e;
  return assign;
}

}  // namespace fairassign

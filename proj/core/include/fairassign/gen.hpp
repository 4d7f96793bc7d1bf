#pragma once

#include <cstdint>
#include <vector>

#include "fairassign/constraints.hpp"
#include "fairassign/instance.hpp"

namespace fairassign {

/// Random fairness-benchmark instance: G(n,m) bipartite graph with
/// independent edges (probability p, default 3/m), per-school
/// popularity alpha_j ~ U[0,1], utilities u_ij = u^_ij * alpha_j with
/// u^_ij ~ U[0,1], g groups with membership probability beta_k ~
/// U[0,1], capacities minimized by calibrate_capacities.
///
/// PRNG: std::mt19937_64 seeded directly with `seed`; uniform doubles
/// are (x >> 11) * 2^-53 and integer draws use modulo reduction, so
/// output is byte-identical across platforms.
struct FairnessGenParams {
  int n = 1000;
  int m = 10;
  int g = 7;
  double p = -1.0;  // negative = 3/m
};

Instance gen_fairness_instance(std::uint64_t seed, const FairnessGenParams& params = {});

/// Minimal integral capacities making the instance fractionally
/// feasible: solves min C over the relaxation with a single shared
/// continuous capacity C for every school that has at least one edge
/// (edgeless schools get 0), then takes the ceiling.  On the default
/// benchmark parameters this yields the balanced C = n/m = 100.
/// Ignores `graph.capacities`.
std::vector<long long> calibrate_capacities(const Instance& graph);

struct RankGenResult {
  Instance instance;   // has_ranks = true; utilities 1/rank
  RankSignature rho;   // target signature
  std::vector<long long> matching_sizes;  // |M_t| for t = 1..r
};

/// Random ranking instance: same graph process as the fairness
/// generator (alpha drawn but unused), per-student ranks a uniform
/// random permutation of the neighborhood truncated at max_rank, target
/// signature built from the max matchings M_t on rank<=t edges.
RankGenResult gen_rank_instance(std::uint64_t seed, int n = 1000, int m = 10, int max_rank = 8);

}  // namespace fairassign

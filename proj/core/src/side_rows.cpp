#include "fairassign/side_rows.hpp"

#include <cmath>

namespace fairassign {

double SideRows::max_coeff() const {
  double q = 0.0;
  for (const auto& row : coeffs)
    for (auto [e, c] : row) q = std::max(q, std::abs(c));
  return q;
}

SideRows utility_side_rows(const Instance& inst, const GroupUtilities& target) {
  if (target.values.size() != static_cast<size_t>(inst.num_groups()))
    throw ValidationError("utility_side_rows: target size must equal group count");
  SideRows side;
  side.coeffs.resize(inst.num_groups());
  side.rhs = target.values;
  for (int k = 0; k < inst.num_groups(); ++k)
    for (int i : inst.groups[k])
      for (int e : inst.student_edges()[i])
        if (inst.edges[e].utility != 0.0)
          side.coeffs[k].push_back({e, inst.edges[e].utility});
  return side;
}

LpProblem build_assignment_lp(const Instance& inst, const SideRows& side, bool capacity_rows,
                              std::vector<RowInfo>* info) {
  if (info) info->clear();
  LpProblem p;
  for (int e = 0; e < inst.num_edges(); ++e) p.add_variable(0.0, 1.0, 0.0);
  for (int i = 0; i < inst.n_students; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int e : inst.student_edges()[i]) coeffs.push_back({e, 1.0});
    p.add_row(Relation::Equal, 1.0, std::move(coeffs));
    if (info) info->push_back({RowKind::Student, i});
  }
  if (capacity_rows)
    for (int j = 0; j < inst.n_schools; ++j) {
      std::vector<std::pair<int, double>> coeffs;
      for (int e : inst.school_edges()[j]) coeffs.push_back({e, 1.0});
      p.add_row(Relation::LessEqual, static_cast<double>(inst.capacities[j]), std::move(coeffs));
      if (info) info->push_back({RowKind::Capacity, j});
    }
  for (int l = 0; l < side.num_rows(); ++l) {
    p.add_row(Relation::GreaterEqual, side.rhs[l], side.coeffs[l]);
    if (info) info->push_back({RowKind::Side, l});
  }
  return p;
}

}  // namespace fairassign

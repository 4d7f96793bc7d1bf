#include "fairassign/instance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

namespace fairassign {

using nlohmann::json;

void Instance::validate() {
  if (n_students < 0) throw ValidationError("n_students: must be nonnegative");
  if (n_schools < 0) throw ValidationError("n_schools: must be nonnegative");
  if (static_cast<int>(capacities.size()) != n_schools)
    throw ValidationError("capacities: length must equal n_schools");
  for (int j = 0; j < n_schools; ++j)
    if (capacities[j] < 0)
      throw ValidationError("capacities[" + std::to_string(j) + "]: must be nonnegative");

  student_edges_.assign(n_students, {});
  school_edges_.assign(n_schools, {});
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges[e];
    if (ed.student < 0 || ed.student >= n_students)
      throw ValidationError("edges[" + std::to_string(e) + "].s: out of range");
    if (ed.school < 0 || ed.school >= n_schools)
      throw ValidationError("edges[" + std::to_string(e) + "].t: out of range");
    if (!(ed.utility >= 0.0) || !std::isfinite(ed.utility))
      throw ValidationError("edges[" + std::to_string(e) + "].u: must be finite and >= 0");
    if (has_ranks && ed.rank <= 0)
      throw ValidationError("edges[" + std::to_string(e) + "].rank: must be positive");
    if (!seen.insert({ed.student, ed.school}).second)
      throw ValidationError("edges[" + std::to_string(e) + "]: duplicate (s,t) pair");
    student_edges_[ed.student].push_back(e);
    school_edges_[ed.school].push_back(e);
  }
  for (int i = 0; i < n_students; ++i)
    if (student_edges_[i].empty())
      throw ValidationError("edges: student " + std::to_string(i) + " has no edges");

  groups_of_.assign(n_students, {});
  for (int k = 0; k < num_groups(); ++k) {
    std::vector<int>& grp = groups[k];
    std::sort(grp.begin(), grp.end());
    for (size_t a = 0; a < grp.size(); ++a) {
      if (grp[a] < 0 || grp[a] >= n_students)
        throw ValidationError("groups[" + std::to_string(k) + "]: student id out of range");
      if (a > 0 && grp[a] == grp[a - 1])
        throw ValidationError("groups[" + std::to_string(k) + "]: duplicate student id");
      groups_of_[grp[a]].push_back(k);
    }
  }
}

std::vector<long long> IntegralAssignment::loads(const Instance& inst) const {
  std::vector<long long> ld(inst.n_schools, 0);
  for (int j : school_of) ld[j] += 1;
  return ld;
}

namespace {

void check_dims(size_t got, size_t want, const char* what) {
  if (got != want)
    throw ValidationError(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                          ", expected " + std::to_string(want) + ")");
}

}  // namespace

GroupUtilities group_utilities(const Instance& inst, const FractionalAssignment& a) {
  check_dims(a.values.size(), inst.edges.size(), "FractionalAssignment.values");
  GroupUtilities u;
  u.values.assign(inst.num_groups(), 0.0);
  for (int e = 0; e < inst.num_edges(); ++e) {
    const Edge& ed = inst.edges[e];
    const double contrib = ed.utility * a.values[e];
    for (int k : inst.groups_of_student()[ed.student]) u.values[k] += contrib;
  }
  return u;
}

GroupUtilities group_utilities(const Instance& inst, const IntegralAssignment& a) {
  check_dims(a.school_of.size(), static_cast<size_t>(inst.n_students),
             "IntegralAssignment.school_of");
  GroupUtilities u;
  u.values.assign(inst.num_groups(), 0.0);
  for (int e = 0; e < inst.num_edges(); ++e) {
    const Edge& ed = inst.edges[e];
    if (a.school_of[ed.student] != ed.school) continue;
    for (int k : inst.groups_of_student()[ed.student]) u.values[k] += ed.utility;
  }
  return u;
}

void check_feasible(const Instance& inst, const FractionalAssignment& a) {
  check_dims(a.values.size(), inst.edges.size(), "FractionalAssignment.values");
  std::vector<double> srow(inst.n_students, 0.0), trow(inst.n_schools, 0.0);
  for (int e = 0; e < inst.num_edges(); ++e) {
    const double v = a.values[e];
    if (v < -kFeasTol || v > 1.0 + kFeasTol)
      throw ValidationError("values[" + std::to_string(e) + "]: outside [0,1]");
    srow[inst.edges[e].student] += v;
    trow[inst.edges[e].school] += v;
  }
  for (int i = 0; i < inst.n_students; ++i)
    if (std::abs(srow[i] - 1.0) > kFeasTol)
      throw ValidationError("student " + std::to_string(i) + ": row sum " +
                            std::to_string(srow[i]) + " != 1");
  if (!a.relaxed)
    for (int j = 0; j < inst.n_schools; ++j)
      if (trow[j] > static_cast<double>(inst.capacities[j]) + kFeasTol)
        throw ValidationError("school " + std::to_string(j) + ": capacity exceeded");
}

void check_assignment(const Instance& inst, const IntegralAssignment& a) {
  check_dims(a.school_of.size(), static_cast<size_t>(inst.n_students),
             "IntegralAssignment.school_of");
  std::set<std::pair<int, int>> pairs;
  for (const Edge& ed : inst.edges) pairs.insert({ed.student, ed.school});
  for (int i = 0; i < inst.n_students; ++i)
    if (!pairs.count({i, a.school_of[i]}))
      throw ValidationError("school_of[" + std::to_string(i) + "]: no such edge");
}

ViolationReport violation_report(const Instance& inst, const IntegralAssignment& a) {
  check_assignment(inst, a);
  ViolationReport rep;
  const auto loads = a.loads(inst);
  rep.overflow.resize(inst.n_schools);
  rep.overflow_beyond_one.resize(inst.n_schools);
  for (int j = 0; j < inst.n_schools; ++j) {
    rep.overflow[j] = std::max<long long>(0, loads[j] - inst.capacities[j]);
    rep.overflow_beyond_one[j] = std::max<long long>(0, loads[j] - inst.capacities[j] - 1);
    rep.total_overflow += rep.overflow[j];
    rep.total_overflow_beyond_one += rep.overflow_beyond_one[j];
  }
  return rep;
}

namespace {

json parse(const std::string& bytes) {
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded()) throw ValidationError("malformed JSON");
  return j;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ValidationError(where + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace

Instance read_instance(const std::string& bytes) {
  json j = parse(bytes);
  if (!j.is_object()) throw ValidationError("instance: expected a JSON object");
  reject_unknown(j, {"n_students", "n_schools", "capacities", "edges", "groups"}, "instance");
  for (const char* req : {"n_students", "n_schools", "capacities", "edges", "groups"})
    if (!j.contains(req)) throw ValidationError(std::string("instance: missing field '") + req + "'");

  Instance inst;
  if (!j["n_students"].is_number_integer()) throw ValidationError("n_students: expected integer");
  if (!j["n_schools"].is_number_integer()) throw ValidationError("n_schools: expected integer");
  inst.n_students = j["n_students"].get<int>();
  inst.n_schools = j["n_schools"].get<int>();
  if (!j["capacities"].is_array()) throw ValidationError("capacities: expected array");
  for (const auto& c : j["capacities"]) {
    if (!c.is_number_integer()) throw ValidationError("capacities: expected integers");
    inst.capacities.push_back(c.get<long long>());
  }
  if (!j["edges"].is_array()) throw ValidationError("edges: expected array");
  bool any_rank = false, all_rank = true;
  for (const auto& je : j["edges"]) {
    if (!je.is_object()) throw ValidationError("edges: expected objects");
    reject_unknown(je, {"s", "t", "u", "rank"}, "edge");
    for (const char* req : {"s", "t", "u"})
      if (!je.contains(req)) throw ValidationError(std::string("edge: missing field '") + req + "'");
    Edge e;
    e.student = je["s"].get<int>();
    e.school = je["t"].get<int>();
    e.utility = je["u"].get<double>();
    if (je.contains("rank")) {
      e.rank = je["rank"].get<int>();
      any_rank = true;
    } else {
      all_rank = false;
    }
    inst.edges.push_back(e);
  }
  if (any_rank && !all_rank)
    throw ValidationError("edges: rank must be present on all edges or none");
  inst.has_ranks = any_rank;
  if (!j["groups"].is_array()) throw ValidationError("groups: expected array");
  for (const auto& jg : j["groups"]) {
    if (!jg.is_array()) throw ValidationError("groups: expected arrays of student ids");
    inst.groups.push_back(jg.get<std::vector<int>>());
  }
  inst.validate();
  return inst;
}

std::string write_instance(const Instance& inst) {
  json j;
  j["n_students"] = inst.n_students;
  j["n_schools"] = inst.n_schools;
  j["capacities"] = inst.capacities;
  json edges = json::array();
  for (const Edge& e : inst.edges) {
    json je = {{"s", e.student}, {"t", e.school}, {"u", e.utility}};
    if (inst.has_ranks) je["rank"] = e.rank;
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  j["groups"] = inst.groups;
  return j.dump();
}

IntegralAssignment read_assignment(const std::string& bytes, const Instance& inst) {
  json j = parse(bytes);
  if (!j.is_object() || !j.contains("school_of"))
    throw ValidationError("assignment: missing field 'school_of'");
  reject_unknown(j, {"school_of"}, "assignment");
  IntegralAssignment a;
  a.school_of = j["school_of"].get<std::vector<int>>();
  check_assignment(inst, a);
  return a;
}

std::string write_assignment(const IntegralAssignment& a) {
  json j;
  j["school_of"] = a.school_of;
  return j.dump();
}

}  // namespace fairassign

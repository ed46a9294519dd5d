#include "isec/report.hpp"

#include <algorithm>
#include <sstream>

namespace isec {

namespace {

json point_id(const FiniteMetricSpace& sp, PointIndex x) {
  return sp.points()[x];
}

json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

void flatten(const json& node, const std::string& path, std::ostream& os) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items())
      flatten(value, path.empty() ? key : path + "." + key, os);
  } else if (node.is_array()) {
    // Short arrays of scalars read better inline.
    const bool scalar_row =
        std::all_of(node.begin(), node.end(),
                    [](const json& e) { return e.is_primitive(); });
    if (scalar_row) {
      os << path << " = " << node.dump() << "\n";
    } else {
      for (std::size_t i = 0; i < node.size(); ++i)
        flatten(node[i], path + "[" + std::to_string(i) + "]", os);
    }
  } else {
    os << path << " = " << node.dump() << "\n";
  }
}

}  // namespace

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Verified:
      return 0;
    case Verdict::Falsified:
      return 2;
    case Verdict::InputError:
      return 1;
  }
  return 1;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Verified:
      return "verified";
    case Verdict::Falsified:
      return "falsified";
    case Verdict::InputError:
      return "input-error";
  }
  return "input-error";
}

json constants_json(QIConstants c) { return json{{"L", c.L}, {"M", c.M}}; }

json violation_json(const PairViolation& v, const Fibration& fib) {
  return json{{"y1", fib.label(v.y1)},
              {"y2", fib.label(v.y2)},
              {"graph_dist", v.a},
              {"fiber_dist", v.b}};
}

json frontier_json(const Frontier& f) {
  json segments = json::array();
  for (const auto& seg : f.segments) {
    json s{{"L_from", seg.L_from}, {"a", seg.a}, {"b", seg.b}};
    if (seg.y1 != kNoPair) {
      s["y1"] = seg.y1;
      s["y2"] = seg.y2;
    }
    segments.push_back(std::move(s));
  }
  json vertices = json::array();
  for (const auto& [L, M] : f.vertices())
    vertices.push_back(json::array({L, M}));
  return json{{"segments", std::move(segments)},
              {"vertices", std::move(vertices)},
              {"L_flat", optional_number(f.L_flat)}};
}

json minimal_L_json(const MinimalLT<double>& m, const Fibration& fib) {
  json out{{"L", optional_number(m.L)}};
  if (m.blocking)
    out["blocking"] = json{{"y1", fib.label(m.blocking->first)},
                           {"y2", fib.label(m.blocking->second)}};
  else
    out["blocking"] = nullptr;
  return out;
}

json transfer_json(const TransferCheckReport& r, const Fibration&) {
  return json{{"hypothesis_intrinsic_ok", r.hypothesis_intrinsic_ok},
              {"hypothesis_relative_ok", r.hypothesis_relative_ok},
              {"forward_constants", constants_json(r.forward)},
              {"forward_ok", r.forward_ok},
              {"hypothesis_pointed_ok", r.hypothesis_pointed_ok},
              {"backward_constants", constants_json(r.backward)},
              {"backward_ok", r.backward_ok}};
}

json equivalence_json(const GlobalEquivalenceReport& r, const Fibration& fib) {
  json per_point = json::array();
  for (const auto& p : r.per_point)
    per_point.push_back(json{{"x", point_id(fib.space(), p.x)},
                             {"rel_L", p.rel_L},
                             {"rel_M", p.rel_M},
                             {"pointed_L", p.pointed_L},
                             {"pointed_M", p.pointed_M},
                             {"forward_ok", p.forward_ok},
                             {"backward_ok", p.backward_ok}});
  return json{{"relative_all_feasible", r.relative_all_feasible},
              {"intrinsic_feasible", r.intrinsic_feasible},
              {"sides_agree", r.sides_agree},
              {"family_constants", constants_json(r.family)},
              {"relative_constants",
               json{{"L", r.relative_L}, {"M", r.relative_M}}},
              {"intrinsic_constants",
               json{{"L", r.intrinsic_L}, {"M", r.intrinsic_M}}},
              {"forward_all_ok", r.forward_all_ok},
              {"backward_all_ok", r.backward_all_ok},
              {"per_point", std::move(per_point)}};
}

json relation_json(const StrongRelationReport& r, const Fibration& fib) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back(json{{"i", p.i},
                         {"j", p.j},
                         {"related", p.related},
                         {"L", p.L},
                         {"M", p.M},
                         {"M_at_1", p.M_at_1}});
  json chains = json::array();
  for (const auto& c : r.chains)
    chains.push_back(json{{"i", c.i},
                          {"j", c.j},
                          {"k", c.k},
                          {"chained_related", c.chained_related},
                          {"chained_L", c.chained_L},
                          {"chained_M", c.chained_M},
                          {"min_L_sufficed", c.min_L_sufficed}});
  return json{{"base_label", fib.label(r.y_hat)},
              {"reflexive_ok", r.reflexive_ok},
              {"symmetric_ok", r.symmetric_ok},
              {"transitive_ok", r.transitive_ok},
              {"pairs", std::move(pairs)},
              {"chains", std::move(chains)}};
}

json homogeneity_json(const HomogeneityResult& r, const FiniteMetricSpace& sp) {
  json out{{"feasible", r.feasible}, {"C", r.C}};
  if (r.witness_x) {
    out["witness"] = json{{"x", point_id(sp, *r.witness_x)},
                          {"x_prime", point_id(sp, *r.witness_x_prime)},
                          {"r", *r.witness_r},
                          {"mass_x", r.witness_mass_x},
                          {"mass_x_prime", r.witness_mass_x_prime}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

json inclusion_json(const BallInclusionReport& r, const FiniteMetricSpace& sp,
                    const Fibration& fib) {
  json out{{"ok", r.ok}, {"comparisons", r.comparisons}};
  if (r.failure) {
    out["failure"] =
        json{{"p", point_id(sp, r.failure->p)},
             {"r", r.failure->r},
             {"label", fib.label(r.failure->label)},
             {"side", r.failure->which == 0 ? "left" : "right"}};
  } else {
    out["failure"] = nullptr;
  }
  return out;
}

json ad_estimate_json(const AdRegularityEstimate& r, const Fibration& fib) {
  json out{{"Q", r.Q},
           {"r0", r.r0},
           {"c1", r.c1},
           {"c2", r.c2},
           {"positive", r.positive},
           {"best_fit_Q", optional_number(r.best_fit_Q)}};
  if (r.zero_witness_y)
    out["zero_witness"] = json{{"y", fib.label(*r.zero_witness_y)},
                               {"r", *r.zero_witness_r}};
  else
    out["zero_witness"] = nullptr;
  return out;
}

json regularity_json(const RegularityReport& r, const Fibration& fib) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"y", fib.label(c.y)},
                          {"r", c.r},
                          {"mass", c.mass},
                          {"lower", c.lower},
                          {"upper", c.upper},
                          {"vacuous", c.vacuous},
                          {"lower_ok", c.lower_ok},
                          {"upper_ok", c.upper_ok}});
  return json{{"source",
               json{{"Q", r.source.Q},
                    {"r0", r.source.r0},
                    {"C", r.source.C},
                    {"c1", r.source.c1},
                    {"c2", r.source.c2},
                    {"feasible", r.source.feasible},
                    {"best_fit_Q", optional_number(r.source.best_fit_Q)}}},
              {"L", r.L},
              {"M", r.M},
              {"c3", r.c3},
              {"c4", r.c4},
              {"r_grid", r.r_grid},
              {"checks", std::move(checks)},
              {"all_ok", r.all_ok},
              {"vacuous_count", r.vacuous_count}};
}

json convexity_json(const ConvexityCheck& c) {
  return json{{"predicted_constants", constants_json(c.predicted)},
              {"hypothesis_ok", c.hypothesis_ok},
              {"conclusion_ok", c.conclusion_ok}};
}

json fiber_identity_json(const FiberIdentityCheck& c) {
  return json{{"via_base", c.via_base},
              {"via_rescaled", c.via_rescaled},
              {"equal", c.equal}};
}

json report_envelope(const std::string& command, Verdict v, json inputs,
                     json result) {
  return json{{"command", command},
              {"verdict", verdict_name(v)},
              {"exit_code", exit_code(v)},
              {"inputs", std::move(inputs)},
              {"result", std::move(result)}};
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

std::string render_text(const json& report) {
  std::ostringstream os;
  flatten(report, "", os);
  return os.str();
}

}  // namespace isec

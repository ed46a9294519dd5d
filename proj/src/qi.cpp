#include "isec/qi.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <type_traits>

#include "isec/parallel.hpp"

namespace isec {

namespace {

template <class S>
S dist_to_fiber(const FiniteMetricSpace& x_space, PointIndex x,
                std::span<const PointIndex> fiber) {
  if constexpr (std::is_same_v<S, double>)
    return x_space.dist_to_set(x, fiber);
  else
    return x_space.dist_to_set_exact(x, fiber);
}

template <class S>
std::vector<PairConstraint<S>> section_constraints_impl(const Section& phi) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  const std::size_t n = fib.label_count();
  std::vector<PairConstraint<S>> out(n * n);
  parallel_chunks(n, thread_budget(),
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t y1 = begin; y1 < end; ++y1) {
                      const PointIndex p1 = phi.point_of(y1);
                      for (std::size_t y2 = 0; y2 < n; ++y2) {
                        PairConstraint<S>& c = out[y1 * n + y2];
                        c.a = sp.dist_s<S>(p1, phi.point_of(y2));
                        c.b = dist_to_fiber<S>(sp, p1, fib.fiber(y2));
                        c.y1 = y1;
                        c.y2 = y2;
                      }
                    }
                  });
  return out;
}

template <class S>
S max_slack(std::span<const PairConstraint<S>> cons, const S& L) {
  S best(0);
  for (const auto& c : cons) best = std::max(best, pair_slack(c.a, c.b, L));
  return best;
}

std::optional<PairViolation> violation_in(
    std::span<const PairConstraint<double>> cons, QIConstants c) {
  for (const auto& pc : cons)
    if (pair_violates(pc.a, pc.b, c.L, c.M))
      return PairViolation{pc.y1, pc.y2, pc.a, pc.b};
  return std::nullopt;
}

void require_shared_base(const Section& phi, const Section& psi,
                         LabelIndex y_hat) {
  if (phi.fibration_ptr() != psi.fibration_ptr())
    throw PreconditionError("sections live on different fibrations");
  if (y_hat >= phi.label_count())
    throw InstanceError("base label index out of range");
  if (phi.point_of(y_hat) != psi.point_of(y_hat)) {
    const Fibration& fib = phi.fibration();
    throw PreconditionError(
        "sections disagree at base label " + fib.label_key(y_hat) + ": " +
        canonical_key(fib.space().point(phi.point_of(y_hat))) + " vs " +
        canonical_key(fib.space().point(psi.point_of(y_hat))));
  }
}

struct AdmissiblePair {
  double L;
  double M;
};

AdmissiblePair admissible_from(std::span<const PairConstraint<double>> cons) {
  const Frontier f = build_frontier(
      std::vector<PairConstraint<double>>(cons.begin(), cons.end()));
  const double L = std::max(1.0, snap_constant_up(f.L_flat.value_or(1.0)));
  const double M = std::max(0.0, snap_constant_up(max_slack(cons, L)));
  return {L, M};
}

}  // namespace

// Admissible constants get a little breathing room: rounded outward onto
// the 1/1024 lattice, every derived transfer constant stays exactly
// representable on dyadic instances and the follow-up inequality checks are
// free of rounding surprises.
double snap_constant_up(double v) { return std::ceil(v * 1024.0) / 1024.0; }

// ---- envelope --------------------------------------------------------------

FrontierExact build_frontier(std::vector<PairConstraint<Rational>> cons) {
  for (const auto& c : cons)
    if (c.b < 0) throw DomainError("constraint with negative fiber distance");
  // Constraints with a <= 0 sit at or below the zero clip for every L >= 1.
  std::erase_if(cons,
                [](const PairConstraint<Rational>& c) { return c.a <= 0; });
  FrontierExact f;
  if (cons.empty()) {
    f.segments.push_back({Rational(1), Rational(0), Rational(0)});
    f.L_flat = Rational(1);
    return f;
  }

  std::sort(cons.begin(), cons.end(), [](const auto& u, const auto& v) {
    if (u.b != v.b) return u.b > v.b;
    if (u.a != v.a) return u.a > v.a;
    return std::tie(u.y1, u.y2) < std::tie(v.y1, v.y2);
  });
  std::vector<PairConstraint<Rational>> lines;
  for (auto& c : cons)
    if (lines.empty() || lines.back().b != c.b) lines.push_back(std::move(c));

  // Upper hull over the lines a - b*L, slopes ascending (b descending).
  // The middle of three is dropped when its window [cross(l1,l2),
  // cross(l2,l3)) is empty.
  std::vector<PairConstraint<Rational>> hull;
  for (auto& l : lines) {
    while (hull.size() >= 2) {
      const auto& l1 = hull[hull.size() - 2];
      const auto& l2 = hull[hull.size() - 1];
      if ((l1.a - l2.a) * (l2.b - l.b) >= (l2.a - l.a) * (l1.b - l2.b))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(std::move(l));
  }

  // Drop leading pieces whose validity window ends at or before L = 1.
  std::size_t first = 0;
  while (first + 1 < hull.size() &&
         hull[first].a - hull[first + 1].a <=
             hull[first].b - hull[first + 1].b)
    ++first;

  std::vector<FrontierSegment<Rational>> raw;
  Rational L_from = 1;
  for (std::size_t i = first; i < hull.size(); ++i) {
    raw.push_back({L_from, hull[i].a, hull[i].b, hull[i].y1, hull[i].y2});
    if (i + 1 < hull.size())
      L_from = (hull[i].a - hull[i + 1].a) / (hull[i].b - hull[i + 1].b);
  }

  // Clip at zero: keep pieces while positive, then emit the flat tail.
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& s = raw[i];
    if (s.a - s.b * s.L_from <= 0) {
      f.L_flat = s.L_from;
      break;
    }
    if (s.b == 0) {
      // Positive constant tail: no finite L reaches zero.
      f.segments.push_back(s);
      break;
    }
    const Rational zero_at = s.a / s.b;
    f.segments.push_back(s);
    if (i + 1 == raw.size() || zero_at < raw[i + 1].L_from) {
      f.L_flat = zero_at;
      break;
    }
  }
  if (f.L_flat)
    f.segments.push_back({*f.L_flat, Rational(0), Rational(0)});
  return f;
}

Frontier build_frontier(const std::vector<PairConstraint<double>>& cons) {
  std::vector<PairConstraint<Rational>> lifted;
  lifted.reserve(cons.size());
  for (const auto& c : cons)
    lifted.push_back({Rational(c.a), Rational(c.b), c.y1, c.y2});
  FrontierExact fe = build_frontier(std::move(lifted));
  Frontier f;
  f.segments.reserve(fe.segments.size());
  for (const auto& s : fe.segments)
    f.segments.push_back(
        {to_double(s.L_from), to_double(s.a), to_double(s.b), s.y1, s.y2});
  if (fe.L_flat) f.L_flat = to_double(*fe.L_flat);
  return f;
}

namespace {

template <class S>
MinimalLT<S> minimal_L_walk(const FrontierT<S>& f, const S& M) {
  if (M < S(0)) throw DomainError("minimal_L requires M >= 0");
  for (std::size_t i = 0; i < f.segments.size(); ++i) {
    const auto& s = f.segments[i];
    if (!(pair_slack(s.a, s.b, s.L_from) > M)) return {s.L_from, {}};
    if (s.b == S(0))
      return {std::nullopt, std::make_pair(s.y1, s.y2)};
    const S crossing = (s.a - M) / s.b;
    if (i + 1 == f.segments.size() || crossing < f.segments[i + 1].L_from)
      return {crossing, {}};
  }
  throw Error("frontier walk exhausted without an answer");
}

}  // namespace

MinimalLT<Rational> minimal_L_of(const FrontierExact& f, const Rational& M) {
  return minimal_L_walk<Rational>(f, M);
}

MinimalLT<double> minimal_L_of(const Frontier& f, double M) {
  return minimal_L_walk<double>(f, M);
}

// ---- constraint families ---------------------------------------------------

std::vector<PairConstraint<double>> section_constraints(const Section& phi) {
  return section_constraints_impl<double>(phi);
}

std::vector<PairConstraint<Rational>> section_constraints_exact(
    const Section& phi) {
  return section_constraints_impl<Rational>(phi);
}

std::vector<PairConstraint<double>> relative_constraints(const Section& phi,
                                                         const Section& psi,
                                                         LabelIndex y_hat) {
  require_shared_base(phi, psi, y_hat);
  const FiniteMetricSpace& sp = phi.space();
  const PointIndex base = psi.point_of(y_hat);
  const std::size_t n = phi.label_count();
  std::vector<PairConstraint<double>> out(n);
  for (std::size_t y = 0; y < n; ++y) {
    out[y].a = sp.dist(phi.point_of(y), psi.point_of(y));
    out[y].b = sp.dist(base, psi.point_of(y));
    out[y].y1 = y;
    out[y].y2 = y;
  }
  return out;
}

std::vector<PairConstraint<double>> strong_relative_constraints(
    const Section& phi, const Section& psi, LabelIndex y_hat) {
  require_shared_base(phi, psi, y_hat);
  const FiniteMetricSpace& sp = phi.space();
  const PointIndex base = psi.point_of(y_hat);
  const std::size_t n = phi.label_count();
  std::vector<PairConstraint<double>> out(n);
  for (std::size_t y = 0; y < n; ++y) {
    out[y].a = sp.dist(phi.point_of(y), psi.point_of(y));
    out[y].b = std::min(sp.dist(base, psi.point_of(y)),
                        sp.dist(base, phi.point_of(y)));
    out[y].y1 = y;
    out[y].y2 = y;
  }
  return out;
}

std::vector<PairConstraint<double>> pointed_constraints(const Section& phi,
                                                        PointIndex x0) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  if (x0 >= sp.size()) throw InstanceError("base point index out of range");
  const std::size_t n = fib.label_count();
  std::vector<PairConstraint<double>> out(n);
  for (std::size_t y = 0; y < n; ++y) {
    out[y].a = sp.dist(x0, phi.point_of(y));
    out[y].b = sp.dist_to_set(x0, fib.fiber(y));
    out[y].y1 = y;
    out[y].y2 = y;
  }
  return out;
}

// ---- predicates ------------------------------------------------------------

QIConstants::QIConstants(double L_, double M_) : L(L_), M(M_) {
  if (!(L >= 1.0) || !(M >= 0.0))
    throw DomainError("admissible constants require L >= 1 and M >= 0");
}

bool is_qi_section(const Section& phi, QIConstants c) {
  return !qi_violation(phi, c).has_value();
}

std::optional<PairViolation> qi_violation(const Section& phi, QIConstants c) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  const std::size_t n = fib.label_count();
  for (std::size_t y1 = 0; y1 < n; ++y1) {
    const PointIndex p1 = phi.point_of(y1);
    for (std::size_t y2 = 0; y2 < n; ++y2) {
      const double a = sp.dist(p1, phi.point_of(y2));
      const double b = sp.dist_to_set(p1, fib.fiber(y2));
      if (pair_violates(a, b, c.L, c.M)) return PairViolation{y1, y2, a, b};
    }
  }
  return std::nullopt;
}

bool is_qi_section_exact(const Section& phi, const Rational& L,
                         const Rational& M) {
  if (L < 1 || M < 0)
    throw DomainError("admissible constants require L >= 1 and M >= 0");
  const auto cons = section_constraints_exact(phi);
  for (const auto& c : cons)
    if (pair_violates(c.a, c.b, L, M)) return false;
  return true;
}

bool is_relative_qi(const Section& phi, const Section& psi, LabelIndex y_hat,
                    QIConstants c) {
  return !relative_violation(phi, psi, y_hat, c).has_value();
}

std::optional<PairViolation> relative_violation(const Section& phi,
                                                const Section& psi,
                                                LabelIndex y_hat,
                                                QIConstants c) {
  return violation_in(relative_constraints(phi, psi, y_hat), c);
}

bool is_strong_relative_qi(const Section& phi, const Section& psi,
                           LabelIndex y_hat, QIConstants c) {
  return !strong_relative_violation(phi, psi, y_hat, c).has_value();
}

std::optional<PairViolation> strong_relative_violation(const Section& phi,
                                                       const Section& psi,
                                                       LabelIndex y_hat,
                                                       QIConstants c) {
  return violation_in(strong_relative_constraints(phi, psi, y_hat), c);
}

bool satisfies_pointed_bound(const Section& phi, PointIndex x0,
                             QIConstants c) {
  return !pointed_violation(phi, x0, c).has_value();
}

std::optional<PairViolation> pointed_violation(const Section& phi,
                                               PointIndex x0, QIConstants c) {
  return violation_in(pointed_constraints(phi, x0), c);
}

// ---- optimal constants -----------------------------------------------------

double minimal_M(const Section& phi, double L) {
  if (!(L >= 1.0)) throw DomainError("minimal_M requires L >= 1");
  const auto cons = section_constraints(phi);
  return max_slack<double>(cons, L);
}

Rational minimal_M_exact(const Section& phi, const Rational& L) {
  if (L < 1) throw DomainError("minimal_M requires L >= 1");
  const auto cons = section_constraints_exact(phi);
  return max_slack<Rational>(cons, L);
}

MinimalLT<double> minimal_L(const Section& phi, double M) {
  return minimal_L_of(qi_frontier(phi), M);
}

MinimalLT<Rational> minimal_L_exact(const Section& phi, const Rational& M) {
  return minimal_L_of(qi_frontier_exact(phi), M);
}

Frontier qi_frontier(const Section& phi) {
  return build_frontier(section_constraints(phi));
}

FrontierExact qi_frontier_exact(const Section& phi) {
  return build_frontier(section_constraints_exact(phi));
}

Frontier relative_frontier(const Section& phi, const Section& psi,
                           LabelIndex y_hat) {
  return build_frontier(relative_constraints(phi, psi, y_hat));
}

Frontier strong_relative_frontier(const Section& phi, const Section& psi,
                                  LabelIndex y_hat) {
  return build_frontier(strong_relative_constraints(phi, psi, y_hat));
}

Frontier pointed_frontier(const Section& phi, PointIndex x0) {
  return build_frontier(pointed_constraints(phi, x0));
}

// ---- cone reformulation ----------------------------------------------------

bool in_cone_R(const Fibration& fib, PointIndex x, PointIndex x_prime,
               QIConstants c) {
  const FiniteMetricSpace& sp = fib.space();
  if (x >= sp.size() || x_prime >= sp.size())
    throw InstanceError("cone test on a point index out of range");
  const double a = sp.dist(x_prime, x);
  const double b = sp.dist_to_set(x_prime, fib.fiber(fib.fiber_of(x)));
  return pair_violates(a, b, c.L, c.M);
}

bool graph_avoids_cones(const Section& phi, QIConstants c) {
  return !cone_witness(phi, c).has_value();
}

std::optional<std::pair<PointIndex, PointIndex>> cone_witness(
    const Section& phi, QIConstants c) {
  const Fibration& fib = phi.fibration();
  const std::size_t n = fib.label_count();
  for (std::size_t y1 = 0; y1 < n; ++y1)
    for (std::size_t y2 = 0; y2 < n; ++y2) {
      const PointIndex x = phi.point_of(y2);
      const PointIndex x_prime = phi.point_of(y1);
      if (in_cone_R(fib, x, x_prime, c)) return std::make_pair(x, x_prime);
    }
  return std::nullopt;
}

// ---- constant transfer -----------------------------------------------------

QIConstants transfer_constants_forward(double L, double L1, double M,
                                       double M1) {
  if (!(L >= 1.0) || !(L1 >= 1.0) || !(M >= 0.0) || !(M1 >= 0.0))
    throw DomainError("transfer requires L, L1 >= 1 and M, M1 >= 0");
  return QIConstants(L * (L1 + 1.0), M1 + M);
}

QIConstants transfer_constants_backward(double L2, double M2) {
  if (!(L2 >= 1.0) || !(M2 >= 0.0))
    throw DomainError("transfer requires L2 >= 1 and M2 >= 0");
  return QIConstants(L2 + 1.0, M2);
}

TransferCheckReport transfer_check(const Section& phi, const Section& phi0,
                                   LabelIndex y0, double L, double L1,
                                   double M, double M1, double L2, double M2) {
  require_shared_base(phi, phi0, y0);
  const PointIndex x0 = phi0.point_of(y0);
  TransferCheckReport rep;
  rep.hypothesis_intrinsic_ok = is_qi_section(phi0, QIConstants(L, M));
  rep.hypothesis_relative_ok =
      is_relative_qi(phi, phi0, y0, QIConstants(L1, M1));
  rep.forward = transfer_constants_forward(L, L1, M, M1);
  rep.forward_ok = satisfies_pointed_bound(phi, x0, rep.forward);
  rep.hypothesis_pointed_ok =
      satisfies_pointed_bound(phi, x0, QIConstants(L2, M2));
  rep.backward = transfer_constants_backward(L2, M2);
  rep.backward_ok = is_relative_qi(phi, phi0, y0, rep.backward);
  return rep;
}

// ---- family equivalence ----------------------------------------------------

GlobalEquivalenceReport global_equivalence_check(
    const Section& phi, const std::map<PointIndex, Section>& family,
    QIConstants c) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  const std::size_t n = fib.label_count();

  for (std::size_t y = 0; y < n; ++y) {
    const PointIndex x = phi.point_of(y);
    const auto it = family.find(x);
    if (it == family.end())
      throw PreconditionError("family misses graph point " +
                              canonical_key(sp.point(x)));
    const Section& psi = it->second;
    if (psi.fibration_ptr() != phi.fibration_ptr())
      throw PreconditionError("family sections live on another fibration");
    if (psi.point_of(y) != x)
      throw PreconditionError("family section at " +
                              canonical_key(sp.point(x)) +
                              " does not pass through it");
    if (!is_qi_section(psi, c))
      throw PreconditionError("family section at " +
                              canonical_key(sp.point(x)) +
                              " fails the declared constants");
  }

  GlobalEquivalenceReport rep;
  rep.family = c;

  std::vector<PairConstraint<double>> combined;
  combined.reserve(n * n);
  rep.per_point.reserve(n);
  rep.forward_all_ok = true;
  rep.backward_all_ok = true;
  for (std::size_t y = 0; y < n; ++y) {
    const PointIndex x = phi.point_of(y);
    const Section& psi = family.at(x);
    const auto rel = relative_constraints(phi, psi, y);
    combined.insert(combined.end(), rel.begin(), rel.end());

    GlobalEquivalencePoint p;
    p.x = x;
    const AdmissiblePair rel_c = admissible_from(rel);
    p.rel_L = rel_c.L;
    p.rel_M = rel_c.M;
    const auto pointed = pointed_constraints(phi, x);
    const AdmissiblePair pt_c = admissible_from(pointed);
    p.pointed_L = pt_c.L;
    p.pointed_M = pt_c.M;

    const QIConstants fwd =
        transfer_constants_forward(c.L, p.rel_L, c.M, p.rel_M);
    p.forward_ok = satisfies_pointed_bound(phi, x, fwd);
    const QIConstants bwd =
        transfer_constants_backward(p.pointed_L, p.pointed_M);
    p.backward_ok = is_relative_qi(phi, psi, y, bwd);

    rep.forward_all_ok = rep.forward_all_ok && p.forward_ok;
    rep.backward_all_ok = rep.backward_all_ok && p.backward_ok;
    rep.per_point.push_back(p);
  }

  // Side (1): one constant pair serving every graph point at once, from the
  // combined envelope; verified, not assumed.
  const AdmissiblePair rel_all = admissible_from(combined);
  rep.relative_L = rel_all.L;
  rep.relative_M = rel_all.M;
  rep.relative_all_feasible = true;
  for (std::size_t y = 0; y < n; ++y) {
    const Section& psi = family.at(phi.point_of(y));
    rep.relative_all_feasible =
        rep.relative_all_feasible &&
        is_relative_qi(phi, psi, y,
                       QIConstants(rep.relative_L, rep.relative_M));
  }

  // Side (2): phi's own frontier, verified the same way.
  const auto own = section_constraints(phi);
  const AdmissiblePair own_c = admissible_from(own);
  rep.intrinsic_L = own_c.L;
  rep.intrinsic_M = own_c.M;
  rep.intrinsic_feasible =
      is_qi_section(phi, QIConstants(rep.intrinsic_L, rep.intrinsic_M));

  rep.sides_agree = rep.relative_all_feasible == rep.intrinsic_feasible;
  return rep;
}

// ---- equivalence relation --------------------------------------------------

StrongRelationReport strong_relation_check(const std::vector<Section>& sections,
                                           LabelIndex y_hat) {
  if (sections.empty())
    throw PreconditionError("relation check needs at least one section");
  const auto& fib0 = sections.front().fibration_ptr();
  if (y_hat >= sections.front().label_count())
    throw InstanceError("base label index out of range");
  const PointIndex x_hat = sections.front().point_of(y_hat);
  for (const auto& s : sections) {
    if (s.fibration_ptr() != fib0)
      throw PreconditionError("sections live on different fibrations");
    if (s.point_of(y_hat) != x_hat)
      throw PreconditionError("sections disagree at base label " +
                              fib0->label_key(y_hat));
  }

  StrongRelationReport rep;
  rep.y_hat = y_hat;
  const std::size_t n = sections.size();
  rep.pairs.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto cons =
          strong_relative_constraints(sections[i], sections[j], y_hat);
      const Frontier f = build_frontier(cons);
      RelationPair p;
      p.i = i;
      p.j = j;
      p.L = f.L_flat.value_or(1.0);
      p.M = max_slack<double>(cons, p.L);
      p.M_at_1 = max_slack<double>(cons, 1.0);
      p.related = !violation_in(cons, QIConstants(p.L, p.M)).has_value();
      rep.pairs.push_back(p);
    }

  auto pair_at = [&](std::size_t i, std::size_t j) -> const RelationPair& {
    return rep.pairs[i * n + j];
  };
  rep.reflexive_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const RelationPair& p = pair_at(i, i);
    rep.reflexive_ok =
        rep.reflexive_ok && p.related && p.L == 1.0 && p.M == 0.0;
  }
  rep.symmetric_ok = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      rep.symmetric_ok =
          rep.symmetric_ok && pair_at(i, j).related == pair_at(j, i).related;

  rep.transitive_ok = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        RelationChain ch;
        ch.i = i;
        ch.j = j;
        ch.k = k;
        const RelationPair& left = pair_at(i, j);
        const RelationPair& right = pair_at(j, k);
        const RelationPair& chained = pair_at(i, k);
        ch.chained_related = left.related && right.related && chained.related;
        ch.chained_L = chained.L;
        ch.chained_M = chained.M;
        ch.min_L_sufficed = is_strong_relative_qi(
            sections[i], sections[k], y_hat,
            QIConstants(std::min(left.L, right.L), left.M + right.M));
        rep.transitive_ok = rep.transitive_ok && ch.chained_related;
        rep.chains.push_back(ch);
      }
  return rep;
}

}  // namespace isec

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "isec/envelope.hpp"
#include "isec/fibration.hpp"

namespace isec {

/// Admissible constant pair of the section definition: L >= 1, M >= 0.
/// Construction validates (DomainError), so a QIConstants value is always
/// inside the admissible quadrant.
struct QIConstants {
  double L = 1.0;
  double M = 0.0;

  QIConstants() = default;
  QIConstants(double L_, double M_);
};

/// First violating ordered pair in scan order, with the two distances that
/// make up the failed inequality a <= L*b + M.
template <class S>
struct PairViolationT {
  std::size_t y1 = 0;
  std::size_t y2 = 0;
  S a{};
  S b{};
};
using PairViolation = PairViolationT<double>;

/// Round a nonnegative constant outward onto the 1/1024 lattice. Witness
/// constants pass through this before entering derived inequalities, so on
/// dyadic instances the follow-up arithmetic stays exact.
double snap_constant_up(double v);

// ---- constraint families ---------------------------------------------------
// Each family materializes one affine constraint "M >= a - L*b" per ordered
// index pair; all predicates, minimal constants, and frontiers below are
// defined through these shared families.

/// Section definition: a = d(phi(y1), phi(y2)), b = d(phi(y1), fiber(y2)),
/// over all ordered label pairs including y1 = y2.
std::vector<PairConstraint<double>> section_constraints(const Section& phi);
std::vector<PairConstraint<Rational>> section_constraints_exact(
    const Section& phi);

/// Pointed comparison against another section psi at base label y_hat:
/// a = d(phi(y), psi(y)), b = d(psi(y_hat), psi(y)). Requires
/// phi(y_hat) = psi(y_hat) (PreconditionError naming the label) and both
/// sections on one fibration.
std::vector<PairConstraint<double>> relative_constraints(const Section& phi,
                                                         const Section& psi,
                                                         LabelIndex y_hat);

/// Strong variant: b = min{d(psi(y_hat), psi(y)), d(psi(y_hat), phi(y))}.
std::vector<PairConstraint<double>> strong_relative_constraints(
    const Section& phi, const Section& psi, LabelIndex y_hat);

/// Pointed growth bound from a fixed point: a = d(x0, phi(y)),
/// b = d(x0, fiber(y)).
std::vector<PairConstraint<double>> pointed_constraints(const Section& phi,
                                                        PointIndex x0);

// ---- predicates ------------------------------------------------------------

/// Whether d(phi(y1), phi(y2)) <= L*d(phi(y1), fiber(y2)) + M for ALL
/// ordered pairs (y1, y2), including y1 = y2.
bool is_qi_section(const Section& phi, QIConstants c);
bool is_qi_section_exact(const Section& phi, const Rational& L,
                         const Rational& M);
/// Lexicographically first violating pair, if any.
std::optional<PairViolation> qi_violation(const Section& phi, QIConstants c);

bool is_relative_qi(const Section& phi, const Section& psi, LabelIndex y_hat,
                    QIConstants c);
std::optional<PairViolation> relative_violation(const Section& phi,
                                                const Section& psi,
                                                LabelIndex y_hat,
                                                QIConstants c);

bool is_strong_relative_qi(const Section& phi, const Section& psi,
                           LabelIndex y_hat, QIConstants c);
std::optional<PairViolation> strong_relative_violation(const Section& phi,
                                                       const Section& psi,
                                                       LabelIndex y_hat,
                                                       QIConstants c);

bool satisfies_pointed_bound(const Section& phi, PointIndex x0,
                             QIConstants c);
std::optional<PairViolation> pointed_violation(const Section& phi,
                                               PointIndex x0, QIConstants c);

// ---- optimal constants -----------------------------------------------------

/// M*(L) = max(0, max slack over ordered pairs). DomainError if L < 1.
double minimal_M(const Section& phi, double L);
Rational minimal_M_exact(const Section& phi, const Rational& L);

/// Smallest L >= 1 admissible at additive constant M (DomainError if
/// M < 0), or the blocking pair when no finite L works.
MinimalLT<double> minimal_L(const Section& phi, double M);
MinimalLT<Rational> minimal_L_exact(const Section& phi, const Rational& M);

Frontier qi_frontier(const Section& phi);
FrontierExact qi_frontier_exact(const Section& phi);

Frontier relative_frontier(const Section& phi, const Section& psi,
                           LabelIndex y_hat);
Frontier strong_relative_frontier(const Section& phi, const Section& psi,
                                  LabelIndex y_hat);
Frontier pointed_frontier(const Section& phi, PointIndex x0);

// ---- cone reformulation ----------------------------------------------------

/// Whether x_prime lies in the cone at x: L*d(x', fiber(pi(x))) + M <
/// d(x', x). Evaluated in the shared slack form, so agreement with
/// is_qi_section is exact, not merely mathematical.
bool in_cone_R(const Fibration& fib, PointIndex x, PointIndex x_prime,
               QIConstants c);

/// True iff no ordered pair of graph points (x, x') has x' in the cone at
/// x. Equals is_qi_section on every input.
bool graph_avoids_cones(const Section& phi, QIConstants c);
/// First offending (x, x'), scanning ordered label pairs.
std::optional<std::pair<PointIndex, PointIndex>> cone_witness(
    const Section& phi, QIConstants c);

// ---- constant transfer -----------------------------------------------------

/// (L, M)-section + (L1, M1)-pointed-comparison ==> pointed growth bound
/// with (L*(L1+1), M1+M). The additive part is exact for M = 0; for M > 0
/// the slack-free additive constant would be M1 + (L1+1)*M.
QIConstants transfer_constants_forward(double L, double L1, double M,
                                       double M1);

/// Pointed growth bound with (L2, M2) ==> pointed comparison with
/// (L2+1, M2); exact for every M2.
QIConstants transfer_constants_backward(double L2, double M2);

/// One concrete transfer instance checked in both directions: phi compared
/// against a base section phi0 through the shared point phi0(y0).
struct TransferCheckReport {
  bool hypothesis_intrinsic_ok = false;  // phi0 is (L, M)-QI
  bool hypothesis_relative_ok = false;   // phi rel. phi0 with (L1, M1)
  QIConstants forward;                   // (L(L1+1), M1+M)
  bool forward_ok = false;               // pointed bound with `forward`
  bool hypothesis_pointed_ok = false;    // pointed bound with (L2, M2)
  QIConstants backward;                  // (L2+1, M2)
  bool backward_ok = false;              // relative with `backward`
};
TransferCheckReport transfer_check(const Section& phi, const Section& phi0,
                                   LabelIndex y0, double L, double L1,
                                   double M, double M1, double L2, double M2);

// ---- family equivalence ----------------------------------------------------

/// Per-graph-point quantitative record of the family comparison.
struct GlobalEquivalencePoint {
  PointIndex x = 0;
  double rel_L = 1.0, rel_M = 0.0;          // minimal constants vs psi_x
  double pointed_L = 1.0, pointed_M = 0.0;  // minimal pointed constants at x
  bool forward_ok = false;   // pointed bound w/ forward-transferred constants
  bool backward_ok = false;  // relative w/ backward-transferred constants
};

/// Report of the two-way equivalence between "phi is pointed-comparable to
/// the family member through every graph point" and "phi is itself a QI
/// section": both sides are decided independently by frontier feasibility
/// and must agree; the quantitative fields trace the transfer formulas on
/// the instance.
struct GlobalEquivalenceReport {
  bool relative_all_feasible = false;  // side (1)
  bool intrinsic_feasible = false;     // side (2)
  bool sides_agree = false;            // the asserted equivalence
  QIConstants family;                  // input constants for the family
  double relative_L = 1.0, relative_M = 0.0;    // one witness pair valid
                                                // for every x at once
  double intrinsic_L = 1.0, intrinsic_M = 0.0;  // witness for side (2)
  bool forward_all_ok = false;
  bool backward_all_ok = false;
  std::vector<GlobalEquivalencePoint> per_point;
};

/// `family` maps each graph point x of phi to a section through x; every
/// member must itself be a c-QI section. Missing points or invalid members
/// raise PreconditionError.
GlobalEquivalenceReport global_equivalence_check(
    const Section& phi, const std::map<PointIndex, Section>& family,
    QIConstants c);

// ---- equivalence relation --------------------------------------------------

/// Minimal strong-comparison constants for an ordered pair of sections:
/// the frontier's zero point (smallest L admissible with M = 0), plus the
/// additive constant at L = 1 for reference.
struct RelationPair {
  std::size_t i = 0, j = 0;
  bool related = false;  // finite constants exist
  double L = 1.0, M = 0.0;
  double M_at_1 = 0.0;
};

/// One chaining instance s_i ~ s_j ~ s_k: the constructively found
/// constants for (i, k), and whether the textbook chain constants
/// (min{L_ij, L_jk}, M_ij + M_jk) would have been admissible.
struct RelationChain {
  std::size_t i = 0, j = 0, k = 0;
  bool chained_related = false;
  double chained_L = 1.0, chained_M = 0.0;
  bool min_L_sufficed = false;
};

struct StrongRelationReport {
  LabelIndex y_hat = 0;
  bool reflexive_ok = false;   // every (i,i) with exactly (1, 0)
  bool symmetric_ok = false;   // related(i,j) == related(j,i)
  bool transitive_ok = false;  // every chain found finite constants
  std::vector<RelationPair> pairs;    // all ordered pairs
  std::vector<RelationChain> chains;  // all ordered triples of distinct i,j,k
};

/// All sections must share one fibration and one point at y_hat
/// (PreconditionError otherwise).
StrongRelationReport strong_relation_check(const std::vector<Section>& sections,
                                           LabelIndex y_hat);

}  // namespace isec

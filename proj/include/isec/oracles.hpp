#pragma once

#include <span>
#include <utility>
#include <vector>

#include "isec/fibration.hpp"
#include "isec/qi.hpp"

namespace isec {

// Brute-force reference implementations. Each is a short, direct loop that
// shares only data types with the main analysis paths — no envelope, no
// frontier, no minimal-constant calls — so agreement between the two is
// evidence, not tautology. Deliberately single-threaded and slow.

/// Ordered-pair scan of the section inequality a <= L*b + M, inner min over
/// the target fiber.
bool oracle_is_qi(const Section& phi, double L, double M);

/// max(0, a - L*b) over all ordered label pairs, one double loop.
double oracle_minimal_M(const Section& phi, double L);

/// Same loop on exact rational distances.
Rational oracle_minimal_M_exact(const Section& phi, const Rational& L);

/// (L, oracle_minimal_M(phi, L)) for every grid value, in grid order.
std::vector<std::pair<double, double>> oracle_frontier_scan(
    const Section& phi, const std::vector<double>& L_grid);

/// Exhaustive cone-membership scan over ordered pairs of graph points:
/// true iff some graph point lies in the cone at another.
bool oracle_cone_hit(const Section& phi, double L, double M);

/// Pushforward mass of `set`: sum of label weights whose chosen point lies
/// in it. ConfigError when the fibration carries no measure.
double oracle_mass(const Section& phi, std::span<const PointIndex> set);

/// Strong-comparison sweep at base label y_hat: the first grid L whose
/// direct minimal additive constant is zero (paired with 0), else the last
/// grid value with its constant. PreconditionError when the sections do not
/// share the base point.
QIConstants oracle_relation_constants(const Section& phi, const Section& psi,
                                      LabelIndex y_hat,
                                      const std::vector<double>& L_grid);

/// Every section of the fibration, choices enumerated in lexicographic
/// (label-major, fiber-position-minor) order. DomainError when the product
/// of fiber sizes exceeds 2^22.
std::vector<Section> enumerate_sections(const FibrationPtr& fib);

}  // namespace isec

#pragma once

#include <cstddef>
#include <random>

#include "isec/fibration.hpp"
#include "isec/linear.hpp"
#include "isec/qi.hpp"

namespace isec {

/// Deterministic instance factories for the test corpus and the `generate`
/// subcommand.  Randomized factories take the engine by reference so a
/// caller can chain several draws off one recorded seed.

using Rng = std::mt19937_64;

// ---- grids -----------------------------------------------------------------

/// cols x rows integer grid under a coordinate norm.  Point ids are [c, r]
/// arrays in column-major order (c outer); label c owns column
/// {(c, 0), ..., (c, rows-1)}.  Labels carry the counting measure unless
/// turned off.
struct GridInstance {
  FibrationPtr fib;
  std::size_t cols = 0, rows = 0;

  PointIndex at(std::size_t c, std::size_t r) const {
    return static_cast<PointIndex>(c * rows + r);
  }
  /// Row-0 section: c -> (c, 0).
  Section identity_row() const;
  /// Row 0 on even columns, top row on odd ones; on a 3x3 grid this is the
  /// section {0 -> (0,0), 1 -> (1,2), 2 -> (2,0)}.
  Section zigzag() const;
};

/// DomainError unless cols >= 1 and rows >= 1.
GridInstance make_grid(std::size_t cols, std::size_t rows,
                       NormKind norm = NormKind::Linf,
                       bool counting_measure = true);

// ---- cyclic products -------------------------------------------------------

/// Z_m x Z_k with d = max of the two cyclic distances; label i owns the
/// circle {i} x Z_k.  Point ids are [i, j] arrays.
struct CyclicInstance {
  FibrationPtr fib;
  std::size_t m = 0, k = 0;

  PointIndex at(std::size_t i, std::size_t j) const {
    return static_cast<PointIndex>(i * k + j);
  }
  /// i -> (i, 0).
  Section zero_section() const;
};

/// DomainError unless m >= 1 and k >= 1.
CyclicInstance make_cyclic_product(std::size_t m, std::size_t k,
                                   bool counting_measure = true);

// ---- random metric instances ----------------------------------------------

/// Distinct-point distances are drawn from the multiples of 1/64 in [1, 2]:
/// every such matrix is a metric (any two sides sum to at least 2), and the
/// entries, their L-multiples on the 1/1024 lattice, and the resulting
/// slacks are all exact in doubles.
struct RandomInstanceParams {
  std::size_t fibers_min = 2, fibers_max = 10;
  std::size_t fiber_min = 1, fiber_max = 5;  ///< points per fiber
  bool counting_measure = true;
};

FibrationPtr random_fibration(Rng& rng, const RandomInstanceParams& p = {});

/// Uniformly random choice of one point per fiber.
Section random_section(const FibrationPtr& fib, Rng& rng);

/// Constants the section provably satisfies with zero additive part: the
/// frontier's zero point rounded up onto the 1/1024 lattice.  (Section
/// frontiers always reach M = 0: a constraint with fiber distance 0 forces
/// graph distance 0.)
QIConstants tight_constants(const Section& phi);

/// (L, minimal M at L rounded up) for probing the sloped part of the
/// frontier; DomainError for L < 1.
QIConstants constants_at(const Section& phi, double L);

// ---- sampled linear instances ----------------------------------------------

/// Random full-rank k x n matrix with dyadic entries in [-2, 2]; resamples
/// until the rank is k.  DomainError unless 1 <= k < n.
Eigen::MatrixXd random_surjection(Rng& rng, std::size_t k, std::size_t n);

struct RandomLinearParams {
  std::size_t n = 2, k = 1;      ///< ambient / target dimension, k < n
  std::size_t grid_points = 5;   ///< number of labels
  std::size_t samples_per_fiber = 3;
  NormKind norm = NormKind::L2;
  double scale = 1.0;
};

/// Explicit-matrix variant: y_grid is every integer vector of
/// [grid_lo, grid_hi]^k (DomainError when empty or over 4096 points).
/// Fiber samples are the min-norm solution of A x = scale * y plus random
/// dyadic kernel combinations, deduplicated.
SampledLinearInstance sampled_linear_instance(Rng& rng,
                                              const Eigen::MatrixXd& A,
                                              int grid_lo, int grid_hi,
                                              std::size_t samples_per_fiber,
                                              NormKind norm, double scale);

/// Random matrix + random distinct integer grid points in [-5, 5]^k.
SampledLinearInstance random_linear_instance(Rng& rng,
                                             const RandomLinearParams& p = {});

/// Uniformly random choice among each fiber's sample points.
LinearSection random_sampled_section(const SampledLinearInstance& inst,
                                     Rng& rng);

}  // namespace isec

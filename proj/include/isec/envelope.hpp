#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "isec/errors.hpp"
#include "isec/rational.hpp"

namespace isec {

/// One affine constraint "M >= a - L*b" over the multiplicative constant L,
/// tagged with the ordered index pair that produced it. `a` is a distance
/// between chosen points, `b` a distance to a fiber (so b >= 0 and the
/// constraint is nonincreasing in L).
template <class S>
struct PairConstraint {
  S a{};
  S b{};
  std::size_t y1 = 0;
  std::size_t y2 = 0;
};

/// The single comparison used by every admissibility predicate in the
/// library. Keeping one expression (and one rounding behavior) for the
/// slack means the cone reformulation, the direct definition, and the
/// frontier agree bit-for-bit, not just mathematically.
template <class S>
inline S pair_slack(const S& a, const S& b, const S& L) {
  return a - L * b;
}

template <class S>
inline bool pair_violates(const S& a, const S& b, const S& L, const S& M) {
  return pair_slack(a, b, L) > M;
}

constexpr std::size_t kNoPair = static_cast<std::size_t>(-1);

/// One linear piece of a frontier: M*(L) = a - L*b on [L_from, next piece).
/// The trailing flat piece (M* = 0) carries a = b = 0 and no witness pair.
template <class S>
struct FrontierSegment {
  S L_from{};
  S a{};
  S b{};
  std::size_t y1 = kNoPair;
  std::size_t y2 = kNoPair;
};

/// The minimal additive constant M*(L) as a function of L on [1, inf):
/// the upper envelope of the pair constraints clipped at 0. Convex,
/// piecewise linear, nonincreasing. `segments` covers [1, inf) in
/// ascending order; `L_flat` is the smallest L with M*(L) = 0 and is
/// absent only when some constraint has b = 0 with a > 0 (then M* has a
/// positive flat tail and no finite L is admissible at M below it).
template <class S>
struct FrontierT {
  std::vector<FrontierSegment<S>> segments;
  std::optional<S> L_flat;

  std::size_t segment_at(const S& L) const {
    if (L < S(1)) throw DomainError("frontier evaluated at L < 1");
    std::size_t i = segments.size() - 1;
    while (i > 0 && segments[i].L_from > L) --i;
    return i;
  }

  /// M*(L); the same a - L*b expression the predicates use.
  S eval(const S& L) const {
    const auto& seg = segments[segment_at(L)];
    return pair_slack(seg.a, seg.b, L);
  }

  /// Breakpoints (L, M*(L)), one per segment start, beginning at L = 1.
  std::vector<std::pair<S, S>> vertices() const {
    std::vector<std::pair<S, S>> out;
    out.reserve(segments.size());
    for (const auto& seg : segments)
      out.emplace_back(seg.L_from, pair_slack(seg.a, seg.b, seg.L_from));
    return out;
  }

  /// The binding constraint at L, absent on the flat tail.
  std::optional<std::pair<std::size_t, std::size_t>> binding_pair(
      const S& L) const {
    const auto& seg = segments[segment_at(L)];
    if (seg.y1 == kNoPair) return std::nullopt;
    return std::make_pair(seg.y1, seg.y2);
  }
};

using Frontier = FrontierT<double>;
using FrontierExact = FrontierT<Rational>;

/// Exact upper envelope of the constraints on [1, inf), clipped at 0.
/// Runs in O(n log n) via the sort-by-slope hull sweep.
FrontierExact build_frontier(std::vector<PairConstraint<Rational>> cons);

/// Double facade: lifts the (exactly representable) inputs to rationals,
/// builds the exact envelope, and rounds the breakpoints back. Segment
/// selection is therefore exact; only reported breakpoint coordinates
/// round.
Frontier build_frontier(const std::vector<PairConstraint<double>>& cons);

/// Smallest L >= 1 with M*(L) <= M, or the witness constraint that blocks
/// every finite L (b = 0 with a > M).
template <class S>
struct MinimalLT {
  std::optional<S> L;
  std::optional<std::pair<std::size_t, std::size_t>> blocking;
};

MinimalLT<Rational> minimal_L_of(const FrontierExact& f, const Rational& M);
MinimalLT<double> minimal_L_of(const Frontier& f, double M);

}  // namespace isec

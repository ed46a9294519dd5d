#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "isec/errors.hpp"
#include "isec/rational.hpp"

namespace isec {

using json = nlohmann::json;
using PointIndex = std::size_t;

enum class NormKind { L1, L2, Linf };

NormKind norm_kind_from_string(const std::string& s);
std::string to_string(NormKind k);

/// Canonical lookup key for an opaque JSON identifier: strings are used
/// verbatim, everything else is the compact dump. JSON object keys in
/// fibration/section files are matched against this.
std::string canonical_key(const json& id);

/// One invariant violation found by the validator. `where` holds the indices
/// involved; slots beyond `arity` are unused.
struct ValidationIssue {
  std::string rule;  // "diagonal", "symmetry", "separation", "triangle"
  std::array<std::size_t, 3> where{0, 0, 0};
  int arity = 0;
  std::string message;
};

/// A finite metric space: opaque point identifiers plus a validated distance
/// matrix. Instances declared exact carry a parallel rational matrix and all
/// validation comparisons on them are exact; float instances are validated
/// with an absolute tolerance of 1e-9. Immutable after construction.
class FiniteMetricSpace {
public:
  /// Builds from an explicit matrix (row-major, n*n). Throws InstanceError
  /// with the first violating index tuple unless `trusted` skips the O(n^3)
  /// triangle scan (the other invariants are always checked).
  static FiniteMetricSpace from_matrix(std::vector<json> points,
                                       std::vector<double> dist,
                                       bool trusted = false);

  /// Exact-rational variant; the double matrix is derived by rounding and is
  /// used only for reporting.
  static FiniteMetricSpace from_matrix_exact(std::vector<json> points,
                                             std::vector<Rational> dist,
                                             bool trusted = false);

  std::size_t size() const { return points_.size(); }
  bool exact() const { return exact_.has_value(); }

  const json& point(PointIndex i) const { return points_[i]; }
  const std::vector<json>& points() const { return points_; }
  std::optional<PointIndex> find(const json& id) const;
  PointIndex require(const json& id) const;  // InstanceError if unknown

  double dist(PointIndex a, PointIndex b) const {
    return dist_[a * points_.size() + b];
  }
  const Rational& dist_exact(PointIndex a, PointIndex b) const;

  /// min over S of d(x, s). S must be nonempty (DomainError otherwise).
  double dist_to_set(PointIndex x, std::span<const PointIndex> s) const;
  Rational dist_to_set_exact(PointIndex x, std::span<const PointIndex> s) const;
  /// Lowest-index witness realizing the minimum.
  PointIndex dist_to_set_witness(PointIndex x,
                                 std::span<const PointIndex> s) const;

  /// Open ball {x' : d(x, x') < r}, as ascending indices. Empty for r <= 0.
  std::vector<PointIndex> ball(PointIndex x, double r) const;
  std::vector<PointIndex> ball_exact(PointIndex x, const Rational& r) const;

  double diameter() const;

  /// Scalar-generic access used by the templated kernels.
  template <class S>
  S dist_s(PointIndex a, PointIndex b) const;

  /// Runs the full validation over a candidate matrix without constructing.
  /// Returns the first violation in scan order (i, then j, then k), or
  /// nullopt. Exact variant compares exactly; float uses tolerance 1e-9.
  static std::optional<ValidationIssue> validate_matrix(
      std::size_t n, std::span<const double> dist, bool check_triangle);
  static std::optional<ValidationIssue> validate_matrix_exact(
      std::size_t n, std::span<const Rational> dist, bool check_triangle);

private:
  FiniteMetricSpace() = default;

  std::vector<json> points_;
  std::vector<std::string> keys_;  // canonical, parallel to points_
  std::unordered_map<std::string, PointIndex> index_;
  std::vector<double> dist_;
  std::optional<std::vector<Rational>> exact_;
};

template <>
inline double FiniteMetricSpace::dist_s<double>(PointIndex a,
                                                PointIndex b) const {
  return dist(a, b);
}

template <>
inline Rational FiniteMetricSpace::dist_s<Rational>(PointIndex a,
                                                    PointIndex b) const {
  return dist_exact(a, b);
}

/// Finite sample of a normed vector space: the induced metric space has the
/// vectors themselves as point identifiers.
struct NormedInstance {
  std::size_t dimension = 0;
  NormKind norm = NormKind::L2;
  std::vector<std::vector<double>> vectors;

  std::shared_ptr<const FiniteMetricSpace> to_metric_space(
      bool trusted = false) const;
};

double norm_value(NormKind k, std::span<const double> v);
double norm_dist(NormKind k, std::span<const double> u,
                 std::span<const double> v);

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

/// Parses an instance document {"points": [...], "metric": {...}} where the
/// metric is one of
///   {"kind": "matrix", "dist": [[...], ...]}
///   {"kind": "grid_linf", "rows": m, "cols": n}
///   {"kind": "normed", "norm": "l1"|"l2"|"linf", "vectors": [[...], ...]}
/// Generator kinds are expanded to explicit matrices before validation.
/// Optional top-level flags: "exact": true stores matrix entries as exact
/// rationals (integers or strings such as "3/2"; float literals are
/// rejected), "trusted": true skips the cubic triangle scan.
SpacePtr load_instance(const json& doc);

/// Serializes back to an explicit-matrix instance document. Exact spaces
/// emit distances as rational strings and set "exact": true.
json instance_to_json(const FiniteMetricSpace& space);

}  // namespace isec

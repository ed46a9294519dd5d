#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "isec/metric_space.hpp"

namespace isec {

using LabelIndex = std::size_t;

class Fibration;
using FibrationPtr = std::shared_ptr<const Fibration>;

/// A quotient map pi : X -> Y on a finite metric space, stored as its fiber
/// partition: every point carries exactly one label, every label owns a
/// nonempty fiber, and an optional nonnegative weight per label serves as a
/// measure on Y. Y itself is a bare label set; the definitions downstream
/// never use a distance on it. Immutable after construction.
class Fibration {
public:
  /// `fiber_of` maps each point index to its label index; `measure`, when
  /// given, holds one finite weight >= 0 per label.
  static Fibration build(SpacePtr space, std::vector<json> labels,
                         std::vector<LabelIndex> fiber_of,
                         std::optional<std::vector<double>> measure = {});

  /// Parses {"labels": [...], "fiber_of": {point_key: label, ...},
  /// "measure": {label_key: weight, ...}?}. Object keys are canonical keys
  /// of the respective identifiers; fiber_of must cover every point of the
  /// space and measure, when present, every label.
  static Fibration from_json(SpacePtr space, const json& doc);
  json to_json() const;

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }

  std::size_t label_count() const { return labels_.size(); }
  const json& label(LabelIndex y) const { return labels_[y]; }
  const std::string& label_key(LabelIndex y) const { return label_keys_[y]; }
  std::optional<LabelIndex> find_label(const json& label) const;
  LabelIndex require_label(const json& label) const;  // InstanceError

  LabelIndex fiber_of(PointIndex x) const { return fiber_of_[x]; }
  /// pi^{-1}(label) as ascending point indices; never empty.
  const std::vector<PointIndex>& fiber(LabelIndex y) const {
    return fibers_[y];
  }

  bool has_measure() const { return measure_.has_value(); }
  double weight(LabelIndex y) const;  // ConfigError without a measure
  double total_mass() const;
  /// Copy of this fibration carrying weight 1 on every label.
  Fibration with_counting_measure() const;

private:
  Fibration() = default;

  SpacePtr space_;
  std::vector<json> labels_;
  std::vector<std::string> label_keys_;  // canonical, parallel to labels_
  std::unordered_map<std::string, LabelIndex> label_index_;
  std::vector<LabelIndex> fiber_of_;            // per point
  std::vector<std::vector<PointIndex>> fibers_;  // per label, ascending
  std::optional<std::vector<double>> measure_;   // per label
};

/// A section phi of a quotient map: one chosen point per label, constrained
/// to lie in that label's fiber (so pi of phi is the identity on labels).
class Section {
public:
  static Section build(FibrationPtr fib, std::vector<PointIndex> choice);

  /// Parses {"choice": {label_key: point_id, ...}}; must cover every label.
  static Section from_json(FibrationPtr fib, const json& doc);
  json to_json() const;

  const Fibration& fibration() const { return *fib_; }
  const FibrationPtr& fibration_ptr() const { return fib_; }
  const FiniteMetricSpace& space() const { return fib_->space(); }
  std::size_t label_count() const { return fib_->label_count(); }

  PointIndex point_of(LabelIndex y) const { return choice_[y]; }
  const std::vector<PointIndex>& choice() const { return choice_; }

  /// The image phi(Y) as ascending point indices. phi is injective (fibers
  /// are disjoint), so the image has label_count() elements.
  std::vector<PointIndex> graph() const;

private:
  Section() = default;

  FibrationPtr fib_;
  std::vector<PointIndex> choice_;  // per label
};

/// mu(pi(A intersected with phi(Y))): total weight of the labels whose
/// chosen point lies in A. ConfigError if the fibration has no measure.
double pushforward_mass(const Section& phi, std::span<const PointIndex> a);

/// ell = max over labels of diam(pi^{-1}(y)); 0 when all fibers are
/// singletons.
double fiber_diameter_bound(const Fibration& fib);
Rational fiber_diameter_bound_exact(const Fibration& fib);

}  // namespace isec

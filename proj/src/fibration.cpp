#include "isec/fibration.hpp"

#include <algorithm>
#include <cmath>

namespace isec {

Fibration Fibration::build(SpacePtr space, std::vector<json> labels,
                           std::vector<LabelIndex> fiber_of,
                           std::optional<std::vector<double>> measure) {
  if (!space) throw ConfigError("fibration built without a space");
  Fibration fib;
  fib.space_ = std::move(space);
  fib.labels_ = std::move(labels);
  fib.label_keys_.reserve(fib.labels_.size());
  for (const auto& l : fib.labels_)
    fib.label_keys_.push_back(canonical_key(l));
  fib.label_index_.reserve(fib.labels_.size());
  for (LabelIndex y = 0; y < fib.label_keys_.size(); ++y) {
    if (!fib.label_index_.emplace(fib.label_keys_[y], y).second)
      throw InstanceError("duplicate label: " + fib.label_keys_[y]);
  }

  if (fiber_of.size() != fib.space_->size())
    throw InstanceError("fiber_of must assign a label to every point");
  fib.fibers_.resize(fib.labels_.size());
  for (PointIndex x = 0; x < fiber_of.size(); ++x) {
    if (fiber_of[x] >= fib.labels_.size())
      throw InstanceError("fiber_of references a label out of range");
    fib.fibers_[fiber_of[x]].push_back(x);
  }
  fib.fiber_of_ = std::move(fiber_of);
  for (LabelIndex y = 0; y < fib.fibers_.size(); ++y) {
    if (fib.fibers_[y].empty())
      throw InstanceError("label " + fib.label_keys_[y] +
                          " has an empty fiber");
  }

  if (measure) {
    if (measure->size() != fib.labels_.size())
      throw InstanceError("measure must weight every label");
    for (LabelIndex y = 0; y < measure->size(); ++y) {
      const double w = (*measure)[y];
      if (!std::isfinite(w) || w < 0.0)
        throw InstanceError("measure weight for label " + fib.label_keys_[y] +
                            " must be finite and >= 0");
    }
    fib.measure_ = std::move(measure);
  }
  return fib;
}

Fibration Fibration::from_json(SpacePtr space, const json& doc) {
  if (!doc.is_object())
    throw InstanceError("fibration: expected an object");
  auto labels_it = doc.find("labels");
  if (labels_it == doc.end() || !labels_it->is_array())
    throw InstanceError("fibration.labels: expected an array");
  std::vector<json> labels(labels_it->begin(), labels_it->end());

  // Resolve label values ahead of the per-point scan.
  std::unordered_map<std::string, LabelIndex> by_key;
  for (LabelIndex y = 0; y < labels.size(); ++y) {
    if (!by_key.emplace(canonical_key(labels[y]), y).second)
      throw InstanceError("fibration.labels: duplicate label " +
                          canonical_key(labels[y]));
  }

  auto fo_it = doc.find("fiber_of");
  if (fo_it == doc.end() || !fo_it->is_object())
    throw InstanceError("fibration.fiber_of: expected an object");
  constexpr PointIndex kUnset = static_cast<PointIndex>(-1);
  std::vector<LabelIndex> fiber_of(space->size(), kUnset);
  for (auto it = fo_it->begin(); it != fo_it->end(); ++it) {
    const auto x = space->find(it.key());
    if (!x)
      throw InstanceError("fibration.fiber_of: unknown point " + it.key());
    const auto key = canonical_key(it.value());
    const auto y = by_key.find(key);
    if (y == by_key.end())
      throw InstanceError("fibration.fiber_of[" + it.key() +
                          "]: unknown label " + key);
    fiber_of[*x] = y->second;
  }
  for (PointIndex x = 0; x < fiber_of.size(); ++x) {
    if (fiber_of[x] == kUnset)
      throw InstanceError("fibration.fiber_of: point " +
                          canonical_key(space->point(x)) + " has no label");
  }

  std::optional<std::vector<double>> measure;
  if (auto m_it = doc.find("measure"); m_it != doc.end()) {
    if (!m_it->is_object())
      throw InstanceError("fibration.measure: expected an object");
    measure.emplace(labels.size(), 0.0);
    std::vector<char> seen(labels.size(), 0);
    for (auto it = m_it->begin(); it != m_it->end(); ++it) {
      const auto y = by_key.find(it.key());
      if (y == by_key.end())
        throw InstanceError("fibration.measure: unknown label " + it.key());
      if (!it.value().is_number())
        throw InstanceError("fibration.measure[" + it.key() +
                            "]: expected a number");
      (*measure)[y->second] = it.value().get<double>();
      seen[y->second] = 1;
    }
    for (LabelIndex y = 0; y < measure->size(); ++y) {
      if (!seen[y])
        throw InstanceError("fibration.measure: label " +
                            canonical_key(labels[y]) + " has no weight");
    }
  }

  return build(std::move(space), std::move(labels), std::move(fiber_of),
               std::move(measure));
}

json Fibration::to_json() const {
  json doc = json::object();
  doc["labels"] = json(labels_);
  json fo = json::object();
  for (PointIndex x = 0; x < fiber_of_.size(); ++x)
    fo[canonical_key(space_->point(x))] = labels_[fiber_of_[x]];
  doc["fiber_of"] = std::move(fo);
  if (measure_) {
    json m = json::object();
    for (LabelIndex y = 0; y < labels_.size(); ++y)
      m[label_keys_[y]] = (*measure_)[y];
    doc["measure"] = std::move(m);
  }
  return doc;
}

std::optional<LabelIndex> Fibration::find_label(const json& label) const {
  const auto it = label_index_.find(canonical_key(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

LabelIndex Fibration::require_label(const json& label) const {
  if (auto y = find_label(label)) return *y;
  throw InstanceError("unknown label: " + canonical_key(label));
}

double Fibration::weight(LabelIndex y) const {
  if (!measure_) throw ConfigError("fibration carries no measure");
  return (*measure_)[y];
}

double Fibration::total_mass() const {
  if (!measure_) throw ConfigError("fibration carries no measure");
  double total = 0.0;
  for (double w : *measure_) total += w;
  return total;
}

Fibration Fibration::with_counting_measure() const {
  Fibration fib = *this;
  fib.measure_ = std::vector<double>(labels_.size(), 1.0);
  return fib;
}

Section Section::build(FibrationPtr fib, std::vector<PointIndex> choice) {
  if (!fib) throw ConfigError("section built without a fibration");
  if (choice.size() != fib->label_count())
    throw InstanceError("section must choose a point for every label");
  for (LabelIndex y = 0; y < choice.size(); ++y) {
    if (choice[y] >= fib->space().size())
      throw InstanceError("section choice out of range for label " +
                          fib->label_key(y));
    if (fib->fiber_of(choice[y]) != y)
      throw InstanceError("section choice for label " + fib->label_key(y) +
                          " lies in the fiber of " +
                          fib->label_key(fib->fiber_of(choice[y])));
  }
  Section s;
  s.fib_ = std::move(fib);
  s.choice_ = std::move(choice);
  return s;
}

Section Section::from_json(FibrationPtr fib, const json& doc) {
  if (!fib) throw ConfigError("section built without a fibration");
  if (!doc.is_object())
    throw InstanceError("section: expected an object");
  auto it = doc.find("choice");
  if (it == doc.end() || !it->is_object())
    throw InstanceError("section.choice: expected an object");
  constexpr PointIndex kUnset = static_cast<PointIndex>(-1);
  std::vector<PointIndex> choice(fib->label_count(), kUnset);
  for (auto c = it->begin(); c != it->end(); ++c) {
    json label_key = c.key();
    const auto y = fib->find_label(label_key);
    if (!y)
      throw InstanceError("section.choice: unknown label " + c.key());
    choice[*y] = fib->space().require(c.value());
  }
  for (LabelIndex y = 0; y < choice.size(); ++y) {
    if (choice[y] == kUnset)
      throw InstanceError("section.choice: label " + fib->label_key(y) +
                          " has no chosen point");
  }
  return build(std::move(fib), std::move(choice));
}

json Section::to_json() const {
  json ch = json::object();
  for (LabelIndex y = 0; y < choice_.size(); ++y)
    ch[fib_->label_key(y)] = space().point(choice_[y]);
  return json{{"choice", std::move(ch)}};
}

std::vector<PointIndex> Section::graph() const {
  std::vector<PointIndex> g = choice_;
  std::sort(g.begin(), g.end());
  return g;
}

double pushforward_mass(const Section& phi, std::span<const PointIndex> a) {
  const Fibration& fib = phi.fibration();
  if (!fib.has_measure())
    throw ConfigError("pushforward mass requires a measure on the fibration");
  std::vector<char> in_a(fib.space().size(), 0);
  for (PointIndex x : a) in_a.at(x) = 1;
  double total = 0.0;
  for (LabelIndex y = 0; y < fib.label_count(); ++y)
    if (in_a[phi.point_of(y)]) total += fib.weight(y);
  return total;
}

double fiber_diameter_bound(const Fibration& fib) {
  const FiniteMetricSpace& space = fib.space();
  double best = 0.0;
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    const auto& f = fib.fiber(y);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = i + 1; j < f.size(); ++j)
        best = std::max(best, space.dist(f[i], f[j]));
  }
  return best;
}

Rational fiber_diameter_bound_exact(const Fibration& fib) {
  const FiniteMetricSpace& space = fib.space();
  Rational best = 0;
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    const auto& f = fib.fiber(y);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = i + 1; j < f.size(); ++j)
        best = std::max(best, space.dist_exact(f[i], f[j]));
  }
  return best;
}

}  // namespace isec

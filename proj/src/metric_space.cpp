#include "isec/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "isec/parallel.hpp"

namespace isec {

namespace {

constexpr double kValidationTol = 1e-9;

std::unordered_map<std::string, PointIndex> build_index(
    const std::vector<std::string>& keys) {
  std::unordered_map<std::string, PointIndex> out;
  out.reserve(keys.size());
  for (PointIndex i = 0; i < keys.size(); ++i) {
    if (!out.emplace(keys[i], i).second)
      throw InstanceError("duplicate point identifier: " + keys[i]);
  }
  return out;
}

std::string issue_message(const ValidationIssue& issue) {
  std::ostringstream os;
  os << "metric validation failed: " << issue.message;
  return os.str();
}

// Triangle scan over one scalar type. The i-loop is chunked across workers;
// the lexicographically first violating (i, j, k) wins regardless of the
// partitioning.
template <class S, class Leq>
std::optional<ValidationIssue> triangle_scan(std::size_t n,
                                             std::span<const S> d, Leq leq) {
  const std::size_t workers = thread_budget();
  std::vector<std::optional<std::array<std::size_t, 3>>> found(
      std::max<std::size_t>(workers, 1));
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end,
                                  std::size_t chunk) {
    for (std::size_t i = begin; i < end && !found[chunk]; ++i)
      for (std::size_t j = 0; j < n && !found[chunk]; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          if (!leq(d[i * n + k], d[i * n + j], d[j * n + k])) {
            found[chunk] = std::array<std::size_t, 3>{i, j, k};
            break;
          }
        }
  });
  for (const auto& f : found) {
    if (f) {
      ValidationIssue issue;
      issue.rule = "triangle";
      issue.where = *f;
      issue.arity = 3;
      std::ostringstream os;
      os << "triangle inequality violated at (" << (*f)[0] << "," << (*f)[1]
         << "," << (*f)[2] << ")";
      issue.message = os.str();
      return issue;
    }
  }
  return std::nullopt;
}

template <class S, class IsZero, class Eq, class Pos, class Leq>
std::optional<ValidationIssue> validate_impl(std::size_t n,
                                             std::span<const S> dist,
                                             bool check_triangle, IsZero zero,
                                             Eq eq, Pos pos, Leq leq) {
  if (dist.size() != n * n)
    throw InstanceError("distance matrix is not n*n");
  for (std::size_t i = 0; i < n; ++i) {
    if (!zero(dist[i * n + i])) {
      ValidationIssue issue{"diagonal", {i, i, 0}, 2, ""};
      std::ostringstream os;
      os << "nonzero diagonal entry at (" << i << "," << i << ")";
      issue.message = os.str();
      return issue;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!eq(dist[i * n + j], dist[j * n + i])) {
        ValidationIssue issue{"symmetry", {i, j, 0}, 2, ""};
        std::ostringstream os;
        os << "asymmetric entries at (" << i << "," << j << ")";
        issue.message = os.str();
        return issue;
      }
      if (!pos(dist[i * n + j])) {
        ValidationIssue issue{"separation", {i, j, 0}, 2, ""};
        std::ostringstream os;
        os << "nonpositive distance between distinct points (" << i << ","
           << j << ")";
        issue.message = os.str();
        return issue;
      }
    }
  if (check_triangle) return triangle_scan<S>(n, dist, leq);
  return std::nullopt;
}

}  // namespace

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "l1") return NormKind::L1;
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  throw InstanceError("unknown norm kind: " + s);
}

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::L1: return "l1";
    case NormKind::L2: return "l2";
    case NormKind::Linf: return "linf";
  }
  return "l2";
}

std::string canonical_key(const json& id) {
  if (id.is_string()) return id.get<std::string>();
  return id.dump();
}

std::optional<ValidationIssue> FiniteMetricSpace::validate_matrix(
    std::size_t n, std::span<const double> dist, bool check_triangle) {
  return validate_impl<double>(
      n, dist, check_triangle,
      [](double v) { return std::abs(v) <= kValidationTol; },
      [](double a, double b) { return std::abs(a - b) <= kValidationTol; },
      [](double v) { return v > kValidationTol; },
      [](double ik, double ij, double jk) {
        return ik <= ij + jk + kValidationTol;
      });
}

std::optional<ValidationIssue> FiniteMetricSpace::validate_matrix_exact(
    std::size_t n, std::span<const Rational> dist, bool check_triangle) {
  return validate_impl<Rational>(
      n, dist, check_triangle, [](const Rational& v) { return v == 0; },
      [](const Rational& a, const Rational& b) { return a == b; },
      [](const Rational& v) { return v > 0; },
      [](const Rational& ik, const Rational& ij, const Rational& jk) {
        return ik <= ij + jk;
      });
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<json> points,
                                                 std::vector<double> dist,
                                                 bool trusted) {
  if (auto issue = validate_matrix(points.size(), dist, !trusted))
    throw InstanceError(issue_message(*issue));
  FiniteMetricSpace space;
  space.points_ = std::move(points);
  space.keys_.reserve(space.points_.size());
  for (const auto& p : space.points_) space.keys_.push_back(canonical_key(p));
  space.index_ = build_index(space.keys_);
  space.dist_ = std::move(dist);
  return space;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix_exact(
    std::vector<json> points, std::vector<Rational> dist, bool trusted) {
  if (auto issue = validate_matrix_exact(points.size(), dist, !trusted))
    throw InstanceError(issue_message(*issue));
  FiniteMetricSpace space;
  space.points_ = std::move(points);
  space.keys_.reserve(space.points_.size());
  for (const auto& p : space.points_) space.keys_.push_back(canonical_key(p));
  space.index_ = build_index(space.keys_);
  space.dist_.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i)
    space.dist_[i] = to_double(dist[i]);
  space.exact_ = std::move(dist);
  return space;
}

std::optional<PointIndex> FiniteMetricSpace::find(const json& id) const {
  const auto it = index_.find(canonical_key(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PointIndex FiniteMetricSpace::require(const json& id) const {
  if (auto i = find(id)) return *i;
  throw InstanceError("unknown point identifier: " + canonical_key(id));
}

const Rational& FiniteMetricSpace::dist_exact(PointIndex a,
                                              PointIndex b) const {
  if (!exact_)
    throw ConfigError("exact distances requested on a float instance");
  return (*exact_)[a * points_.size() + b];
}

double FiniteMetricSpace::dist_to_set(PointIndex x,
                                      std::span<const PointIndex> s) const {
  if (s.empty()) throw DomainError("dist_to_set over an empty set");
  double best = dist(x, s[0]);
  for (std::size_t i = 1; i < s.size(); ++i)
    best = std::min(best, dist(x, s[i]));
  return best;
}

Rational FiniteMetricSpace::dist_to_set_exact(
    PointIndex x, std::span<const PointIndex> s) const {
  if (s.empty()) throw DomainError("dist_to_set over an empty set");
  Rational best = dist_exact(x, s[0]);
  for (std::size_t i = 1; i < s.size(); ++i)
    best = std::min(best, dist_exact(x, s[i]));
  return best;
}

PointIndex FiniteMetricSpace::dist_to_set_witness(
    PointIndex x, std::span<const PointIndex> s) const {
  if (s.empty()) throw DomainError("dist_to_set over an empty set");
  PointIndex best = s[0];
  for (std::size_t i = 1; i < s.size(); ++i)
    if (dist(x, s[i]) < dist(x, best)) best = s[i];
  return best;
}

std::vector<PointIndex> FiniteMetricSpace::ball(PointIndex x, double r) const {
  std::vector<PointIndex> out;
  for (PointIndex i = 0; i < size(); ++i)
    if (dist(x, i) < r) out.push_back(i);
  return out;
}

std::vector<PointIndex> FiniteMetricSpace::ball_exact(
    PointIndex x, const Rational& r) const {
  std::vector<PointIndex> out;
  for (PointIndex i = 0; i < size(); ++i)
    if (dist_exact(x, i) < r) out.push_back(i);
  return out;
}

double FiniteMetricSpace::diameter() const {
  double best = 0.0;
  for (PointIndex i = 0; i < size(); ++i)
    for (PointIndex j = i + 1; j < size(); ++j)
      best = std::max(best, dist(i, j));
  return best;
}

double norm_value(NormKind k, std::span<const double> v) {
  double acc = 0.0;
  switch (k) {
    case NormKind::L1:
      for (double x : v) acc += std::abs(x);
      return acc;
    case NormKind::L2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case NormKind::Linf:
      for (double x : v) acc = std::max(acc, std::abs(x));
      return acc;
  }
  return acc;
}

double norm_dist(NormKind k, std::span<const double> u,
                 std::span<const double> v) {
  if (u.size() != v.size())
    throw DomainError("norm_dist on vectors of different dimension");
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - v[i];
  return norm_value(k, diff);
}

namespace {

// Field access with path-qualified complaints, so a CLI user sees which part
// of the document is malformed rather than a bare type error.
const json& member(const json& doc, const char* key, const char* path) {
  if (!doc.is_object())
    throw InstanceError(std::string(path) + ": expected an object");
  auto it = doc.find(key);
  if (it == doc.end())
    throw InstanceError(std::string(path) + ": missing \"" + key + "\"");
  return *it;
}

Rational exact_entry(const json& v, std::size_t i, std::size_t j) {
  std::ostringstream at;
  at << "metric.dist[" << i << "][" << j << "]";
  if (v.is_number_integer())
    return Rational(v.get<long long>());
  if (v.is_string()) {
    if (auto r = parse_rational(v.get<std::string>())) return *r;
    throw InstanceError(at.str() + ": cannot parse \"" +
                        v.get<std::string>() + "\" as a rational");
  }
  if (v.is_number())
    throw InstanceError(at.str() +
                        ": exact instances take integers or rational "
                        "strings, not float literals");
  throw InstanceError(at.str() + ": expected a number or rational string");
}

double float_entry(const json& v, std::size_t i, std::size_t j) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto r = parse_rational(v.get<std::string>())) return to_double(*r);
  }
  std::ostringstream os;
  os << "metric.dist[" << i << "][" << j << "]: expected a number";
  throw InstanceError(os.str());
}

SpacePtr load_matrix_instance(const json& doc, const json& metric,
                              bool exact, bool trusted) {
  const json& points_json = member(doc, "points", "instance");
  if (!points_json.is_array() || points_json.empty())
    throw InstanceError("points: expected a nonempty array");
  std::vector<json> points(points_json.begin(), points_json.end());
  const std::size_t n = points.size();

  const json& rows = member(metric, "dist", "metric");
  if (!rows.is_array() || rows.size() != n)
    throw InstanceError("metric.dist: expected " + std::to_string(n) +
                        " rows");
  auto for_each_entry = [&](auto&& sink) {
    for (std::size_t i = 0; i < n; ++i) {
      const json& row = rows[i];
      if (!row.is_array() || row.size() != n)
        throw InstanceError("metric.dist[" + std::to_string(i) +
                            "]: expected " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) sink(i, j, row[j]);
    }
  };
  if (exact) {
    std::vector<Rational> dist(n * n);
    for_each_entry([&](std::size_t i, std::size_t j, const json& v) {
      dist[i * n + j] = exact_entry(v, i, j);
    });
    return std::make_shared<FiniteMetricSpace>(
        FiniteMetricSpace::from_matrix_exact(std::move(points),
                                             std::move(dist), trusted));
  }
  std::vector<double> dist(n * n);
  for_each_entry([&](std::size_t i, std::size_t j, const json& v) {
    dist[i * n + j] = float_entry(v, i, j);
  });
  return std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::from_matrix(
      std::move(points), std::move(dist), trusted));
}

SpacePtr load_grid_instance(const json& metric, bool exact) {
  const json& rows_json = member(metric, "rows", "metric");
  const json& cols_json = member(metric, "cols", "metric");
  if (!rows_json.is_number_integer() || !cols_json.is_number_integer())
    throw InstanceError("metric.rows/cols: expected integers");
  const long long rows = rows_json.get<long long>();
  const long long cols = cols_json.get<long long>();
  if (rows < 1 || cols < 1)
    throw InstanceError("metric.rows/cols: must be >= 1");
  std::vector<json> points;
  points.reserve(static_cast<std::size_t>(rows * cols));
  for (long long c = 0; c < cols; ++c)
    for (long long r = 0; r < rows; ++r)
      points.push_back(json::array({c, r}));
  const std::size_t n = points.size();
  auto entry = [&](std::size_t i, std::size_t j) {
    const long long dc = points[i][0].get<long long>() -
                         points[j][0].get<long long>();
    const long long dr = points[i][1].get<long long>() -
                         points[j][1].get<long long>();
    return std::max(std::llabs(dc), std::llabs(dr));
  };
  // Integer matrix, triangle inequality holds by construction.
  if (exact) {
    std::vector<Rational> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dist[i * n + j] = Rational(entry(i, j));
    return std::make_shared<FiniteMetricSpace>(
        FiniteMetricSpace::from_matrix_exact(std::move(points),
                                             std::move(dist), true));
  }
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist[i * n + j] = static_cast<double>(entry(i, j));
  return std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::from_matrix(
      std::move(points), std::move(dist), true));
}

SpacePtr load_normed_instance(const json& metric, bool exact, bool trusted) {
  if (exact)
    throw InstanceError(
        "normed instances are float-only; use an explicit exact matrix");
  NormedInstance inst;
  inst.norm = norm_kind_from_string(
      member(metric, "norm", "metric").get<std::string>());
  const json& vecs = member(metric, "vectors", "metric");
  if (!vecs.is_array() || vecs.empty())
    throw InstanceError("metric.vectors: expected a nonempty array");
  for (const json& v : vecs) {
    if (!v.is_array())
      throw InstanceError("metric.vectors: entries must be arrays");
    inst.vectors.push_back(v.get<std::vector<double>>());
  }
  inst.dimension = inst.vectors.front().size();
  return inst.to_metric_space(trusted);
}

}  // namespace

SpacePtr load_instance(const json& doc) {
  const json& metric = member(doc, "metric", "instance");
  const std::string kind = member(metric, "kind", "metric").get<std::string>();
  const bool exact = doc.is_object() && doc.value("exact", false);
  const bool trusted = doc.is_object() && doc.value("trusted", false);
  if (kind == "matrix") return load_matrix_instance(doc, metric, exact,
                                                    trusted);
  if (kind == "grid_linf") return load_grid_instance(metric, exact);
  if (kind == "normed") return load_normed_instance(metric, exact, trusted);
  throw InstanceError("metric.kind: unknown kind \"" + kind + "\"");
}

json instance_to_json(const FiniteMetricSpace& space) {
  json doc = json::object();
  doc["points"] = json(space.points());
  const std::size_t n = space.size();
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      if (space.exact())
        row.push_back(rational_to_string(space.dist_exact(i, j)));
      else
        row.push_back(space.dist(i, j));
    }
    rows.push_back(std::move(row));
  }
  doc["metric"] = json{{"kind", "matrix"}, {"dist", std::move(rows)}};
  if (space.exact()) doc["exact"] = true;
  return doc;
}

std::shared_ptr<const FiniteMetricSpace> NormedInstance::to_metric_space(
    bool trusted) const {
  std::vector<json> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.size() != dimension)
      throw InstanceError("normed instance vector has wrong dimension");
    points.push_back(json(v));
  }
  const std::size_t n = vectors.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist[i * n + j] = norm_dist(norm, vectors[i], vectors[j]);
  // Norm-induced distances satisfy the triangle inequality by construction;
  // the scan still runs unless the caller trusts the sample.
  return std::make_shared<FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(std::move(points), std::move(dist),
                                     trusted));
}

}  // namespace isec

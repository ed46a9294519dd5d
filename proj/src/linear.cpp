#include "isec/linear.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace isec {

namespace {

constexpr double kSectionTol = 1e-10;
constexpr double kFiberTol = 1e-6;
constexpr double kLpFeasTol = 1e-9;

Eigen::VectorXd parse_vector(const json& node, std::size_t dim,
                             const std::string& path) {
  if (!node.is_array() || node.size() != dim)
    throw InstanceError(path + ": expected an array of " +
                        std::to_string(dim) + " numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const json& e = node[i];
    if (!e.is_number())
      throw InstanceError(path + "[" + std::to_string(i) + "]: not a number");
    const double x = e.get<double>();
    if (!std::isfinite(x))
      throw InstanceError(path + "[" + std::to_string(i) + "]: not finite");
    v[static_cast<Eigen::Index>(i)] = x;
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

bool same_quotient(const LinearFibration& a, const LinearFibration& b) {
  if (a.ambient_dim() != b.ambient_dim() ||
      a.target_dim() != b.target_dim() || a.norm() != b.norm() ||
      a.grid_size() != b.grid_size() || a.scale() != b.scale())
    return false;
  if (!(a.A().array() == b.A().array()).all()) return false;
  for (std::size_t g = 0; g < a.grid_size(); ++g)
    if (!(a.grid_point(g).array() == b.grid_point(g).array()).all())
      return false;
  return true;
}

void require_same_quotient(const LinearSection& phi, const LinearSection& eta,
                           const char* what) {
  if (!same_quotient(phi.fibration(), eta.fibration()))
    throw PreconditionError(std::string(what) +
                            " needs sections of one fibration");
}

// min c.u over {u : G u <= h}, G with more rows than columns and a pointed,
// bounded-below feasible set: the optimum sits at a basic point (some
// square subsystem active), so enumerate those.
double lp_min_basic(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                    const Eigen::VectorXd& c) {
  const std::size_t rows = static_cast<std::size_t>(G.rows());
  const std::size_t d = static_cast<std::size_t>(G.cols());
  std::vector<char> pick(rows, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(d), 1);
  bool found = false;
  double best = 0.0;
  do {
    Eigen::MatrixXd Gs(d, d);
    Eigen::VectorXd hs(d);
    std::size_t r = 0;
    for (std::size_t i = 0; i < rows; ++i)
      if (pick[i]) {
        Gs.row(static_cast<Eigen::Index>(r)) = G.row(static_cast<Eigen::Index>(i));
        hs[static_cast<Eigen::Index>(r)] = h[static_cast<Eigen::Index>(i)];
        ++r;
      }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(Gs);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd u = lu.solve(hs);
    if (((G * u - h).array() > kLpFeasTol).any()) continue;
    const double value = c.dot(u);
    if (!found || value < best) {
      best = value;
      found = true;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  if (!found) throw Error("affine fiber distance: no feasible basic point");
  return best;
}

// min ||v0 + N z|| over z, for the l1 / linf norms, as a small LP.
double min_norm_over_affine(NormKind k, const Eigen::VectorXd& v0,
                            const Eigen::MatrixXd& N) {
  const Eigen::Index n = v0.size();
  const Eigen::Index m = N.cols();
  if (k == NormKind::L1) {
    const Eigen::Index d = m + n;
    Eigen::MatrixXd G(2 * n, d);
    Eigen::VectorXd h(2 * n);
    G.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      G.block(2 * i, 0, 1, m) = N.row(i);
      G(2 * i, m + i) = -1.0;
      h[2 * i] = -v0[i];
      G.block(2 * i + 1, 0, 1, m) = -N.row(i);
      G(2 * i + 1, m + i) = -1.0;
      h[2 * i + 1] = v0[i];
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    c.tail(n).setOnes();
    return lp_min_basic(G, h, c);
  }
  const Eigen::Index d = m + 1;
  Eigen::MatrixXd G(2 * n, d);
  Eigen::VectorXd h(2 * n);
  G.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    G.block(2 * i, 0, 1, m) = N.row(i);
    G(2 * i, m) = -1.0;
    h[2 * i] = -v0[i];
    G.block(2 * i + 1, 0, 1, m) = -N.row(i);
    G(2 * i + 1, m) = -1.0;
    h[2 * i + 1] = v0[i];
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  c[m] = 1.0;
  return lp_min_basic(G, h, c);
}

}  // namespace

double vector_norm(NormKind k, const Eigen::VectorXd& v) {
  return norm_value(k, std::span<const double>(v.data(),
                                               static_cast<std::size_t>(v.size())));
}

std::shared_ptr<const LinearFibration> LinearFibration::make(
    Eigen::MatrixXd A, NormKind norm, std::vector<Eigen::VectorXd> y_grid,
    double scale) {
  if (A.rows() < 1 || A.cols() < 1)
    throw InstanceError("linear.A: matrix must be nonempty");
  if (A.rows() > A.cols())
    throw InstanceError("linear.A: more rows than columns (k must be <= n)");
  if (!A.allFinite()) throw InstanceError("linear.A: entries must be finite");
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < A.rows())
    throw InstanceError("linear.A: matrix is rank-deficient");
  if (y_grid.empty())
    throw InstanceError("linear.y_grid: at least one grid point required");
  for (std::size_t g = 0; g < y_grid.size(); ++g) {
    if (y_grid[g].size() != A.rows())
      throw InstanceError("linear.y_grid[" + std::to_string(g) +
                          "]: expected dimension " + std::to_string(A.rows()));
    for (std::size_t g2 = 0; g2 < g; ++g2)
      if ((y_grid[g].array() == y_grid[g2].array()).all())
        throw InstanceError("linear.y_grid[" + std::to_string(g) +
                            "]: duplicate of grid point " + std::to_string(g2));
  }
  if (!std::isfinite(scale) || scale == 0.0)
    throw InstanceError("linear.scale: must be a nonzero real");
  auto fib = std::shared_ptr<LinearFibration>(new LinearFibration());
  fib->A_ = std::move(A);
  fib->norm_ = norm;
  fib->y_grid_ = std::move(y_grid);
  fib->scale_ = scale;
  return fib;
}

std::shared_ptr<const LinearFibration> LinearFibration::from_json(
    const json& doc) {
  if (!doc.is_object()) throw InstanceError("linear: expected an object");
  if (!doc.contains("A") || !doc["A"].is_array() || doc["A"].empty())
    throw InstanceError("linear.A: expected a nonempty array of rows");
  const json& rows = doc["A"];
  if (!rows[0].is_array() || rows[0].empty())
    throw InstanceError("linear.A[0]: expected a nonempty row");
  const std::size_t n = rows[0].size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows.size(); ++i)
    A.row(static_cast<Eigen::Index>(i)) =
        parse_vector(rows[i], n, "linear.A[" + std::to_string(i) + "]");
  std::string norm = doc.value("norm", std::string("l2"));
  if (!doc.contains("y_grid") || !doc["y_grid"].is_array())
    throw InstanceError("linear.y_grid: expected an array of k-vectors");
  std::vector<Eigen::VectorXd> grid;
  grid.reserve(doc["y_grid"].size());
  for (std::size_t g = 0; g < doc["y_grid"].size(); ++g)
    grid.push_back(parse_vector(doc["y_grid"][g], rows.size(),
                                "linear.y_grid[" + std::to_string(g) + "]"));
  double scale = 1.0;
  if (doc.contains("scale")) {
    if (!doc["scale"].is_number())
      throw InstanceError("linear.scale: expected a number");
    scale = doc["scale"].get<double>();
  }
  if (!(scale > 0.0))
    throw InstanceError("linear.scale: must be positive");
  NormKind kind = NormKind::L2;
  try {
    kind = norm_kind_from_string(norm);
  } catch (const InstanceError&) {
    throw InstanceError("linear.norm: unknown norm '" + norm + "'");
  }
  return make(std::move(A), kind, std::move(grid), scale);
}

json LinearFibration::to_json() const {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A_.rows(); ++i)
    rows.push_back(vector_to_json(A_.row(i).transpose()));
  json grid = json::array();
  for (const auto& y : y_grid_) grid.push_back(vector_to_json(y));
  return json{{"A", rows},
              {"norm", to_string(norm_)},
              {"y_grid", grid},
              {"scale", scale_}};
}

bool LinearFibration::on_fiber(const Eigen::VectorXd& x, std::size_t g,
                               double tol) const {
  if (x.size() != A_.cols())
    throw DomainError("fiber test on a vector of wrong dimension");
  if (g >= y_grid_.size())
    throw InstanceError("grid index out of range");
  const Eigen::VectorXd r = A_ * x - scale_ * y_grid_[g];
  return vector_norm(NormKind::Linf, r) <= tol;
}

std::shared_ptr<const LinearFibration> LinearFibration::rescaled(
    double new_scale) const {
  return make(A_, norm_, y_grid_, new_scale);
}

double dist_to_affine_fiber(const LinearFibration& fib,
                            const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  if (x.size() != static_cast<Eigen::Index>(fib.ambient_dim()) ||
      y.size() != static_cast<Eigen::Index>(fib.target_dim()))
    throw DomainError("fiber distance on vectors of wrong dimension");
  const Eigen::VectorXd r = fib.A() * x - fib.scale() * y;
  if (fib.norm() == NormKind::L2) {
    // Minimal-norm correction: A^T (A A^T)^{-1} r.
    const Eigen::MatrixXd gram = fib.A() * fib.A().transpose();
    const Eigen::VectorXd w = gram.llt().solve(r);
    return (fib.A().transpose() * w).norm();
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(fib.A());
  const Eigen::VectorXd v0 =
      fib.A().completeOrthogonalDecomposition().solve(r);
  if (lu.dimensionOfKernel() == 0) return vector_norm(fib.norm(), v0);
  const Eigen::MatrixXd N = lu.kernel();
  return min_norm_over_affine(fib.norm(), v0, N);
}

LinearSection LinearSection::build(LinearFibrationPtr fib,
                                   std::vector<Eigen::VectorXd> choice) {
  if (!fib) throw PreconditionError("section without a fibration");
  if (choice.size() != fib->grid_size())
    throw InstanceError("section choice must cover every grid point");
  for (std::size_t g = 0; g < choice.size(); ++g) {
    if (choice[g].size() != static_cast<Eigen::Index>(fib->ambient_dim()))
      throw InstanceError("section.choice[" + std::to_string(g) +
                          "]: expected dimension " +
                          std::to_string(fib->ambient_dim()));
    if (!fib->on_fiber(choice[g], g, kSectionTol))
      throw InstanceError("section.choice[" + std::to_string(g) +
                          "]: point is off its fiber");
  }
  return LinearSection(std::move(fib), std::move(choice));
}

LinearSection LinearSection::from_json(LinearFibrationPtr fib,
                                       const json& doc) {
  if (!doc.is_object() || !doc.contains("choice") ||
      !doc["choice"].is_object())
    throw InstanceError("section.choice: expected an object");
  const json& ch = doc["choice"];
  for (const auto& [key, value] : ch.items()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(key);
    } catch (const std::exception&) {
      throw InstanceError("section.choice: unknown grid index '" + key + "'");
    }
    if (idx >= fib->grid_size())
      throw InstanceError("section.choice: unknown grid index '" + key + "'");
    (void)value;
  }
  std::vector<Eigen::VectorXd> choice;
  choice.reserve(fib->grid_size());
  for (std::size_t g = 0; g < fib->grid_size(); ++g) {
    const std::string key = std::to_string(g);
    if (!ch.contains(key))
      throw InstanceError("section.choice: grid index " + key +
                          " has no point");
    choice.push_back(parse_vector(ch[key], fib->ambient_dim(),
                                  "section.choice[" + key + "]"));
  }
  return build(std::move(fib), std::move(choice));
}

json LinearSection::to_json() const {
  json ch = json::object();
  for (std::size_t g = 0; g < choice_.size(); ++g)
    ch[std::to_string(g)] = vector_to_json(choice_[g]);
  return json{{"choice", ch}};
}

std::vector<PairConstraint<double>> linear_relative_constraints(
    const LinearSection& phi, const LinearSection& psi, std::size_t y_hat) {
  require_same_quotient(phi, psi, "pointed comparison");
  if (y_hat >= phi.grid_size())
    throw InstanceError("base grid index out of range");
  if (vector_norm(NormKind::Linf, phi.at(y_hat) - psi.at(y_hat)) > kSectionTol)
    throw PreconditionError("sections disagree at base grid point " +
                            std::to_string(y_hat));
  const NormKind k = phi.fibration().norm();
  std::vector<PairConstraint<double>> out(phi.grid_size());
  for (std::size_t g = 0; g < phi.grid_size(); ++g) {
    out[g].a = vector_norm(k, phi.at(g) - psi.at(g));
    out[g].b = vector_norm(k, psi.at(y_hat) - psi.at(g));
    out[g].y1 = g;
    out[g].y2 = g;
  }
  return out;
}

bool is_linear_relative_qi(const LinearSection& phi, const LinearSection& psi,
                           std::size_t y_hat, QIConstants c) {
  for (const auto& pc : linear_relative_constraints(phi, psi, y_hat))
    if (pair_violates(pc.a, pc.b, c.L, c.M)) return false;
  return true;
}

QIConstants linear_relative_witness(const LinearSection& phi,
                                    const LinearSection& psi,
                                    std::size_t y_hat) {
  const auto cons = linear_relative_constraints(phi, psi, y_hat);
  const Frontier f = build_frontier(cons);
  const double L = std::max(1.0, snap_constant_up(f.L_flat.value_or(1.0)));
  double worst = 0.0;
  for (const auto& pc : cons)
    worst = std::max(worst, pair_slack(pc.a, pc.b, L));
  return QIConstants(L, std::max(0.0, snap_constant_up(worst)));
}

LinearSection convex_combination(const LinearSection& phi,
                                 const LinearSection& eta, double t) {
  require_same_quotient(phi, eta, "convex combination");
  if (!(t >= 0.0) || !(t <= 1.0))
    throw DomainError("convex combination requires t in [0, 1]");
  std::vector<Eigen::VectorXd> choice;
  choice.reserve(phi.grid_size());
  for (std::size_t g = 0; g < phi.grid_size(); ++g)
    choice.push_back(t * phi.at(g) + (1.0 - t) * eta.at(g));
  return LinearSection::build(phi.fibration_ptr(), std::move(choice));
}

LinearSection section_sum(const LinearSection& phi, const LinearSection& eta) {
  require_same_quotient(phi, eta, "section sum");
  std::vector<Eigen::VectorXd> choice;
  choice.reserve(phi.grid_size());
  for (std::size_t g = 0; g < phi.grid_size(); ++g)
    choice.push_back(phi.at(g) + eta.at(g));
  return LinearSection::build(
      phi.fibration().rescaled(2.0 * phi.fibration().scale()),
      std::move(choice));
}

LinearSection scalar_multiple(double beta, const LinearSection& phi) {
  if (!std::isfinite(beta) || beta == 0.0)
    throw DomainError(
        "scalar multiple by zero: the zero map is the adjoined element");
  std::vector<Eigen::VectorXd> choice;
  choice.reserve(phi.grid_size());
  for (std::size_t g = 0; g < phi.grid_size(); ++g)
    choice.push_back(beta * phi.at(g));
  return LinearSection::build(
      phi.fibration().rescaled(beta * phi.fibration().scale()),
      std::move(choice));
}

MaybeSection section_sum_ext(const MaybeSection& phi, const MaybeSection& eta) {
  if (!phi) return eta;
  if (!eta) return phi;
  return section_sum(*phi, *eta);
}

MaybeSection scalar_multiple_ext(double beta, const MaybeSection& phi) {
  if (!std::isfinite(beta)) throw DomainError("scalar must be finite");
  if (!phi || beta == 0.0) return std::nullopt;
  return scalar_multiple(beta, *phi);
}

QIConstants convex_combination_constants(double t, QIConstants phi_c,
                                         QIConstants eta_c) {
  if (!(t >= 0.0) || !(t <= 1.0))
    throw DomainError("convex combination requires t in [0, 1]");
  return QIConstants(t * (phi_c.L - eta_c.L) + eta_c.L, phi_c.M + eta_c.M);
}

QIConstants sum_membership_constants(double d1, QIConstants c1, double d2,
                                     QIConstants c2) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw DomainError("membership scales must be positive");
  return QIConstants((d1 * c1.L + d2 * c2.L) / (d1 + d2), c1.M + c2.M);
}

QIConstants scalar_membership_constants(double beta, QIConstants c1) {
  if (!std::isfinite(beta) || beta == 0.0)
    throw DomainError("membership scalar must be nonzero");
  return QIConstants(c1.L, std::abs(beta) * c1.M);
}

ConvexityCheck convexity_check(const LinearSection& phi,
                               const LinearSection& eta,
                               const LinearSection& psi, std::size_t y_hat,
                               double t, QIConstants phi_c, QIConstants eta_c,
                               double tol) {
  ConvexityCheck out;
  out.hypothesis_ok = is_linear_relative_qi(phi, psi, y_hat, phi_c) &&
                      is_linear_relative_qi(eta, psi, y_hat, eta_c);
  out.predicted = convex_combination_constants(t, phi_c, eta_c);
  const LinearSection w = convex_combination(phi, eta, t);
  out.conclusion_ok = is_linear_relative_qi(
      w, psi, y_hat, QIConstants(out.predicted.L, out.predicted.M + tol));
  return out;
}

SampledLinearInstance SampledLinearInstance::build(
    LinearFibrationPtr fib,
    std::vector<std::vector<Eigen::VectorXd>> fiber_samples) {
  if (!fib) throw PreconditionError("sampled instance without a fibration");
  if (fiber_samples.size() != fib->grid_size())
    throw InstanceError("fiber samples must cover every grid point");
  SampledLinearInstance inst;
  inst.fib = std::move(fib);
  inst.fiber_samples.resize(fiber_samples.size());
  for (std::size_t g = 0; g < fiber_samples.size(); ++g) {
    if (fiber_samples[g].empty())
      throw InstanceError("fiber_samples[" + std::to_string(g) +
                          "]: at least one sample required");
    for (const auto& x : fiber_samples[g]) {
      if (!inst.fib->on_fiber(x, g, kSectionTol))
        throw InstanceError("fiber_samples[" + std::to_string(g) +
                            "]: sample point is off its fiber");
      // Merge samples the metric layer cannot separate: derived instances
      // (sums, scalar multiples) produce the same mathematical point along
      // several arithmetic routes, and the roundings differ by a few ulp.
      bool dup = false;
      for (const auto& seen : inst.fiber_samples[g])
        dup = dup || (seen - x).cwiseAbs().maxCoeff() <= kSectionTol;
      if (!dup) inst.fiber_samples[g].push_back(x);
    }
  }
  return inst;
}

FibrationPtr materialize(const SampledLinearInstance& inst) {
  std::vector<json> points;
  std::vector<Eigen::VectorXd> coords;
  std::vector<LabelIndex> fiber_of;
  std::vector<json> labels;
  for (std::size_t g = 0; g < inst.fiber_samples.size(); ++g) {
    labels.push_back(json(g));
    for (const auto& x : inst.fiber_samples[g]) {
      points.push_back(vector_to_json(x));
      coords.push_back(x);
      fiber_of.push_back(g);
    }
  }
  const std::size_t n = coords.size();
  std::vector<double> dist(n * n, 0.0);
  const NormKind k = inst.fib->norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = vector_norm(k, coords[i] - coords[j]);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  // Norm distances satisfy the axioms by construction; floating-point
  // round-off can nick the triangle inequality by an ulp, so skip the
  // re-validation.
  SpacePtr space = std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(std::move(points), std::move(dist),
                                     /*trusted=*/true));
  return std::make_shared<const Fibration>(Fibration::build(
      std::move(space), std::move(labels), std::move(fiber_of)));
}

SampledLinearInstance sum_instance(const SampledLinearInstance& inst) {
  std::vector<std::vector<Eigen::VectorXd>> sums(inst.fiber_samples.size());
  for (std::size_t g = 0; g < inst.fiber_samples.size(); ++g)
    for (const auto& u : inst.fiber_samples[g])
      for (const auto& v : inst.fiber_samples[g]) sums[g].push_back(u + v);
  return SampledLinearInstance::build(
      inst.fib->rescaled(2.0 * inst.fib->scale()), std::move(sums));
}

SampledLinearInstance scaled_instance(const SampledLinearInstance& inst,
                                      double beta) {
  if (!std::isfinite(beta) || beta == 0.0)
    throw DomainError("instance scale must be nonzero");
  std::vector<std::vector<Eigen::VectorXd>> scaled(inst.fiber_samples.size());
  for (std::size_t g = 0; g < inst.fiber_samples.size(); ++g)
    for (const auto& u : inst.fiber_samples[g]) scaled[g].push_back(beta * u);
  return SampledLinearInstance::build(
      inst.fib->rescaled(beta * inst.fib->scale()), std::move(scaled));
}

Section materialized_section(const SampledLinearInstance& inst,
                             const FibrationPtr& fib,
                             const LinearSection& phi) {
  if (!same_quotient(*inst.fib, phi.fibration()))
    throw PreconditionError(
        "section belongs to a different quotient than the sampled instance");
  const FiniteMetricSpace& sp = fib->space();
  std::vector<PointIndex> choice(phi.grid_size());
  for (std::size_t g = 0; g < phi.grid_size(); ++g) {
    // Match by closeness, not by serialized id: the section's point and the
    // stored sample may be different roundings of one mathematical point.
    const Eigen::VectorXd* match = nullptr;
    for (const auto& s : inst.fiber_samples[g])
      if ((s - phi.at(g)).cwiseAbs().maxCoeff() <= kSectionTol) {
        match = &s;
        break;
      }
    if (!match)
      throw PreconditionError("section point at grid index " +
                              std::to_string(g) +
                              " is not among the fiber samples");
    choice[g] = sp.require(vector_to_json(*match));
  }
  return Section::build(fib, std::move(choice));
}

FiberIdentityCheck fiber_identity_check(const SampledLinearInstance& inst,
                                        std::size_t g, double lambda) {
  if (g >= inst.fib->grid_size())
    throw InstanceError("grid index out of range");
  if (!std::isfinite(lambda) || lambda == 0.0)
    throw DomainError("fiber identity requires a nonzero lambda");
  const SampledLinearInstance scaled = scaled_instance(inst, lambda);
  const LinearFibration& base = *inst.fib;
  const auto rescaled = base.rescaled(lambda * base.scale());
  FiberIdentityCheck out;
  std::size_t index = 0;
  for (std::size_t gg = 0; gg < scaled.fiber_samples.size(); ++gg)
    for (const auto& u : scaled.fiber_samples[gg]) {
      // pi^{-1}(lambda y): image under the base map equals lambda*(scale*y).
      const Eigen::VectorXd target =
          lambda * (base.scale() * base.grid_point(g));
      const Eigen::VectorXd r = base.A() * u - target;
      if (vector_norm(NormKind::Linf, r) <= kFiberTol)
        out.via_base.push_back(index);
      // (1/lambda pi)^{-1}(y): the rescaled fibration's own fiber test.
      if (rescaled->on_fiber(u, g, kFiberTol))
        out.via_rescaled.push_back(index);
      ++index;
    }
  out.equal = out.via_base == out.via_rescaled;
  return out;
}

}  // namespace isec

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "isec/fibration.hpp"
#include "isec/qi.hpp"

namespace isec {

/// norm_value() on an Eigen vector.
double vector_norm(NormKind k, const Eigen::VectorXd& v);

/// Quotient data pi(x) = A x on a normed R^n, together with a finite sample
/// of the target space and a scale field: the object models the quotient
/// (1/scale)*pi, whose fiber over a grid point y is {x : A x = scale*y}.
/// Loaded instances carry scale > 0; algebra on sections produces derived
/// fibrations whose scale may be any nonzero real.
class LinearFibration {
 public:
  /// Validates shape, full row rank of A, and scale != 0.
  static std::shared_ptr<const LinearFibration> make(
      Eigen::MatrixXd A, NormKind norm, std::vector<Eigen::VectorXd> y_grid,
      double scale);

  /// Parses {"A": [[...]], "norm": "l1|l2|linf", "y_grid": [[...]],
  /// "scale": positive}. Path-qualified InstanceError on schema problems.
  static std::shared_ptr<const LinearFibration> from_json(const json& doc);
  json to_json() const;

  std::size_t ambient_dim() const { return static_cast<std::size_t>(A_.cols()); }
  std::size_t target_dim() const { return static_cast<std::size_t>(A_.rows()); }
  std::size_t grid_size() const { return y_grid_.size(); }
  const Eigen::MatrixXd& A() const { return A_; }
  NormKind norm() const { return norm_; }
  const Eigen::VectorXd& grid_point(std::size_t g) const { return y_grid_[g]; }
  double scale() const { return scale_; }

  /// Whether x lies on the fiber over grid point g, i.e. A x = scale*y_g
  /// within `tol` (max-abs residual).
  bool on_fiber(const Eigen::VectorXd& x, std::size_t g, double tol) const;

  /// Same quotient map and grid at a different scale.
  std::shared_ptr<const LinearFibration> rescaled(double new_scale) const;

 private:
  LinearFibration() = default;
  Eigen::MatrixXd A_;
  NormKind norm_ = NormKind::L2;
  std::vector<Eigen::VectorXd> y_grid_;
  double scale_ = 1.0;
};

using LinearFibrationPtr = std::shared_ptr<const LinearFibration>;

/// Distance from x to the fiber {v : A v = scale*y} in the fibration's
/// norm. l2 uses the closed-form minimal-norm correction A^T (A A^T)^{-1} r;
/// l1/linf solve the small exact linear program over the fiber
/// parametrization by enumerating basic points.
double dist_to_affine_fiber(const LinearFibration& fib,
                            const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y);

/// One chosen fiber point per grid index: A*choice[g] = scale*y_g within
/// 1e-10, checked at construction.
class LinearSection {
 public:
  static LinearSection build(LinearFibrationPtr fib,
                             std::vector<Eigen::VectorXd> choice);
  /// Parses {"choice": {"<grid index>": [coords...], ...}}; every index
  /// must be covered.
  static LinearSection from_json(LinearFibrationPtr fib, const json& doc);
  json to_json() const;

  const LinearFibration& fibration() const { return *fib_; }
  const LinearFibrationPtr& fibration_ptr() const { return fib_; }
  const Eigen::VectorXd& at(std::size_t g) const { return choice_[g]; }
  std::size_t grid_size() const { return choice_.size(); }

 private:
  LinearSection(LinearFibrationPtr fib, std::vector<Eigen::VectorXd> choice)
      : fib_(std::move(fib)), choice_(std::move(choice)) {}
  LinearFibrationPtr fib_;
  std::vector<Eigen::VectorXd> choice_;
};

// ---- pointed comparison on the sampled grid --------------------------------

/// a = ||phi(y) - psi(y)||, b = ||psi(y_hat) - psi(y)|| per grid point.
/// Requires one fibration and phi(y_hat) = psi(y_hat) within 1e-10.
std::vector<PairConstraint<double>> linear_relative_constraints(
    const LinearSection& phi, const LinearSection& psi, std::size_t y_hat);

bool is_linear_relative_qi(const LinearSection& phi, const LinearSection& psi,
                           std::size_t y_hat, QIConstants c);

/// Smallest admissible constants on the sampled grid (frontier zero point
/// with its additive constant, rounded outward onto the 1/1024 lattice).
QIConstants linear_relative_witness(const LinearSection& phi,
                                    const LinearSection& psi,
                                    std::size_t y_hat);

// ---- the three algebraic operations ----------------------------------------

/// t*phi + (1-t)*eta on the shared fibration; DomainError for t outside
/// [0,1], PreconditionError for mismatched fibrations.
LinearSection convex_combination(const LinearSection& phi,
                                 const LinearSection& eta, double t);

/// phi + eta, attached to the fibration rescaled to 2*scale.
LinearSection section_sum(const LinearSection& phi, const LinearSection& eta);

/// beta*phi, attached to the fibration rescaled to beta*scale. beta = 0 is
/// a DomainError: the zero map is the adjoined element, not a product.
LinearSection scalar_multiple(double beta, const LinearSection& phi);

/// The algebra extended by the adjoined zero map (nullopt).
using MaybeSection = std::optional<LinearSection>;
MaybeSection section_sum_ext(const MaybeSection& phi, const MaybeSection& eta);
MaybeSection scalar_multiple_ext(double beta, const MaybeSection& phi);

// ---- predicted constants ---------------------------------------------------

/// Constants for t*phi + (1-t)*eta relative to psi when phi carries
/// (L_phi, M_phi) and eta carries (L_eta, M_eta):
/// (t*(L_phi - L_eta) + L_eta, M_phi + M_eta).
QIConstants convex_combination_constants(double t, QIConstants phi_c,
                                         QIConstants eta_c);

/// Constants for phi + eta relative to (d1+d2)*psi when phi is
/// (L1, M1)-comparable to d1*psi and eta is (L2, M2)-comparable to d2*psi:
/// ((d1*L1 + d2*L2) / (d1 + d2), M1 + M2).
QIConstants sum_membership_constants(double d1, QIConstants c1, double d2,
                                     QIConstants c2);

/// Constants for beta*phi relative to beta*d1*psi: (L1, |beta|*M1).
QIConstants scalar_membership_constants(double beta, QIConstants c1);

/// One convexity instance checked end to end: validates both hypothesis
/// memberships, builds w = t*phi + (1-t)*eta, and tests w against the
/// predicted constants.
struct ConvexityCheck {
  QIConstants predicted;
  bool hypothesis_ok = false;
  bool conclusion_ok = false;
};
ConvexityCheck convexity_check(const LinearSection& phi,
                               const LinearSection& eta,
                               const LinearSection& psi, std::size_t y_hat,
                               double t, QIConstants phi_c, QIConstants eta_c,
                               double tol = 0.0);

// ---- finite samples of a linear instance -----------------------------------

/// A finite sample of each fiber (so fiber diameters are finite and the
/// bounded-fiber hypotheses become checkable). Every sample point must lie
/// on its fiber within 1e-10.
struct SampledLinearInstance {
  LinearFibrationPtr fib;
  std::vector<std::vector<Eigen::VectorXd>> fiber_samples;  // per grid index

  static SampledLinearInstance build(
      LinearFibrationPtr fib,
      std::vector<std::vector<Eigen::VectorXd>> fiber_samples);
};

/// The sampled instance as a concrete metric space with one label per grid
/// index: point ids are coordinate arrays, distances taken in the
/// fibration's norm, labels are the grid indices.
FibrationPtr materialize(const SampledLinearInstance& inst);

/// The instance for phi + psi: fiber samples are deduplicated Minkowski
/// sums F_g + F_g on the 2*scale fibration.
SampledLinearInstance sum_instance(const SampledLinearInstance& inst);

/// The instance for beta*phi: samples beta*F_g on the beta*scale fibration.
SampledLinearInstance scaled_instance(const SampledLinearInstance& inst,
                                      double beta);

/// Section of the materialized fibration choosing this linear section's
/// points; every choice must land on one of the instance's sample points
/// (coordinates matched within 1e-10, since a derived section's arithmetic
/// may round differently from the stored sample).
Section materialized_section(const SampledLinearInstance& inst,
                             const FibrationPtr& fib,
                             const LinearSection& phi);

/// Set equality of the fiber over grid point g computed two ways: points
/// whose image under the base quotient equals lambda*(scale*y_g), versus
/// membership in the lambda-rescaled fibration's fiber. Returns the two
/// index sets for reporting.
struct FiberIdentityCheck {
  std::vector<std::size_t> via_base;
  std::vector<std::size_t> via_rescaled;
  bool equal = false;
};
FiberIdentityCheck fiber_identity_check(const SampledLinearInstance& inst,
                                        std::size_t g, double lambda);

}  // namespace isec

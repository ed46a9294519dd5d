#include "isec/oracles.hpp"

#include <algorithm>

namespace isec {

bool oracle_is_qi(const Section& phi, double L, double M) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  for (std::size_t y1 = 0; y1 < fib.label_count(); ++y1)
    for (std::size_t y2 = 0; y2 < fib.label_count(); ++y2) {
      const double a = sp.dist(phi.point_of(y1), phi.point_of(y2));
      double b = sp.dist(phi.point_of(y1), fib.fiber(y2)[0]);
      for (const PointIndex p : fib.fiber(y2))
        b = std::min(b, sp.dist(phi.point_of(y1), p));
      if (a > L * b + M) return false;
    }
  return true;
}

double oracle_minimal_M(const Section& phi, double L) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  double worst = 0.0;
  for (std::size_t y1 = 0; y1 < fib.label_count(); ++y1)
    for (std::size_t y2 = 0; y2 < fib.label_count(); ++y2) {
      const double a = sp.dist(phi.point_of(y1), phi.point_of(y2));
      double b = sp.dist(phi.point_of(y1), fib.fiber(y2)[0]);
      for (const PointIndex p : fib.fiber(y2))
        b = std::min(b, sp.dist(phi.point_of(y1), p));
      worst = std::max(worst, a - L * b);
    }
  return worst;
}

Rational oracle_minimal_M_exact(const Section& phi, const Rational& L) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  Rational worst(0);
  for (std::size_t y1 = 0; y1 < fib.label_count(); ++y1)
    for (std::size_t y2 = 0; y2 < fib.label_count(); ++y2) {
      const Rational a = sp.dist_exact(phi.point_of(y1), phi.point_of(y2));
      Rational b = sp.dist_exact(phi.point_of(y1), fib.fiber(y2)[0]);
      for (const PointIndex p : fib.fiber(y2))
        b = std::min(b, sp.dist_exact(phi.point_of(y1), p));
      const Rational slack = a - L * b;
      worst = std::max(worst, slack);
    }
  return worst;
}

std::vector<std::pair<double, double>> oracle_frontier_scan(
    const Section& phi, const std::vector<double>& L_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(L_grid.size());
  for (const double L : L_grid) out.emplace_back(L, oracle_minimal_M(phi, L));
  return out;
}

bool oracle_cone_hit(const Section& phi, double L, double M) {
  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  for (std::size_t y1 = 0; y1 < fib.label_count(); ++y1)
    for (std::size_t y2 = 0; y2 < fib.label_count(); ++y2) {
      const PointIndex x = phi.point_of(y2);
      const PointIndex xp = phi.point_of(y1);
      double b = sp.dist(xp, fib.fiber(fib.fiber_of(x))[0]);
      for (const PointIndex p : fib.fiber(fib.fiber_of(x)))
        b = std::min(b, sp.dist(xp, p));
      if (L * b + M < sp.dist(xp, x)) return true;
    }
  return false;
}

double oracle_mass(const Section& phi, std::span<const PointIndex> set) {
  const Fibration& fib = phi.fibration();
  if (!fib.has_measure())
    throw ConfigError("pushforward mass requires a measure on the fibration");
  double total = 0.0;
  for (std::size_t y = 0; y < fib.label_count(); ++y)
    if (std::find(set.begin(), set.end(), phi.point_of(y)) != set.end())
      total += fib.weight(y);
  return total;
}

QIConstants oracle_relation_constants(const Section& phi, const Section& psi,
                                      LabelIndex y_hat,
                                      const std::vector<double>& L_grid) {
  if (phi.fibration_ptr() != psi.fibration_ptr())
    throw PreconditionError("sections live on different fibrations");
  if (y_hat >= phi.label_count())
    throw InstanceError("base label index out of range");
  if (phi.point_of(y_hat) != psi.point_of(y_hat))
    throw PreconditionError("sections disagree at base label " +
                            phi.fibration().label_key(y_hat));
  if (L_grid.empty()) throw DomainError("empty L grid");
  const FiniteMetricSpace& sp = phi.space();
  const PointIndex base = psi.point_of(y_hat);
  double last_M = 0.0;
  for (const double L : L_grid) {
    double worst = 0.0;
    for (std::size_t y = 0; y < phi.label_count(); ++y) {
      const double a = sp.dist(phi.point_of(y), psi.point_of(y));
      const double b = std::min(sp.dist(base, psi.point_of(y)),
                                sp.dist(base, phi.point_of(y)));
      worst = std::max(worst, a - L * b);
    }
    if (worst <= 0.0) return QIConstants(L, 0.0);
    last_M = worst;
  }
  return QIConstants(L_grid.back(), last_M);
}

std::vector<Section> enumerate_sections(const FibrationPtr& fib) {
  std::size_t count = 1;
  for (std::size_t y = 0; y < fib->label_count(); ++y) {
    count *= fib->fiber(y).size();
    if (count > (std::size_t{1} << 22))
      throw DomainError("section space too large to enumerate");
  }
  std::vector<Section> out;
  out.reserve(count);
  std::vector<std::size_t> odometer(fib->label_count(), 0);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<PointIndex> choice(fib->label_count());
    for (std::size_t y = 0; y < fib->label_count(); ++y)
      choice[y] = fib->fiber(y)[odometer[y]];
    out.push_back(Section::build(fib, std::move(choice)));
    for (std::size_t y = fib->label_count(); y-- > 0;) {
      if (++odometer[y] < fib->fiber(y).size()) break;
      odometer[y] = 0;
    }
  }
  return out;
}

}  // namespace isec

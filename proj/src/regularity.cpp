#include "isec/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "isec/errors.hpp"

namespace isec {

namespace {

void require_radii(double r0, std::span<const double> r_grid,
                   const char* what) {
  if (!(r0 > 0.0)) throw DomainError(std::string(what) + " requires r0 > 0");
  if (r_grid.empty())
    throw DomainError(std::string(what) + " requires a nonempty radius grid");
  for (double r : r_grid)
    if (!(r > r0))
      throw DomainError(std::string(what) +
                        ": every radius must exceed r0");
}

/// Labels met by a point set, as flags.  Scratch vector supplied by the
/// caller so sweeps over many balls reuse one allocation.
void mark_labels(const Fibration& fib, std::span<const PointIndex> a,
                 std::vector<char>& hit) {
  hit.assign(fib.label_count(), 0);
  for (PointIndex x : a) hit[fib.fiber_of(x)] = 1;
}

}  // namespace

double projected_mass(const Fibration& fib, std::span<const PointIndex> a) {
  if (!fib.has_measure())
    throw ConfigError("projected mass requires a measure on the fibration");
  std::vector<char> hit;
  mark_labels(fib, a, hit);
  double total = 0.0;
  for (LabelIndex y = 0; y < fib.label_count(); ++y)
    if (hit[y]) total += fib.weight(y);
  return total;
}

HomogeneityResult homogeneity_constant(const Fibration& fib, double r0,
                                       std::span<const double> r_grid) {
  if (!fib.has_measure())
    throw ConfigError("homogeneity requires a measure on the fibration");
  require_radii(r0, r_grid, "homogeneity");

  const FiniteMetricSpace& sp = fib.space();
  // Projected ball masses, point-major then radius-minor, computed once.
  std::vector<double> mass(sp.size() * r_grid.size());
  for (PointIndex x = 0; x < sp.size(); ++x)
    for (std::size_t k = 0; k < r_grid.size(); ++k)
      mass[x * r_grid.size() + k] = projected_mass(fib, sp.ball(x, r_grid[k]));

  HomogeneityResult res;
  double best = -1.0;
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    std::span<const PointIndex> fiber = fib.fiber(y);
    for (PointIndex x : fiber)
      for (PointIndex xp : fiber) {
        if (x == xp) continue;
        for (std::size_t k = 0; k < r_grid.size(); ++k) {
          const double m = mass[x * r_grid.size() + k];
          const double mp = mass[xp * r_grid.size() + k];
          if (mp == 0.0) {
            if (m > 0.0 && res.feasible) {
              // No finite C gives m <= C * 0; remember the first such pair.
              res.feasible = false;
              res.witness_x = x;
              res.witness_x_prime = xp;
              res.witness_r = r_grid[k];
              res.witness_mass_x = m;
              res.witness_mass_x_prime = mp;
            }
            continue;
          }
          if (m == 0.0) continue;  // 0 <= C * mp holds for free
          const double ratio = m / mp;
          if (ratio > best) {
            best = ratio;
            if (res.feasible) {
              res.witness_x = x;
              res.witness_x_prime = xp;
              res.witness_r = r_grid[k];
              res.witness_mass_x = m;
              res.witness_mass_x_prime = mp;
            }
          }
        }
      }
  }
  // Both orderings of every pair were scanned, so any comparison at all
  // forces best >= 1; no comparison (all fibers singletons) leaves C = 1.
  if (res.feasible && best > 0.0) res.C = std::max(1.0, best);
  return res;
}

BallInclusionReport ball_inclusion_check(const Section& phi, QIConstants c,
                                         std::span<const double> r_grid) {
  if (r_grid.empty())
    throw DomainError("ball inclusion requires a nonempty radius grid");
  for (double r : r_grid)
    if (!(r > 0.0)) throw DomainError("ball inclusion requires positive radii");
  if (auto v = qi_violation(phi, c))
    throw PreconditionError(
        "ball inclusion needs a section satisfying the declared constants; "
        "labels " + phi.fibration().label_key(v->y1) + ", " +
        phi.fibration().label_key(v->y2) + " violate them");

  const Fibration& fib = phi.fibration();
  const FiniteMetricSpace& sp = fib.space();
  std::vector<char> is_graph(sp.size(), 0);
  for (LabelIndex y = 0; y < fib.label_count(); ++y)
    is_graph[phi.point_of(y)] = 1;

  BallInclusionReport rep;
  std::vector<char> small, mid, big;
  std::vector<PointIndex> graph_part;
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    const PointIndex p = phi.point_of(y);
    for (double r : r_grid) {
      mark_labels(fib, sp.ball(p, r / c.L), small);
      const std::vector<PointIndex> outer = sp.ball(p, r + c.M);
      graph_part.clear();
      for (PointIndex x : outer)
        if (is_graph[x]) graph_part.push_back(x);
      mark_labels(fib, graph_part, mid);
      mark_labels(fib, outer, big);
      for (LabelIndex lab = 0; lab < fib.label_count(); ++lab) {
        ++rep.comparisons;
        if (small[lab] && !mid[lab]) {
          rep.ok = false;
          if (!rep.failure) rep.failure = BallInclusionFailure{p, r, lab, 0};
        }
        ++rep.comparisons;
        if (mid[lab] && !big[lab]) {
          rep.ok = false;
          if (!rep.failure) rep.failure = BallInclusionFailure{p, r, lab, 1};
        }
      }
    }
  }
  return rep;
}

AdRegularityEstimate ad_regularity_estimate(const Section& phi, double Q,
                                            double r0,
                                            std::span<const double> r_grid) {
  if (!(Q > 0.0)) throw DomainError("ad-regularity requires Q > 0");
  require_radii(r0, r_grid, "ad-regularity");
  const Fibration& fib = phi.fibration();
  if (!fib.has_measure())
    throw ConfigError("ad-regularity requires a measure on the fibration");
  const FiniteMetricSpace& sp = fib.space();

  AdRegularityEstimate est;
  est.Q = Q;
  est.r0 = r0;
  bool any = false;
  // Accumulators for the least-squares slope of log(mass) on log(r).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t fit_n = 0;
  double fit_r_min = 0, fit_r_max = 0;
  est.positive = true;
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    const PointIndex p = phi.point_of(y);
    for (double r : r_grid) {
      const double m = pushforward_mass(phi, sp.ball(p, r));
      const double scale = std::pow(r, Q);
      if (m == 0.0) {
        if (est.positive) {
          est.positive = false;
          est.zero_witness_y = y;
          est.zero_witness_r = r;
        }
        est.c1 = 0.0;
        any = true;
        continue;
      }
      const double lo = m / scale;
      if (!any) {
        est.c1 = lo;
        est.c2 = lo;
        any = true;
      } else {
        if (est.positive) est.c1 = std::min(est.c1, lo);
        est.c2 = std::max(est.c2, lo);
      }
      const double lx = std::log(r), ly = std::log(m);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      if (fit_n == 0) {
        fit_r_min = r;
        fit_r_max = r;
      } else {
        fit_r_min = std::min(fit_r_min, r);
        fit_r_max = std::max(fit_r_max, r);
      }
      ++fit_n;
    }
  }
  if (!est.positive) est.c1 = 0.0;
  if (fit_n >= 2 && fit_r_min < fit_r_max) {
    const double n = static_cast<double>(fit_n);
    est.best_fit_Q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return est;
}

SourceRegularity source_regularity(const Section& phi, double Q, double r0,
                                   std::span<const double> r_grid) {
  const HomogeneityResult hom =
      homogeneity_constant(phi.fibration(), r0, r_grid);
  const AdRegularityEstimate ad = ad_regularity_estimate(phi, Q, r0, r_grid);
  SourceRegularity src;
  src.Q = Q;
  src.r0 = r0;
  src.C = hom.C;
  src.c1 = ad.c1;
  src.c2 = ad.c2;
  src.feasible = hom.feasible && ad.positive;
  src.best_fit_Q = ad.best_fit_Q;
  return src;
}

RegularityReport transfer_regularity(const Section& psi,
                                     const SourceRegularity& source,
                                     QIConstants c,
                                     std::span<const double> r_grid,
                                     double tol) {
  if (!source.feasible)
    throw PreconditionError(
        "regularity transfer needs feasible source data (homogeneity holds "
        "and c1 > 0)");
  require_radii(source.r0, r_grid, "regularity transfer");
  if (auto v = qi_violation(psi, c))
    throw PreconditionError(
        "regularity transfer needs a section satisfying the declared "
        "constants; labels " + psi.fibration().label_key(v->y1) + ", " +
        psi.fibration().label_key(v->y2) + " violate them");
  const Fibration& fib = psi.fibration();
  if (!fib.has_measure())
    throw ConfigError("regularity transfer requires a measure on the fibration");

  RegularityReport rep;
  rep.source = source;
  rep.L = c.L;
  rep.M = c.M;
  const double lq = std::pow(c.L, source.Q);
  rep.c3 = source.c1 / (source.C * lq);
  rep.c4 = source.c2 * source.C * lq;
  rep.r_grid.assign(r_grid.begin(), r_grid.end());

  const FiniteMetricSpace& sp = fib.space();
  for (LabelIndex y = 0; y < fib.label_count(); ++y) {
    const PointIndex p = psi.point_of(y);
    for (double r : r_grid) {
      SandwichCheck chk;
      chk.y = y;
      chk.r = r;
      chk.mass = pushforward_mass(psi, sp.ball(p, r));
      chk.vacuous = r <= c.M;
      chk.lower = chk.vacuous ? 0.0 : rep.c3 * std::pow(r - c.M, source.Q);
      chk.upper = rep.c4 * std::pow(r + c.M, source.Q);
      chk.lower_ok =
          chk.vacuous || chk.mass >= chk.lower - tol * std::max(1.0, chk.lower);
      chk.upper_ok = chk.mass <= chk.upper + tol * std::max(1.0, chk.upper);
      if (chk.vacuous) ++rep.vacuous_count;
      if ((!chk.vacuous && !chk.lower_ok) || !chk.upper_ok) rep.all_ok = false;
      rep.checks.push_back(chk);
    }
  }
  return rep;
}

RegularityReport transfer_regularity(const Section& psi, const Section& phi,
                                     QIConstants c, double Q, double r0,
                                     std::span<const double> r_grid,
                                     double tol) {
  if (psi.fibration_ptr() != phi.fibration_ptr())
    throw PreconditionError("sections live on different fibrations");
  return transfer_regularity(psi, source_regularity(phi, Q, r0, r_grid), c,
                             r_grid, tol);
}

}  // namespace isec

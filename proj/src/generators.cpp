#include "isec/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "isec/errors.hpp"

namespace isec {

namespace {

/// Multiples of 1/64 in [1, 2]; exact in doubles.
double dyadic_unit(Rng& rng) {
  std::uniform_int_distribution<int> num(64, 128);
  return static_cast<double>(num(rng)) / 64.0;
}

/// Multiples of 1/4 in [lo/4, hi/4].
double dyadic_quarter(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> num(lo, hi);
  return static_cast<double>(num(rng)) / 4.0;
}

FibrationPtr wrap(FiniteMetricSpace sp, std::vector<json> labels,
                  std::vector<LabelIndex> fiber_of,
                  std::optional<std::vector<double>> measure) {
  auto space = std::make_shared<const FiniteMetricSpace>(std::move(sp));
  return std::make_shared<const Fibration>(
      Fibration::build(std::move(space), std::move(labels),
                       std::move(fiber_of), std::move(measure)));
}

std::optional<std::vector<double>> counting(bool on, std::size_t labels) {
  if (!on) return std::nullopt;
  return std::vector<double>(labels, 1.0);
}

std::size_t cyclic_gap(std::size_t a, std::size_t b, std::size_t n) {
  const std::size_t diff = a > b ? a - b : b - a;
  return std::min(diff, n - diff);
}

std::string coords_key(const Eigen::VectorXd& x) {
  json id = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) id.push_back(x(i));
  return id.dump();
}

/// Per fiber: the min-norm solution of A x = scale * y plus random dyadic
/// kernel offsets, deduplicated by coordinate key. Best effort — a fiber
/// stops short of the requested count when the kernel is trivial or the
/// draw keeps colliding.
std::vector<std::vector<Eigen::VectorXd>> kernel_samples(
    Rng& rng, const Eigen::MatrixXd& A,
    const std::vector<Eigen::VectorXd>& y_grid, double scale,
    std::size_t samples_per_fiber) {
  const Eigen::MatrixXd gram = A * A.transpose();
  const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(A).kernel();
  const bool fibers_are_points =
      kernel.cols() == 0 ||
      (kernel.cols() == 1 && kernel.col(0).isZero());
  std::vector<std::vector<Eigen::VectorXd>> samples(y_grid.size());
  for (std::size_t g = 0; g < y_grid.size(); ++g) {
    const Eigen::VectorXd x0 =
        A.transpose() * gram.llt().solve(scale * y_grid[g]);
    std::set<std::string> seen;
    seen.insert(coords_key(x0));
    samples[g].push_back(x0);
    if (fibers_are_points) continue;
    for (int attempt = 0;
         samples[g].size() < samples_per_fiber && attempt < 1000; ++attempt) {
      Eigen::VectorXd x = x0;
      for (Eigen::Index c = 0; c < kernel.cols(); ++c)
        x += dyadic_quarter(rng, -8, 8) * kernel.col(c);
      if (seen.insert(coords_key(x)).second) samples[g].push_back(x);
    }
  }
  return samples;
}

}  // namespace

Section GridInstance::identity_row() const {
  std::vector<PointIndex> choice(cols);
  for (std::size_t c = 0; c < cols; ++c) choice[c] = at(c, 0);
  return Section::build(fib, std::move(choice));
}

Section GridInstance::zigzag() const {
  std::vector<PointIndex> choice(cols);
  for (std::size_t c = 0; c < cols; ++c)
    choice[c] = at(c, c % 2 == 0 ? 0 : rows - 1);
  return Section::build(fib, std::move(choice));
}

GridInstance make_grid(std::size_t cols, std::size_t rows, NormKind norm,
                       bool counting_measure) {
  if (cols < 1 || rows < 1)
    throw DomainError("grid generator needs cols >= 1 and rows >= 1");
  const std::size_t n = cols * rows;
  std::vector<json> points;
  points.reserve(n);
  std::vector<LabelIndex> fiber_of;
  fiber_of.reserve(n);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) {
      points.push_back(json::array({c, r}));
      fiber_of.push_back(c);
    }
  // Coordinate norms of integer offsets: l1 and linf grids get an exact
  // rational matrix (the entries are integers), l2 stays float-only.
  auto space = [&]() -> FiniteMetricSpace {
    if (norm == NormKind::L1 || norm == NormKind::Linf) {
      auto gap = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
      std::vector<Rational> dist(n * n, Rational(0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t dc = gap(i / rows, j / rows);
          const std::size_t dr = gap(i % rows, j % rows);
          dist[i * n + j] =
              Rational(norm == NormKind::L1 ? dc + dr : std::max(dc, dr));
        }
      return FiniteMetricSpace::from_matrix_exact(std::move(points),
                                                  std::move(dist));
    }
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double diff[2] = {
            static_cast<double>(i / rows) - static_cast<double>(j / rows),
            static_cast<double>(i % rows) - static_cast<double>(j % rows)};
        dist[i * n + j] = norm_value(norm, diff);
      }
    return FiniteMetricSpace::from_matrix(std::move(points), std::move(dist));
  }();
  std::vector<json> labels;
  labels.reserve(cols);
  for (std::size_t c = 0; c < cols; ++c) labels.push_back(json(c));
  GridInstance g;
  g.cols = cols;
  g.rows = rows;
  g.fib = wrap(std::move(space), std::move(labels), std::move(fiber_of),
               counting(counting_measure, cols));
  return g;
}

Section CyclicInstance::zero_section() const {
  std::vector<PointIndex> choice(m);
  for (std::size_t i = 0; i < m; ++i) choice[i] = at(i, 0);
  return Section::build(fib, std::move(choice));
}

CyclicInstance make_cyclic_product(std::size_t m, std::size_t k,
                                   bool counting_measure) {
  if (m < 1 || k < 1)
    throw DomainError("cyclic product generator needs m >= 1 and k >= 1");
  const std::size_t n = m * k;
  std::vector<json> points;
  points.reserve(n);
  std::vector<LabelIndex> fiber_of;
  fiber_of.reserve(n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      points.push_back(json::array({i, j}));
      fiber_of.push_back(i);
    }
  // Max of the two cyclic gaps; a max of metrics is again a metric.  The
  // entries are integers, so the matrix is carried exactly.
  std::vector<Rational> dist(n * n, Rational(0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t gi = cyclic_gap(a / k, b / k, m);
      const std::size_t gj = cyclic_gap(a % k, b % k, k);
      dist[a * n + b] = Rational(std::max(gi, gj));
    }
  std::vector<json> labels;
  labels.reserve(m);
  for (std::size_t i = 0; i < m; ++i) labels.push_back(json(i));
  CyclicInstance c;
  c.m = m;
  c.k = k;
  c.fib = wrap(
      FiniteMetricSpace::from_matrix_exact(std::move(points), std::move(dist)),
      std::move(labels), std::move(fiber_of), counting(counting_measure, m));
  return c;
}

FibrationPtr random_fibration(Rng& rng, const RandomInstanceParams& p) {
  if (p.fibers_min < 1 || p.fibers_min > p.fibers_max)
    throw DomainError("random fibration needs 1 <= fibers_min <= fibers_max");
  if (p.fiber_min < 1 || p.fiber_min > p.fiber_max)
    throw DomainError("random fibration needs 1 <= fiber_min <= fiber_max");
  std::uniform_int_distribution<std::size_t> fiber_count(p.fibers_min,
                                                         p.fibers_max);
  std::uniform_int_distribution<std::size_t> fiber_size(p.fiber_min,
                                                        p.fiber_max);
  const std::size_t labels_n = fiber_count(rng);
  std::vector<LabelIndex> fiber_of;
  for (LabelIndex y = 0; y < labels_n; ++y) {
    const std::size_t sz = fiber_size(rng);
    fiber_of.insert(fiber_of.end(), sz, y);
  }
  const std::size_t n = fiber_of.size();
  std::vector<json> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(json(i));
  // Distances live in [1, 2], so any two sides dominate any third and the
  // triangle scan cannot fire.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i * n + j] = dist[j * n + i] = dyadic_unit(rng);
  std::vector<json> labels;
  labels.reserve(labels_n);
  for (LabelIndex y = 0; y < labels_n; ++y) labels.push_back(json(y));
  return wrap(
      FiniteMetricSpace::from_matrix(std::move(points), std::move(dist)),
      std::move(labels), std::move(fiber_of),
      counting(p.counting_measure, labels_n));
}

Section random_section(const FibrationPtr& fib, Rng& rng) {
  if (!fib) throw ConfigError("random section needs a fibration");
  std::vector<PointIndex> choice(fib->label_count());
  for (LabelIndex y = 0; y < fib->label_count(); ++y) {
    std::span<const PointIndex> f = fib->fiber(y);
    std::uniform_int_distribution<std::size_t> pick(0, f.size() - 1);
    choice[y] = f[pick(rng)];
  }
  return Section::build(fib, std::move(choice));
}

QIConstants tight_constants(const Section& phi) {
  const Frontier front = qi_frontier(phi);
  const double L = std::max(1.0, snap_constant_up(front.L_flat.value_or(1.0)));
  return QIConstants(L, 0.0);
}

QIConstants constants_at(const Section& phi, double L) {
  const double M = std::max(0.0, snap_constant_up(minimal_M(phi, L)));
  return QIConstants(L, M);
}

Eigen::MatrixXd random_surjection(Rng& rng, std::size_t k, std::size_t n) {
  if (k < 1 || k >= n)
    throw DomainError("random surjection needs 1 <= k < n");
  Eigen::MatrixXd A(k, n);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        A(i, j) = dyadic_quarter(rng, -8, 8);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() == A.rows()) return A;
  }
  throw Error("random surjection failed to reach full rank");
}

SampledLinearInstance sampled_linear_instance(Rng& rng,
                                              const Eigen::MatrixXd& A,
                                              int grid_lo, int grid_hi,
                                              std::size_t samples_per_fiber,
                                              NormKind norm, double scale) {
  if (grid_lo > grid_hi)
    throw DomainError("linear generator needs grid_lo <= grid_hi");
  if (samples_per_fiber < 1)
    throw DomainError("linear generator needs at least one sample per fiber");
  const std::size_t k = static_cast<std::size_t>(A.rows());
  const double range = static_cast<double>(grid_hi - grid_lo) + 1.0;
  if (std::pow(range, static_cast<double>(k)) > 4096.0)
    throw DomainError("linear generator grid has over 4096 points");
  // Odometer over [grid_lo, grid_hi]^k, low coordinate fastest.
  std::vector<Eigen::VectorXd> y_grid;
  std::vector<int> digits(k, grid_lo);
  while (true) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i)
      y(static_cast<Eigen::Index>(i)) = static_cast<double>(digits[i]);
    y_grid.push_back(std::move(y));
    std::size_t pos = 0;
    while (pos < k && digits[pos] == grid_hi) digits[pos++] = grid_lo;
    if (pos == k) break;
    ++digits[pos];
  }
  auto samples = kernel_samples(rng, A, y_grid, scale, samples_per_fiber);
  return SampledLinearInstance::build(
      LinearFibration::make(A, norm, std::move(y_grid), scale),
      std::move(samples));
}

SampledLinearInstance random_linear_instance(Rng& rng,
                                             const RandomLinearParams& p) {
  if (p.grid_points < 1)
    throw DomainError("linear generator needs at least one grid point");
  if (p.samples_per_fiber < 1)
    throw DomainError("linear generator needs at least one sample per fiber");
  if (static_cast<double>(p.grid_points) >
      std::pow(11.0, static_cast<double>(p.k)))
    throw DomainError(
        "linear generator cannot place that many distinct grid points in "
        "[-5, 5]^k");
  const Eigen::MatrixXd A = random_surjection(rng, p.k, p.n);
  std::uniform_int_distribution<int> coord(-5, 5);
  std::set<std::string> seen;
  std::vector<Eigen::VectorXd> y_grid;
  while (y_grid.size() < p.grid_points) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(p.k));
    for (std::size_t i = 0; i < p.k; ++i)
      y(static_cast<Eigen::Index>(i)) = static_cast<double>(coord(rng));
    if (seen.insert(coords_key(y)).second) y_grid.push_back(std::move(y));
  }
  auto samples = kernel_samples(rng, A, y_grid, p.scale, p.samples_per_fiber);
  return SampledLinearInstance::build(
      LinearFibration::make(A, p.norm, std::move(y_grid), p.scale),
      std::move(samples));
}

LinearSection random_sampled_section(const SampledLinearInstance& inst,
                                     Rng& rng) {
  std::vector<Eigen::VectorXd> choice(inst.fiber_samples.size());
  for (std::size_t g = 0; g < inst.fiber_samples.size(); ++g) {
    std::uniform_int_distribution<std::size_t> pick(
        0, inst.fiber_samples[g].size() - 1);
    choice[g] = inst.fiber_samples[g][pick(rng)];
  }
  return LinearSection::build(inst.fib, std::move(choice));
}

}  // namespace isec

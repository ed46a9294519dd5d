// End-to-end acceptance battery.  Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits 0 only when every criterion passes.
// Tolerances are pinned here on purpose: 1e-9 wherever floating-point chains
// (norms, products of snapped constants) enter, exact comparison everywhere
// the arithmetic stays on dyadic lattices.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include <isec/generators.hpp>
#include <isec/linear.hpp>
#include <isec/oracles.hpp>
#include <isec/qi.hpp>
#include <isec/regularity.hpp>

using namespace isec;
namespace fs = std::filesystem;

namespace {

constexpr double kTol = 1e-9;

using Outcome = std::pair<bool, std::string>;

Section rebase(const Section& phi, const Section& anchor, LabelIndex y_hat) {
  std::vector<PointIndex> choice = phi.choice();
  choice[y_hat] = anchor.point_of(y_hat);
  return Section::build(phi.fibration_ptr(), std::move(choice));
}

LinearSection rebase(const LinearSection& phi, const LinearSection& anchor,
                     std::size_t y_hat) {
  std::vector<Eigen::VectorXd> choice;
  for (std::size_t g = 0; g < phi.grid_size(); ++g)
    choice.push_back(g == y_hat ? anchor.at(y_hat) : phi.at(g));
  return LinearSection::build(phi.fibration_ptr(), std::move(choice));
}

/// (L, M) with positive additive part when the frontier still slopes at the
/// midpoint between 1 and its zero point; both snapped onto 1/1024.
QIConstants midpoint_constants(const std::vector<PairConstraint<double>>& cons,
                               const Frontier& f) {
  const double flat = f.L_flat.value_or(1.0);
  const double L = std::max(1.0, snap_constant_up(1.0 + (flat - 1.0) / 2.0));
  double worst = 0.0;
  for (const auto& pc : cons)
    worst = std::max(worst, pair_slack(pc.a, pc.b, L));
  return QIConstants(L, std::max(0.0, snap_constant_up(worst)));
}

bool holds_with_slack(const std::vector<PairConstraint<double>>& cons,
                      QIConstants c, double slack) {
  for (const auto& pc : cons)
    if (pair_slack(pc.a, pc.b, c.L) > c.M + slack) return false;
  return true;
}

// ---- criterion bodies ------------------------------------------------------

Outcome cone_sweep() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  RandomInstanceParams p;
  p.fibers_min = p.fibers_max = 4;
  p.fiber_min = p.fiber_max = 3;
  auto fib = random_fibration(rng, p);
  auto sections = enumerate_sections(fib);
  if (sections.size() != 81) return {false, "expected 81 sections"};

  std::size_t disagreements = 0;
  std::size_t checked = 0;
  for (const auto& phi : sections) {
    for (double L : {1.0, 1.5, 2.0}) {
      for (double M : {0.0, 0.5, 1.0}) {
        const bool direct = is_qi_section(phi, {L, M});
        if (graph_avoids_cones(phi, {L, M}) != direct) ++disagreements;
        if (oracle_is_qi(phi, L, M) != direct) ++disagreements;
        if (oracle_cone_hit(phi, L, M) == direct) ++disagreements;
        ++checked;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ostringstream note;
  note << checked << " section-constant pairs, " << disagreements
       << " disagreements, " << secs << "s";
  return {disagreements == 0 && secs < 10.0, note.str()};
}

Outcome frontier_vs_scan() {
  auto g1 = make_grid(3, 3);
  if (minimal_M(g1.zigzag(), 1.0) != 1.0) return {false, "worked minimal_M"};
  auto ml = minimal_L(g1.zigzag(), 0.0);
  if (!ml.L || *ml.L != 2.0) return {false, "worked minimal_L"};

  std::vector<double> grid;
  for (int i = 0; i <= 150; ++i) grid.push_back(1.0 + i / 100.0);

  Rng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    auto fib = random_fibration(rng);
    auto phi = random_section(fib, rng);
    const Frontier f = qi_frontier(phi);
    const auto scan = oracle_frontier_scan(phi, grid);
    for (const auto& [L, m] : scan)
      worst = std::max(worst, std::abs(f.eval(L) - m));
    if (worst > kTol) {
      std::ostringstream note;
      note << "trial " << trial << ": deviation " << worst;
      return {false, note.str()};
    }
  }
  std::ostringstream note;
  note << "500 instances, max deviation " << worst;
  return {true, note.str()};
}

Outcome transfer_round_trip() {
  Rng rng(1003);
  std::size_t failures = 0;
  std::size_t nonzero_additive = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto fib = random_fibration(rng);
    auto phi0 = random_section(fib, rng);
    auto phi = rebase(random_section(fib, rng), phi0, 0);
    const QIConstants c0 = tight_constants(phi0);  // additive part zero

    const auto rel_cons = relative_constraints(phi, phi0, 0);
    const QIConstants c1 =
        midpoint_constants(rel_cons, relative_frontier(phi, phi0, 0));
    const PointIndex x0 = phi0.point_of(0);
    const auto pt_cons = pointed_constraints(phi, x0);
    const QIConstants c2 =
        midpoint_constants(pt_cons, pointed_frontier(phi, x0));
    if (c1.M > 0.0) ++nonzero_additive;

    const auto rep =
        transfer_check(phi, phi0, 0, c0.L, c1.L, c0.M, c1.M, c2.L, c2.M);
    const bool ok = rep.hypothesis_intrinsic_ok && rep.hypothesis_relative_ok &&
                    rep.forward_ok && rep.hypothesis_pointed_ok &&
                    rep.backward_ok && rep.forward.L == c0.L * (c1.L + 1.0) &&
                    rep.forward.M == c1.M &&  // additive part survives M = 0
                    rep.backward.L == c2.L + 1.0 && rep.backward.M == c2.M;
    if (!ok) ++failures;
  }
  std::ostringstream note;
  note << "200 instances, " << failures << " failures, " << nonzero_additive
       << " with a sloped comparison constant";
  return {failures == 0, note.str()};
}

Outcome convex_combinations() {
  Rng rng(1004);
  std::size_t failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_linear_instance(rng);
    auto psi = random_sampled_section(inst, rng);
    auto phi = rebase(random_sampled_section(inst, rng), psi, 0);
    auto eta = rebase(random_sampled_section(inst, rng), psi, 0);
    const QIConstants phi_c = linear_relative_witness(phi, psi, 0);
    const QIConstants eta_c = linear_relative_witness(eta, psi, 0);

    std::uniform_int_distribution<int> pick(0, 16);
    for (int j = 0; j < 10; ++j) {
      const double t = pick(rng) / 16.0;
      const auto chk = convexity_check(phi, eta, psi, 0, t, phi_c, eta_c,
                                       kTol);
      const bool exact_prediction =
          chk.predicted.L == t * (phi_c.L - eta_c.L) + eta_c.L &&
          chk.predicted.M == phi_c.M + eta_c.M;
      if (!(chk.hypothesis_ok && chk.conclusion_ok && exact_prediction))
        ++failures;
    }
  }
  std::ostringstream note;
  note << "100 instances x 10 weights, " << failures << " failures";
  return {failures == 0, note.str()};
}

Outcome membership_algebra() {
  Rng rng(1005);
  std::size_t failures = 0;

  // Sum and scalar transfers inside the pointed family.
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_linear_instance(rng);
    auto ref = random_sampled_section(inst, rng);
    auto s1 = rebase(random_sampled_section(inst, rng), ref, 0);
    auto s2 = rebase(random_sampled_section(inst, rng), ref, 0);

    const double delta = (1 + std::uniform_int_distribution<int>(0, 3)(rng)) /
                         2.0;  // {1/2, 1, 3/2, 2}
    auto phi1 = scalar_multiple(delta, s1);
    auto phi2 = scalar_multiple(delta, s2);
    auto psi_d = scalar_multiple(delta, ref);
    const QIConstants c1 = linear_relative_witness(phi1, psi_d, 0);
    const QIConstants c2 = linear_relative_witness(phi2, psi_d, 0);

    auto w = section_sum(phi1, phi2);
    auto psi_2d = section_sum(psi_d, psi_d);
    const QIConstants pred = sum_membership_constants(delta, c1, delta, c2);
    if (!holds_with_slack(linear_relative_constraints(w, psi_2d, 0), pred,
                          kTol))
      ++failures;

    const double beta =
        std::uniform_int_distribution<int>(0, 1)(rng) ? -2.0 : 1.5;
    auto bw = scalar_multiple(beta, phi1);
    auto bpsi = scalar_multiple(beta, psi_d);
    const QIConstants spred = scalar_membership_constants(beta, c1);
    if (!holds_with_slack(linear_relative_constraints(bw, bpsi, 0), spred,
                          kTol))
      ++failures;
  }

  // Sum of two arbitrary sections against the halved quotient: additive
  // constant at L = 1 stays within twice the sampled fiber diameter.
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_linear_instance(rng);
    auto f1 = random_sampled_section(inst, rng);
    auto f2 = random_sampled_section(inst, rng);
    const double ell = fiber_diameter_bound(*materialize(inst));
    auto sum = sum_instance(inst);
    auto msum = materialize(sum);
    auto w = materialized_section(sum, msum, section_sum(f1, f2));
    if (minimal_M(w, 1.0) > 2.0 * ell + kTol) ++failures;

    for (std::size_t g = 0; g < inst.fib->grid_size(); ++g)
      for (double lambda : {0.5, 2.0})
        if (!fiber_identity_check(inst, g, lambda).equal) ++failures;
  }

  std::ostringstream note;
  note << "100 pointed-family transfers, 100 section sums with fiber "
          "identities, "
       << failures << " failures";
  return {failures == 0, note.str()};
}

Outcome relation_properties() {
  Rng rng(1006);
  std::size_t failures = 0;
  std::size_t chains = 0, min_l_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto fib = random_fibration(rng);
    auto s1 = random_section(fib, rng);
    auto s2 = rebase(random_section(fib, rng), s1, 0);
    auto s3 = rebase(random_section(fib, rng), s1, 0);
    const auto rep = strong_relation_check({s1, s2, s3}, 0);
    if (!(rep.reflexive_ok && rep.symmetric_ok && rep.transitive_ok))
      ++failures;
    for (const auto& pr : rep.pairs) {
      if (!pr.related) ++failures;
      if (pr.i == pr.j && (pr.L != 1.0 || pr.M != 0.0)) ++failures;
    }
    for (const auto& ch : rep.chains) {
      ++chains;
      if (ch.min_L_sufficed) ++min_l_ok;
    }
  }
  std::ostringstream note;
  note << "100 triples, " << failures << " failures; min-L chain constant "
       << "sufficed in " << min_l_ok << "/" << chains << " (recorded only)";
  return {failures == 0, note.str()};
}

Outcome ball_inclusions() {
  std::size_t failures = 0, checks = 0;
  const std::vector<double> radii{0.5, 1.0, 1.5, 2.0, 3.0, 5.0};

  auto probe = [&](const Section& phi) {
    for (const QIConstants& c :
         {tight_constants(phi), constants_at(phi, 1.5)}) {
      ++checks;
      if (!ball_inclusion_check(phi, c, radii).ok) ++failures;
    }
  };

  for (auto [cols, rows] : {std::pair<std::size_t, std::size_t>{3, 3},
                            {9, 3},
                            {5, 3},
                            {4, 1}}) {
    auto g = make_grid(cols, rows);
    probe(g.identity_row());
    probe(g.zigzag());
  }
  for (auto [m, k] :
       {std::pair<std::size_t, std::size_t>{4, 3}, {5, 2}, {6, 4}}) {
    probe(make_cyclic_product(m, k).zero_section());
  }
  Rng rng(1007);
  for (int trial = 0; trial < 20; ++trial) {
    auto fib = random_fibration(rng);
    probe(random_section(fib, rng));
    probe(random_section(fib, rng));
  }

  std::ostringstream note;
  note << checks << " section-constant probes, both inclusions at 6 radii, "
       << failures << " failures";
  return {failures == 0, note.str()};
}

Outcome sandwich_on_wide_grid() {
  auto g = make_grid(9, 3);
  auto id = g.identity_row();
  auto zig = g.zigzag();
  const std::vector<double> radii{2.0, 3.0, 4.0, 5.0};

  const auto src = source_regularity(id, 1.0, 1.0, radii);
  if (!(src.feasible && src.C == 1.0 && src.c1 == 1.0 && src.c2 == 1.8))
    return {false, "computed source constants off"};

  const QIConstants zc = tight_constants(zig);
  if (!(zc.L == 2.0 && zc.M == 0.0)) return {false, "zigzag constants off"};

  const auto rep = transfer_regularity(zig, src, zc, radii);
  if (!(rep.all_ok && rep.vacuous_count == 0))
    return {false, "sandwich failed on the grid"};
  if (!ball_inclusion_check(zig, zc, radii).ok)
    return {false, "inclusions failed on the grid"};

  // A second generated section with its own constants.
  const QIConstants ic = tight_constants(id);
  const auto id_rep = transfer_regularity(id, src, ic, radii);
  if (!(id_rep.all_ok && id_rep.vacuous_count == 0))
    return {false, "sandwich failed for the row section"};

  // Worked constants with the idealised source c1 = c2 = C = 1 and L = 2.
  SourceRegularity ideal;
  ideal.Q = 1.0;
  ideal.r0 = 1.0;
  ideal.C = 1.0;
  ideal.c1 = 1.0;
  ideal.c2 = 1.0;
  ideal.feasible = true;
  const auto worked = transfer_regularity(zig, ideal, zc, radii);
  if (!(worked.c3 == 0.5 && worked.c4 == 2.0))
    return {false, "worked c3/c4 not exact"};

  std::ostringstream note;
  note << "c1 = " << src.c1 << ", c2 = " << src.c2 << ", c3 = " << rep.c3
       << ", c4 = " << rep.c4 << "; idealised transfer exact";
  return {true, note.str()};
}

std::string capture(const std::string& args, int* code) {
  const std::string cmd = std::string(ISEC_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    *code = -1;
    return {};
  }
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Outcome deterministic_reports() {
  std::string templ = (fs::temp_directory_path() / "isec_acc_XXXXXX").string();
  if (!mkdtemp(templ.data())) return {false, "mkdtemp failed"};
  const fs::path dir = templ;
  const auto cleanup = [&] { fs::remove_all(dir); };

  int code = 0;
  capture("generate --kind grid --cols 3 --rows 3 --out " +
              (dir / "a").string(),
          &code);
  if (code != 0) {
    cleanup();
    return {false, "generate run 1 failed"};
  }
  capture("generate --kind grid --cols 3 --rows 3 --out " +
              (dir / "b").string(),
          &code);
  if (code != 0) {
    cleanup();
    return {false, "generate run 2 failed"};
  }

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  if (slurp(dir / "a" / "instance.json") != slurp(dir / "b" / "instance.json")) {
    cleanup();
    return {false, "generated instances differ"};
  }

  const std::string report_args = "report --instance " +
                                  (dir / "a" / "instance.json").string() +
                                  " --section " +
                                  (dir / "a" / "zigzag.json").string();
  int c1 = 0, c2 = 0;
  const std::string r1 = capture(report_args, &c1);
  const std::string r2 = capture(report_args, &c2);
  cleanup();
  if (c1 != 0 || c2 != 0) return {false, "report runs failed"};
  if (r1.empty() || r1 != r2) return {false, "reports differ between runs"};
  std::ostringstream note;
  note << "two runs, " << r1.size() << " bytes each, byte-identical";
  return {true, note.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> body;
  };
  const Criterion criteria[] = {
      {"cone avoidance matches the definition across a full section space",
       cone_sweep},
      {"frontier agrees with the dense oracle scan", frontier_vs_scan},
      {"pointed-comparison constants transfer both ways", transfer_round_trip},
      {"convex combinations stay in the family with the predicted constants",
       convex_combinations},
      {"sums and scalar multiples respect the membership algebra",
       membership_algebra},
      {"strong comparison is an equivalence relation", relation_properties},
      {"projected open balls nest around every admissible graph",
       ball_inclusions},
      {"mass sandwich holds on the wide grid with exact worked constants",
       sandwich_on_wide_grid},
      {"reports are byte-identical across repeated runs", deterministic_reports},
  };

  bool all = true;
  int idx = 0;
  for (const auto& crit : criteria) {
    ++idx;
    Outcome out;
    try {
      out = crit.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %d. %s [%s]\n", out.first ? "PASS" : "FAIL", idx,
                crit.name, out.second.c_str());
    all = all && out.first;
  }
  return all ? 0 : 1;
}

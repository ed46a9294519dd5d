#include "isec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "isec/errors.hpp"
#include "isec/generators.hpp"
#include "isec/linear.hpp"
#include "isec/oracles.hpp"
#include "isec/qi.hpp"
#include "isec/regularity.hpp"
#include "isec/report.hpp"

namespace isec {

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InstanceError(path + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw ConfigError(path + ": write failed");
}

/// Labels are arbitrary JSON values; a command-line key is matched first as
/// parsed JSON (so "0" finds the integer label 0), then as a raw string.
LabelIndex resolve_label(const Fibration& fib, const std::string& key) {
  json parsed;
  bool have_parsed = false;
  try {
    parsed = json::parse(key);
    have_parsed = true;
  } catch (const json::parse_error&) {
  }
  if (have_parsed)
    if (auto y = fib.find_label(parsed)) return *y;
  if (auto y = fib.find_label(json(key))) return *y;
  throw InstanceError("base label " + key + " not found in the fibration");
}

struct OutputOptions {
  std::string format = "json";
  std::string output;
};

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--format", out.format, "Report format (json or text)")
      ->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--output", out.output,
                  "Write the report to this file instead of stdout");
}

/// Renders the finished report and returns its exit code.
int finish(const OutputOptions& opts, const json& report) {
  const std::string text =
      opts.format == "text" ? render_text(report) : dump_report(report);
  if (opts.output.empty())
    std::cout << text;
  else
    write_text_file(opts.output, text);
  return report.at("exit_code").get<int>();
}

/// Runs one subcommand body; any library error becomes an input-error
/// report on the selected output channel.
int guarded(const std::string& command, const OutputOptions& opts,
            const std::function<json()>& body) {
  try {
    return finish(opts, body());
  } catch (const Error& e) {
    const json rep = report_envelope(command, Verdict::InputError,
                                     json::object(), json{{"error", e.what()}});
    try {
      return finish(opts, rep);
    } catch (const Error&) {
      std::cerr << e.what() << "\n";
      return exit_code(Verdict::InputError);
    }
  }
}

json section_file_inputs(const std::string& instance,
                         const std::string& section) {
  return json{{"instance", instance}, {"section", section}};
}

// ---- generate helpers ------------------------------------------------------

/// Instance document = space serialization + fibration keys, one file.
json instance_document(const Fibration& fib) {
  json doc = instance_to_json(fib.space());
  json quotient = fib.to_json();
  for (auto& [key, value] : quotient.items()) doc[key] = std::move(value);
  return doc;
}

json linear_document(const SampledLinearInstance& inst) {
  json samples = json::array();
  for (const auto& fiber : inst.fiber_samples) {
    json row = json::array();
    for (const auto& x : fiber) {
      json coords = json::array();
      for (Eigen::Index i = 0; i < x.size(); ++i) coords.push_back(x(i));
      row.push_back(std::move(coords));
    }
    samples.push_back(std::move(row));
  }
  return json{{"linear", inst.fib->to_json()}, {"samples", std::move(samples)}};
}

SampledLinearInstance parse_linear_document(const json& doc,
                                            const std::string& path) {
  auto it = doc.find("linear");
  if (it == doc.end())
    throw InstanceError(path + ": linear: missing member");
  LinearFibrationPtr fib = LinearFibration::from_json(*it);
  std::vector<std::vector<Eigen::VectorXd>> samples;
  auto s_it = doc.find("samples");
  if (s_it == doc.end())
    throw InstanceError(path + ": samples: missing member");
  if (!s_it->is_array() || s_it->size() != fib->grid_size())
    throw InstanceError(path + ": samples: expected one array per grid point");
  samples.resize(fib->grid_size());
  for (std::size_t g = 0; g < fib->grid_size(); ++g) {
    const json& row = (*s_it)[g];
    if (!row.is_array() || row.empty())
      throw InstanceError(path + ": samples[" + std::to_string(g) +
                          "]: expected a nonempty array");
    for (const json& coords : row) {
      if (!coords.is_array())
        throw InstanceError(path + ": samples[" + std::to_string(g) +
                            "]: entries must be coordinate arrays");
      Eigen::VectorXd x(static_cast<Eigen::Index>(coords.size()));
      for (std::size_t i = 0; i < coords.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = coords[i].get<double>();
      samples[g].push_back(std::move(x));
    }
  }
  return SampledLinearInstance::build(std::move(fib), std::move(samples));
}

}  // namespace

FibrationPtr load_instance_file(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    SpacePtr space = load_instance(doc);
    return std::make_shared<const Fibration>(
        Fibration::from_json(std::move(space), doc));
  } catch (const Error& e) {
    throw InstanceError(path + ": " + e.what());
  }
}

Section load_section_file(const FibrationPtr& fib, const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return Section::from_json(fib, doc);
  } catch (const Error& e) {
    throw InstanceError(path + ": " + e.what());
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Computational toolkit for quasi-isometric sections of "
               "quotient maps between finite metric spaces"};
  app.require_subcommand(1);

  // -- validate --------------------------------------------------------------
  struct {
    std::string instance;
    std::vector<std::string> sections;
    OutputOptions out;
  } validate_opts;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Parse an instance (and optional sections) and run every "
                  "structural check");
  validate_cmd->add_option("--instance", validate_opts.instance)->required();
  validate_cmd->add_option("--section", validate_opts.sections,
                           "Section files to validate against the instance");
  add_output_flags(validate_cmd, validate_opts.out);

  // -- check -----------------------------------------------------------------
  struct {
    std::string instance, section;
    double L = 1.0, M = 0.0;
    bool oracle = false;
    OutputOptions out;
  } check_opts;
  CLI::App* check_cmd = app.add_subcommand(
      "check", "Decide whether a section satisfies the (L, M) definition");
  check_cmd->add_option("--instance", check_opts.instance)->required();
  check_cmd->add_option("--section", check_opts.section)->required();
  check_cmd->add_option("--L", check_opts.L)->required();
  check_cmd->add_option("--M", check_opts.M)->required();
  check_cmd->add_flag("--oracle", check_opts.oracle,
                      "Cross-run the brute-force oracle and fail on "
                      "disagreement");
  add_output_flags(check_cmd, check_opts.out);

  // -- frontier --------------------------------------------------------------
  struct {
    std::string instance, section;
    std::optional<double> at;
    std::optional<double> minimal_l_at;
    OutputOptions out;
  } frontier_opts;
  CLI::App* frontier_cmd = app.add_subcommand(
      "frontier", "Compute the exact optimal-constant frontier M*(L)");
  frontier_cmd->add_option("--instance", frontier_opts.instance)->required();
  frontier_cmd->add_option("--section", frontier_opts.section)->required();
  frontier_cmd->add_option("--at", frontier_opts.at,
                           "Also evaluate M*(L) at this L");
  frontier_cmd->add_option("--minimal-l", frontier_opts.minimal_l_at,
                           "Also compute the smallest admissible L at this M");
  add_output_flags(frontier_cmd, frontier_opts.out);

  // -- cones -----------------------------------------------------------------
  struct {
    std::string instance, section;
    double L = 1.0, M = 0.0;
    OutputOptions out;
  } cones_opts;
  CLI::App* cones_cmd = app.add_subcommand(
      "cones", "Decide the section through the cone-avoidance criterion");
  cones_cmd->add_option("--instance", cones_opts.instance)->required();
  cones_cmd->add_option("--section", cones_opts.section)->required();
  cones_cmd->add_option("--L", cones_opts.L)->required();
  cones_cmd->add_option("--M", cones_opts.M)->required();
  add_output_flags(cones_cmd, cones_opts.out);

  // -- relative --------------------------------------------------------------
  struct {
    std::string instance, phi, psi, base;
    double L = 1.0, M = 0.0;
    bool strong = false;
    OutputOptions out;
  } relative_opts;
  CLI::App* relative_cmd = app.add_subcommand(
      "relative", "Compare a section against a reference section at a base "
                  "label");
  relative_cmd->add_option("--instance", relative_opts.instance)->required();
  relative_cmd->add_option("--phi", relative_opts.phi, "Section under test")
      ->required();
  relative_cmd->add_option("--psi", relative_opts.psi, "Reference section")
      ->required();
  relative_cmd->add_option("--base", relative_opts.base, "Base label")
      ->required();
  relative_cmd->add_option("--L", relative_opts.L)->required();
  relative_cmd->add_option("--M", relative_opts.M)->required();
  relative_cmd->add_flag("--strong", relative_opts.strong,
                         "Use the two-sided pointed distance");
  add_output_flags(relative_cmd, relative_opts.out);

  // -- relation --------------------------------------------------------------
  struct {
    std::string instance, base;
    std::vector<std::string> sections;
    OutputOptions out;
  } relation_opts;
  CLI::App* relation_cmd = app.add_subcommand(
      "relation", "Check reflexivity, symmetry, and transitivity of the "
                  "strong comparison across a set of sections");
  relation_cmd->add_option("--instance", relation_opts.instance)->required();
  relation_cmd
      ->add_option("--sections", relation_opts.sections,
                   "Two or more section files sharing the base point")
      ->required()
      ->expected(-1);
  relation_cmd->add_option("--base", relation_opts.base)->required();
  add_output_flags(relation_cmd, relation_opts.out);

  // -- algebra ---------------------------------------------------------------
  struct {
    std::string linear, op = "convex", phi, eta, psi;
    std::size_t base = 0;
    double t = 0.5, beta = 1.0, tolerance = 1e-9;
    OutputOptions out;
  } algebra_opts;
  CLI::App* algebra_cmd = app.add_subcommand(
      "algebra", "Convex combinations, sums, and scalar multiples of "
                 "sections of a linear quotient");
  algebra_cmd->add_option("--linear", algebra_opts.linear,
                          "Linear instance file")->required();
  algebra_cmd->add_option("--op", algebra_opts.op)
      ->check(CLI::IsMember({"convex", "sum", "scalar"}));
  algebra_cmd->add_option("--phi", algebra_opts.phi)->required();
  algebra_cmd->add_option("--eta", algebra_opts.eta,
                          "Second section (convex and sum)");
  algebra_cmd->add_option("--psi", algebra_opts.psi,
                          "Reference section (convex)");
  algebra_cmd->add_option("--base", algebra_opts.base,
                          "Grid index of the base point");
  algebra_cmd->add_option("--t", algebra_opts.t, "Convex weight in [0, 1]");
  algebra_cmd->add_option("--beta", algebra_opts.beta,
                          "Scalar multiplier (nonzero)");
  algebra_cmd->add_option("--tolerance", algebra_opts.tolerance)
      ->check(CLI::PositiveNumber);
  add_output_flags(algebra_cmd, algebra_opts.out);

  // -- regularity ------------------------------------------------------------
  struct {
    std::string instance, section, reference;
    double Q = 1.0, r0 = 1.0, L = 1.0, M = 0.0, tolerance = 1e-9;
    std::vector<double> radii;
    OutputOptions out;
  } regularity_opts;
  CLI::App* regularity_cmd = app.add_subcommand(
      "regularity", "Transfer ball-mass regularity from a reference section "
                    "and verify the sandwich bounds");
  regularity_cmd->add_option("--instance", regularity_opts.instance)
      ->required();
  regularity_cmd
      ->add_option("--section", regularity_opts.section, "Section under test")
      ->required();
  regularity_cmd->add_option("--reference", regularity_opts.reference,
                             "Source section (defaults to --section)");
  regularity_cmd->add_option("--Q", regularity_opts.Q)->required();
  regularity_cmd->add_option("--r0", regularity_opts.r0)->required();
  regularity_cmd->add_option("--radii", regularity_opts.radii)
      ->required()
      ->expected(-1)
      ->delimiter(',');
  regularity_cmd->add_option("--L", regularity_opts.L)->required();
  regularity_cmd->add_option("--M", regularity_opts.M)->required();
  regularity_cmd->add_option("--tolerance", regularity_opts.tolerance)
      ->check(CLI::PositiveNumber);
  add_output_flags(regularity_cmd, regularity_opts.out);

  // -- generate --------------------------------------------------------------
  struct {
    std::string kind, out_dir, norm = "linf";
    std::size_t rows = 3, cols = 3;
    std::size_t m = 4, k = 3;
    std::size_t fibers_min = 2, fibers_max = 10;
    std::size_t fiber_min = 1, fiber_max = 5;
    std::size_t n = 2, dim_k = 1, samples = 3;
    int grid_lo = -5, grid_hi = 5;
    std::vector<std::string> matrix_rows;
    std::uint64_t seed = 0;
    std::size_t count = 3;
    OutputOptions out;
  } generate_opts;
  CLI::App* generate_cmd = app.add_subcommand(
      "generate", "Write a deterministic instance plus canonical sections");
  generate_cmd->add_option("--kind", generate_opts.kind)
      ->required()
      ->check(CLI::IsMember({"grid", "cyclic", "random", "linear"}));
  generate_cmd->add_option("--out", generate_opts.out_dir, "Output directory")
      ->required();
  generate_cmd->add_option("--rows", generate_opts.rows, "Grid rows");
  generate_cmd->add_option("--cols", generate_opts.cols, "Grid columns");
  generate_cmd->add_option("--norm", generate_opts.norm)
      ->check(CLI::IsMember({"l1", "l2", "linf"}));
  generate_cmd->add_option("--m", generate_opts.m, "Cyclic base length");
  generate_cmd->add_option("--k", generate_opts.k, "Cyclic fiber length");
  generate_cmd->add_option("--fibers-min", generate_opts.fibers_min);
  generate_cmd->add_option("--fibers-max", generate_opts.fibers_max);
  generate_cmd->add_option("--fiber-min", generate_opts.fiber_min);
  generate_cmd->add_option("--fiber-max", generate_opts.fiber_max);
  generate_cmd->add_option("--n", generate_opts.n, "Linear ambient dimension");
  generate_cmd->add_option("--dim", generate_opts.dim_k,
                           "Linear target dimension");
  generate_cmd->add_option("--grid-lo", generate_opts.grid_lo);
  generate_cmd->add_option("--grid-hi", generate_opts.grid_hi);
  generate_cmd->add_option("--samples", generate_opts.samples,
                           "Samples per linear fiber");
  generate_cmd->add_option("--row", generate_opts.matrix_rows,
                           "Explicit matrix row, comma-separated (repeat per "
                           "row)");
  generate_cmd->add_option("--seed", generate_opts.seed);
  generate_cmd->add_option("--count", generate_opts.count,
                           "Random sections to emit");
  add_output_flags(generate_cmd, generate_opts.out);

  // -- report ----------------------------------------------------------------
  struct {
    std::string instance, section;
    std::optional<double> L, M;
    OutputOptions out;
  } report_opts;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Full intrinsic battery: definition check, cone criterion, "
                "frontier, and minimal constants");
  report_cmd->add_option("--instance", report_opts.instance)->required();
  report_cmd->add_option("--section", report_opts.section)->required();
  report_cmd->add_option("--L", report_opts.L,
                         "Constants to test (computed when omitted)");
  report_cmd->add_option("--M", report_opts.M);
  add_output_flags(report_cmd, report_opts.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  // ---- dispatch -------------------------------------------------------------

  if (validate_cmd->parsed()) {
    return guarded("validate", validate_opts.out, [&] {
      FibrationPtr fib = load_instance_file(validate_opts.instance);
      for (const std::string& path : validate_opts.sections)
        load_section_file(fib, path);
      json inputs{{"instance", validate_opts.instance},
                  {"sections", validate_opts.sections}};
      json result{{"points", fib->space().size()},
                  {"labels", fib->label_count()},
                  {"exact", fib->space().exact()},
                  {"measure", fib->has_measure()},
                  {"sections_ok", validate_opts.sections.size()}};
      return report_envelope("validate", Verdict::Verified, std::move(inputs),
                             std::move(result));
    });
  }

  if (check_cmd->parsed()) {
    return guarded("check", check_opts.out, [&] {
      FibrationPtr fib = load_instance_file(check_opts.instance);
      Section phi = load_section_file(fib, check_opts.section);
      const QIConstants c(check_opts.L, check_opts.M);
      const auto violation = qi_violation(phi, c);
      if (check_opts.oracle) {
        const bool agreed =
            oracle_is_qi(phi, c.L, c.M) == !violation.has_value();
        if (!agreed)
          throw Error("oracle disagreement: the direct definition and the "
                      "brute-force scan returned different verdicts");
      }
      json inputs = section_file_inputs(check_opts.instance,
                                        check_opts.section);
      inputs["constants"] = constants_json(c);
      inputs["oracle"] = check_opts.oracle;
      json result{{"is_qi_section", !violation.has_value()},
                  {"witness", violation
                                  ? violation_json(*violation, *fib)
                                  : json(nullptr)}};
      return report_envelope(
          "check", violation ? Verdict::Falsified : Verdict::Verified,
          std::move(inputs), std::move(result));
    });
  }

  if (frontier_cmd->parsed()) {
    return guarded("frontier", frontier_opts.out, [&] {
      FibrationPtr fib = load_instance_file(frontier_opts.instance);
      Section phi = load_section_file(fib, frontier_opts.section);
      const Frontier front = qi_frontier(phi);
      json inputs = section_file_inputs(frontier_opts.instance,
                                        frontier_opts.section);
      json result{{"frontier", frontier_json(front)}};
      if (frontier_opts.at) {
        result["value_at"] =
            json{{"L", *frontier_opts.at}, {"M", front.eval(*frontier_opts.at)}};
        inputs["at"] = *frontier_opts.at;
      }
      if (frontier_opts.minimal_l_at) {
        result["minimal_L"] =
            minimal_L_json(minimal_L(phi, *frontier_opts.minimal_l_at), *fib);
        inputs["minimal_l"] = *frontier_opts.minimal_l_at;
      }
      return report_envelope("frontier", Verdict::Verified, std::move(inputs),
                             std::move(result));
    });
  }

  if (cones_cmd->parsed()) {
    return guarded("cones", cones_opts.out, [&] {
      FibrationPtr fib = load_instance_file(cones_opts.instance);
      Section phi = load_section_file(fib, cones_opts.section);
      const QIConstants c(cones_opts.L, cones_opts.M);
      const bool avoids = graph_avoids_cones(phi, c);
      const bool direct = is_qi_section(phi, c);
      if (avoids != direct)
        throw Error("cone criterion disagrees with the direct definition");
      const auto witness = cone_witness(phi, c);
      json inputs = section_file_inputs(cones_opts.instance,
                                        cones_opts.section);
      inputs["constants"] = constants_json(c);
      json result{{"avoids_cones", avoids},
                  {"agrees_with_definition", true}};
      if (witness)
        result["witness"] =
            json{{"x", fib->space().points()[witness->first]},
                 {"x_prime", fib->space().points()[witness->second]}};
      else
        result["witness"] = nullptr;
      return report_envelope("cones",
                             avoids ? Verdict::Verified : Verdict::Falsified,
                             std::move(inputs), std::move(result));
    });
  }

  if (relative_cmd->parsed()) {
    return guarded("relative", relative_opts.out, [&] {
      FibrationPtr fib = load_instance_file(relative_opts.instance);
      Section phi = load_section_file(fib, relative_opts.phi);
      Section psi = load_section_file(fib, relative_opts.psi);
      const LabelIndex y_hat = resolve_label(*fib, relative_opts.base);
      const QIConstants c(relative_opts.L, relative_opts.M);
      const auto violation =
          relative_opts.strong
              ? strong_relative_violation(phi, psi, y_hat, c)
              : relative_violation(phi, psi, y_hat, c);
      json inputs{{"instance", relative_opts.instance},
                  {"phi", relative_opts.phi},
                  {"psi", relative_opts.psi},
                  {"base", relative_opts.base},
                  {"strong", relative_opts.strong},
                  {"constants", constants_json(c)}};
      json result{{"is_relative_qi", !violation.has_value()},
                  {"strong", relative_opts.strong},
                  {"witness", violation
                                  ? violation_json(*violation, *fib)
                                  : json(nullptr)}};
      return report_envelope(
          "relative", violation ? Verdict::Falsified : Verdict::Verified,
          std::move(inputs), std::move(result));
    });
  }

  if (relation_cmd->parsed()) {
    return guarded("relation", relation_opts.out, [&] {
      FibrationPtr fib = load_instance_file(relation_opts.instance);
      std::vector<Section> sections;
      sections.reserve(relation_opts.sections.size());
      for (const std::string& path : relation_opts.sections)
        sections.push_back(load_section_file(fib, path));
      const LabelIndex y_hat = resolve_label(*fib, relation_opts.base);
      const StrongRelationReport rep = strong_relation_check(sections, y_hat);
      const bool ok = rep.reflexive_ok && rep.symmetric_ok && rep.transitive_ok;
      json inputs{{"instance", relation_opts.instance},
                  {"sections", relation_opts.sections},
                  {"base", relation_opts.base}};
      return report_envelope("relation",
                             ok ? Verdict::Verified : Verdict::Falsified,
                             std::move(inputs), relation_json(rep, *fib));
    });
  }

  if (algebra_cmd->parsed()) {
    return guarded("algebra", algebra_opts.out, [&] {
      const SampledLinearInstance inst = parse_linear_document(
          read_json_file(algebra_opts.linear), algebra_opts.linear);
      auto load_linear_section = [&](const std::string& path) {
        try {
          return LinearSection::from_json(inst.fib, read_json_file(path));
        } catch (const Error& e) {
          throw InstanceError(path + ": " + e.what());
        }
      };
      LinearSection phi = load_linear_section(algebra_opts.phi);
      json inputs{{"linear", algebra_opts.linear},
                  {"op", algebra_opts.op},
                  {"phi", algebra_opts.phi}};
      if (algebra_opts.op == "convex") {
        if (algebra_opts.eta.empty() || algebra_opts.psi.empty())
          throw ConfigError("algebra --op convex needs --eta and --psi");
        LinearSection eta = load_linear_section(algebra_opts.eta);
        LinearSection psi = load_linear_section(algebra_opts.psi);
        const QIConstants phi_c =
            linear_relative_witness(phi, psi, algebra_opts.base);
        const QIConstants eta_c =
            linear_relative_witness(eta, psi, algebra_opts.base);
        const ConvexityCheck chk = convexity_check(
            phi, eta, psi, algebra_opts.base, algebra_opts.t, phi_c, eta_c,
            algebra_opts.tolerance);
        inputs["eta"] = algebra_opts.eta;
        inputs["psi"] = algebra_opts.psi;
        inputs["base"] = algebra_opts.base;
        inputs["t"] = algebra_opts.t;
        inputs["tolerance"] = algebra_opts.tolerance;
        json result{{"check", convexity_json(chk)},
                    {"phi_constants", constants_json(phi_c)},
                    {"eta_constants", constants_json(eta_c)}};
        const bool ok = chk.hypothesis_ok && chk.conclusion_ok;
        return report_envelope("algebra",
                               ok ? Verdict::Verified : Verdict::Falsified,
                               std::move(inputs), std::move(result));
      }
      if (algebra_opts.op == "sum") {
        if (algebra_opts.eta.empty())
          throw ConfigError("algebra --op sum needs --eta");
        LinearSection eta = load_linear_section(algebra_opts.eta);
        LinearSection w = section_sum(phi, eta);
        inputs["eta"] = algebra_opts.eta;
        json result{{"section", w.to_json()},
                    {"scale", w.fibration().scale()}};
        return report_envelope("algebra", Verdict::Verified, std::move(inputs),
                               std::move(result));
      }
      LinearSection w = scalar_multiple(algebra_opts.beta, phi);
      inputs["beta"] = algebra_opts.beta;
      json result{{"section", w.to_json()}, {"scale", w.fibration().scale()}};
      return report_envelope("algebra", Verdict::Verified, std::move(inputs),
                             std::move(result));
    });
  }

  if (regularity_cmd->parsed()) {
    return guarded("regularity", regularity_opts.out, [&] {
      FibrationPtr fib = load_instance_file(regularity_opts.instance);
      Section psi = load_section_file(fib, regularity_opts.section);
      Section phi = regularity_opts.reference.empty()
                        ? psi
                        : load_section_file(fib, regularity_opts.reference);
      const QIConstants c(regularity_opts.L, regularity_opts.M);
      const std::span<const double> radii(regularity_opts.radii);
      const HomogeneityResult hom =
          homogeneity_constant(*fib, regularity_opts.r0, radii);
      const AdRegularityEstimate ad = ad_regularity_estimate(
          phi, regularity_opts.Q, regularity_opts.r0, radii);
      SourceRegularity src;
      src.Q = regularity_opts.Q;
      src.r0 = regularity_opts.r0;
      src.C = hom.C;
      src.c1 = ad.c1;
      src.c2 = ad.c2;
      src.feasible = hom.feasible && ad.positive;
      src.best_fit_Q = ad.best_fit_Q;
      const RegularityReport rep = transfer_regularity(
          psi, src, c, radii, regularity_opts.tolerance);
      const BallInclusionReport incl = ball_inclusion_check(psi, c, radii);
      json inputs{{"instance", regularity_opts.instance},
                  {"section", regularity_opts.section},
                  {"reference", regularity_opts.reference.empty()
                                    ? regularity_opts.section
                                    : regularity_opts.reference},
                  {"Q", regularity_opts.Q},
                  {"r0", regularity_opts.r0},
                  {"radii", regularity_opts.radii},
                  {"constants", constants_json(c)},
                  {"tolerance", regularity_opts.tolerance}};
      json result{{"homogeneity", homogeneity_json(hom, fib->space())},
                  {"ad_estimate", ad_estimate_json(ad, *fib)},
                  {"sandwich", regularity_json(rep, *fib)},
                  {"inclusions", inclusion_json(incl, fib->space(), *fib)}};
      const bool ok = rep.all_ok && incl.ok;
      return report_envelope("regularity",
                             ok ? Verdict::Verified : Verdict::Falsified,
                             std::move(inputs), std::move(result));
    });
  }

  if (generate_cmd->parsed()) {
    return guarded("generate", generate_opts.out, [&] {
      namespace fs = std::filesystem;
      fs::create_directories(generate_opts.out_dir);
      Rng rng(generate_opts.seed);
      std::vector<std::string> written;
      auto emit = [&](const std::string& name, const json& doc) {
        const std::string path =
            (fs::path(generate_opts.out_dir) / name).string();
        write_text_file(path, dump_report(doc));
        written.push_back(path);
      };
      json inputs{{"kind", generate_opts.kind},
                  {"out", generate_opts.out_dir},
                  {"seed", generate_opts.seed}};
      json result = json::object();

      if (generate_opts.kind == "grid") {
        const GridInstance grid =
            make_grid(generate_opts.cols, generate_opts.rows,
                      norm_kind_from_string(generate_opts.norm));
        inputs["rows"] = generate_opts.rows;
        inputs["cols"] = generate_opts.cols;
        inputs["norm"] = generate_opts.norm;
        emit("instance.json", instance_document(*grid.fib));
        emit("identity.json", grid.identity_row().to_json());
        emit("zigzag.json", grid.zigzag().to_json());
        result["zigzag_constants"] =
            constants_json(tight_constants(grid.zigzag()));
      } else if (generate_opts.kind == "cyclic") {
        const CyclicInstance cyc =
            make_cyclic_product(generate_opts.m, generate_opts.k);
        inputs["m"] = generate_opts.m;
        inputs["k"] = generate_opts.k;
        emit("instance.json", instance_document(*cyc.fib));
        emit("zero.json", cyc.zero_section().to_json());
      } else if (generate_opts.kind == "random") {
        RandomInstanceParams params;
        params.fibers_min = generate_opts.fibers_min;
        params.fibers_max = generate_opts.fibers_max;
        params.fiber_min = generate_opts.fiber_min;
        params.fiber_max = generate_opts.fiber_max;
        FibrationPtr fib = random_fibration(rng, params);
        emit("instance.json", instance_document(*fib));
        json sections = json::array();
        for (std::size_t i = 0; i < generate_opts.count; ++i) {
          const Section s = random_section(fib, rng);
          const std::string name = "section_" + std::to_string(i) + ".json";
          emit(name, s.to_json());
          sections.push_back(json{{"file", name},
                                  {"constants",
                                   constants_json(tight_constants(s))}});
        }
        result["sections"] = std::move(sections);
      } else {  // linear
        SampledLinearInstance inst = [&] {
          if (!generate_opts.matrix_rows.empty()) {
            const std::size_t k = generate_opts.matrix_rows.size();
            std::vector<std::vector<double>> rows;
            for (const std::string& row : generate_opts.matrix_rows) {
              std::vector<double> entries;
              std::stringstream ss(row);
              std::string item;
              while (std::getline(ss, item, ','))
                entries.push_back(std::stod(item));
              rows.push_back(std::move(entries));
            }
            const std::size_t n = rows.front().size();
            Eigen::MatrixXd A(static_cast<Eigen::Index>(k),
                              static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < k; ++i) {
              if (rows[i].size() != n)
                throw ConfigError("--row entries have inconsistent lengths");
              for (std::size_t j = 0; j < n; ++j)
                A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rows[i][j];
            }
            return sampled_linear_instance(
                rng, A, generate_opts.grid_lo, generate_opts.grid_hi,
                generate_opts.samples, norm_kind_from_string(generate_opts.norm),
                1.0);
          }
          RandomLinearParams params;
          params.n = generate_opts.n;
          params.k = generate_opts.dim_k;
          params.samples_per_fiber = generate_opts.samples;
          params.norm = norm_kind_from_string(generate_opts.norm);
          return random_linear_instance(rng, params);
        }();
        emit("linear.json", linear_document(inst));
        json sections = json::array();
        for (std::size_t i = 0; i < generate_opts.count; ++i) {
          const LinearSection s = random_sampled_section(inst, rng);
          const std::string name = "section_" + std::to_string(i) + ".json";
          emit(name, s.to_json());
          sections.push_back(json{{"file", name}});
        }
        result["sections"] = std::move(sections);
      }
      result["written"] = written;
      return report_envelope("generate", Verdict::Verified, std::move(inputs),
                             std::move(result));
    });
  }

  if (report_cmd->parsed()) {
    return guarded("report", report_opts.out, [&] {
      FibrationPtr fib = load_instance_file(report_opts.instance);
      Section phi = load_section_file(fib, report_opts.section);
      const bool given = report_opts.L.has_value() && report_opts.M.has_value();
      if (report_opts.L.has_value() != report_opts.M.has_value())
        throw ConfigError("report needs both --L and --M, or neither");
      const QIConstants c = given
                                ? QIConstants(*report_opts.L, *report_opts.M)
                                : tight_constants(phi);
      const auto violation = qi_violation(phi, c);
      const bool avoids = graph_avoids_cones(phi, c);
      if (avoids != !violation.has_value())
        throw Error("cone criterion disagrees with the direct definition");
      const Frontier front = qi_frontier(phi);
      json inputs = section_file_inputs(report_opts.instance,
                                        report_opts.section);
      inputs["constants"] = constants_json(c);
      inputs["constants_source"] = given ? "given" : "computed";
      json result{
          {"constants", constants_json(c)},
          {"is_qi_section", !violation.has_value()},
          {"witness",
           violation ? violation_json(*violation, *fib) : json(nullptr)},
          {"avoids_cones", avoids},
          {"criteria_agree", true},
          {"frontier", frontier_json(front)},
          {"minimal_M_at_L", minimal_M(phi, c.L)},
          {"minimal_L_at_M", minimal_L_json(minimal_L(phi, c.M), *fib)}};
      return report_envelope(
          "report", violation ? Verdict::Falsified : Verdict::Verified,
          std::move(inputs), std::move(result));
    });
  }

  return 0;  // unreachable with require_subcommand(1)
}

}  // namespace isec

#pragma once

#include <string>

#include "isec/linear.hpp"
#include "isec/qi.hpp"
#include "isec/regularity.hpp"

namespace isec {

/// Outcome of one analysis run, mapped onto the process exit code:
/// verified = 0, falsified (with witness) = 2, input or precondition
/// problem = 1.  Keeping "the property failed here" distinct from "the
/// input was bad" lets CI treat them differently.
enum class Verdict { Verified, Falsified, InputError };

int exit_code(Verdict v);
const char* verdict_name(Verdict v);

// JSON views of the analysis results.  nlohmann objects keep their keys
// sorted and print doubles in shortest round-trip form, so a report dumps
// byte-identically for identical inputs.  Index-valued fields are
// translated to the instance's own labels and point ids.

json constants_json(QIConstants c);
json violation_json(const PairViolation& v, const Fibration& fib);
json frontier_json(const Frontier& f);
json minimal_L_json(const MinimalLT<double>& m, const Fibration& fib);
json transfer_json(const TransferCheckReport& r, const Fibration& fib);
json equivalence_json(const GlobalEquivalenceReport& r, const Fibration& fib);
json relation_json(const StrongRelationReport& r, const Fibration& fib);
json homogeneity_json(const HomogeneityResult& r, const FiniteMetricSpace& sp);
json inclusion_json(const BallInclusionReport& r, const FiniteMetricSpace& sp,
                    const Fibration& fib);
json ad_estimate_json(const AdRegularityEstimate& r, const Fibration& fib);
json regularity_json(const RegularityReport& r, const Fibration& fib);
json convexity_json(const ConvexityCheck& c);
json fiber_identity_json(const FiberIdentityCheck& c);

/// The assembled report: {"command", "verdict", "exit_code", "inputs",
/// "result"}.  `inputs` is the caller's echo of everything that influenced
/// the run (paths, constants, tolerance, seed).
json report_envelope(const std::string& command, Verdict v, json inputs,
                     json result);

/// Canonical rendering: sorted keys, two-space indent, trailing newline.
std::string dump_report(const json& report);

/// Flat "path = value" rendering for --format text.
std::string render_text(const json& report);

}  // namespace isec

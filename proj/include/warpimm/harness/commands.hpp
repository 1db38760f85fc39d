#pragma once

#include <string>
#include <vector>

#include "warpimm/harness/config.hpp"
#include "warpimm/json_io.hpp"

namespace warpimm::harness {

/// nullity | lemma | falsify | rep-verify | curvature | analyze | decompose | oracle.
const std::vector<std::string>& commandNames();

/// Runs one command and wraps the outcome in a report:
/// {"schema", "schemaVersion", "command", "arguments", "config", "results",
///  "verdict", "timing"} or, on failure, "error" in place of "results".
/// Arguments by command:
///   nullity, oracle   {"instance": form document, "s"?: int (oracle only)}
///   lemma             {"instance": lemma instance document}
///   falsify           {"n", "p", "trials"}
///   rep-verify        {"instance": representation document, "samples"?}
///   curvature         {"instance": warped metric document, "samples"?}
///   analyze, decompose {"instance": immersion document}
/// Library errors never escape; they become the report's "error" object.
Json runCommand(const std::string& command, const Json& arguments, const RunConfig& config);

/// 0 for a passing or informational verdict, 1 for a failing verdict, 2 for
/// an error report.
int exitCodeFor(const Json& report);

}  // namespace warpimm::harness

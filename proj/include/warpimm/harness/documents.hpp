#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpimm/families.hpp"
#include "warpimm/forms.hpp"
#include "warpimm/immersions.hpp"
#include "warpimm/json_io.hpp"
#include "warpimm/spaceforms.hpp"
#include "warpimm/splitting.hpp"
#include "warpimm/warped.hpp"

namespace warpimm::harness {

inline constexpr int kSchemaVersion = 1;

/// Parses JSON text; syntax errors become ParseError with line and column.
Json parseJsonText(const std::string& text, const std::string& source = "<input>");
Json readJsonFile(const std::string& path);
void writeJsonFile(const std::string& path, const Json& doc);

/// {"n", "p", "ops": [row-major matrices], "symTol"}.
forms::SymmetricBilinearForm formFromJson(const Json& doc);
Json formToJson(const forms::SymmetricBilinearForm& beta);

struct LemmaInstance {
  forms::SymmetricBilinearForm beta;
  splitting::OrthogonalSplitting split;
};

/// Form document plus either "split": [n×dᵢ frame matrices, one per block]
/// or "splitDims": [d₁, …] for a coordinate split.
LemmaInstance lemmaInstanceFromJson(const Json& doc);
Json lemmaInstanceToJson(const LemmaInstance& inst);

struct ImmersionDocument {
  std::string family;
  immersions::NumericalImmersion immersion;
  /// Present for warped compositions (including revolution surfaces).
  std::optional<immersions::WarpedComposition> composition;
  std::vector<VectorXd> samples;
  /// false when the document declares a Riemannian product.
  bool warped = true;
};

/// Immersion document: "family" (graph-polynomial | sphere-chart | revolution
/// | composition | warped-composition | product | seeded-warped) with its
/// coefficient tables, and an optional "samples" grid: {"points": [...]} or
/// {"count", "radius", "seed"}.
ImmersionDocument immersionFromJson(const Json& doc, const FdSteps& steps, std::uint64_t defaultSeed);

std::vector<VectorXd> samplesFromJson(const Json& doc, int dim, std::uint64_t defaultSeed);

Json nullityReportToJson(const forms::NullityReport& r);
Json lemmaReportToJson(const splitting::LemmaReport& r);
Json falsifyReportToJson(const splitting::FalsifyReport& r);
Json pullbackCheckToJson(const spaceforms::PullbackCheck& c);
Json decompositionToJson(const immersions::DecompositionResult& d);

}  // namespace warpimm::harness

#include "warpimm/harness/documents.hpp"

#include <fstream>
#include <sstream>

#include "warpimm/errors.hpp"

namespace warpimm::harness {

using immersions::NumericalImmersion;

Json parseJsonText(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorKind::ParseError, "malformed JSON in " + source,
         {{"source", source}, {"line", line}, {"column", column}, {"byte", e.byte}});
  }
}

Json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path, {{"source", path}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parseJsonText(ss.str(), path);
}

void writeJsonFile(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path, {{"path", path}});
  out << doc.dump(2) << '\n';
}

forms::SymmetricBilinearForm formFromJson(const Json& doc) {
  const Json& ops = requireField(doc, "ops", "form");
  if (!ops.is_array()) fail(ErrorKind::ParseError, "form: \"ops\" must be an array of matrices");
  std::vector<MatrixXd> mats;
  for (std::size_t a = 0; a < ops.size(); ++a) mats.push_back(matrixFromJson(ops[a], "form.ops[" + std::to_string(a) + "]"));
  const double symTol = doc.value("symTol", 1e-12);
  auto beta = forms::SymmetricBilinearForm::make(mats, symTol);
  if (doc.contains("n") && doc["n"].get<int>() != beta.n())
    fail(ErrorKind::DimensionMismatch, "form: \"n\" disagrees with the operators", {{"n", doc["n"]}, {"actual", beta.n()}});
  if (doc.contains("p") && doc["p"].get<int>() != beta.p())
    fail(ErrorKind::DimensionMismatch, "form: \"p\" disagrees with the operators", {{"p", doc["p"]}, {"actual", beta.p()}});
  return beta;
}

Json formToJson(const forms::SymmetricBilinearForm& beta) {
  Json ops = Json::array();
  for (const auto& a : beta.ops()) ops.push_back(matrixToJson(a));
  return {{"schemaVersion", kSchemaVersion}, {"n", beta.n()}, {"p", beta.p()}, {"ops", ops}, {"symTol", beta.symTol()}};
}

LemmaInstance lemmaInstanceFromJson(const Json& doc) {
  LemmaInstance inst{formFromJson(doc), {}};
  if (doc.contains("split")) {
    std::vector<MatrixXd> blocks;
    for (std::size_t b = 0; b < doc["split"].size(); ++b) {
      const MatrixXd cols = matrixFromJson(doc["split"][b], "split[" + std::to_string(b) + "]");
      blocks.push_back(cols.transpose());
    }
    inst.split = splitting::OrthogonalSplitting::make(blocks);
  } else {
    inst.split = splitting::OrthogonalSplitting::coordinate(requireField(doc, "splitDims", "lemma instance").get<std::vector<int>>());
  }
  if (inst.split.n() != inst.beta.n())
    fail(ErrorKind::DimensionMismatch, "split dimension differs from the form", {{"split", inst.split.n()}, {"n", inst.beta.n()}});
  return inst;
}

Json lemmaInstanceToJson(const LemmaInstance& inst) {
  Json doc = formToJson(inst.beta);
  Json split = Json::array();
  for (const auto& b : inst.split.blocks()) split.push_back(matrixToJson(b.transpose()));
  doc["split"] = split;
  return doc;
}

std::vector<VectorXd> samplesFromJson(const Json& doc, int dim, std::uint64_t defaultSeed) {
  if (doc.contains("points")) {
    std::vector<VectorXd> pts;
    for (std::size_t i = 0; i < doc["points"].size(); ++i) {
      pts.push_back(vectorFromJson(doc["points"][i], "samples.points"));
      if (pts.back().size() != dim)
        fail(ErrorKind::DimensionMismatch, "sample point has the wrong dimension", {{"index", i}, {"dim", dim}});
    }
    if (pts.empty()) fail(ErrorKind::ParseError, "samples.points is empty");
    return pts;
  }
  const int count = doc.value("count", 8);
  const double radius = doc.value("radius", 0.15);
  const std::uint64_t seed = doc.value("seed", defaultSeed);
  if (count < 1 || !(radius > 0.0)) fail(ErrorKind::InvalidArgument, "samples need count ≥ 1 and radius > 0");
  return families::sampleBox(dim, count, radius, seed);
}

namespace {

std::vector<families::GraphTerm> termsFromJson(const Json& doc, int dim) {
  std::vector<families::GraphTerm> terms;
  const Json& ts = requireField(doc, "terms", "graph-polynomial");
  for (std::size_t t = 0; t < ts.size(); ++t) {
    families::GraphTerm term;
    term.hessian = matrixFromJson(requireField(ts[t], "hessian", "graph term"), "graph term hessian");
    term.cubic = ts[t].contains("cubic") ? vectorFromJson(ts[t]["cubic"], "graph term cubic") : VectorXd::Zero(dim);
    terms.push_back(term);
  }
  return terms;
}

SmoothMap graphFromJson(const Json& doc) {
  const int dim = requireField(doc, "dim", "graph-polynomial").get<int>();
  const MatrixXd rot = doc.contains("rotation") ? matrixFromJson(doc["rotation"], "rotation") : MatrixXd();
  return families::graphMap(dim, termsFromJson(doc, dim), rot);
}

// Flat maps usable as product factors or inner immersions.
SmoothMap flatMapFromJson(const Json& doc) {
  const std::string family = requireField(doc, "family", "immersion").get<std::string>();
  if (family == "graph-polynomial") return graphFromJson(doc);
  if (family == "sphere-chart")
    return families::sphereChartMap(requireField(doc, "dim", "sphere-chart").get<int>(), doc.value("radius", 1.0));
  if (family == "product") {
    std::vector<SmoothMap> maps;
    for (const auto& f : requireField(doc, "factors", "product")) maps.push_back(flatMapFromJson(f));
    return SmoothMap::product(maps);
  }
  fail(ErrorKind::ParseError, "not a flat immersion family: " + family, {{"family", family}});
}

SmoothMap outerFromJson(const Json& doc, int dim) {
  const std::string kind = requireField(doc, "kind", "composition.outer").get<std::string>();
  SmoothMap g;
  if (kind == "cylinder")
    g = families::cylinderMap(dim, doc.value("axis", 0), doc.value("radius", 1.0));
  else if (kind == "inclusion")
    g = families::inclusionMap(dim, doc.value("extra", 1));
  else
    fail(ErrorKind::ParseError, "unknown outer map kind: " + kind);
  if (doc.contains("rotation")) {
    const MatrixXd rot = matrixFromJson(doc["rotation"], "composition.outer.rotation");
    g = SmoothMap::compose(g, families::affineMap(rot, VectorXd::Zero(rot.rows())));
  }
  return g;
}

SmoothMap chartFactorFromJson(const Json& doc, int chartDim) {
  const std::string kind = doc.value("family", std::string("identity"));
  if (kind == "identity") return SmoothMap::identity(chartDim);
  if (kind == "graph-polynomial") return graphFromJson(doc);
  fail(ErrorKind::ParseError, "unknown factor family: " + kind);
}

}  // namespace

ImmersionDocument immersionFromJson(const Json& doc, const FdSteps& steps, std::uint64_t defaultSeed) {
  ImmersionDocument out;
  out.family = requireField(doc, "family", "immersion").get<std::string>();
  const std::string& fam = out.family;
  std::vector<VectorXd> seededSamples;
  if (fam == "graph-polynomial" || fam == "sphere-chart" || fam == "product") {
    const SmoothMap f = flatMapFromJson(doc);
    out.immersion = NumericalImmersion(f, {0.0, f.outDim()}, steps, fam);
    out.warped = fam != "product";
  } else if (fam == "revolution") {
    const Json& prof = requireField(doc, "profile", "revolution");
    out.composition = families::revolutionSurface(prof.at(0).get<double>(), prof.at(1).get<double>(),
                                                     doc.value("sphereDim", 1));
  } else if (fam == "composition") {
    const ImmersionDocument inner = immersionFromJson(requireField(doc, "inner", "composition"), steps, defaultSeed);
    const SmoothMap g = outerFromJson(requireField(doc, "outer", "composition"), inner.immersion.ambient().ambientDim());
    out.immersion = immersions::makeComposition(inner.immersion, g);
    out.warped = inner.warped;
  } else if (fam == "warped-composition") {
    const auto rep = spaceforms::WarpedRepresentation::fromJson(requireField(doc, "representation", "warped-composition"));
    const Json& fs = requireField(doc, "factors", "warped-composition");
    if (static_cast<int>(fs.size()) != rep.k() + 1)
      fail(ErrorKind::FactorTargetMismatch, "one factor entry per factor of the representation");
    std::vector<SmoothMap> charts;
    for (int j = 0; j <= rep.k(); ++j) charts.push_back(chartFactorFromJson(fs[static_cast<std::size_t>(j)], rep.dims()[static_cast<std::size_t>(j)]));
    out.composition = immersions::composeWarpedCharts(rep, charts);
  } else if (fam == "seeded-warped") {
    auto sw = families::seededWarpedComposition(requireField(doc, "index", "seeded-warped").get<int>(),
                                                doc.value("seed", defaultSeed));
    out.composition = sw.comp;
    seededSamples = sw.samples;
  } else {
    fail(ErrorKind::ParseError, "unknown immersion family: " + fam, {{"family", fam}});
  }
  if (out.composition) out.immersion = NumericalImmersion(out.composition->immersion.map(), out.composition->immersion.ambient(), steps, fam);
  if (doc.contains("warped")) out.warped = doc["warped"].get<bool>();
  if (doc.contains("samples"))
    out.samples = samplesFromJson(doc["samples"], out.immersion.n(), defaultSeed);
  else if (!seededSamples.empty())
    out.samples = seededSamples;
  else
    out.samples = samplesFromJson(Json::object(), out.immersion.n(), defaultSeed);
  return out;
}

Json nullityReportToJson(const forms::NullityReport& r) {
  Json certified = Json::array();
  for (bool b : r.certified) certified.push_back(b);
  return {{"n", r.n},
          {"p", r.p},
          {"values", r.values},
          {"certified", certified},
          {"codimensionOk", r.codimensionOk},
          {"hypothesisOk", r.hypothesisOk},
          {"firstViolatingS", r.firstViolatingS}};
}

Json lemmaReportToJson(const splitting::LemmaReport& r) {
  Json doc{{"nullity", nullityReportToJson(r.nullity)},
           {"hypothesisOk", r.hypothesisOk},
           {"curvatureResidual", r.curvatureResidual},
           {"sDim", r.sDim},
           {"sNorm", r.sNorm},
           {"maxRank", r.maxRank},
           {"verdict", splitting::verdictName(r.verdict)},
           {"gateCorrected", r.gateCorrected}};
  if (r.maxRankDirection.size() > 0) doc["maxRankDirection"] = vectorToJson(r.maxRankDirection);
  if (r.stepsComputed)
    doc["steps"] = {{"kernelDim", r.steps.kernelD.cols()},
                    {"stepOneResidual", r.steps.stepOneResidual},
                    {"stepTwoResidual", r.steps.stepTwoResidual},
                    {"zeroResidual", r.steps.zeroResidual}};
  return doc;
}

Json falsifyReportToJson(const splitting::FalsifyReport& r) {
  Json fams = Json::object();
  for (const auto& [name, counts] : r.families) fams[name] = {{"trials", counts.first}, {"tested", counts.second}};
  return {{"n", r.n},
          {"p", r.p},
          {"trials", r.trials},
          {"projectionFailed", r.projectionFailed},
          {"gateRejected", r.gateRejected},
          {"tested", r.tested},
          {"violations", r.violations},
          {"gateCorrected", r.gateCorrected},
          {"compositions", r.compositions},
          {"compositionsFlagged", r.compositionsFlagged},
          {"nearBoundary", r.nearBoundary},
          {"nontrivialMixedStart", r.nontrivialMixedStart},
          {"maxSNorm", r.maxSNorm},
          {"maxCurvatureResidual", r.maxCurvatureResidual},
          {"maxStepOne", r.maxStepOne},
          {"maxStepTwo", r.maxStepTwo},
          {"maxZero", r.maxZero},
          {"violationSeeds", r.violationSeeds},
          {"families", fams}};
}

Json pullbackCheckToJson(const spaceforms::PullbackCheck& c) {
  return {{"offBlockMax", c.offBlockMax}, {"inBlockRelErr", c.inBlockRelErr}, {"richardsonGap", c.richardsonGap}};
}

Json decompositionToJson(const immersions::DecompositionResult& d) {
  Json claims = Json::array();
  for (const auto& c : d.claims)
    claims.push_back({{"coords", c.coords}, {"codimension", c.codimension}, {"nullities", c.nullities}, {"holds", c.holds}});
  Json slices = Json::array();
  for (const auto& s : d.slices) slices.push_back({{"dim", s.n()}, {"origin", vectorToJson(s(VectorXd::Zero(s.n())))}});
  Json doc{{"blocks", d.blocks},
           {"baseCoords", d.baseCoords},
           {"factors", d.factors},
           {"warpedBlocks", d.warpedBlocks},
           {"claims", claims},
           {"slices", slices},
           {"codimension", d.codimension},
           {"factorCodimensions", d.factorCodimensions},
           {"adaptednessResidual", d.adaptednessResidual},
           {"basePoint", vectorToJson(d.basePoint)}};
  if (!d.grouping.groups.empty()) {
    doc["warpingGroups"] = {{"groups", d.grouping.groups}, {"lambda", d.grouping.lambda}};
    doc["warpingSamples"] = matrixToJson(d.warpingSamples);
  }
  return doc;
}

}  // namespace warpimm::harness

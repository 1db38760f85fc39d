#include "warpimm/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "warpimm/errors.hpp"
#include "warpimm/harness/documents.hpp"
#include "warpimm/harness/oracles.hpp"

namespace warpimm::harness {

namespace {

struct Outcome {
  Json results;
  std::string verdict;
};

const Json& instance(const Json& args) { return requireField(args, "instance", "arguments"); }

Outcome nullityCommand(const Json& args, const RunConfig& cfg) {
  const auto beta = formFromJson(instance(args));
  const auto rep = forms::nullityProfile(beta, cfg.nullityOptions());
  return {nullityReportToJson(rep), rep.hypothesisOk ? "hypothesisOk" : "hypothesisFails"};
}

Outcome lemmaCommand(const Json& args, const RunConfig& cfg) {
  const LemmaInstance inst = lemmaInstanceFromJson(instance(args));
  splitting::LemmaConfig lc;
  lc.nullity = cfg.nullityOptions();
  lc.seed = cfg.seed;
  lc.sTol = cfg.tol;
  Json reports = Json::array();
  std::string verdict = "holds";
  for (const auto& r : splitting::lemmaVerifyBlocks(inst.beta, inst.split, lc)) {
    reports.push_back(lemmaReportToJson(r));
    if (r.verdict == splitting::Verdict::Violated)
      verdict = "violated";
    else if (r.verdict == splitting::Verdict::HypothesisFails && verdict == "holds")
      verdict = "hypothesisFails";
  }
  return {{{"blocks", reports}}, verdict};
}

Outcome falsifyCommand(const Json& args, const RunConfig& cfg) {
  splitting::FalsifyConfig fc;
  fc.trials = args.value("trials", 1000);
  fc.seed = cfg.seed;
  fc.jobs = cfg.jobs;
  fc.lemma.nullity = cfg.nullityOptions();
  fc.lemma.seed = cfg.seed;
  fc.lemma.sTol = cfg.tol;
  const auto rep = splitting::falsify(requireField(args, "n", "falsify").get<int>(),
                                      requireField(args, "p", "falsify").get<int>(), fc);
  const bool ok = rep.violations == 0 && rep.maxStepOne <= cfg.tol && rep.maxStepTwo <= cfg.tol;
  return {falsifyReportToJson(rep), ok ? "pass" : "fail"};
}

Outcome repVerifyCommand(const Json& args, const RunConfig& cfg) {
  const auto rep = spaceforms::WarpedRepresentation::fromJson(instance(args));
  const Json sdoc = args.contains("samples") ? args["samples"] : Json::object();
  const auto pts = samplesFromJson(sdoc, rep.m(), cfg.seed);
  const SmoothMap psi = rep.psiMap();
  double off = 0.0, in = 0.0, quad = 0.0, gap = 0.0;
  for (const auto& x : pts) {
    const auto c = spaceforms::pullbackMetric(rep, x, cfg.h);
    off = std::max(off, c.offBlockMax);
    in = std::max(in, c.inBlockRelErr);
    gap = std::max(gap, c.richardsonGap);
    quad = std::max(quad, rep.space().quadricResidual(psi(x)));
  }
  const bool ok = off <= cfg.tol && in <= cfg.tol && quad <= 1e-9;
  return {{{"samples", pts.size()},
           {"offBlockMax", off},
           {"inBlockRelErr", in},
           {"richardsonGap", gap},
           {"quadricResidual", quad},
           {"representation", rep.toJson()}},
          ok ? "pass" : "fail"};
}

Outcome curvatureCommand(const Json& args, const RunConfig& cfg) {
  const auto spec = warped::WarpedMetricSpec::fromJson(instance(args));
  const int n = spec.n();
  const Json sdoc = args.contains("samples") ? args["samples"] : Json{{"count", 4}, {"radius", 0.1}};
  const auto pts = samplesFromJson(sdoc, n, cfg.seed);
  double maxR = 0.0, fdDiff = 0.0, scale = 0.0;
  Json perPoint = Json::array();
  for (const auto& x : pts) {
    const auto fd = fdRiemannOperators([&spec](const VectorXd& y) { return spec.metric(y); }, x, cfg.h, 10.0 * cfg.h);
    double pointR = 0.0;
    Json sectional = Json::array();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const VectorXd ea = VectorXd::Unit(n, a), eb = VectorXd::Unit(n, b);
        const MatrixXd r = warped::curvatureOperator(spec, ea, eb, x);
        pointR = std::max(pointR, r.cwiseAbs().maxCoeff());
        fdDiff = std::max(fdDiff, (r - fd[static_cast<std::size_t>(a * n + b)]).cwiseAbs().maxCoeff());
        if (a < b) sectional.push_back({{"plane", {a, b}}, {"K", warped::sectionalCurvature(spec, ea, eb, x)}});
      }
    maxR = std::max(maxR, pointR);
    scale = std::max(scale, pointR);
    perPoint.push_back({{"point", vectorToJson(x)}, {"maxAbsR", pointR}, {"sectional", sectional}});
  }
  // The fd oracle differentiates the metric twice; 1e-4 is its noise floor.
  const bool ok = fdDiff <= 1e-4 * std::max(1.0, scale);
  return {{{"maxAbsR", maxR}, {"fdDifference", fdDiff}, {"points", perPoint}}, ok ? "pass" : "fail"};
}

Outcome analyzeCommand(const Json& args, const RunConfig& cfg) {
  const ImmersionDocument doc = immersionFromJson(instance(args), cfg.fdSteps(), cfg.seed);
  const auto& f = doc.immersion;
  const double c = f.ambient().c;
  Json perSample = Json::array();
  bool allOk = true;
  for (std::size_t i = 0; i < doc.samples.size(); ++i) {
    const auto ff = immersions::fundamentalForms(f, doc.samples[i]);
    Json entry{{"point", vectorToJson(doc.samples[i])}, {"codimension", ff.codimension}};
    if (ff.alpha) {
      auto opts = cfg.nullityOptions();
      opts.seed = deriveSeed(cfg.seed, i);
      const auto rep = forms::nullityProfile(*ff.alpha, opts);
      entry["nullity"] = nullityReportToJson(rep);
      allOk = allOk && rep.hypothesisOk;
    }
    perSample.push_back(entry);
  }
  Json results{{"family", doc.family}, {"n", f.n()}, {"samples", perSample}};
  const VectorXd& x = doc.samples.front();
  results["codazziResidual"] = immersions::codazziResidual(f, x, 10.0 * cfg.h);

  // Gauss equation against the curvature of the intrinsic metric.
  const auto spec = doc.composition
                        ? doc.composition->intrinsicMetric()
                        : warped::WarpedMetricSpec::make({warped::FactorMetric::pullback(f.map(), f.ambientSpace())}, {});
  const auto ff = immersions::fundamentalForms(f, x);
  const int n = f.n();
  double gauss = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        for (int e = 0; e < n; ++e) {
          const VectorXd va = VectorXd::Unit(n, a), vb = VectorXd::Unit(n, b), vd = VectorXd::Unit(n, d),
                         ve = VectorXd::Unit(n, e);
          gauss = std::max(gauss, std::abs(immersions::gaussCurvature4(ff, c, va, vb, vd, ve) -
                                           warped::curvature4(spec, va, vb, vd, ve, x)));
        }
  results["gaussResidual"] = gauss;

  if (doc.composition) {
    const auto& comp = *doc.composition;
    immersions::AdaptednessReport worst;
    double iso = 0.0;
    for (const auto& s : doc.samples) {
      const auto a = immersions::adaptedness(f.withoutOracle(), s, comp.dims());
      worst.mixed = std::max(worst.mixed, a.mixed);
      worst.first = std::max(worst.first, a.first);
      worst.uv = std::max(worst.uv, a.uv);
      iso = std::max(iso, (immersions::fundamentalForms(f, s).gram - spec.metric(s)).cwiseAbs().maxCoeff());
    }
    results["dims"] = comp.dims();
    results["adaptedness"] = {{"mixed", worst.mixed}, {"first", worst.first}, {"uv", worst.uv}};
    results["isometryResidual"] = iso;
    results["nolkerResidual"] = immersions::nolkerAlphaCheck(comp, doc.samples);
  }
  return {results, allOk ? "hypothesisOk" : "hypothesisFails"};
}

Outcome decomposeCommand(const Json& args, const RunConfig& cfg) {
  const ImmersionDocument doc = immersionFromJson(instance(args), cfg.fdSteps(), cfg.seed);
  immersions::DecomposeConfig dc;
  dc.nullity = cfg.nullityOptions();
  dc.adaptTol = cfg.adaptTol;
  dc.warped = doc.warped;
  const auto res = immersions::decompose(doc.immersion, doc.samples, dc);
  Json results = decompositionToJson(res);
  bool claimsHold = std::all_of(res.claims.begin(), res.claims.end(), [](const auto& c) { return c.holds; });
  if (!doc.composition) return {results, claimsHold ? "decomposed" : "fail"};

  // Round trip against the factors the composition was built from.
  const auto& comp = *doc.composition;
  std::vector<std::set<int>> expected;
  for (int j = 0; j <= comp.rep.k(); ++j) {
    std::set<int> s;
    for (int a = 0; a < comp.dims()[static_cast<std::size_t>(j)]; ++a) s.insert(comp.offset(j) + a);
    expected.push_back(s);
  }
  bool blocksOk = res.factors.size() == expected.size();
  double warpErr = 0.0;
  for (std::size_t j = 0; blocksOk && j < res.factors.size(); ++j) {
    const std::set<int> got(res.factors[j].begin(), res.factors[j].end());
    const auto it = std::find(expected.begin(), expected.end(), got);
    if (it == expected.end() || (j == 0) != (it == expected.begin())) {
      blocksOk = false;
      break;
    }
    if (j == 0) continue;
    const int i = static_cast<int>(it - expected.begin());
    const auto rho = comp.rho(i);
    const int n0 = comp.dims()[0];
    const double ref = rho(VectorXd(res.basePoint.head(n0)));
    for (std::size_t s = 0; s < doc.samples.size(); ++s)
      warpErr = std::max(warpErr, std::abs(res.warpingSamples(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(s)) -
                                           rho(VectorXd(doc.samples[s].head(n0))) / ref));
  }
  results["roundTrip"] = {{"blocksMatch", blocksOk}, {"warpingError", warpErr}, {"claimsHold", claimsHold}};
  const bool ok = blocksOk && warpErr <= cfg.tol && claimsHold;
  return {results, ok ? "pass" : "fail"};
}

Outcome oracleCommand(const Json& args, const RunConfig& cfg) {
  const auto beta = formFromJson(instance(args));
  const int p = beta.p();
  int lo = 1, hi = p;
  if (args.contains("s")) lo = hi = args["s"].get<int>();
  if (lo < 1 || hi > p) fail(ErrorKind::SOutOfRange, "s must lie in 1…p", {{"s", lo}, {"p", p}});
  const int resolution = cfg.gridRes > 0 ? cfg.gridRes : (p == 2 ? 720 : 90);
  auto searchOpts = cfg.nullityOptions();
  searchOpts.mode = forms::NullityMode::Search;
  Json values = Json::array();
  bool agree = true;
  for (int s = lo; s <= hi; ++s) {
    const auto grid = oracleGrassmannGrid(beta, s, resolution, cfg.rankTol);
    const auto search = forms::sNullity(beta, s, searchOpts);
    agree = agree && grid.value == search.value;
    values.push_back({{"s", s}, {"grid", grid.value}, {"search", search.value}, {"evaluations", grid.evaluations}});
  }
  return {{{"resolution", resolution}, {"values", values}}, agree ? "agree" : "disagree"};
}

}  // namespace

const std::vector<std::string>& commandNames() {
  static const std::vector<std::string> names{"nullity",   "lemma",   "falsify",   "rep-verify",
                                              "curvature", "analyze", "decompose", "oracle"};
  return names;
}

Json runCommand(const std::string& command, const Json& arguments, const RunConfig& config) {
  Json report{{"schema", "warpimm-report"},
              {"schemaVersion", kSchemaVersion},
              {"command", command},
              {"arguments", arguments},
              {"config", config.toJson()}};
  const auto start = std::chrono::steady_clock::now();
  try {
    config.validate();
    Outcome out;
    if (command == "nullity")
      out = nullityCommand(arguments, config);
    else if (command == "lemma")
      out = lemmaCommand(arguments, config);
    else if (command == "falsify")
      out = falsifyCommand(arguments, config);
    else if (command == "rep-verify")
      out = repVerifyCommand(arguments, config);
    else if (command == "curvature")
      out = curvatureCommand(arguments, config);
    else if (command == "analyze")
      out = analyzeCommand(arguments, config);
    else if (command == "decompose")
      out = decomposeCommand(arguments, config);
    else if (command == "oracle")
      out = oracleCommand(arguments, config);
    else
      fail(ErrorKind::InvalidArgument, "unknown command: " + command, {{"command", command}});
    report["results"] = out.results;
    report["verdict"] = out.verdict;
  } catch (const Error& e) {
    report["error"] = e.toJson();
    report["verdict"] = "error";
  } catch (const Json::exception& e) {
    report["error"] = Error(ErrorKind::ParseError, e.what()).toJson();
    report["verdict"] = "error";
  }
  report["timing"] = {{"wallSeconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  return report;
}

int exitCodeFor(const Json& report) {
  if (report.contains("error")) return 2;
  const std::string v = report.value("verdict", std::string());
  return (v == "fail" || v == "violated" || v == "disagree") ? 1 : 0;
}

}  // namespace warpimm::harness

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/harness/commands.hpp"
#include "warpimm/harness/documents.hpp"

using namespace warpimm;
using harness::RunConfig;

namespace {

const std::string kData = WARPIMM_DATA_DIR;

Json instance(const std::string& name) { return harness::readJsonFile(kData + "/instances/" + name); }

Json run(const std::string& cmd, const Json& args, const RunConfig& cfg = {}) {
  return harness::runCommand(cmd, args, cfg);
}

Json withoutTiming(Json r) {
  r.erase("timing");
  return r;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config validation and precedence") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);

    RunConfig merged;
    merged.merge(Json{{"tol", 1e-4}, {"starts", 3}});
    CHECK(merged.tol == 1e-4);
    CHECK(merged.starts == 3);
    CHECK(merged.h == RunConfig{}.h);

    ::setenv("WARPIMM_TOL", "2.5e-3", 1);
    ::setenv("WARPIMM_JOBS", "2", 1);
    RunConfig env;
    env.applyEnvironment();
    ::unsetenv("WARPIMM_TOL");
    ::unsetenv("WARPIMM_JOBS");
    CHECK(env.tol == doctest::Approx(2.5e-3));
    CHECK(env.jobs == 2);

    const auto path = std::filesystem::temp_directory_path() / "warpimm-config-test.json";
    std::ofstream(path) << R"({"seed": 99, "gridRes": 30})";
    const RunConfig loaded = harness::loadConfig(path.string());
    std::filesystem::remove(path);
    CHECK(loaded.seed == 99u);
    CHECK(loaded.gridRes == 30);
  }

  TEST_CASE("malformed json reports its position") {
    try {
      harness::parseJsonText("{\n  \"n\": 3,\n  oops\n}");
      FAIL("malformed input accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(e.details().value("line", 0) == 3);
      CHECK(e.details().contains("column"));
    }
  }

  TEST_CASE("nullity command on the zero form") {
    const Json r = run("nullity", {{"instance", instance("zero-form.json")}});
    CHECK(r["verdict"] == "hypothesisFails");
    CHECK(r["results"]["values"] == Json::array({4, 4}));
    CHECK(harness::exitCodeFor(r) == 0);
    CHECK(r["schema"] == "warpimm-report");
    CHECK(r["config"]["tol"] == RunConfig{}.tol);
  }

  TEST_CASE("lemma command verdicts") {
    CHECK(run("lemma", {{"instance", instance("adapted-lemma.json")}})["verdict"] == "holds");
    CHECK(run("lemma", {{"instance", instance("composition-lemma.json")}})["verdict"] == "hypothesisFails");
  }

  TEST_CASE("falsify command with a failing gate") {
    const Json r = run("falsify", {{"n", 4}, {"p", 2}, {"trials", 50}});
    CHECK(r["verdict"] == "pass");
    CHECK(r["results"]["tested"] == 0);
  }

  TEST_CASE("representation documents") {
    for (const char* name : {"rep-flat.json", "rep-sphere.json", "rep-hyperbolic.json"}) {
      const Json r = run("rep-verify", {{"instance", instance(name)}});
      CHECK_MESSAGE(r["verdict"] == "pass", name);
    }
    const Json bad = run("rep-verify", {{"instance", instance("rep-violating-z.json")}});
    CHECK(harness::exitCodeFor(bad) == 2);
    CHECK(bad["error"]["kind"] == "UmbilicalConstraintViolated");
    CHECK(bad["error"]["details"].contains("i"));
    CHECK(bad["error"]["details"].contains("j"));
  }

  TEST_CASE("curvature command") {
    const Json flat = run("curvature", {{"instance", instance("polar-flat.json")}});
    CHECK(flat["verdict"] == "pass");
    CHECK(flat["results"]["maxAbsR"].get<double>() <= 1e-6);
    const Json horo = run("curvature", {{"instance", instance("horospherical.json")}});
    CHECK(horo["verdict"] == "pass");
    for (const auto& pt : horo["results"]["points"])
      for (const auto& k : pt["sectional"]) CHECK(k["K"].get<double>() == doctest::Approx(-1.0).epsilon(1e-8));
  }

  TEST_CASE("analyze and decompose commands") {
    const Json a = run("analyze", {{"instance", instance("revolution.json")}});
    REQUIRE(a["verdict"] == "hypothesisOk");
    CHECK(a["results"]["nolkerResidual"].get<double>() <= 1e-5);
    CHECK(a["results"]["gaussResidual"].get<double>() <= 1e-4);
    const Json d = run("decompose", {{"instance", instance("revolution.json")}});
    CHECK(d["verdict"] == "pass");
    CHECK(d["results"]["roundTrip"]["blocksMatch"] == true);

    const Json c = run("decompose", {{"instance", instance("counterexample.json")}});
    CHECK(c["error"]["kind"] == "HypothesisViolated");
    CHECK(c["error"]["details"]["s"] == 1);
  }

  TEST_CASE("oracle command agrees with the search") {
    const Json r = run("oracle", {{"instance", instance("generic-7-2.json")}});
    CHECK(r["verdict"] == "agree");
    CHECK(run("oracle", {{"instance", instance("generic-7-2.json")}, {"s", 3}})["error"]["kind"] == "SOutOfRange");
  }

  TEST_CASE("reports are deterministic") {
    const Json args{{"instance", instance("generic-7-2.json")}};
    CHECK(withoutTiming(run("nullity", args)) == withoutTiming(run("nullity", args)));
    const Json fargs{{"n", 6}, {"p", 1}, {"trials", 40}};
    CHECK(withoutTiming(run("falsify", fargs))["results"] == withoutTiming(run("falsify", fargs))["results"]);
  }

  TEST_CASE("errors become reports") {
    const Json r = run("frobnicate", Json::object());
    CHECK(r["error"]["kind"] == "InvalidArgument");
    CHECK(harness::exitCodeFor(r) == 2);
    const Json missing = run("nullity", Json::object());
    CHECK(harness::exitCodeFor(missing) == 2);
    RunConfig bad;
    bad.starts = 0;
    CHECK(harness::exitCodeFor(run("nullity", {{"instance", instance("zero-form.json")}}, bad)) == 2);
    CHECK(harness::exitCodeFor(Json{{"verdict", "fail"}}) == 1);
    CHECK(harness::exitCodeFor(Json{{"verdict", "holds"}}) == 0);
  }
}

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "warpimm/errors.hpp"
#include "warpimm/harness/commands.hpp"
#include "warpimm/harness/documents.hpp"

using warpimm::Json;
namespace harness = warpimm::harness;

namespace {

int emit(const Json& report, const std::string& out) {
  if (out.empty())
    std::cout << report.dump(2) << '\n';
  else
    harness::writeJsonFile(out, report);
  return harness::exitCodeFor(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nullity, splitting and warped-product analysis of isometric immersions"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help");

  std::optional<std::string> configPath;
  std::optional<double> tol, rankTol, h;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid, starts, jobs;
  std::string out;
  app.add_option("--config", configPath, "JSON config file");
  app.add_option("--tol", tol, "verdict tolerance");
  app.add_option("--rank-tol", rankTol, "relative rank threshold");
  app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--h", h, "finite-difference step");
  app.add_option("--grid", grid, "Grassmannian grid resolution (0: search only)");
  app.add_option("--starts", starts, "multistart budget of the nullity search");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--out", out, "write the report here instead of stdout");

  std::string instance, samples;
  int n = 0, p = 0, trials = 1000, s = 0;
  const std::map<std::string, std::string> help{
      {"nullity", "s-nullity profile of a bilinear form"},
      {"lemma", "check the splitting lemma on a form and splitting"},
      {"falsify", "random search for splitting lemma counterexamples"},
      {"rep-verify", "check a warped product representation"},
      {"curvature", "curvature tensor of a warped metric"},
      {"analyze", "fundamental forms and nullities of an immersion"},
      {"decompose", "split an immersion into warped factors"},
      {"oracle", "compare the nullity search with a grid sweep"},
  };
  for (const auto& name : harness::commandNames()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    if (name == "falsify") {
      sub->add_option("--n", n, "dimension")->required();
      sub->add_option("--p", p, "codimension")->required();
      sub->add_option("--trials", trials, "number of trials");
    } else {
      sub->add_option("instance", instance, "instance document")->required();
      if (name == "oracle") sub->add_option("-s", s, "single s to certify (default: all)");
      if (name == "rep-verify" || name == "curvature") sub->add_option("--samples", samples, "sample grid document");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const Json report{{"schema", "warpimm-report"},
                      {"schemaVersion", harness::kSchemaVersion},
                      {"error", warpimm::Error(warpimm::ErrorKind::InvalidArgument, e.what()).toJson()},
                      {"verdict", "error"}};
    std::cerr << report.dump(2) << '\n';
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Json args = Json::object();
  try {
    harness::RunConfig cfg = harness::loadConfig(configPath);
    if (tol) cfg.tol = *tol;
    if (rankTol) cfg.rankTol = *rankTol;
    if (h) cfg.h = *h;
    if (seed) cfg.seed = *seed;
    if (grid) cfg.gridRes = *grid;
    if (starts) cfg.starts = *starts;
    if (jobs) cfg.jobs = *jobs;
    if (command == "falsify") {
      args = {{"n", n}, {"p", p}, {"trials", trials}};
    } else {
      args["instance"] = harness::readJsonFile(instance);
      args["source"] = instance;
      if (s > 0) args["s"] = s;
      if (!samples.empty()) args["samples"] = harness::readJsonFile(samples);
    }
    return emit(harness::runCommand(command, args, cfg), out);
  } catch (const warpimm::Error& e) {
    const Json report{{"schema", "warpimm-report"},
                      {"schemaVersion", harness::kSchemaVersion},
                      {"command", command},
                      {"error", e.toJson()},
                      {"verdict", "error"}};
    return emit(report, out);
  }
}

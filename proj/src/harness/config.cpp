#include "warpimm/harness/config.hpp"

#include <cstdlib>
#include <fstream>

#include "warpimm/errors.hpp"

namespace warpimm::harness {

namespace {

template <class T>
void readKey(const nlohmann::json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config key has the wrong type: ") + key, {{"key", key}});
  }
}

template <class T>
void readEnv(const char* name, T& out) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return;
  try {
    std::size_t used = 0;
    const std::string s(raw);
    if constexpr (std::is_same_v<T, double>)
      out = std::stod(s, &used);
    else if constexpr (std::is_same_v<T, int>)
      out = std::stoi(s, &used);
    else
      out = std::stoull(s, &used, 0);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("cannot parse environment variable ") + name, {{"variable", name}});
  }
}

}  // namespace

void RunConfig::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"tol", tol}, {"rankTol", rankTol}, {"adaptTol", adaptTol}, {"fdTol", fdTol}, {"h", h}};
  for (const auto& [name, v] : positive)
    if (!(v > 0.0)) fail(ErrorKind::InvalidArgument, std::string(name) + " must be positive", {{"key", name}});
  if (gridRes < 0) fail(ErrorKind::InvalidArgument, "gridRes must be nonnegative");
  if (starts < 1) fail(ErrorKind::BudgetZero, "starts must be at least 1");
  if (jobs < 1) fail(ErrorKind::InvalidArgument, "jobs must be at least 1");
}

forms::NullityOptions RunConfig::nullityOptions() const {
  forms::NullityOptions o;
  o.rankTol = rankTol;
  o.starts = starts;
  o.gridRes = gridRes;
  o.seed = seed;
  if (gridRes > 0) o.mode = forms::NullityMode::ExactSmall;
  return o;
}

nlohmann::json RunConfig::toJson() const {
  return {{"tol", tol},   {"rankTol", rankTol}, {"adaptTol", adaptTol}, {"fdTol", fdTol}, {"seed", seed},
          {"h", h},       {"gridRes", gridRes}, {"starts", starts},     {"jobs", jobs}};
}

void RunConfig::merge(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorKind::ParseError, "config document must be an object");
  readKey(doc, "tol", tol);
  readKey(doc, "rankTol", rankTol);
  readKey(doc, "adaptTol", adaptTol);
  readKey(doc, "fdTol", fdTol);
  readKey(doc, "seed", seed);
  readKey(doc, "h", h);
  readKey(doc, "gridRes", gridRes);
  readKey(doc, "starts", starts);
  readKey(doc, "jobs", jobs);
}

void RunConfig::applyEnvironment() {
  readEnv("WARPIMM_TOL", tol);
  readEnv("WARPIMM_RANK_TOL", rankTol);
  readEnv("WARPIMM_ADAPT_TOL", adaptTol);
  readEnv("WARPIMM_FD_TOL", fdTol);
  readEnv("WARPIMM_SEED", seed);
  readEnv("WARPIMM_H", h);
  readEnv("WARPIMM_GRID", gridRes);
  readEnv("WARPIMM_STARTS", starts);
  readEnv("WARPIMM_JOBS", jobs);
}

RunConfig loadConfig(const std::optional<std::string>& path) {
  RunConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) fail(ErrorKind::ParseError, "cannot open config file", {{"path", *path}});
    try {
      cfg.merge(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::ParseError, "config file is not valid JSON", {{"path", *path}, {"byte", e.byte}});
    }
  }
  cfg.applyEnvironment();
  return cfg;
}

}  // namespace warpimm::harness

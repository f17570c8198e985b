#include "gffperc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace gffperc {

std::vector<double> linear_grid(double start, double stop, double step) {
  require(step > 0.0 && stop >= start, "grid needs step > 0 and stop >= start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  require(n <= 100000, "grid has too many points");
  std::vector<double> g;
  for (long i = 0; i < n; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"d", d},
          {"theta", theta},
          {"L", L},
          {"ell", ell},
          {"lbar_multiple", lbar_multiple},
          {"margin", margin},
          {"h_grid", h_grid},
          {"replicas", replicas},
          {"seed", seed},
          {"out", out},
          {"M", M},
          {"gamma", gamma},
          {"gap_below", gap_below},
          {"gap_above", gap_above},
          {"verify_replicas", verify_replicas},
          {"dump_geometry", dump_geometry},
          {"dump_extent", dump_extent}};
}

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known = {
      "d",    "theta", "L",         "ell",       "lbar_multiple",   "margin",        "h_grid",     "replicas", "seed",
      "out",  "M",     "gamma",     "gap_below", "gap_above",       "verify_replicas", "dump_geometry", "dump_extent"};
  for (auto it = j.begin(); it != j.end(); ++it)
    require(known.count(it.key()) > 0, "unknown config key '" + it.key() + "'");
  ExperimentConfig c;
  read(j, "d", c.d);
  if (j.contains("theta") && j["theta"].is_number())
    c.theta = {j["theta"].get<double>()};
  else
    read(j, "theta", c.theta);
  read(j, "L", c.L);
  read(j, "ell", c.ell);
  read(j, "lbar_multiple", c.lbar_multiple);
  read(j, "margin", c.margin);
  if (j.contains("h_grid")) {
    const auto& g = j["h_grid"];
    if (g.is_object()) {
      require(g.contains("start") && g.contains("stop") && g.contains("step"),
              "h_grid object needs start, stop and step");
      c.h_grid = linear_grid(g["start"].get<double>(), g["stop"].get<double>(), g["step"].get<double>());
    } else {
      read(j, "h_grid", c.h_grid);
    }
  } else {
    c.h_grid = linear_grid(0.0, 1.5, 0.02);
  }
  read(j, "replicas", c.replicas);
  read(j, "seed", c.seed);
  read(j, "out", c.out);
  read(j, "M", c.M);
  read(j, "gamma", c.gamma);
  read(j, "gap_below", c.gap_below);
  read(j, "gap_above", c.gap_above);
  read(j, "verify_replicas", c.verify_replicas);
  read(j, "dump_geometry", c.dump_geometry);
  read(j, "dump_extent", c.dump_extent);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& c) {
  require(c.d >= 2 && c.d <= 4, "d must lie in [2, 4]");
  require(!c.theta.empty(), "theta list is empty");
  for (double t : c.theta) require(t > 0.0 && t <= 1.0, "theta must lie in (0, 1]");
  require(!c.L.empty(), "L list is empty");
  for (int l : c.L) require(l >= 1, "L must be positive");
  require(c.ell >= 6, "ell must be at least 6");
  // Lbar = m L is a multiple of L by construction; m must leave room for the annulus.
  require(c.lbar_multiple >= 2 * c.ell + 1, "lbar_multiple must be at least 2 ell + 1");
  require(c.margin >= 0, "margin must be non-negative");
  require(!c.h_grid.empty(), "h grid is empty");
  require(c.M > 0.0, "M must be positive");
  for (double h : c.h_grid) require(std::abs(h) < c.M, "grid level outside (-M, M)");
  require(c.replicas >= 1 && c.verify_replicas >= 1, "replica counts must be positive");
  require(c.gamma > 0.0 && c.gamma < 1.0, "gamma must lie in (0, 1)");
  require(c.gap_below > 0.0 && c.gap_above > 0.0, "gaps must be positive");
  require(c.dump_geometry == "torus" || c.dump_geometry == "box", "dump_geometry must be torus or box");
  require(c.dump_extent >= 1, "dump_extent must be positive");
}

std::string config_hash(const ExperimentConfig& c) {
  nlohmann::json j = c.to_json();
  j.erase("seed");
  j.erase("out");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gffperc

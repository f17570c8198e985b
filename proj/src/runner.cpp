#include "gffperc/runner.hpp"

#include <fstream>
#include <sstream>

#include "gffperc/config.hpp"
#include "gffperc/estimators.hpp"
#include "gffperc/field.hpp"
#include "gffperc/oracle.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

namespace {

using nlohmann::json;

struct Context {
  ExperimentConfig cfg;
  std::string hash;
  std::filesystem::path out;
  int workers = 0;
};

json header(const Context& c, const std::string& kind) {
  json cfg = c.cfg.to_json();
  cfg.erase("out");  // where the files go is not part of the result
  return {{"schema", "gffperc." + kind + "/v1"}, {"config_hash", c.hash}, {"seed", c.cfg.seed}, {"config", cfg}};
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  require(static_cast<bool>(os), "cannot write " + p.string());
  os << s;
}

void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string stamp(const Context& c) { return "# config_hash=" + c.hash + " seed=" + std::to_string(c.cfg.seed) + "\n"; }

std::string csv_body(const CurveTable& t, bool with_header) {
  std::string s = t.to_csv();
  if (!with_header) s.erase(0, s.find('\n') + 1);
  return s;
}

int cmd_pcurve(const Context& c, std::ostream& log) {
  std::string csv = stamp(c);
  json j = header(c, "pcurve");
  j["curves"] = json::array();
  bool first = true;
  for (double theta : c.cfg.theta)
    for (int L : c.cfg.L) {
      CrossingSetup s{c.cfg.d, theta, L, c.cfg.margin};
      log << "pcurve theta=" << theta << " L=" << L << " replicas=" << c.cfg.replicas << "\n";
      CurveTable t = estimate_p_curve(s, c.cfg.h_grid, c.cfg.replicas, c.cfg.seed, c.workers);
      csv += csv_body(t, first);
      first = false;
      json cj = t.to_json();
      cj["theta"] = theta;
      cj["L"] = L;
      cj["margin"] = effective_margin(s);
      j["curves"].push_back(cj);
    }
  write_text(c.out / "pcurve.csv", csv);
  write_json(c.out / "pcurve.json", j);
  return 0;
}

int cmd_qcurve(const Context& c, std::ostream& log) {
  std::string csv = stamp(c);
  json j = header(c, "qcurve");
  j["curves"] = json::array();
  bool first = true;
  for (double theta : c.cfg.theta)
    for (int L : c.cfg.L) {
      TorusSetup s{c.cfg.d, theta, L, c.cfg.ell, c.cfg.lbar_multiple * L};
      log << "qcurve theta=" << theta << " L=" << L << " Lbar=" << s.Lbar << "\n";
      CurveTable t = estimate_q_curve(s, c.cfg.h_grid, c.cfg.replicas, c.cfg.seed, c.workers);
      csv += csv_body(t, first);
      first = false;
      json cj = t.to_json();
      cj["theta"] = theta;
      cj["L"] = L;
      cj["Lbar"] = s.Lbar;
      cj["ell"] = s.ell;
      j["curves"].push_back(cj);
    }
  write_text(c.out / "qcurve.csv", csv);
  write_json(c.out / "qcurve.json", j);
  return 0;
}

int cmd_threshold(const Context& c, std::ostream& log) {
  json j = header(c, "threshold");
  j["reports"] = json::array();
  for (double theta : c.cfg.theta) {
    ThresholdStudy st;
    st.dim = c.cfg.d;
    st.theta = theta;
    st.margin = c.cfg.margin;
    st.Ls = c.cfg.L;
    st.grid = c.cfg.h_grid;
    st.replicas = c.cfg.replicas;
    st.gamma = c.cfg.gamma;
    st.gap_below = c.cfg.gap_below;
    st.gap_above = c.cfg.gap_above;
    log << "threshold theta=" << theta << "\n";
    ThresholdReport r = threshold_study(st, c.cfg.seed, c.workers);
    json rj = r.to_json();
    if (r.h_double_star) rj["p_site_at_h_double_star"] = normal_sf(*r.h_double_star);
    if (theta == 1.0) {
      // Independent site percolation reference on separate streams.
      std::vector<LevelCurve> ref;
      for (int L : c.cfg.L)
        ref.push_back({L, sample_bernoulli_levels(c.cfg.d, L, c.cfg.replicas, c.cfg.seed, "threshold/bernoulli",
                                                  c.workers)});
      auto hb = locate_h_double_star(ref, c.cfg.h_grid, c.cfg.gamma);
      rj["bernoulli_h_double_star"] = hb ? json(*hb) : json(nullptr);
      if (hb) rj["bernoulli_p_site"] = normal_sf(*hb);
    }
    j["reports"].push_back(rj);
  }
  write_json(c.out / "threshold.json", j);
  return 0;
}

int cmd_verify(const Context& c, std::ostream& log) {
  SuiteOptions so{c.cfg.seed, c.workers, c.cfg.verify_replicas, c.cfg.M};
  auto records = verification_suite(so);
  json j = header(c, "verify");
  j["checks"] = json::array();
  std::size_t failed = 0;
  for (const auto& r : records) {
    j["checks"].push_back(to_json(r));
    if (!r.pass) {
      ++failed;
      log << "FAIL " << r.name << " " << r.instance.dump() << (r.error.empty() ? "" : " error: " + r.error) << "\n";
    }
  }
  j["total"] = records.size();
  j["failed"] = failed;
  j["all_pass"] = failed == 0;
  write_json(c.out / "verify.json", j);
  log << "verify: " << records.size() - failed << "/" << records.size() << " checks pass\n";
  return failed == 0 ? 0 : 1;
}

int cmd_dump_field(const Context& c, std::ostream& log) {
  const double theta = c.cfg.theta.front();
  const StreamId id{c.cfg.seed, experiment_id("dump-field"), 0};
  FieldSample s = c.cfg.dump_geometry == "torus"
                      ? sample_torus(Geometry::torus(c.cfg.d, c.cfg.dump_extent), theta, id)
                      : sample_box(Geometry::box(c.cfg.d, c.cfg.dump_extent), theta, {}, id);
  write_field_dump(s, theta, c.out / "field");
  json j = header(c, "dump");
  j["payload"] = "field.bin";
  write_json(c.out / "dump.json", j);
  log << "dump-field: " << s.values.size() << " sites\n";
  return 0;
}

}  // namespace

int run(const RunOptions& opts, std::ostream& log) {
  try {
    Context c;
    c.cfg = opts.config ? load_config(*opts.config) : parse_config(json::object());
    if (opts.seed) c.cfg.seed = *opts.seed;
    if (opts.out) c.cfg.out = opts.out->string();
    require(opts.workers >= 0, "workers must be non-negative");
    c.workers = opts.workers;
    c.hash = config_hash(c.cfg);
    c.out = c.cfg.out;
    std::filesystem::create_directories(c.out);
    if (opts.command == "pcurve") return cmd_pcurve(c, log);
    if (opts.command == "qcurve") return cmd_qcurve(c, log);
    if (opts.command == "threshold") return cmd_threshold(c, log);
    if (opts.command == "verify") return cmd_verify(c, log);
    if (opts.command == "dump-field") return cmd_dump_field(c, log);
    throw ConfigError("unknown command '" + opts.command + "'");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gffperc

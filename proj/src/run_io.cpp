#include "cusplab/run_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

namespace fs = std::filesystem;

OutputFile write_output(const fs::path& dir, const std::string& name, const std::string& content,
                        const std::string& describes) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << content;
  if (!f) throw ConfigError("write failed: " + p.string());
  return {name, git_blob_hash(content), describes};
}

InitialDataSpec spec_from_json(const nlohmann::json& j) {
  InitialDataSpec s;
  s.equation = parse_equation(j.at("equation").get<std::string>());
  auto get = [&j](const char* k, double& v) {
    if (j.contains(k)) v = j.at(k).get<double>();
  };
  get("epsilon", s.epsilon);
  get("gamma", s.gamma);
  get("delta0", s.delta0);
  get("beta_v", s.beta_v);
  get("k_v", s.k_v);
  get("Theta", s.Theta);
  get("h_min_rel", s.h_min_rel);
  get("growth", s.growth);
  get("h_max", s.h_max);
  get("far_field", s.far_field);
  if (s.equation == Equation::CH && j.contains("k3")) {
    const double k3 = j.at("k3").get<double>();
    s.k3 = k3 == 256.0 * std::pow(s.epsilon, -6) ? 0.0 : k3;
  }
  if (j.contains("cutoff_radius") && s.equation != Equation::Burgers) {
    InitialDataSpec d = s;
    d.cutoff_radius = 0;
    const double r = j.at("cutoff_radius").get<double>();
    s.cutoff_radius = r == d.radius() ? 0.0 : r;
  }
  if (j.contains("taper")) s.taper = j.at("taper").get<bool>();
  if (j.contains("strict_localization")) s.strict_localization = j.at("strict_localization").get<bool>();
  return s;
}

RunOptions options_from_json(const nlohmann::json& j) {
  RunOptions o;
  o.g_max = j.value("g_max", o.g_max);
  o.cfl = j.value("cfl", o.cfl);
  o.dt_max = j.value("dt_max", o.dt_max);
  o.dt_min = j.value("dt_min", o.dt_min);
  o.snapshots_per_decade = j.value("snapshots_per_decade", o.snapshots_per_decade);
  o.max_steps = j.value("max_steps", o.max_steps);
  o.remark_ratio = j.value("remark_ratio", o.remark_ratio);
  return o;
}

std::string snapshots_csv(const RunResult& r) {
  std::ostringstream o;
  o << "snapshot,t,label,origin,x,u,g,inserted\n";
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    const auto& s = r.snapshots[k].state;
    const std::string head = std::to_string(k) + ',' + format_double(s.t) + ',';
    const std::string org = format_double(s.origin);
    for (std::size_t i = 0; i < s.size(); ++i)
      o << head << s.label[i] << ',' << org << ',' << format_double(s.x[i]) << ','
        << format_double(s.u[i]) << ',' << format_double(s.g[i]) << ','
        << static_cast<int>(s.inserted[i]) << '\n';
  }
  return o.str();
}

std::string modulation_csv(const RunResult& r) {
  std::ostringstream o;
  o << "t,s,tau,kappa,xi,g_min,d3u_at_min\n";
  for (const auto& h : r.history) {
    const auto& m = h.mod;
    o << format_double(h.t) << ',' << format_double(m.s) << ',' << format_double(m.tau) << ','
      << format_double(m.kappa) << ',' << format_double(m.xi_abs) << ',' << format_double(m.g_min)
      << ',' << format_double(m.d3u_at_min) << '\n';
  }
  return o.str();
}

std::string conservation_csv(const RunResult& r) {
  std::ostringstream o;
  o << "t,dt,energy,energy_x,max_abs_u,max_abs_g,max_abs_p,max_abs_px,riccati_error,markers\n";
  for (const auto& h : r.history)
    o << format_double(h.t) << ',' << format_double(h.dt) << ',' << format_double(h.energy) << ','
      << format_double(h.energy_x) << ',' << format_double(h.max_abs_u) << ','
      << format_double(h.max_abs_g) << ',' << format_double(h.max_abs_p) << ','
      << format_double(h.max_abs_px) << ',' << format_double(h.riccati_error) << ','
      << h.markers << '\n';
  return o.str();
}

nlohmann::ordered_json run_summary(const RunResult& r) {
  nlohmann::ordered_json j;
  j["spec"] = to_json(r.spec);
  j["options"] = to_json(r.options);
  j["g_max"] = r.g_max;
  j["stop_reason"] = r.stop_reason;
  j["steps"] = r.steps;
  j["remarks"] = r.remarks;
  j["snapshots"] = r.snapshots.size();
  if (!r.history.empty()) {
    const auto& b = r.history.back();
    j["final_time"] = b.t;
    j["projected_T_star"] = b.mod.tau;
    j["final_min_gradient"] = b.mod.g_min;
    j["final_markers"] = b.markers;
  }
  return j;
}

std::vector<OutputFile> write_run(const RunResult& r, const fs::path& dir) {
  std::vector<OutputFile> out;
  out.push_back(write_output(dir, "snapshots.csv", snapshots_csv(r),
                             "marker states at geometrically spaced distances to blow-up"));
  out.push_back(write_output(dir, "modulation.csv", modulation_csv(r),
                             "modulation trajectory tau, kappa, xi"));
  out.push_back(write_output(dir, "conservation.csv", conservation_csv(r),
                             "energy and a priori bounds per step"));
  out.push_back(write_output(dir, "initial_data.json", to_json(r.initial_report).dump(2) + "\n",
                             "initial data verification report"));
  out.push_back(write_output(dir, "run.json", run_summary(r).dump(2) + "\n", "run summary"));
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(f, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

RunResult read_run(const fs::path& dir) {
  RunResult r;
  nlohmann::json summary;
  {
    std::ifstream f(dir / "run.json");
    if (!f) throw ConfigError("cannot read " + (dir / "run.json").string());
    summary = nlohmann::json::parse(f);
  }
  r.spec = spec_from_json(summary.at("spec"));
  r.options = options_from_json(summary.at("options"));
  r.g_max = summary.value("g_max", 0.0);
  r.stop_reason = summary.value("stop_reason", std::string());
  r.steps = summary.value("steps", std::size_t{0});
  r.remarks = summary.value("remarks", std::size_t{0});

  const auto mod = read_csv(dir / "modulation.csv");
  const auto cons = read_csv(dir / "conservation.csv");
  if (mod.size() != cons.size()) throw ConfigError("read_run: modulation and conservation logs differ");
  for (std::size_t i = 0; i < mod.size(); ++i) {
    const auto& m = mod[i];
    const auto& c = cons[i];
    if (m.size() != 7 || c.size() != 10) throw ConfigError("read_run: malformed log row");
    StepRecord h;
    h.t = parse_double(c[0]);
    h.dt = parse_double(c[1]);
    h.energy = parse_double(c[2]);
    h.energy_x = parse_double(c[3]);
    h.max_abs_u = parse_double(c[4]);
    h.max_abs_g = parse_double(c[5]);
    h.max_abs_p = parse_double(c[6]);
    h.max_abs_px = parse_double(c[7]);
    h.riccati_error = parse_double(c[8]);
    h.markers = std::stoul(c[9]);
    h.mod.t = parse_double(m[0]);
    h.mod.s = parse_double(m[1]);
    h.mod.tau = parse_double(m[2]);
    h.mod.kappa = parse_double(m[3]);
    h.mod.xi_abs = parse_double(m[4]);
    h.mod.g_min = parse_double(m[5]);
    h.mod.d3u_at_min = parse_double(m[6]);
    r.history.push_back(h);
  }

  const auto snap = read_csv(dir / "snapshots.csv");
  long current = -1;
  FieldState st;
  auto flush = [&]() {
    if (current < 0) return;
    for (std::size_t i = 0; i < st.size(); ++i)
      if (st.x[i] == 0.0) st.ref = i;
    r.snapshots.push_back({st, track_modulation(st)});
  };
  for (const auto& row : snap) {
    if (row.size() != 8) throw ConfigError("read_run: malformed snapshot row");
    const long k = std::stol(row[0]);
    if (k != current) {
      flush();
      current = k;
      st = FieldState{};
      st.equation = r.spec.equation;
      st.t = parse_double(row[1]);
      st.origin = parse_double(row[3]);
    }
    st.label.push_back(std::stoll(row[2]));
    st.x.push_back(parse_double(row[4]));
    st.u.push_back(parse_double(row[5]));
    st.g.push_back(parse_double(row[6]));
    st.inserted.push_back(static_cast<std::uint8_t>(std::stoi(row[7])));
  }
  flush();
  return r;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config;
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& [p, d] : m.inputs) in.push_back({{"path", p}, {"digest", d}});
  j["inputs"] = in;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& f : m.outputs)
    out.push_back({{"file", f.name}, {"digest", f.digest}, {"describes", f.describes}});
  j["outputs"] = out;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["summary"] = m.summary;
  j["passed"] = m.passed;
  return j;
}

}  // namespace cusplab

#include "muskat/io.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "muskat/errors.hpp"

namespace muskat {

using nlohmann::json;

const char* version_string() { return MUSKAT_VERSION; }

PeriodicField field_from_modes(int n, const std::vector<Mode>& modes) {
  return PeriodicField::sample(n, [&](double x) {
    double v = 0.0;
    for (const Mode& m : modes) v += m.cos * std::cos(m.k * x) + m.sin * std::sin(m.k * x);
    return v;
  });
}

PeriodicField RunConfig::h0() const {
  PeriodicField h = field_from_modes(sim.n1, h0_modes);
  return mollify_delta > 0.0 ? mollify(h, mollify_delta) : h;
}

PeriodicField RunConfig::f() const { return field_from_modes(sim.n1, f_modes); }

namespace {

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type");
  }
}

std::vector<Mode> parse_modes(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string("config: '") + key + "' must be a list of modes");
  std::vector<Mode> out;
  for (const auto& e : j) {
    if (!e.is_object()) throw ConfigError(std::string("config: entries of '") + key + "' must be objects");
    Mode m;
    for (const auto& [k, v] : e.items()) {
      if (k == "k") m.k = get<int>(v, "k");
      else if (k == "cos") m.cos = get<double>(v, "cos");
      else if (k == "sin") m.sin = get<double>(v, "sin");
      else throw ConfigError("config: unknown mode key '" + k + "' in '" + key + "'");
    }
    if (m.k < 0) throw ConfigError(std::string("config: negative wavenumber in '") + key + "'");
    out.push_back(m);
  }
  return out;
}

json modes_to_json(const std::vector<Mode>& modes) {
  json a = json::array();
  for (const Mode& m : modes) a.push_back({{"k", m.k}, {"cos", m.cos}, {"sin", m.sin}});
  return a;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  SimConfig& s = c.sim;
  for (const auto& [k, v] : j.items()) {
    const char* key = k.c_str();
    if (k == "n1") s.n1 = get<int>(v, key);
    else if (k == "n2_plus") s.n2_plus = get<int>(v, key);
    else if (k == "n2_minus") s.n2_minus = get<int>(v, key);
    else if (k == "beta_plus") s.beta_plus = get<double>(v, key);
    else if (k == "beta_minus") s.beta_minus = get<double>(v, key);
    else if (k == "dt_safety") s.dt_safety = get<double>(v, key);
    else if (k == "t_end") s.t_end = get<double>(v, key);
    else if (k == "gap_tol") s.gap_tol = get<double>(v, key);
    else if (k == "j_min") s.j_min = get<double>(v, key);
    else if (k == "solver") s.solver = parse_solver_kind(get<std::string>(v, key));
    else if (k == "report_every") s.report_every = get<int>(v, key);
    else if (k == "h0") c.h0_modes = parse_modes(v, key);
    else if (k == "f") c.f_modes = parse_modes(v, key);
    else if (k == "mollify_delta") c.mollify_delta = get<double>(v, key);
    else if (k == "output_dir") c.output_dir = get<std::string>(v, key);
    else if (k == "snapshot_every") c.snapshot_every = get<int>(v, key);
    else throw ConfigError("config: unknown key '" + k + "'");
  }
  s.validate();
  if (c.mollify_delta < 0.0) throw ConfigError("mollify_delta must be >= 0");
  if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  for (const auto* modes : {&c.h0_modes, &c.f_modes})
    for (const Mode& m : *modes)
      if (m.k >= s.n1 / 2) throw ConfigError("config: mode k = " + std::to_string(m.k) + " is not resolved by n1");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  if (c.output_dir.is_relative()) c.output_dir = path.parent_path() / c.output_dir;
  return c;
}

std::string config_to_json(const RunConfig& c, int indent) {
  const SimConfig& s = c.sim;
  json j = {{"n1", s.n1},
            {"n2_plus", s.n2_plus},
            {"n2_minus", s.n2_minus},
            {"beta_plus", s.beta_plus},
            {"beta_minus", s.beta_minus},
            {"dt_safety", s.dt_safety},
            {"t_end", s.t_end},
            {"gap_tol", s.gap_tol},
            {"j_min", s.j_min},
            {"solver", to_string(s.solver)},
            {"report_every", s.report_every},
            {"h0", modes_to_json(c.h0_modes)},
            {"f", modes_to_json(c.f_modes)},
            {"mollify_delta", c.mollify_delta},
            {"output_dir", c.output_dir.string()},
            {"snapshot_every", c.snapshot_every}};
  return j.dump(indent);
}

// ---- timeseries ----

const char* const timeseries_header =
    "t,l2_h,h2_h,h2p5_h,scriptE,scriptD,rt_margin,l2_law_residual,coupling_ratio";

std::string timeseries_row(const EnergyReport& r) {
  std::string out;
  char buf[32];
  for (double v : {r.t, r.l2_h, r.h2_h, r.h2p5_h, r.script_E, r.script_D, r.rt_margin,
                   r.l2_law_residual, r.coupling_ratio}) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
  }
  return out;
}

TimeseriesWriter::TimeseriesWriter(const std::filesystem::path& path) {
  // Binary mode keeps LF endings on every platform.
  fp_ = std::fopen(path.string().c_str(), "wb");
  if (!fp_) throw Error("cannot write '" + path.string() + "'");
  std::fprintf(fp_, "%s\n", timeseries_header);
  std::fflush(fp_);
}

TimeseriesWriter::~TimeseriesWriter() {
  if (fp_) std::fclose(fp_);
}

void TimeseriesWriter::write(const EnergyReport& r) {
  std::fprintf(fp_, "%s\n", timeseries_row(r).c_str());
  std::fflush(fp_);
}

// ---- snapshots ----

namespace {

constexpr char magic[4] = {'M', 'S', 'K', 'T'};
constexpr std::uint32_t snapshot_version = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("snapshot: truncated file");
  return to_little(v);
}

std::vector<double> flat(const StripField& u) { return {u.data().begin(), u.data().end()}; }

}  // namespace

Snapshot make_snapshot(double t, const PeriodicField& h, const PeriodicField& f, const HeadSolution& head) {
  Snapshot s;
  s.n1 = h.size();
  s.n2_plus = head.p_upper.grid().n2;
  s.n2_minus = head.p_lower.grid().n2;
  s.t = t;
  s.h.assign(h.values().begin(), h.values().end());
  s.f.assign(f.values().begin(), f.values().end());
  s.p_upper = flat(head.p_upper);
  s.p_lower = flat(head.p_lower);
  s.w1_upper = flat(head.w1_upper);
  s.w2_upper = flat(head.w2_upper);
  s.w1_lower = flat(head.w1_lower);
  s.w2_lower = flat(head.w2_lower);
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const std::size_t nu = std::size_t(s.n1) * s.n2_plus, nl = std::size_t(s.n1) * s.n2_minus;
  auto check = [](const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) throw ResolutionMismatch("snapshot: array size does not match header");
  };
  check(s.h, s.n1);
  check(s.f, s.n1);
  for (auto* v : {&s.p_upper, &s.w1_upper, &s.w2_upper}) check(*v, nu);
  for (auto* v : {&s.p_lower, &s.w1_lower, &s.w2_lower}) check(*v, nl);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os.write(magic, 4);
  put(os, snapshot_version);
  put(os, s.n1);
  put(os, s.n2_plus);
  put(os, s.n2_minus);
  put(os, s.t);
  for (auto* v : {&s.h, &s.f, &s.p_upper, &s.p_lower, &s.w1_upper, &s.w2_upper, &s.w1_lower, &s.w2_lower})
    for (double x : *v) put(os, x);
  if (!os) throw Error("snapshot: write failed for '" + path.string() + "'");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read '" + path.string() + "'");
  char m[4];
  if (!is.read(m, 4) || std::memcmp(m, magic, 4) != 0) throw Error("snapshot: bad magic");
  if (take<std::uint32_t>(is) != snapshot_version) throw Error("snapshot: unsupported version");
  Snapshot s;
  s.n1 = take<std::uint32_t>(is);
  s.n2_plus = take<std::uint32_t>(is);
  s.n2_minus = take<std::uint32_t>(is);
  s.t = take<double>(is);
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = take<double>(is);
  };
  const std::size_t nu = std::size_t(s.n1) * s.n2_plus, nl = std::size_t(s.n1) * s.n2_minus;
  fill(s.h, s.n1);
  fill(s.f, s.n1);
  fill(s.p_upper, nu);
  fill(s.p_lower, nl);
  fill(s.w1_upper, nu);
  fill(s.w2_upper, nu);
  fill(s.w1_lower, nl);
  fill(s.w2_lower, nl);
  if (is.peek() != std::char_traits<char>::eof()) throw Error("snapshot: trailing bytes");
  return s;
}

// ---- manifest ----

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["config"] = json::parse(m.config_json);
  j["version"] = m.version;
  j["start_time"] = m.start_time;
  j["end_time"] = m.end_time;
  j["termination"] = to_string(m.reason);
  if (!m.message.empty()) {
    j["message"] = m.message;
    j["error_time"] = m.error_time;
  }
  j["steps"] = m.steps;
  j["dt"] = m.dt;
  j["files"] = {{"timeseries", m.timeseries}, {"snapshots", m.snapshots}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

}  // namespace muskat

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "muskat/evolution.hpp"

namespace muskat {

/// One Fourier mode a cos(kx) + b sin(kx).
struct Mode {
  int k = 1;
  double cos = 0.0;
  double sin = 0.0;
};

PeriodicField field_from_modes(int n, const std::vector<Mode>& modes);

struct RunConfig {
  SimConfig sim;
  std::vector<Mode> h0_modes;
  std::vector<Mode> f_modes;
  double mollify_delta = 0.0;  // 0 = off
  std::filesystem::path output_dir = "muskat_out";
  int snapshot_every = 0;  // in reports; 0 = initial and final only

  PeriodicField h0() const;
  PeriodicField f() const;
};

/// Parses the JSON text; unknown keys and ill-typed values throw ConfigError.
RunConfig parse_config(const std::string& text);
/// Reads and parses a file. A relative output_dir is taken relative to the
/// file's directory.
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg, int indent = 2);

extern const char* const timeseries_header;
std::string timeseries_row(const EnergyReport& r);

class TimeseriesWriter {
 public:
  explicit TimeseriesWriter(const std::filesystem::path& path);
  ~TimeseriesWriter();
  TimeseriesWriter(const TimeseriesWriter&) = delete;
  TimeseriesWriter& operator=(const TimeseriesWriter&) = delete;
  void write(const EnergyReport& r);

 private:
  std::FILE* fp_ = nullptr;
};

struct Snapshot {
  std::uint32_t n1 = 0, n2_plus = 0, n2_minus = 0;
  double t = 0.0;
  std::vector<double> h, f;
  std::vector<double> p_upper, p_lower;
  std::vector<double> w1_upper, w2_upper, w1_lower, w2_lower;

  bool operator==(const Snapshot&) const = default;
};

Snapshot make_snapshot(double t, const PeriodicField& h, const PeriodicField& f, const HeadSolution& head);
void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

struct RunManifest {
  std::string config_json;
  std::string version;
  std::string start_time, end_time;  // ISO 8601, UTC
  Termination reason = Termination::completed;
  std::string message;
  double error_time = 0.0;
  long steps = 0;
  double dt = 0.0;
  std::string timeseries;
  std::vector<std::string> snapshots;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
std::string utc_now();
const char* version_string();

}  // namespace muskat

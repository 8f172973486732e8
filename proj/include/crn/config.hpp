#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crn {

class Rng;

// Per-SU (or per-PU) parameter specification: one value for everyone, an
// explicit list, or a uniform range drawn per index.
struct ValueSpec {
  enum class Kind { kScalar, kList, kUniform };
  Kind kind = Kind::kScalar;
  double scalar = 0.0;
  std::vector<double> list;
  double lo = 0.0, hi = 0.0;

  ValueSpec() = default;
  explicit ValueSpec(double v) : scalar(v) {}
  static ValueSpec uniform(double lo, double hi);
  static ValueSpec of_list(std::vector<double> values);

  // Scalar -> the value; list -> list[index]; uniform -> one draw from rng.
  double resolve(int index, Rng& rng) const;
  std::string to_string() const;
  bool operator==(const ValueSpec&) const = default;
};

// Everything generate_scenario() needs; maps 1:1 onto the key = value file.
struct ScenarioConfig {
  std::uint64_t seed = 1;

  int num_sus = 4;
  int num_rt = 4;
  int num_pus = 2;
  int num_subchannels = 16;
  // > 0 pins the FC-available set to this many evenly spaced sub-channels;
  // 0 realizes availability from the sensing draw.
  int available_count = 16;

  double slot_duration_s = 1e-3;
  double subchannel_bandwidth_hz = 62.5e3;
  double noise_psd_w_per_hz = 1.6e-18;
  double snr_gap = 1.0;
  double ber = 0.0;  // > 0 derives snr_gap = -ln(5*BER)/1.5 at generation
  double symbol_duration_s = 1.6e-5;
  double start_frequency_hz = 900e6;

  ValueSpec harvest_rate{5.0};        // J/s
  ValueSpec sensing_energy{1e-4};     // J
  ValueSpec sensing_time{1e-5};       // s
  ValueSpec rate_requirement{2.0};    // bps/Hz
  ValueSpec pu_interference{0.0};     // W
  ValueSpec gain{0.0};                // fixed h for all channels; 0 = draw

  double pathloss_exponent = 3.0;
  double distance_min_m = 50.0;
  double distance_max_m = 200.0;
  bool rayleigh_fading = true;
  double rayleigh_scale = 1.0;
  double cross_distance_min_m = 50.0;
  double cross_distance_max_m = 200.0;
  double cross_gain_scale = 1e-9;

  double prior_min = 0.1, prior_max = 0.3;
  double miss_min = 0.01, miss_max = 0.05;
  double false_alarm_min = 0.05, false_alarm_max = 0.1;
  // Disabled by default; when detection_max > 0 the per-SU detection
  // probability is drawn from this range instead of 1 - Q^m.
  double detection_min = 0.0, detection_max = 0.0;
  int fusion_k = 0;  // 0 = majority rule

  ValueSpec interference_threshold{5e-13};  // W, per PU

  bool operator==(const ScenarioConfig&) const = default;

  void validate() const;
  // Applies one "key = value" override (same grammar as the file).
  void set(const std::string& key, const std::string& value);
  // FNV-1a 64 over the canonical serialization, as 16 hex digits.
  std::string hash() const;
};

// "number [unit]" with engineering suffixes (ms, us, mJ, kHz, pW, ...)
// normalized to SI. Throws ParseError (line 0) on garbage.
double parse_quantity(const std::string& text);

ScenarioConfig read_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text);
std::string config_to_string(const ScenarioConfig& config);
void write_config(const ScenarioConfig& config,
                  const std::filesystem::path& path);

}  // namespace crn

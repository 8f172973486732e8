#include "crn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "crn/errors.hpp"
#include "crn/model.hpp"
#include "crn/rng.hpp"

namespace crn {
namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> even_subset(int n, int m) {
  std::vector<int> out;
  out.reserve(m);
  for (int q = 0; q < m; ++q)
    out.push_back(static_cast<int>((2 * q + 1) * static_cast<long>(n) /
                                   (2 * m)));
  // Evenly spaced midpoints are distinct for m <= n, and sorted.
  return out;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario sc;
  sc.seed = config.seed;
  sc.config_hash = config.hash();

  sc.params.slot_duration_s = config.slot_duration_s;
  sc.params.subchannel_bandwidth_hz = config.subchannel_bandwidth_hz;
  sc.params.noise_psd_w_per_hz = config.noise_psd_w_per_hz;
  sc.params.snr_gap = config.ber > 0.0 ? snr_gap(config.ber) : config.snr_gap;
  sc.params.symbol_duration_s = config.symbol_duration_s;
  sc.params.start_frequency_hz = config.start_frequency_hz;
  sc.params.num_subchannels = config.num_subchannels;

  const int k = config.num_sus;
  const int l = config.num_pus;
  const int n = config.num_subchannels;

  // Contiguous PU bands covering all N sub-channels.
  std::vector<std::vector<int>> bands(l);
  for (int j = 0; j < n; ++j)
    bands[static_cast<int>(static_cast<long>(j) * l / n)].push_back(j);

  // Per-SU draws (substream i): scalar parameters first, then direct gains,
  // cross gains, and the local sensing performance, in that order.
  std::vector<std::vector<double>> pd(k), pf(k);
  sc.sus.resize(k);
  for (int i = 0; i < k; ++i) {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
    SecondaryUser& su = sc.sus[i];
    su.id = i;
    su.traffic = i < config.num_rt ? TrafficClass::kRealTime
                                   : TrafficClass::kNonRealTime;
    su.harvest_rate_w = config.harvest_rate.resolve(i, rng);
    su.sensing_energy_j = config.sensing_energy.resolve(i, rng);
    su.sensing_time_s = config.sensing_time.resolve(i, rng);
    su.rate_requirement = config.rate_requirement.resolve(i, rng);
    su.pu_interference_w = config.pu_interference.resolve(i, rng);

    const double fixed_gain = config.gain.resolve(i, rng);
    su.gains.resize(n);
    for (int j = 0; j < n; ++j) {
      if (fixed_gain > 0.0) {
        su.gains[j] = fixed_gain;
        continue;
      }
      const double d = rng.uniform(config.distance_min_m,
                                   config.distance_max_m);
      const double y = config.rayleigh_fading
                           ? rng.rayleigh(config.rayleigh_scale)
                           : 1.0;
      su.gains[j] = y * std::pow(d, -config.pathloss_exponent);
    }
    su.cross_gains.assign(l, std::vector<double>(n, 0.0));
    for (int m = 0; m < l; ++m) {
      for (int j = 0; j < n; ++j) {
        const double d = rng.uniform(config.cross_distance_min_m,
                                     config.cross_distance_max_m);
        const double y = config.rayleigh_fading
                             ? rng.rayleigh(config.rayleigh_scale)
                             : 1.0;
        su.cross_gains[m][j] =
            config.cross_gain_scale * y * std::pow(d, -config.pathloss_exponent);
      }
    }
    pd[i].resize(n);
    pf[i].resize(n);
    for (int j = 0; j < n; ++j) {
      pd[i][j] = config.detection_max > 0.0
                     ? rng.uniform(config.detection_min, config.detection_max)
                     : 1.0 - rng.uniform(config.miss_min, config.miss_max);
      pf[i][j] = rng.uniform(config.false_alarm_min, config.false_alarm_max);
    }
  }

  // Channel-level draws (substream K): priors, PU thresholds, then the
  // availability realization when it is not pinned by the config.
  Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(k));
  sc.sensing.prior_ql.resize(n);
  for (int j = 0; j < n; ++j)
    sc.sensing.prior_ql[j] = rng.uniform(config.prior_min, config.prior_max);

  sc.pus.resize(l);
  for (int m = 0; m < l; ++m) {
    sc.pus[m].id = m;
    sc.pus[m].interference_threshold_w =
        config.interference_threshold.resolve(m, rng);
  }

  const int fuse_k = config.fusion_k > 0 ? config.fusion_k : k / 2 + 1;
  sc.sensing.miss_qm.resize(n);
  sc.sensing.false_qf.resize(n);
  std::vector<double> col_pd(k), col_pf(k);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) {
      col_pd[i] = pd[i][j];
      col_pf[i] = pf[i][j];
    }
    const FusedSensing fused = fuse_k_out_of_n(col_pd, col_pf, fuse_k);
    sc.sensing.miss_qm[j] = fused.miss_qm;
    sc.sensing.false_qf[j] = fused.false_qf;
  }

  if (config.available_count > 0) {
    sc.sensing.available_set = even_subset(n, config.available_count);
  } else {
    for (int j = 0; j < n; ++j) {
      const bool occupied = rng.bernoulli(sc.sensing.prior_ql[j]);
      const bool judged_busy = rng.bernoulli(
          occupied ? 1.0 - sc.sensing.miss_qm[j] : sc.sensing.false_qf[j]);
      if (!judged_busy) sc.sensing.available_set.push_back(j);
    }
  }

  for (int m = 0; m < l; ++m) {
    for (int j : bands[m]) {
      const bool avail = std::binary_search(sc.sensing.available_set.begin(),
                                            sc.sensing.available_set.end(), j);
      (avail ? sc.pus[m].available_subchannels
             : sc.pus[m].unavailable_subchannels)
          .push_back(j);
    }
  }

  prepare_scenario(sc);
  return sc;
}

namespace {

ordered_json to_json(const SystemParams& p) {
  return ordered_json{{"slot_duration_s", p.slot_duration_s},
                      {"subchannel_bandwidth_hz", p.subchannel_bandwidth_hz},
                      {"noise_psd_w_per_hz", p.noise_psd_w_per_hz},
                      {"snr_gap", p.snr_gap},
                      {"symbol_duration_s", p.symbol_duration_s},
                      {"start_frequency_hz", p.start_frequency_hz},
                      {"num_subchannels", p.num_subchannels}};
}

void from_json(const ordered_json& j, SystemParams& p) {
  j.at("slot_duration_s").get_to(p.slot_duration_s);
  j.at("subchannel_bandwidth_hz").get_to(p.subchannel_bandwidth_hz);
  j.at("noise_psd_w_per_hz").get_to(p.noise_psd_w_per_hz);
  j.at("snr_gap").get_to(p.snr_gap);
  j.at("symbol_duration_s").get_to(p.symbol_duration_s);
  j.at("start_frequency_hz").get_to(p.start_frequency_hz);
  j.at("num_subchannels").get_to(p.num_subchannels);
}

}  // namespace

void write_scenario(const Scenario& sc, const std::filesystem::path& path) {
  ordered_json j;
  j["seed"] = sc.seed;
  j["config_hash"] = sc.config_hash;
  j["params"] = to_json(sc.params);
  j["sus"] = ordered_json::array();
  for (const auto& su : sc.sus) {
    j["sus"].push_back(
        ordered_json{{"id", su.id},
                     {"traffic", su.is_rt() ? "rt" : "nrt"},
                     {"harvest_rate_w", su.harvest_rate_w},
                     {"sensing_energy_j", su.sensing_energy_j},
                     {"sensing_time_s", su.sensing_time_s},
                     {"rate_requirement", su.rate_requirement},
                     {"pu_interference_w", su.pu_interference_w},
                     {"gains", su.gains},
                     {"cross_gains", su.cross_gains}});
  }
  j["pus"] = ordered_json::array();
  for (const auto& pu : sc.pus) {
    j["pus"].push_back(
        ordered_json{{"id", pu.id},
                     {"interference_threshold_w", pu.interference_threshold_w},
                     {"available_subchannels", pu.available_subchannels},
                     {"unavailable_subchannels", pu.unavailable_subchannels}});
  }
  j["sensing"] = ordered_json{{"prior_ql", sc.sensing.prior_ql},
                              {"miss_qm", sc.sensing.miss_qm},
                              {"false_qf", sc.sensing.false_qf},
                              {"available_set", sc.sensing.available_set}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file " + path.string());
  out << j.dump(2) << "\n";
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), 0);
  }
  Scenario sc;
  try {
    j.at("seed").get_to(sc.seed);
    j.at("config_hash").get_to(sc.config_hash);
    from_json(j.at("params"), sc.params);
    for (const auto& s : j.at("sus")) {
      SecondaryUser su;
      s.at("id").get_to(su.id);
      su.traffic = s.at("traffic").get<std::string>() == "rt"
                       ? TrafficClass::kRealTime
                       : TrafficClass::kNonRealTime;
      s.at("harvest_rate_w").get_to(su.harvest_rate_w);
      s.at("sensing_energy_j").get_to(su.sensing_energy_j);
      s.at("sensing_time_s").get_to(su.sensing_time_s);
      s.at("rate_requirement").get_to(su.rate_requirement);
      s.at("pu_interference_w").get_to(su.pu_interference_w);
      s.at("gains").get_to(su.gains);
      s.at("cross_gains").get_to(su.cross_gains);
      sc.sus.push_back(std::move(su));
    }
    for (const auto& p : j.at("pus")) {
      PrimaryUser pu;
      p.at("id").get_to(pu.id);
      p.at("interference_threshold_w").get_to(pu.interference_threshold_w);
      p.at("available_subchannels").get_to(pu.available_subchannels);
      p.at("unavailable_subchannels").get_to(pu.unavailable_subchannels);
      sc.pus.push_back(std::move(pu));
    }
    j.at("sensing").at("prior_ql").get_to(sc.sensing.prior_ql);
    j.at("sensing").at("miss_qm").get_to(sc.sensing.miss_qm);
    j.at("sensing").at("false_qf").get_to(sc.sensing.false_qf);
    j.at("sensing").at("available_set").get_to(sc.sensing.available_set);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), 0);
  }
  prepare_scenario(sc);
  return sc;
}

}  // namespace crn

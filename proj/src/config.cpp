#include "crn/config.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "crn/errors.hpp"
#include "crn/rng.hpp"

namespace crn {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, double>& unit_table() {
  static const std::map<std::string, double> table = {
      {"s", 1.0},      {"ms", 1e-3},    {"us", 1e-6},    {"ns", 1e-9},
      {"J", 1.0},      {"mJ", 1e-3},    {"uJ", 1e-6},    {"nJ", 1e-9},
      {"J/s", 1.0},    {"mJ/s", 1e-3},  {"uJ/s", 1e-6},
      {"W", 1.0},      {"mW", 1e-3},    {"uW", 1e-6},    {"nW", 1e-9},
      {"pW", 1e-12},   {"fW", 1e-15},   {"W/Hz", 1.0},
      {"Hz", 1.0},     {"kHz", 1e3},    {"MHz", 1e6},    {"GHz", 1e9},
      {"m", 1.0},      {"km", 1e3},     {"bps/Hz", 1.0},
  };
  return table;
}

double parse_quantity_at(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError("empty numeric value", line);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str()) throw ParseError("not a number: '" + t + "'", line);
  const std::string unit = trim(t.substr(end - t.c_str()));
  if (unit.empty()) return v;
  auto it = unit_table().find(unit);
  if (it == unit_table().end())
    throw ParseError("unknown unit '" + unit + "'", line);
  return v * it->second;
}

ValueSpec parse_value_spec(const std::string& text, int line) {
  const std::string t = trim(text);
  const auto args_of = [&](const std::string& prefix) {
    std::string inner = trim(t.substr(prefix.size()));
    if (inner.empty() || inner.front() != '(' || inner.back() != ')')
      throw ParseError("expected '(...)' after '" + prefix + "'", line);
    inner = inner.substr(1, inner.size() - 2);
    std::vector<double> out;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(parse_quantity_at(item, line));
    return out;
  };
  if (t.rfind("uniform", 0) == 0) {
    const auto args = args_of("uniform");
    if (args.size() != 2)
      throw ParseError("uniform(...) needs exactly two arguments", line);
    return ValueSpec::uniform(args[0], args[1]);
  }
  if (t.rfind("list", 0) == 0) {
    auto args = args_of("list");
    if (args.empty()) throw ParseError("list(...) needs arguments", line);
    return ValueSpec::of_list(std::move(args));
  }
  return ValueSpec{parse_quantity_at(t, line)};
}

}  // namespace

ValueSpec ValueSpec::uniform(double lo, double hi) {
  ValueSpec v;
  v.kind = Kind::kUniform;
  v.lo = lo;
  v.hi = hi;
  return v;
}

ValueSpec ValueSpec::of_list(std::vector<double> values) {
  ValueSpec v;
  v.kind = Kind::kList;
  v.list = std::move(values);
  return v;
}

double ValueSpec::resolve(int index, Rng& rng) const {
  switch (kind) {
    case Kind::kScalar:
      return scalar;
    case Kind::kList:
      if (index >= static_cast<int>(list.size()))
        throw ConfigError("value list shorter than the index it serves");
      return list[static_cast<size_t>(index)];
    case Kind::kUniform:
      return rng.uniform(lo, hi);
  }
  return scalar;
}

std::string ValueSpec::to_string() const {
  switch (kind) {
    case Kind::kScalar:
      return fmt17(scalar);
    case Kind::kList: {
      std::string out = "list(";
      for (size_t i = 0; i < list.size(); ++i) {
        if (i) out += ", ";
        out += fmt17(list[i]);
      }
      return out + ")";
    }
    case Kind::kUniform:
      return "uniform(" + fmt17(lo) + ", " + fmt17(hi) + ")";
  }
  return "";
}

namespace {

// One row per key keeps parse, serialize and override logic in lockstep.
struct KeyHandler {
  const char* key;
  void (*set)(ScenarioConfig&, const std::string&, int line);
  std::string (*get)(const ScenarioConfig&);
};

template <double ScenarioConfig::* Field>
KeyHandler double_key(const char* key) {
  return {key,
          [](ScenarioConfig& c, const std::string& v, int line) {
            c.*Field = parse_quantity_at(v, line);
          },
          [](const ScenarioConfig& c) { return fmt17(c.*Field); }};
}

template <int ScenarioConfig::* Field>
KeyHandler int_key(const char* key) {
  return {key,
          [](ScenarioConfig& c, const std::string& v, int line) {
            const double d = parse_quantity_at(v, line);
            c.*Field = static_cast<int>(d);
            if (static_cast<double>(c.*Field) != d)
              throw ParseError("expected an integer", line);
          },
          [](const ScenarioConfig& c) { return std::to_string(c.*Field); }};
}

template <ValueSpec ScenarioConfig::* Field>
KeyHandler spec_key(const char* key) {
  return {key,
          [](ScenarioConfig& c, const std::string& v, int line) {
            c.*Field = parse_value_spec(v, line);
          },
          [](const ScenarioConfig& c) { return (c.*Field).to_string(); }};
}

const std::vector<KeyHandler>& key_handlers() {
  static const std::vector<KeyHandler> handlers = {
      {"seed",
       [](ScenarioConfig& c, const std::string& v, int line) {
         char* end = nullptr;
         c.seed = std::strtoull(trim(v).c_str(), &end, 10);
         if (*end) throw ParseError("seed must be an unsigned integer", line);
       },
       [](const ScenarioConfig& c) {
         char buf[32];
         std::snprintf(buf, sizeof(buf), "%" PRIu64, c.seed);
         return std::string(buf);
       }},
      int_key<&ScenarioConfig::num_sus>("num_sus"),
      int_key<&ScenarioConfig::num_rt>("num_rt"),
      int_key<&ScenarioConfig::num_pus>("num_pus"),
      int_key<&ScenarioConfig::num_subchannels>("num_subchannels"),
      int_key<&ScenarioConfig::available_count>("available_count"),
      double_key<&ScenarioConfig::slot_duration_s>("slot_duration"),
      double_key<&ScenarioConfig::subchannel_bandwidth_hz>(
          "subchannel_bandwidth"),
      double_key<&ScenarioConfig::noise_psd_w_per_hz>("noise_psd"),
      double_key<&ScenarioConfig::snr_gap>("snr_gap"),
      double_key<&ScenarioConfig::ber>("ber"),
      double_key<&ScenarioConfig::symbol_duration_s>("symbol_duration"),
      double_key<&ScenarioConfig::start_frequency_hz>("start_frequency"),
      spec_key<&ScenarioConfig::harvest_rate>("harvest_rate"),
      spec_key<&ScenarioConfig::sensing_energy>("sensing_energy"),
      spec_key<&ScenarioConfig::sensing_time>("sensing_time"),
      spec_key<&ScenarioConfig::rate_requirement>("rate_requirement"),
      spec_key<&ScenarioConfig::pu_interference>("pu_interference"),
      spec_key<&ScenarioConfig::gain>("gain"),
      double_key<&ScenarioConfig::pathloss_exponent>("pathloss_exponent"),
      double_key<&ScenarioConfig::distance_min_m>("distance_min"),
      double_key<&ScenarioConfig::distance_max_m>("distance_max"),
      {"fading",
       [](ScenarioConfig& c, const std::string& v, int line) {
         const std::string t = trim(v);
         if (t == "rayleigh")
           c.rayleigh_fading = true;
         else if (t == "none")
           c.rayleigh_fading = false;
         else
           throw ParseError("fading must be 'rayleigh' or 'none'", line);
       },
       [](const ScenarioConfig& c) {
         return std::string(c.rayleigh_fading ? "rayleigh" : "none");
       }},
      double_key<&ScenarioConfig::rayleigh_scale>("rayleigh_scale"),
      double_key<&ScenarioConfig::cross_distance_min_m>("cross_distance_min"),
      double_key<&ScenarioConfig::cross_distance_max_m>("cross_distance_max"),
      double_key<&ScenarioConfig::cross_gain_scale>("cross_gain_scale"),
      double_key<&ScenarioConfig::prior_min>("prior_min"),
      double_key<&ScenarioConfig::prior_max>("prior_max"),
      double_key<&ScenarioConfig::miss_min>("miss_min"),
      double_key<&ScenarioConfig::miss_max>("miss_max"),
      double_key<&ScenarioConfig::false_alarm_min>("false_alarm_min"),
      double_key<&ScenarioConfig::false_alarm_max>("false_alarm_max"),
      double_key<&ScenarioConfig::detection_min>("detection_min"),
      double_key<&ScenarioConfig::detection_max>("detection_max"),
      int_key<&ScenarioConfig::fusion_k>("fusion_k"),
      spec_key<&ScenarioConfig::interference_threshold>(
          "interference_threshold"),
  };
  return handlers;
}

const KeyHandler* find_handler(const std::string& key) {
  for (const auto& h : key_handlers())
    if (key == h.key) return &h;
  return nullptr;
}

}  // namespace

double parse_quantity(const std::string& text) {
  return parse_quantity_at(text, 0);
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  const KeyHandler* h = find_handler(trim(key));
  if (!h) throw ParseError("unknown config key '" + trim(key) + "'", 0);
  h->set(*this, value, 0);
}

void ScenarioConfig::validate() const {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (num_sus < 1) fail("num_sus must be >= 1");
  if (num_rt < 0 || num_rt > num_sus) fail("num_rt must be in [0, num_sus]");
  if (num_pus < 1) fail("num_pus must be >= 1");
  if (num_subchannels < 1) fail("num_subchannels must be >= 1");
  if (available_count < 0 || available_count > num_subchannels)
    fail("available_count must be in [0, num_subchannels]");
  if (slot_duration_s <= 0 || subchannel_bandwidth_hz <= 0 ||
      noise_psd_w_per_hz <= 0 || symbol_duration_s <= 0 ||
      start_frequency_hz <= 0)
    fail("system durations/bandwidths must be positive");
  if (snr_gap <= 0 && ber <= 0) fail("need snr_gap > 0 or ber > 0");
  if (ber < 0 || ber >= 0.2) {
    if (ber != 0) fail("ber must be in (0, 0.2)");
  }
  if (pathloss_exponent < 0) fail("pathloss_exponent must be >= 0");
  if (distance_min_m <= 0 || distance_max_m < distance_min_m)
    fail("distance range invalid");
  if (cross_distance_min_m <= 0 || cross_distance_max_m < cross_distance_min_m)
    fail("cross distance range invalid");
  if (rayleigh_scale <= 0) fail("rayleigh_scale must be positive");
  if (cross_gain_scale < 0) fail("cross_gain_scale must be >= 0");
  const auto check_range = [&](double lo, double hi, const char* what) {
    if (lo < 0 || hi > 1 || hi < lo)
      fail(std::string(what) + " range must satisfy 0 <= lo <= hi <= 1");
  };
  check_range(prior_min, prior_max, "prior");
  check_range(miss_min, miss_max, "miss");
  check_range(false_alarm_min, false_alarm_max, "false_alarm");
  if (detection_max > 0) check_range(detection_min, detection_max, "detection");
  if (fusion_k < 0 || fusion_k > num_sus)
    fail("fusion_k must be in [0, num_sus]");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig config;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = raw;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeyHandler* h = find_handler(key);
    if (!h) throw ParseError("unknown config key '" + key + "'", line_no);
    h->set(config, value, line_no);
  }
  return config;
}

ScenarioConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_string(const ScenarioConfig& config) {
  std::string out;
  for (const auto& h : key_handlers()) {
    out += h.key;
    out += " = ";
    out += h.get(config);
    out += "\n";
  }
  return out;
}

void write_config(const ScenarioConfig& config,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << config_to_string(config);
}

std::string ScenarioConfig::hash() const {
  const std::string s = config_to_string(*this);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace crn

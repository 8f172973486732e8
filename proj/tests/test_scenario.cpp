#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crn/allocation.hpp"
#include "crn/config.hpp"
#include "crn/errors.hpp"
#include "crn/experiments.hpp"
#include "crn/model.hpp"
#include "crn/rng.hpp"
#include "crn/scenario.hpp"

using namespace crn;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("crn_test_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("unit suffixes normalize at parse time") {
  CHECK(parse_quantity("1 ms") == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(parse_quantity("62.5 kHz") == doctest::Approx(62500.0));
  CHECK(parse_quantity("1mJ") == doctest::Approx(1e-3));
  CHECK(parse_quantity("10 us") == doctest::Approx(1e-5));
  CHECK(parse_quantity("5e-13 W") == doctest::Approx(5e-13));
  CHECK(parse_quantity("30 mJ/s") == doctest::Approx(0.03));
  CHECK(parse_quantity("-100") == doctest::Approx(-100.0));
  CHECK_THROWS_AS(parse_quantity("12 parsec"), ParseError);
  CHECK_THROWS_AS(parse_quantity("fast"), ParseError);
}

TEST_CASE("config parse, serialize, round-trip identity") {
  ScenarioConfig c;
  c.seed = 982451653;
  c.num_sus = 7;
  c.num_rt = 3;
  c.slot_duration_s = 2e-3;
  c.harvest_rate = ValueSpec::uniform(1.0, 9.0);
  c.sensing_energy = ValueSpec::of_list({1e-4, 2e-4, 3e-4, 1e-4, 2e-4, 3e-4,
                                         5e-5});
  c.interference_threshold = ValueSpec{3.3e-13};
  c.cross_gain_scale = 6.25e-9;

  const std::string text = config_to_string(c);
  const ScenarioConfig back = parse_config(text);
  CHECK(back == c);

  const fs::path path = temp_file("roundtrip.cfg");
  write_config(c, path);
  CHECK(read_config(path) == c);
  fs::remove(path);
}

TEST_CASE("config text accepts units and comments, reports line numbers") {
  const char* text =
      "# system\n"
      "slot_duration = 1 ms\n"
      "sensing_time = 10 us\n"
      "harvest_rate = list(30 mJ/s, 40 mJ/s, 60 mJ/s, 120 mJ/s)\n";
  const ScenarioConfig c = parse_config(text);
  CHECK(c.slot_duration_s == doctest::Approx(1e-3));
  CHECK(c.sensing_time.scalar == doctest::Approx(1e-5));
  REQUIRE(c.harvest_rate.kind == ValueSpec::Kind::kList);
  CHECK(c.harvest_rate.list[3] == doctest::Approx(0.12));

  try {
    parse_config("slot_duration = 1 ms\nbogus_key = 4\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config("slot_duration\n"), ParseError);
}

TEST_CASE("config hash changes with any value") {
  ScenarioConfig a, b;
  CHECK(a.hash() == b.hash());
  b.seed = 2;
  CHECK(a.hash() != b.hash());
  b = a;
  b.harvest_rate = ValueSpec{5.000000001};
  CHECK(a.hash() != b.hash());
}

TEST_CASE("generation is bit-deterministic under the seed") {
  ScenarioConfig c;
  c.seed = 424242;
  c.num_sus = 5;
  c.num_rt = 2;
  c.available_count = 0;  // exercise the sensing realization too
  const Scenario a = generate_scenario(c);
  const Scenario b = generate_scenario(c);
  CHECK(a.sus.size() == b.sus.size());
  for (size_t i = 0; i < a.sus.size(); ++i) {
    CHECK(a.sus[i].gains == b.sus[i].gains);
    CHECK(a.sus[i].cross_gains == b.sus[i].cross_gains);
    CHECK(a.sus[i].harvest_rate_w == b.sus[i].harvest_rate_w);
  }
  CHECK(a.sensing.available_set == b.sensing.available_set);
  CHECK(a.sensing.miss_qm == b.sensing.miss_qm);

  ScenarioConfig other = c;
  other.seed = 424243;
  const Scenario d = generate_scenario(other);
  CHECK(d.sus[0].gains != a.sus[0].gains);
}

TEST_CASE("degenerate channel model gives unit gains") {
  ScenarioConfig c;
  c.pathloss_exponent = 0.0;
  c.rayleigh_fading = false;
  c.num_sus = 2;
  c.num_rt = 2;
  const Scenario sc = generate_scenario(c);
  for (const auto& su : sc.sus)
    for (double g : su.gains) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("distance draws have the configured mean") {
  // d ~ U[50, 200]: the empirical mean over 1e4 draws sits near 125 m.
  Rng rng = Rng::substream(1234, 0);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += rng.uniform(50.0, 200.0);
  CHECK(std::abs(sum / n - 125.0) / 125.0 < 0.02);
}

TEST_CASE("scenario JSON round-trip preserves every value") {
  ScenarioConfig c;
  c.seed = 77;
  c.num_sus = 3;
  c.num_rt = 1;
  const Scenario a = generate_scenario(c);
  const fs::path path = temp_file("scenario.json");
  write_scenario(a, path);
  const Scenario b = read_scenario(path);
  CHECK(b.seed == a.seed);
  CHECK(b.config_hash == a.config_hash);
  CHECK(b.params.noise_psd_w_per_hz == a.params.noise_psd_w_per_hz);
  for (size_t i = 0; i < a.sus.size(); ++i) {
    CHECK(b.sus[i].gains == a.sus[i].gains);
    CHECK(b.sus[i].cross_gains == a.sus[i].cross_gains);
  }
  CHECK(b.sensing.available_set == a.sensing.available_set);
  fs::remove(path);
}

TEST_CASE("fused sensing feeds the posteriors sensibly") {
  ScenarioConfig c;
  c.num_sus = 6;
  c.num_rt = 6;
  const Scenario sc = generate_scenario(c);
  for (int j = 0; j < sc.params.num_subchannels; ++j) {
    // Majority fusion of six detectors each with miss <= 0.05 leaves a tiny
    // fused miss probability.
    CHECK(sc.sensing.miss_qm[j] < 0.01);
    CHECK(sc.sensing.false_qf[j] < 0.01);
    CHECK(sc.posterior_p1[j] > 0.0);
    CHECK(sc.posterior_p1[j] <= 1.0);
  }
}

TEST_CASE("write_results emits a header-only CSV for empty sweeps") {
  ExperimentResult empty;
  empty.name = "empty";
  empty.columns = {"a", "b"};
  const fs::path path = temp_file("empty.csv");
  write_results(empty, path);
  CHECK(slurp(path) == "a,b\n");
  fs::remove(path);
}

TEST_CASE("experiment CSV output is byte-identical across runs") {
  const ExperimentResult r1 = run_experiment("one-su-surface");
  const ExperimentResult r2 = run_experiment("one-su-surface", {}, 3);
  const fs::path p1 = temp_file("exp1.csv");
  const fs::path p2 = temp_file("exp2.csv");
  write_results(r1, p1);
  write_results(r2, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(!r1.rows.empty());
  // Every row carries the config hash column.
  const auto hash_col =
      std::find(r1.columns.begin(), r1.columns.end(), "config_hash");
  REQUIRE(hash_col != r1.columns.end());
  fs::remove(p1);
  fs::remove(p2);
}

}  // TEST_SUITE

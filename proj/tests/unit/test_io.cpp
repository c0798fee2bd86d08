// Copyright 2026 The ionswap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <sstream>

#include "ionswap/config.hpp"
#include "ionswap/errors.hpp"
#include "ionswap/io.hpp"

using namespace ionswap;

TEST(Fnv1a, PublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(SequenceJson, RoundTripsBuiltIns) {
  for (const auto& seq : {build_three_ion_reorder("011"), build_swap_tomography(1, 3, 2, 0), build_echo_probe(18, 40, 0.5)}) {
    const Json j = seq;
    const auto back = j.get<Sequence>();
    EXPECT_EQ(Json(back).dump(), j.dump());
    ASSERT_EQ(back.steps.size(), seq.steps.size());
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
      EXPECT_EQ(back.steps[i].kind, seq.steps[i].kind);
      EXPECT_EQ(back.steps[i].from, seq.steps[i].from);
      EXPECT_EQ(back.steps[i].phase, seq.steps[i].phase);
      EXPECT_EQ(back.steps[i].track_phase, seq.steps[i].track_phase);
      EXPECT_DOUBLE_EQ(back.steps[i].theta, seq.steps[i].theta);
    }
  }
}

TEST(SequenceJson, ParsedSequenceRunsLikeTheOriginal) {
  World w;
  const auto seq = build_three_ion_reorder("101");
  const auto back = Json(seq).get<Sequence>();
  const auto a = run(seq, w), b = run(back, w);
  EXPECT_EQ(Json(a.report).dump(), Json(b.report).dump());
}

TEST(SequenceJson, HandWrittenList) {
  const auto j = Json::parse(R"({
    "name": "hop",
    "initial": [{"segment": 20, "ions": ["A"]}],
    "steps": [{"kind": "init_pump", "ions": ["A"]},
              {"kind": "transport", "from": 20, "to": 22},
              {"kind": "hold", "duration": 10},
              {"kind": "transport", "from": 22, "to": 20},
              {"kind": "rotate", "ions": ["A"], "theta": 3.141592653589793, "phi": 0},
              {"kind": "readout", "ions": ["A"]}]})");
  const auto seq = j.get<Sequence>();
  const auto r = run(seq, World{});
  EXPECT_EQ(r.report.count(PrimitiveKind::transport), 2);
  EXPECT_NEAR(outcome_probabilities(r.state, {}, {"A"})[0], 1.0, 1e-12);
}

TEST(SequenceJson, RejectsUnknownKeysAndKinds) {
  EXPECT_THROW(Json::parse(R"({"kind": "teleport"})").get<Primitive>(), ConfigError);
  EXPECT_THROW(Json::parse(R"({"kind": "hold", "durration": 3})").get<Primitive>(), ConfigError);
  EXPECT_THROW(Json::parse(R"({"kind": "transport", "from": "x"})").get<Primitive>(), ConfigError);
  EXPECT_THROW(Json::parse(R"({"steps": 3})").get<Sequence>(), std::exception);
}

TEST(Config, DefaultsRoundTripWithStableHash) {
  RunConfig c;
  c.seed = 7;
  const auto back = config_from_json(to_json_tree(c));
  EXPECT_EQ(to_json_tree(back).dump(), to_json_tree(c).dump());
  EXPECT_EQ(config_hash(back), config_hash(c));
  ASSERT_TRUE(back.seed.has_value());
  EXPECT_EQ(*back.seed, 7u);
}

TEST(Config, HashTracksPhysicsNotSeedOrOutput) {
  RunConfig a, b;
  b.seed = 99;
  b.out = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.swap.u_d_peak += 0.1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, PartialTreeKeepsDefaults) {
  const auto c = config_from_json(Json::parse(
      R"({"seed": 3, "readout": {"uniform": 0.02}, "tomography": {"shots": 10, "include_swap": false}})"));
  EXPECT_EQ(c.tomography.shots, 10u);
  EXPECT_FALSE(c.tomography.include_swap);
  EXPECT_DOUBLE_EQ(c.readout.uniform.up, 0.02);
  EXPECT_DOUBLE_EQ(c.readout.uniform.down, 0.02);
  EXPECT_DOUBLE_EQ(c.swap.duration, SwapRampParams{}.duration);
  EXPECT_EQ(c.require_seed(), 3u);
}

TEST(Config, Rejections) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"sed": 3})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"swap": {"u_d": 1}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"filter": {"cutoff_mhz": -1}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"readout": {"uniform": 0.7}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"tomography": {"mode": "fast"}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"rabi": {"data": "no/such/file.csv"}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"field_map": {"segments": [99]}})")), ConfigError);
  EXPECT_THROW(RunConfig{}.require_seed(), ConfigError);
  std::istringstream bad("{ not json");
  EXPECT_THROW(parse_json(bad, "x"), ConfigError);
}

TEST(Config, DynamicalWorldUsesLongSeparation) {
  RunConfig c;
  c.calibrate = false;
  const TrapModel m(c.geometry());
  EXPECT_DOUBLE_EQ(c.world(&m, RunMode::dynamical).separation.duration, c.dynamical_separation_duration);
  EXPECT_DOUBLE_EQ(c.world(nullptr, RunMode::logical).separation.duration, c.separation.duration);
  EXPECT_THROW(c.world(nullptr, RunMode::dynamical), ConfigError);
}

TEST(ShotCsv, RoundTrip) {
  std::vector<ShotRow> rows = shot_rows(0, {5, 0, 2, 3}, 2);
  auto more = shot_rows(1, {0, 0, 0, 10}, 2);
  rows.insert(rows.end(), more.begin(), more.end());
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].outcome, "10");
  std::stringstream buf;
  write_shot_csv(buf, rows);
  const auto back = read_shot_csv(buf);
  const auto h = histograms(back, 2, 2);
  EXPECT_EQ(h[0], (std::vector<std::uint64_t>{5, 0, 2, 3}));
  EXPECT_EQ(h[1], (std::vector<std::uint64_t>{0, 0, 0, 10}));
}

TEST(ShotCsv, Rejections) {
  std::istringstream header("a,b,c\n");
  EXPECT_THROW(read_shot_csv(header), ConfigError);
  std::istringstream bits("setting,outcome,count\n0,012,3\n");
  EXPECT_THROW(read_shot_csv(bits), ConfigError);
  std::istringstream width("setting,outcome,count\n0,01,3\n0,011,3\n");
  EXPECT_THROW(read_shot_csv(width), ConfigError);
  EXPECT_THROW(histograms(shot_rows(0, {1, 0, 0, 0}, 2), 2, 2), ConfigError);  // setting 1 missing
}

TEST(ReportJson, CarriesCountsAndTiming) {
  const auto r = run(build_three_ion_reorder("000"), World{}).report;
  const Json j = r;
  EXPECT_EQ(j["counts"]["transport"], 30);
  EXPECT_EQ(j["counts"]["swap"], 3);
  EXPECT_EQ(j["final_order"], Json({"C", "B", "A"}));
  EXPECT_NEAR(j["shuttling_fraction"].get<double>(), r.shuttling_fraction(), 0);
}

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

#pragma once

// Shuttling and laser primitives, the ion position ledger, and sequence
// execution in logical (kinematic) or dynamical (integrated) mode.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ionswap/crystal.hpp"
#include "ionswap/qubit.hpp"
#include "ionswap/trap_model.hpp"
#include "ionswap/waveform.hpp"

namespace ionswap {

enum class PrimitiveKind { transport, separate, merge, swap, init_pump, rotate, shelve, readout, hold };
inline constexpr std::array<PrimitiveKind, 9> kAllPrimitiveKinds{
    PrimitiveKind::transport, PrimitiveKind::separate, PrimitiveKind::merge,
    PrimitiveKind::swap,      PrimitiveKind::init_pump, PrimitiveKind::rotate,
    PrimitiveKind::shelve,    PrimitiveKind::readout,   PrimitiveKind::hold};

std::string to_string(PrimitiveKind k);
PrimitiveKind parse_primitive_kind(const std::string& s);
bool is_shuttling(PrimitiveKind k);
bool is_laser(PrimitiveKind k);

/// Loading primitives split the loaded crystal into single-ion wells; they are
/// reported separately from the process they prepare.
enum class SequencePhase { loading, process };
std::string to_string(SequencePhase p);
SequencePhase parse_sequence_phase(const std::string& s);

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::hold;
  std::vector<std::string> ions;  // laser targets; informational for shuttling
  int from = 0;                   // transport origin; site for separate/merge/swap
  int to = 0;                     // transport destination
  int split = -1;                 // separate: ions going left (-1 = half)
  double bias = 0;                // separate: V
  double theta = 0, phi = 0;      // rotate
  bool track_phase = true;        // rotate: correct for accumulated field phase
  double duration = -1;           // us; < 0 uses the world timing
  SequencePhase phase = SequencePhase::process;
  std::string note;

  static Primitive transport(int from, int to, std::string note = {});
  static Primitive separate(int site, int split = -1, double bias = 0);
  static Primitive merge(int site);
  static Primitive swap(int site);
  static Primitive pump(std::vector<std::string> ions);
  static Primitive rotate(std::string ion, double theta, double phi, bool track = true);
  static Primitive shelve(std::vector<std::string> ions);
  static Primitive readout(std::vector<std::string> ions);
  static Primitive hold(double us);
};

/// Ions sharing one potential well, ordered along +x.
struct Well {
  int segment = 0;
  std::vector<std::string> ions;
};

struct Sequence {
  std::string name;
  std::vector<Well> initial;
  std::vector<Primitive> steps;

  std::vector<std::string> ions() const;  // sorted by initial position
  Sequence& add(Primitive p);
  Sequence& add(Primitive p, SequencePhase phase);
};

struct Violation {
  std::size_t step = 0;
  std::string message;
};

/// Static checks against the trap geometry. Never throws. `min_gap` is the
/// closest two wells may come in segments; dynamical runs need 2 since wells
/// on neighbouring segments fuse into one minimum.
std::vector<Violation> validate(const Sequence& seq, const TrapGeometry& geometry,
                                int isolation_segments = 6, int min_gap = 1);

// ---------------------------------------------------------------------------

struct LaserTiming {
  double pump = 20.0;  // us
  double rotate = 5.0;
  double shelve = 20.0;
  double readout = 80.0;
};

struct SequenceNoise {
  double swap_depolarizing = 0;  // per ion per swap
};

enum class RunMode { logical, dynamical };
std::string to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

struct World {
  const TrapModel* model = nullptr;  // required for dynamical mode
  TrapGeometry geometry;             // used when no model is given
  FieldMap field;
  SequenceNoise noise;
  LaserTiming laser;
  TransportParams transport;
  SeparationParams separation;
  SwapRampParams swap;
  FilterModel filter;
  bool precompensate_shuttling = true;  // not applied to the swap
  IntegrationOptions integration;
  double crystal_spacing = 4.3;  // um, kinematic two-ion spacing

  const TrapGeometry& trap() const { return model ? model->geometry() : geometry; }
  double duration(const Primitive& p) const;
};

struct TimelineEntry {
  std::size_t step = 0;
  PrimitiveKind kind = PrimitiveKind::hold;
  SequencePhase phase = SequencePhase::process;
  double t0 = 0, t1 = 0;
  std::string description;
};

struct SequenceReport {
  std::map<PrimitiveKind, int> counts;      // process phase
  std::map<PrimitiveKind, int> all_counts;  // every phase
  int transport_hops = 0;                   // process phase
  double duration_us = 0;                   // process phase
  double shuttling_us = 0;                  // process phase
  double total_duration_us = 0;             // every phase
  std::vector<TimelineEntry> timeline;
  std::map<std::string, PositionHistory> histories;
  std::map<std::string, double> accumulated_phase;  // rad, end of run
  std::vector<std::pair<std::size_t, ExcitationReport>> excitations;  // dynamical mode
  std::vector<Well> final_wells;
  bool completed = true;
  std::string abort_reason;

  int count(PrimitiveKind k) const;
  double shuttling_fraction() const { return duration_us > 0 ? shuttling_us / duration_us : 0.0; }
  /// Ion labels in final spatial order (-x to +x).
  std::vector<std::string> final_order() const;
};

struct RunResult {
  SequenceReport report;
  QubitRegister state;
  std::vector<std::string> readout_order;  // order of readout primitives
};

/// Throws ConfigError if the sequence fails validation, or if dynamical mode
/// has no trap model. Dynamics failures end the run early with
/// report.completed = false.
RunResult run(const Sequence& seq, const World& world, RunMode mode = RunMode::logical);

/// Outcome histogram over bitstrings of `order` (first label is the most
/// significant bit, '1' = up).
std::vector<std::uint64_t> sample_outcomes(const QubitRegister& state, const ReadoutModel& readout,
                                           const std::vector<std::string>& order, std::size_t shots,
                                           std::uint64_t seed);
/// Exact outcome probabilities over `order`, including readout error.
std::vector<double> outcome_probabilities(const QubitRegister& state, const ReadoutModel& readout,
                                          const std::vector<std::string>& order);

void write_timeline(std::ostream& out, const SequenceReport& report);

// ---------------------------------------------------------------------------
// Built-in sequences

struct SwapTomographyLayout {
  int site = 20;  // LIZ
  bool include_swap = true;
};

/// Two ions A, B in one well at the LIZ: pump, separate, individual
/// preparation, merge, swap, separate, individual analysis, merge, shelve,
/// separate, individual readout. Readout order is left then right.
Sequence build_swap_tomography(int prep_a, int prep_b, int analysis_left, int analysis_right,
                               const SwapTomographyLayout& layout = {});

struct ReorderLayout {
  int liz = 20;
  int left_store = 14;
  int middle_store = 26;
  int right_store = 30;
  double loading_bias = 0.0;  // V, biased split of the loaded crystal
};

/// Three ions A, B, C loaded as one crystal at the LIZ; input bits are
/// ordered A, B, C with '1' = up. Ends in spatial order C, B, A.
Sequence build_three_ion_reorder(const std::string& input_bits, const ReorderLayout& layout = {});

/// Single-ion Ramsey probe: pi/2 at the LIZ, transport to `segment`, hold,
/// return, pi, analysis pi/2 at `analysis_phase`, shelve, readout.
Sequence build_echo_probe(int segment, double hold_us, double analysis_phase, int liz = 20);

}  // namespace ionswap

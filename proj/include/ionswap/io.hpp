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


// JSON adapters for the library's value types and the CSV shot tables.
// Readers reject unknown keys so misspelled config entries fail loudly.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionswap/crystal.hpp"
#include "ionswap/optimize.hpp"
#include "ionswap/qubit.hpp"
#include "ionswap/sequence.hpp"
#include "ionswap/thermometry.hpp"
#include "ionswap/tomography.hpp"
#include "ionswap/trap_model.hpp"
#include "ionswap/waveform.hpp"

namespace ionswap {

using Json = nlohmann::json;

/// Polynomial field model as written in configs (see FieldMap).
struct FieldSpec {
  double x_liz = 0;
  double gradient = 5e-11;   // T/um
  double curvature = 1e-14;  // T/um^2

  FieldMap map() const { return FieldMap(x_liz, gradient, curvature); }
};

void to_json(Json& j, const TrapGeometry& v);
void from_json(const Json& j, TrapGeometry& v);
void to_json(Json& j, const CalibrationTargets& v);
void from_json(const Json& j, CalibrationTargets& v);
void to_json(Json& j, const FilterModel& v);
void from_json(const Json& j, FilterModel& v);
void to_json(Json& j, const SwapRampParams& v);
void from_json(const Json& j, SwapRampParams& v);
void to_json(Json& j, const TransportParams& v);
void from_json(const Json& j, TransportParams& v);
void to_json(Json& j, const SeparationParams& v);
void from_json(const Json& j, SeparationParams& v);
void to_json(Json& j, const IntegrationOptions& v);
void from_json(const Json& j, IntegrationOptions& v);
void to_json(Json& j, const ReadoutError& v);
void from_json(const Json& j, ReadoutError& v);
void to_json(Json& j, const ReadoutModel& v);
void from_json(const Json& j, ReadoutModel& v);
void to_json(Json& j, const LaserTiming& v);
void from_json(const Json& j, LaserTiming& v);
void to_json(Json& j, const SequenceNoise& v);
void from_json(const Json& j, SequenceNoise& v);
void to_json(Json& j, const FieldSpec& v);
void from_json(const Json& j, FieldSpec& v);
void to_json(Json& j, const FitOptions& v);
void from_json(const Json& j, FitOptions& v);

void to_json(Json& j, const Primitive& v);
void from_json(const Json& j, Primitive& v);
void to_json(Json& j, const Well& v);
void from_json(const Json& j, Well& v);
/// {"name", "initial": [wells], "steps": [primitives]}. Primitives carry only
/// the keys their kind uses; "site" names the segment of separate/merge/swap.
void to_json(Json& j, const Sequence& v);
void from_json(const Json& j, Sequence& v);

// Output-only.
void to_json(Json& j, const ExcitationReport& v);
void to_json(Json& j, const ModeSet& v);
void to_json(Json& j, const SequenceReport& v);
void to_json(Json& j, const FitResult& v);
void to_json(Json& j, const IterationLog& v);
void to_json(Json& j, const OptimizeResult& v);
void to_json(Json& j, const FieldEstimate& v);
void to_json(Json& j, const TruthTable& v);

/// {"abs": [[...]], "phase": [[...]], "labels": [...]} for a Pauli-basis
/// process matrix.
Json chi_to_json(const CMatrix& chi);

/// Parses JSON text, turning parse and type errors into ConfigError.
Json parse_json(std::istream& in, const std::string& what);
Json read_json_file(const std::string& path);
/// Pretty JSON with a trailing newline.
void write_json_file(const std::string& path, const Json& j);

/// 64-bit FNV-1a over the compact dump (keys are sorted, so equal trees hash
/// equally).
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

// ---------------------------------------------------------------------------
// Shot tables

/// One aggregated row of a shot table: `count` shots of `outcome` (a
/// bitstring, first character = most significant) in setting `setting`.
struct ShotRow {
  std::size_t setting = 0;
  std::string outcome;
  std::uint64_t count = 0;
};

/// Columns setting,outcome,count. Outcome strings of one file share a length.
void write_shot_csv(std::ostream& out, const std::vector<ShotRow>& rows);
std::vector<ShotRow> read_shot_csv(std::istream& in);

/// Histogram (by joint index) -> rows, zero counts skipped.
std::vector<ShotRow> shot_rows(std::size_t setting, const std::vector<std::uint64_t>& histogram,
                               std::size_t bits);
/// Rows -> per-setting histograms; every setting in [0, settings) must be
/// present.
std::vector<std::vector<std::uint64_t>> histograms(const std::vector<ShotRow>& rows,
                                                   std::size_t settings, std::size_t bits);

}  // namespace ionswap

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


#include "ionswap/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ionswap/errors.hpp"

namespace ionswap {

namespace {

// Reads known keys of one object and rejects the rest.
class Fields {
 public:
  Fields(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw ConfigError(what_ + " must be a JSON object");
  }

  template <class T>
  Fields& get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return *this;
    try {
      out = it->template get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(what_ + "." + key + ": " + e.what());
    }
    return *this;
  }
  bool has(const char* key) const { return j_.contains(key); }

  void done() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + what_);
  }

 private:
  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace

void to_json(Json& j, const TrapGeometry& v) {
  j = {{"first_segment", v.first_segment}, {"last_segment", v.last_segment},
       {"liz_segment", v.liz_segment},     {"spacing", v.spacing},
       {"axial_width", v.axial_width},     {"coupling", v.coupling},
       {"kappa_y", v.kappa_y},             {"kappa_z", v.kappa_z},
       {"diagonal_coupling", v.diagonal_coupling}, {"ion_mass", v.ion_mass}};
}

void from_json(const Json& j, TrapGeometry& v) {
  Fields f(j, "trap");
  f.get("first_segment", v.first_segment).get("last_segment", v.last_segment);
  f.get("liz_segment", v.liz_segment).get("spacing", v.spacing).get("axial_width", v.axial_width);
  f.get("coupling", v.coupling).get("kappa_y", v.kappa_y).get("kappa_z", v.kappa_z);
  f.get("diagonal_coupling", v.diagonal_coupling).get("ion_mass", v.ion_mass);
  f.done();
  v.validate();
}

void to_json(Json& j, const CalibrationTargets& v) {
  j = {{"axial_mhz", v.axial_mhz}, {"radial_low_mhz", v.radial_low_mhz},
       {"radial_high_mhz", v.radial_high_mhz}, {"u_c", v.u_c}};
}

void from_json(const Json& j, CalibrationTargets& v) {
  Fields f(j, "calibration");
  f.get("axial_mhz", v.axial_mhz).get("radial_low_mhz", v.radial_low_mhz);
  f.get("radial_high_mhz", v.radial_high_mhz).get("u_c", v.u_c);
  f.done();
}

void to_json(Json& j, const FilterModel& v) {
  j = {{"cutoff_mhz", v.cutoff_mhz}, {"q", v.q}, {"settle_tolerance", v.settle_tolerance}};
}

void from_json(const Json& j, FilterModel& v) {
  Fields f(j, "filter");
  f.get("cutoff_mhz", v.cutoff_mhz).get("q", v.q).get("settle_tolerance", v.settle_tolerance);
  f.done();
  v.validate();
}

void to_json(Json& j, const SwapRampParams& v) {
  j = {{"site", v.site},           {"u_d_peak", v.u_d_peak},   {"u_c_start", v.u_c_start},
       {"u_c_deep", v.u_c_deep},   {"u_o_peak", v.u_o_peak},   {"breakpoints", v.breakpoints},
       {"duration", v.duration},   {"sample_rate", v.sample_rate}};
}

void from_json(const Json& j, SwapRampParams& v) {
  Fields f(j, "swap");
  f.get("site", v.site).get("u_d_peak", v.u_d_peak).get("u_c_start", v.u_c_start);
  f.get("u_c_deep", v.u_c_deep).get("u_o_peak", v.u_o_peak).get("breakpoints", v.breakpoints);
  f.get("duration", v.duration).get("sample_rate", v.sample_rate);
  f.done();
  v.validate();
}

void to_json(Json& j, const TransportParams& v) {
  j = {{"per_pair_duration", v.per_pair_duration}, {"u_c", v.u_c}, {"sample_rate", v.sample_rate}};
}

void from_json(const Json& j, TransportParams& v) {
  Fields f(j, "transport");
  f.get("per_pair_duration", v.per_pair_duration).get("u_c", v.u_c).get("sample_rate", v.sample_rate);
  f.done();
}

void to_json(Json& j, const SeparationParams& v) {
  j = {{"duration", v.duration}, {"u_c", v.u_c}, {"bias", v.bias}, {"sample_rate", v.sample_rate}};
}

void from_json(const Json& j, SeparationParams& v) {
  Fields f(j, "separation");
  f.get("duration", v.duration).get("u_c", v.u_c).get("bias", v.bias).get("sample_rate", v.sample_rate);
  f.done();
}

void to_json(Json& j, const IntegrationOptions& v) {
  j = {{"dt", v.dt}, {"stride", v.stride}, {"radial_limit", v.radial_limit}};
}

void from_json(const Json& j, IntegrationOptions& v) {
  Fields f(j, "integration");
  f.get("dt", v.dt).get("stride", v.stride).get("radial_limit", v.radial_limit);
  f.done();
  if (!(v.dt > 0)) throw ConfigError("integration.dt must be positive");
}

void to_json(Json& j, const ReadoutError& v) { j = {{"up", v.up}, {"down", v.down}}; }

void from_json(const Json& j, ReadoutError& v) {
  if (j.is_number()) {  // symmetric shorthand
    v.up = v.down = j.get<double>();
    return;
  }
  Fields f(j, "readout error");
  f.get("up", v.up).get("down", v.down);
  f.done();
}

void to_json(Json& j, const ReadoutModel& v) {
  j = {{"uniform", v.uniform}, {"per_ion", v.per_ion}};
}

void from_json(const Json& j, ReadoutModel& v) {
  Fields f(j, "readout");
  f.get("uniform", v.uniform).get("per_ion", v.per_ion);
  f.done();
  v.validate();
}

void to_json(Json& j, const LaserTiming& v) {
  j = {{"pump", v.pump}, {"rotate", v.rotate}, {"shelve", v.shelve}, {"readout", v.readout}};
}

void from_json(const Json& j, LaserTiming& v) {
  Fields f(j, "laser");
  f.get("pump", v.pump).get("rotate", v.rotate).get("shelve", v.shelve).get("readout", v.readout);
  f.done();
  for (double d : {v.pump, v.rotate, v.shelve, v.readout})
    if (!(d >= 0)) throw ConfigError("laser durations must be >= 0");
}

void to_json(Json& j, const SequenceNoise& v) { j = {{"swap_depolarizing", v.swap_depolarizing}}; }

void from_json(const Json& j, SequenceNoise& v) {
  Fields f(j, "noise");
  f.get("swap_depolarizing", v.swap_depolarizing);
  f.done();
  if (!(v.swap_depolarizing >= 0 && v.swap_depolarizing <= 1))
    throw ConfigError("noise.swap_depolarizing must lie in [0, 1]");
}

void to_json(Json& j, const FieldSpec& v) {
  j = {{"x_liz", v.x_liz}, {"gradient", v.gradient}, {"curvature", v.curvature}};
}

void from_json(const Json& j, FieldSpec& v) {
  Fields f(j, "field");
  f.get("x_liz", v.x_liz).get("gradient", v.gradient).get("curvature", v.curvature);
  f.done();
}

void to_json(Json& j, const FitOptions& v) {
  j = {{"model", to_string(v.model)}, {"ions", v.ions},         {"eta", v.eta},
       {"omega0", v.omega0},          {"fit_decay", v.fit_decay}, {"nbar_max", v.nbar_max},
       {"bootstrap", v.bootstrap},    {"confidence", v.confidence}, {"seed", v.seed}};
}

void from_json(const Json& j, FitOptions& v) {
  Fields f(j, "fit");
  std::string model = to_string(v.model);
  f.get("model", model).get("ions", v.ions).get("eta", v.eta).get("omega0", v.omega0);
  f.get("fit_decay", v.fit_decay).get("nbar_max", v.nbar_max).get("bootstrap", v.bootstrap);
  f.get("confidence", v.confidence).get("seed", v.seed);
  f.done();
  v.model = parse_motional_state(model);
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const Primitive& v) {
  j = Json::object();
  j["kind"] = to_string(v.kind);
  switch (v.kind) {
    case PrimitiveKind::transport:
      j["from"] = v.from;
      j["to"] = v.to;
      break;
    case PrimitiveKind::separate:
      j["site"] = v.from;
      if (v.split >= 0) j["split"] = v.split;
      if (v.bias != 0) j["bias"] = v.bias;
      break;
    case PrimitiveKind::merge:
    case PrimitiveKind::swap:
      j["site"] = v.from;
      break;
    case PrimitiveKind::rotate:
      j["theta"] = v.theta;
      j["phi"] = v.phi;
      if (!v.track_phase) j["track_phase"] = false;
      break;
    default:
      break;
  }
  if (!v.ions.empty()) j["ions"] = v.ions;
  if (v.duration >= 0) j["duration"] = v.duration;
  if (v.phase != SequencePhase::process) j["phase"] = to_string(v.phase);
  if (!v.note.empty()) j["note"] = v.note;
}

void from_json(const Json& j, Primitive& v) {
  Fields f(j, "primitive");
  std::string kind, phase = "process";
  f.get("kind", kind);
  if (kind.empty()) throw ConfigError("primitive without a kind");
  v = Primitive{};
  v.kind = parse_primitive_kind(kind);
  f.get("from", v.from).get("to", v.to).get("site", v.from).get("split", v.split).get("bias", v.bias);
  f.get("theta", v.theta).get("phi", v.phi).get("track_phase", v.track_phase);
  f.get("ions", v.ions).get("duration", v.duration).get("phase", phase).get("note", v.note);
  f.done();
  v.phase = parse_sequence_phase(phase);
}

void to_json(Json& j, const Well& v) { j = {{"segment", v.segment}, {"ions", v.ions}}; }

void from_json(const Json& j, Well& v) {
  Fields f(j, "well");
  f.get("segment", v.segment).get("ions", v.ions);
  f.done();
}

void to_json(Json& j, const Sequence& v) {
  j = {{"name", v.name}, {"initial", v.initial}, {"steps", v.steps}};
}

void from_json(const Json& j, Sequence& v) {
  Fields f(j, "sequence");
  f.get("name", v.name).get("initial", v.initial).get("steps", v.steps);
  f.done();
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const ExcitationReport& v) {
  j = Json::array();
  for (const auto& m : v.modes)
    j.push_back({{"label", m.label},
                 {"mhz", m.mhz},
                 {"nbar", m.nbar},
                 {"alpha", {m.alpha.real(), m.alpha.imag()}}});
}

void to_json(Json& j, const ModeSet& v) {
  j = Json::object();
  Json eq = Json::array();
  for (const auto& r : v.equilibrium) eq.push_back({r.x(), r.y(), r.z()});
  j["equilibrium_um"] = eq;
  Json modes = Json::array();
  for (const auto& m : v.modes) modes.push_back({{"label", m.label}, {"mhz", m.mhz}});
  j["modes"] = modes;
}

void to_json(Json& j, const SequenceReport& v) {
  auto counts = [](const std::map<PrimitiveKind, int>& c) {
    Json out = Json::object();
    for (auto k : kAllPrimitiveKinds) {
      const auto it = c.find(k);
      out[to_string(k)] = it == c.end() ? 0 : it->second;
    }
    return out;
  };
  Json timeline = Json::array();
  for (const auto& e : v.timeline)
    timeline.push_back({{"step", e.step}, {"kind", to_string(e.kind)}, {"phase", to_string(e.phase)},
                        {"t0_us", e.t0}, {"t1_us", e.t1}, {"description", e.description}});
  Json excitations = Json::array();
  for (const auto& [step, ex] : v.excitations) excitations.push_back({{"step", step}, {"modes", ex}});
  j = {{"counts", counts(v.counts)},
       {"all_counts", counts(v.all_counts)},
       {"transport_hops", v.transport_hops},
       {"duration_us", v.duration_us},
       {"shuttling_us", v.shuttling_us},
       {"shuttling_fraction", v.shuttling_fraction()},
       {"total_duration_us", v.total_duration_us},
       {"timeline", timeline},
       {"accumulated_phase", v.accumulated_phase},
       {"excitations", excitations},
       {"final_wells", v.final_wells},
       {"final_order", v.final_order()},
       {"completed", v.completed},
       {"abort_reason", v.abort_reason}};
}

void to_json(Json& j, const FitResult& v) {
  j = {{"model", to_string(v.model)}, {"nbar", v.nbar},         {"alpha", v.alpha},
       {"omega0", v.omega0},          {"eta", v.eta},           {"eta_fitted", v.eta_fitted},
       {"decay", v.decay},            {"chi2", v.chi2},         {"dof", v.dof},
       {"ci", {v.ci_low, v.ci_high}}, {"nbar_std", v.nbar_std}, {"evaluations", v.evaluations}};
}

void to_json(Json& j, const IterationLog& v) {
  j = {{"iteration", v.iteration}, {"evaluations", v.evaluations}, {"restart", v.restart},
       {"best_value", v.best_value}, {"best_x", v.best_x}, {"step", v.step}};
}

void to_json(Json& j, const OptimizeResult& v) {
  j = {{"x", v.x}, {"value", v.value}, {"initial_value", v.initial_value},
       {"evaluations", v.evaluations}, {"iterations", v.iterations}, {"converged", v.converged}};
}

void to_json(Json& j, const FieldEstimate& v) {
  Json samples = Json::array();
  for (const auto& s : v.samples) samples.push_back({{"hold_us", s.hold}, {"phase", s.phase}, {"sigma", s.sigma}});
  j = {{"x_um", v.x},     {"delta_b", v.delta_b},       {"sigma", v.sigma},
       {"phi0", v.phi0}, {"phi0_sigma", v.phi0_sigma}, {"samples", samples}};
}

void to_json(Json& j, const TruthTable& v) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < v.table.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < v.table.cols(); ++c) row.push_back(v.table(r, c));
    rows.push_back(row);
  }
  j = {{"table", rows}, {"expected", v.expected}, {"mean_fidelity", v.mean_fidelity}};
}

Json chi_to_json(const CMatrix& chi) {
  Json abs = Json::array(), phase = Json::array(), labels = Json::array();
  for (Eigen::Index r = 0; r < chi.rows(); ++r) {
    Json ra = Json::array(), rp = Json::array();
    for (Eigen::Index c = 0; c < chi.cols(); ++c) {
      ra.push_back(std::abs(chi(r, c)));
      rp.push_back(std::arg(chi(r, c)));
    }
    abs.push_back(ra);
    phase.push_back(rp);
  }
  if (chi.rows() == 16)
    for (int m = 0; m < 16; ++m) labels.push_back(pauli_label(m));
  return {{"abs", abs}, {"phase", phase}, {"labels", labels}};
}

// ---------------------------------------------------------------------------

Json parse_json(std::istream& in, const std::string& what) {
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_json(in, path);
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

// ---------------------------------------------------------------------------

void write_shot_csv(std::ostream& out, const std::vector<ShotRow>& rows) {
  out << "setting,outcome,count\n";
  for (const auto& r : rows) out << r.setting << ',' << r.outcome << ',' << r.count << '\n';
}

std::vector<ShotRow> read_shot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty shot table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "setting,outcome,count") throw ConfigError("shot table header must be setting,outcome,count");
  std::vector<ShotRow> rows;
  std::size_t width = 0;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string a, b, c;
    if (!std::getline(s, a, ',') || !std::getline(s, b, ',') || !std::getline(s, c))
      throw ConfigError("shot table line " + std::to_string(lineno) + ": expected three fields");
    ShotRow r;
    try {
      std::size_t used = 0;
      r.setting = std::stoull(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      r.count = std::stoull(c, &used);
      if (used != c.size()) throw std::invalid_argument(c);
    } catch (const std::exception&) {
      throw ConfigError("shot table line " + std::to_string(lineno) + ": bad number");
    }
    if (b.empty() || b.find_first_not_of("01") != std::string::npos)
      throw ConfigError("shot table line " + std::to_string(lineno) + ": outcome must be a bitstring");
    if (width == 0) width = b.size();
    if (b.size() != width) throw ConfigError("shot table line " + std::to_string(lineno) + ": outcome width changes");
    r.outcome = b;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ShotRow> shot_rows(std::size_t setting, const std::vector<std::uint64_t>& histogram,
                               std::size_t bits) {
  if (histogram.size() != (std::size_t{1} << bits)) throw ConfigError("histogram size does not match bit count");
  std::vector<ShotRow> rows;
  for (std::size_t o = 0; o < histogram.size(); ++o) {
    if (histogram[o] == 0) continue;
    std::string s(bits, '0');
    for (std::size_t k = 0; k < bits; ++k)
      if (o >> (bits - 1 - k) & 1) s[k] = '1';
    rows.push_back({setting, s, histogram[o]});
  }
  return rows;
}

std::vector<std::vector<std::uint64_t>> histograms(const std::vector<ShotRow>& rows,
                                                   std::size_t settings, std::size_t bits) {
  std::vector<std::vector<std::uint64_t>> out(settings, std::vector<std::uint64_t>(std::size_t{1} << bits, 0));
  std::vector<bool> seen(settings, false);
  for (const auto& r : rows) {
    if (r.setting >= settings) throw ConfigError("shot table names setting " + std::to_string(r.setting) + " out of range");
    if (r.outcome.size() != bits) throw ConfigError("shot table outcome has the wrong width");
    std::size_t o = 0;
    for (char c : r.outcome) o = (o << 1) | std::size_t(c == '1');
    out[r.setting][o] += r.count;
    seen[r.setting] = true;
  }
  for (std::size_t s = 0; s < settings; ++s)
    if (!seen[s]) throw ConfigError("shot table is missing setting " + std::to_string(s));
  return out;
}

}  // namespace ionswap

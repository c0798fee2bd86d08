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

#include "ionswap/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "ionswap/errors.hpp"

namespace ionswap {

std::string to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::transport: return "transport";
    case PrimitiveKind::separate: return "separate";
    case PrimitiveKind::merge: return "merge";
    case PrimitiveKind::swap: return "swap";
    case PrimitiveKind::init_pump: return "init_pump";
    case PrimitiveKind::rotate: return "rotate";
    case PrimitiveKind::shelve: return "shelve";
    case PrimitiveKind::readout: return "readout";
    case PrimitiveKind::hold: return "hold";
  }
  return "hold";
}

PrimitiveKind parse_primitive_kind(const std::string& s) {
  for (auto k : kAllPrimitiveKinds)
    if (to_string(k) == s) return k;
  throw ConfigError("unknown primitive kind '" + s + "'");
}

bool is_shuttling(PrimitiveKind k) {
  return k == PrimitiveKind::transport || k == PrimitiveKind::separate ||
         k == PrimitiveKind::merge || k == PrimitiveKind::swap;
}

bool is_laser(PrimitiveKind k) {
  return k == PrimitiveKind::init_pump || k == PrimitiveKind::rotate ||
         k == PrimitiveKind::shelve || k == PrimitiveKind::readout;
}

std::string to_string(SequencePhase p) { return p == SequencePhase::loading ? "loading" : "process"; }

SequencePhase parse_sequence_phase(const std::string& s) {
  if (s == "loading") return SequencePhase::loading;
  if (s == "process") return SequencePhase::process;
  throw ConfigError("unknown sequence phase '" + s + "'");
}

std::string to_string(RunMode m) { return m == RunMode::logical ? "logical" : "dynamical"; }

RunMode parse_run_mode(const std::string& s) {
  if (s == "logical") return RunMode::logical;
  if (s == "dynamical") return RunMode::dynamical;
  throw ConfigError("unknown run mode '" + s + "'");
}

Primitive Primitive::transport(int from, int to, std::string note) {
  Primitive p;
  p.kind = PrimitiveKind::transport;
  p.from = from;
  p.to = to;
  p.note = std::move(note);
  return p;
}

Primitive Primitive::separate(int site, int split, double bias) {
  Primitive p;
  p.kind = PrimitiveKind::separate;
  p.from = p.to = site;
  p.split = split;
  p.bias = bias;
  return p;
}

Primitive Primitive::merge(int site) {
  Primitive p;
  p.kind = PrimitiveKind::merge;
  p.from = p.to = site;
  return p;
}

Primitive Primitive::swap(int site) {
  Primitive p;
  p.kind = PrimitiveKind::swap;
  p.from = p.to = site;
  return p;
}

Primitive Primitive::pump(std::vector<std::string> ions) {
  Primitive p;
  p.kind = PrimitiveKind::init_pump;
  p.ions = std::move(ions);
  return p;
}

Primitive Primitive::rotate(std::string ion, double theta, double phi, bool track) {
  Primitive p;
  p.kind = PrimitiveKind::rotate;
  p.ions = {std::move(ion)};
  p.theta = theta;
  p.phi = phi;
  p.track_phase = track;
  return p;
}

Primitive Primitive::shelve(std::vector<std::string> ions) {
  Primitive p;
  p.kind = PrimitiveKind::shelve;
  p.ions = std::move(ions);
  return p;
}

Primitive Primitive::readout(std::vector<std::string> ions) {
  Primitive p;
  p.kind = PrimitiveKind::readout;
  p.ions = std::move(ions);
  return p;
}

Primitive Primitive::hold(double us) {
  Primitive p;
  p.kind = PrimitiveKind::hold;
  p.duration = us;
  return p;
}

std::vector<std::string> Sequence::ions() const {
  auto wells = initial;
  std::sort(wells.begin(), wells.end(), [](const Well& a, const Well& b) { return a.segment < b.segment; });
  std::vector<std::string> out;
  for (const auto& w : wells) out.insert(out.end(), w.ions.begin(), w.ions.end());
  return out;
}

Sequence& Sequence::add(Primitive p) {
  steps.push_back(std::move(p));
  return *this;
}

Sequence& Sequence::add(Primitive p, SequencePhase phase) {
  p.phase = phase;
  steps.push_back(std::move(p));
  return *this;
}

// ---------------------------------------------------------------------------

namespace {

class Ledger {
 public:
  explicit Ledger(std::vector<Well> wells) : wells_(std::move(wells)) {}

  const std::vector<Well>& wells() const { return wells_; }

  const Well* at(int segment) const {
    for (const auto& w : wells_)
      if (w.segment == segment) return &w;
    return nullptr;
  }

  const Well* containing(const std::string& ion) const {
    for (const auto& w : wells_)
      if (std::find(w.ions.begin(), w.ions.end(), ion) != w.ions.end()) return &w;
    return nullptr;
  }

  std::vector<Well> sorted() const {
    auto out = wells_;
    std::sort(out.begin(), out.end(), [](const Well& a, const Well& b) { return a.segment < b.segment; });
    return out;
  }

  static std::string check_initial(const std::vector<Well>& wells, const TrapGeometry& g) {
    std::set<int> segs;
    std::set<std::string> ions;
    std::size_t count = 0;
    for (const auto& w : wells) {
      if (!g.has_segment(w.segment)) return "initial well at segment " + std::to_string(w.segment) + " is outside the trap";
      if (!segs.insert(w.segment).second) return "two initial wells share segment " + std::to_string(w.segment);
      if (w.ions.empty()) return "empty initial well";
      for (const auto& ion : w.ions) {
        if (!ions.insert(ion).second) return "ion '" + ion + "' appears twice";
        ++count;
      }
    }
    if (count == 0 || count > 3) return "sequences need 1 to 3 ions";
    return {};
  }

  // Returns an empty string on success; the ledger is unchanged on failure.
  std::string apply(const Primitive& p, const TrapGeometry& g, int isolation, int min_gap = 1) {
    switch (p.kind) {
      case PrimitiveKind::transport: return transport(p, g, min_gap);
      case PrimitiveKind::separate: return separate(p, g, isolation);
      case PrimitiveKind::merge: return merge(p, g, isolation);
      case PrimitiveKind::swap: return swap(p, isolation);
      case PrimitiveKind::hold:
        if (!(p.duration >= 0)) return "hold needs a non-negative duration";
        return {};
      default: return laser(p, g);
    }
  }

 private:
  Well* find(int segment) {
    for (auto& w : wells_)
      if (w.segment == segment) return &w;
    return nullptr;
  }

  std::string isolated(int site, int isolation, const std::set<int>& exempt) const {
    for (const auto& w : wells_) {
      if (exempt.count(w.segment)) continue;
      if (std::abs(w.segment - site) < isolation)
        return "ion '" + w.ions.front() + "' at segment " + std::to_string(w.segment) + " is within " +
               std::to_string(isolation) + " segments of site " + std::to_string(site);
    }
    return {};
  }

  std::string transport(const Primitive& p, const TrapGeometry& g, int min_gap) {
    Well* w = find(p.from);
    if (!w) return "no ions at segment " + std::to_string(p.from);
    if (!g.has_segment(p.to)) return "destination segment " + std::to_string(p.to) + " is outside the trap";
    if (p.to == p.from) return "transport from a segment to itself";
    if (!p.ions.empty()) {
      std::set<std::string> a(p.ions.begin(), p.ions.end()), b(w->ions.begin(), w->ions.end());
      if (a != b) return "transport operands do not match the ions at segment " + std::to_string(p.from);
    }
    const int dir = p.to > p.from ? 1 : -1;
    for (int s = p.from + dir; s != p.to + dir; s += dir) {
      if (at(s)) return "transport " + std::to_string(p.from) + "->" + std::to_string(p.to) +
                        " runs into ions at segment " + std::to_string(s);
      for (const auto& o : wells_)
        if (&o != w && std::abs(o.segment - s) < min_gap)
          return "transport " + std::to_string(p.from) + "->" + std::to_string(p.to) +
                 " passes next to ions at segment " + std::to_string(o.segment);
    }
    w->segment = p.to;
    return {};
  }

  std::string separate(const Primitive& p, const TrapGeometry& g, int isolation) {
    Well* w = find(p.from);
    if (!w) return "no ions to separate at segment " + std::to_string(p.from);
    const int n = int(w->ions.size());
    if (n < 2) return "separation needs at least two co-trapped ions";
    const int left = p.split < 0 ? n / 2 : p.split;
    if (left < 1 || left >= n) return "separation split must leave ions on both sides";
    if (!g.has_segment(p.from - 1) || !g.has_segment(p.from + 1)) return "separation site too close to the trap end";
    if (at(p.from - 1) || at(p.from + 1)) return "separation target wells are occupied";
    if (auto e = isolated(p.from, isolation, {p.from}); !e.empty()) return e;
    Well l{p.from - 1, {w->ions.begin(), w->ions.begin() + left}};
    Well r{p.from + 1, {w->ions.begin() + left, w->ions.end()}};
    *w = std::move(l);
    wells_.push_back(std::move(r));
    return {};
  }

  std::string merge(const Primitive& p, const TrapGeometry& g, int isolation) {
    if (!g.has_segment(p.from)) return "merge site outside the trap";
    if (at(p.from)) return "merge site " + std::to_string(p.from) + " is occupied";
    Well* l = find(p.from - 1);
    Well* r = find(p.from + 1);
    if (!l || !r) return "merge needs ions on both neighbours of site " + std::to_string(p.from);
    if (l->ions.size() + r->ions.size() > 3) return "merged crystal would exceed three ions";
    if (auto e = isolated(p.from, isolation, {p.from - 1, p.from + 1}); !e.empty()) return e;
    Well m{p.from, l->ions};
    m.ions.insert(m.ions.end(), r->ions.begin(), r->ions.end());
    const int rs = r->segment;
    *l = std::move(m);
    wells_.erase(std::find_if(wells_.begin(), wells_.end(), [&](const Well& x) { return x.segment == rs; }));
    return {};
  }

  std::string swap(const Primitive& p, int isolation) {
    Well* w = find(p.from);
    if (!w) return "no crystal to swap at segment " + std::to_string(p.from);
    if (w->ions.size() != 2) return "swap needs exactly two co-trapped ions";
    if (auto e = isolated(p.from, isolation, {p.from}); !e.empty()) return e;
    std::reverse(w->ions.begin(), w->ions.end());
    return {};
  }

  std::string laser(const Primitive& p, const TrapGeometry& g) {
    if (p.ions.empty()) return to_string(p.kind) + " has no target ions";
    for (const auto& ion : p.ions) {
      const Well* w = containing(ion);
      if (!w) return "unknown ion '" + ion + "'";
      if (w->segment != g.liz_segment)
        return to_string(p.kind) + " on ion '" + ion + "' at segment " + std::to_string(w->segment) +
               ", outside the laser interaction zone";
    }
    if (p.kind == PrimitiveKind::rotate && p.ions.size() != 1) return "rotations address one ion";
    return {};
  }

  std::vector<Well> wells_;
};

}  // namespace

std::vector<Violation> validate(const Sequence& seq, const TrapGeometry& geometry, int isolation_segments,
                                int min_gap) {
  std::vector<Violation> out;
  if (auto e = Ledger::check_initial(seq.initial, geometry); !e.empty()) {
    out.push_back({0, e});
    return out;
  }
  Ledger ledger(seq.initial);
  for (std::size_t i = 0; i < seq.steps.size(); ++i)
    if (auto e = ledger.apply(seq.steps[i], geometry, isolation_segments, min_gap); !e.empty()) out.push_back({i, e});
  return out;
}

// ---------------------------------------------------------------------------

double World::duration(const Primitive& p) const {
  if (p.duration >= 0) return p.duration;
  const auto rounded = [](double d, double rate) { return double(sample_count(d, rate)) / rate; };
  switch (p.kind) {
    case PrimitiveKind::transport:
      return std::abs(p.to - p.from) * rounded(transport.per_pair_duration, transport.sample_rate);
    case PrimitiveKind::separate:
    case PrimitiveKind::merge: return rounded(separation.duration, separation.sample_rate);
    case PrimitiveKind::swap: return rounded(swap.duration, swap.sample_rate);
    case PrimitiveKind::init_pump: return laser.pump;
    case PrimitiveKind::rotate: return laser.rotate;
    case PrimitiveKind::shelve: return laser.shelve;
    case PrimitiveKind::readout: return laser.readout;
    case PrimitiveKind::hold: return 0;
  }
  return 0;
}

int SequenceReport::count(PrimitiveKind k) const {
  auto it = counts.find(k);
  return it == counts.end() ? 0 : it->second;
}

std::vector<std::string> SequenceReport::final_order() const {
  auto wells = final_wells;
  std::sort(wells.begin(), wells.end(), [](const Well& a, const Well& b) { return a.segment < b.segment; });
  std::vector<std::string> out;
  for (const auto& w : wells) out.insert(out.end(), w.ions.begin(), w.ions.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct IonMotion {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

class Runner {
 public:
  Runner(const Sequence& seq, const World& world, RunMode mode)
      : seq_(seq), world_(world), mode_(mode), ledger_(seq.initial), result_{{}, QubitRegister(seq.ions()), {}} {
    for (const auto& ion : seq.ions()) {
      phase_[ion] = 0;
      phase_time_[ion] = 0;
      result_.report.histories[ion];
    }
  }

  RunResult run() {
    auto& rep = result_.report;
    try {
      if (mode_ == RunMode::dynamical) init_dynamics();
      else
        for (const auto& w : ledger_.wells()) place_kinematic(w);
    } catch (const PhysicsError& e) {
      rep.completed = false;
      rep.abort_reason = std::string("initial crystal: ") + e.what();
      rep.final_wells = ledger_.sorted();
      return std::move(result_);
    }

    double t = 0;
    for (std::size_t i = 0; i < seq_.steps.size(); ++i) {
      const Primitive& p = seq_.steps[i];
      const double d = world_.duration(p);
      const auto before = ledger_.wells();
      Ledger next = ledger_;
      next.apply(p, world_.trap(), 0);  // validated up front
      try {
        if (is_shuttling(p.kind)) move(i, p, before, next, t, d);
        else hold_all(t, t + d);
      } catch (const PhysicsError& e) {
        rep.completed = false;
        rep.abort_reason = "step " + std::to_string(i) + " (" + to_string(p.kind) + "): " + e.what();
        break;
      }
      ledger_ = std::move(next);
      apply_qubits(p, t, t + d);
      account(i, p, t, d);
      t += d;
    }
    for (const auto& ion : seq_.ions()) {
      advance_phase(ion, rep.histories[ion].empty() ? 0.0 : std::min(t, rep.histories[ion].end()));
      rep.accumulated_phase[ion] = phase_[ion];
    }
    rep.total_duration_us = t;
    rep.final_wells = ledger_.sorted();
    return std::move(result_);
  }

 private:
  // --- positions -----------------------------------------------------------

  std::vector<double> kinematic_offsets(std::size_t n) const {
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back((double(i) - 0.5 * double(n - 1)) * world_.crystal_spacing);
    return x;
  }

  void place_kinematic(const Well& w) {
    const auto off = kinematic_offsets(w.ions.size());
    for (std::size_t i = 0; i < w.ions.size(); ++i)
      motion_[w.ions[i]].position = Vec3(world_.trap().center(w.segment) + off[i], 0, 0);
  }

  void linear_piece(const std::string& ion, double t0, double t1, double x1) {
    auto& h = result_.report.histories[ion];
    const double x0 = motion_[ion].position.x();
    if (t1 > t0) h.add(t0, t1, x0, x1);
    motion_[ion].position = Vec3(x1, 0, 0);
  }

  void hold_all(double t0, double t1, const std::set<std::string>& skip = {}) {
    if (!(t1 > t0)) return;
    for (const auto& ion : seq_.ions()) {
      if (skip.count(ion)) continue;
      result_.report.histories[ion].hold(t0, t1, motion_[ion].position.x());
    }
  }

  // Target x for each ion after a shuttling step, from the new ledger.
  std::map<std::string, double> kinematic_targets(const Ledger& next, const std::vector<std::string>& ions) const {
    std::map<std::string, double> out;
    for (const auto& ion : ions) {
      const Well* w = next.containing(ion);
      const auto off = kinematic_offsets(w->ions.size());
      const auto k = std::size_t(std::find(w->ions.begin(), w->ions.end(), ion) - w->ions.begin());
      out[ion] = world_.trap().center(w->segment) + off[k];
    }
    return out;
  }

  static std::vector<std::string> moving_ions(const Primitive& p, const std::vector<Well>& before) {
    std::vector<std::string> out;
    for (const auto& w : before) {
      const bool involved = p.kind == PrimitiveKind::merge ? std::abs(w.segment - p.from) == 1 : w.segment == p.from;
      if (involved) out.insert(out.end(), w.ions.begin(), w.ions.end());
    }
    return out;
  }

  void move(std::size_t step, const Primitive& p, const std::vector<Well>& before, const Ledger& next,
            double t0, double d) {
    auto ions = moving_ions(p, before);
    // Order along x so crystal state indices follow the ledger.
    std::sort(ions.begin(), ions.end(), [&](const std::string& a, const std::string& b) {
      return motion_[a].position.x() < motion_[b].position.x();
    });
    const std::set<std::string> moving(ions.begin(), ions.end());
    if (mode_ == RunMode::logical) {
      hold_all(t0, t0 + d, moving);
      const auto target = kinematic_targets(next, ions);
      for (const auto& ion : ions) linear_piece(ion, t0, t0 + d, target.at(ion));
      return;
    }
    simulate(step, p, ions, before, next, t0, d);
  }

  // --- dynamics ------------------------------------------------------------

  ElectrodeVoltages static_wells(const std::vector<Well>& wells, const std::set<int>& exclude) const {
    VoltageAssignment a;
    for (const auto& w : wells) {
      if (exclude.count(w.segment)) continue;
      for (const auto& [id, v] : single_well(w.segment, world_.transport.u_c)) a[id] = v;
    }
    return world_.model->dense(a);
  }

  void init_dynamics() {
    const TrapModel& m = *world_.model;
    const ElectrodeVoltages v = static_wells(ledger_.wells(), {});
    const ElectrodePotential field(m, v);
    for (const auto& w : ledger_.wells()) {
      auto eq = find_equilibrium(field, linear_guess(field, int(w.ions.size()), m.geometry().center(w.segment)));
      std::sort(eq.begin(), eq.end(), [](const Vec3& a, const Vec3& b) { return a.x() < b.x(); });
      for (std::size_t i = 0; i < w.ions.size(); ++i) motion_[w.ions[i]] = {eq[i], Vec3::Zero()};
    }
  }

  VoltageSchedule schedule_for(const Primitive& p) const {
    const TrapGeometry& g = world_.trap();
    auto shaped = [&](VoltageSchedule s) {
      return world_.precompensate_shuttling ? precompensate(s, world_.filter) : s;
    };
    switch (p.kind) {
      case PrimitiveKind::transport: return shaped(transport_schedule(g, p.from, p.to, world_.transport));
      case PrimitiveKind::separate: {
        SeparationParams s = world_.separation;
        s.bias = p.bias;
        return shaped(separation_schedule(g, p.from, s));
      }
      case PrimitiveKind::merge: return shaped(merge_schedule(g, p.from, world_.separation));
      default: {
        // The swap ramp is specified as seen through the filter.
        SwapRampParams s = world_.swap;
        s.site = p.from;
        return swap_schedule(s);
      }
    }
  }


  void simulate(std::size_t step, const Primitive& p, const std::vector<std::string>& ions,
                const std::vector<Well>& before, const Ledger& next, double t0, double d) {
    const TrapModel& m = *world_.model;
    std::set<int> involved;
    for (const auto& w : before)
      if (std::find(ions.begin(), ions.end(), w.ions.front()) != ions.end()) involved.insert(w.segment);
    const ElectrodeVoltages base = static_wells(before, involved);
    const auto schedule = schedule_for(p);
    const FilteredSchedule filtered(schedule, world_.filter);

    // Bystanders are integrated too: a neighbouring well's tail moves them.
    std::vector<std::string> all = ions;
    for (const auto& w : before)
      for (const auto& ion : w.ions)
        if (std::find(ions.begin(), ions.end(), ion) == ions.end()) all.push_back(ion);
    std::vector<Vec3> pos, vel;
    for (const auto& ion : all) {
      pos.push_back(motion_[ion].position);
      vel.push_back(motion_[ion].velocity);
    }
    CrystalState state(pos, vel, m.geometry().ion_mass);
    const auto traj = integrate(m, filtered_voltages(m, filtered, base), state, 0.0, filtered.end_time(),
                                world_.integration);

    // History up to the nominal duration; the settling tail overlaps the next step.
    for (std::size_t k = 0; k < all.size(); ++k) {
      auto& h = result_.report.histories[all[k]];
      double tp = 0, xp = pos[k].x();
      for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const double ts = std::min(traj.times[s], d);
        if (ts > tp) {
          double xs = traj.positions[s][k].x();
          if (traj.times[s] > d) {
            const double f = (d - tp) / (traj.times[s] - tp);
            xs = xp + f * (xs - xp);
          }
          h.add(t0 + tp, t0 + ts, xp, xs);
          tp = ts;
          xp = xs;
        }
        if (traj.times[s] >= d) break;
      }
      if (tp < d) h.hold(t0 + tp, t0 + d, xp);
    }

    const auto& fin = traj.final_state;
    for (std::size_t k = 0; k < all.size(); ++k)
      motion_[all[k]] = {fin.positions[k], fin.velocities.empty() ? Vec3::Zero() : fin.velocities[k]};

    // The ledger's post-step order must match where the ions actually went.
    const TrapGeometry& g = m.geometry();
    for (const auto& ion : ions) {
      const Well* w = next.containing(ion);
      if (g.nearest_segment(motion_[ion].position.x()) != w->segment)
        throw PhysicsError("ion '" + ion + "' did not reach segment " + std::to_string(w->segment));
    }
    if (p.kind == PrimitiveKind::swap) {
      const Well* w = next.containing(ions.front());
      if (motion_[w->ions[0]].position.x() > motion_[w->ions[1]].position.x())
        throw PhysicsError("ions did not exchange positions");
    }
    ElectrodeVoltages final_v = base;
    filtered.write(filtered.end_time(), g, final_v);
    const std::size_t n = ions.size();
    const CrystalState moved({fin.positions.begin(), fin.positions.begin() + long(n)},
                             fin.velocities.empty() ? std::vector<Vec3>{}
                                                    : std::vector<Vec3>(fin.velocities.begin(), fin.velocities.begin() + long(n)),
                             fin.mass);
    result_.report.excitations.emplace_back(step, mode_excitation(ElectrodePotential(m, final_v), moved));
  }

  // --- qubits --------------------------------------------------------------

  void advance_phase(const std::string& ion, double t) {
    const double from = phase_time_[ion];
    if (t > from) {
      const double dphi = accumulate_phase(result_.report.histories[ion], world_.field, from, t);
      phase_[ion] += dphi;
      result_.state.precess(ion, dphi);
      phase_time_[ion] = t;
    }
  }

  void apply_qubits(const Primitive& p, double t0, double t1) {
    auto& reg = result_.state;
    switch (p.kind) {
      case PrimitiveKind::init_pump:
        for (const auto& ion : p.ions) {
          advance_phase(ion, t1);
          reg.pump(ion);
        }
        break;
      case PrimitiveKind::rotate: {
        const auto& ion = p.ions.front();
        // The pulse acts at the start of its window; the rest is free precession.
        advance_phase(ion, t0);
        const double phi = p.track_phase ? corrected_phase(p.phi, phase_[ion]) : p.phi;
        reg.rotate(ion, p.theta, phi);
        advance_phase(ion, t1);
        break;
      }
      case PrimitiveKind::shelve:
        for (const auto& ion : p.ions) {
          advance_phase(ion, t1);
          reg.dephase(ion);
        }
        break;
      case PrimitiveKind::readout:
        for (const auto& ion : p.ions) result_.readout_order.push_back(ion);
        break;
      case PrimitiveKind::swap:
        if (world_.noise.swap_depolarizing > 0)
          for (const auto& ion : ledger_.at(p.from)->ions) reg.depolarize(ion, world_.noise.swap_depolarizing);
        break;
      default: break;
    }
  }

  void account(std::size_t step, const Primitive& p, double t0, double d) {
    auto& rep = result_.report;
    rep.all_counts[p.kind] += 1;
    if (p.phase == SequencePhase::process) {
      rep.counts[p.kind] += 1;
      rep.duration_us += d;
      if (is_shuttling(p.kind)) rep.shuttling_us += d;
      if (p.kind == PrimitiveKind::transport) rep.transport_hops += std::abs(p.to - p.from);
    }
    std::ostringstream desc;
    switch (p.kind) {
      case PrimitiveKind::transport: desc << p.from << "->" << p.to; break;
      case PrimitiveKind::separate:
      case PrimitiveKind::merge:
      case PrimitiveKind::swap: desc << "site " << p.from; break;
      case PrimitiveKind::rotate: desc << p.ions.front() << " theta=" << p.theta << " phi=" << p.phi; break;
      case PrimitiveKind::hold: desc << d << " us"; break;
      default:
        for (std::size_t k = 0; k < p.ions.size(); ++k) desc << (k ? "," : "") << p.ions[k];
    }
    if (!p.note.empty()) desc << " (" << p.note << ")";
    rep.timeline.push_back({step, p.kind, p.phase, t0, t0 + d, desc.str()});
  }

  const Sequence& seq_;
  const World& world_;
  RunMode mode_;
  Ledger ledger_;
  RunResult result_;
  std::map<std::string, IonMotion> motion_;
  std::map<std::string, double> phase_, phase_time_;
};

}  // namespace

RunResult run(const Sequence& seq, const World& world, RunMode mode) {
  const auto violations = validate(seq, world.trap(), 6, mode == RunMode::dynamical ? 2 : 1);
  if (!violations.empty()) {
    std::string msg = "sequence '" + seq.name + "' is invalid:";
    for (const auto& v : violations) msg += "\n  step " + std::to_string(v.step) + ": " + v.message;
    throw ConfigError(msg);
  }
  if (mode == RunMode::dynamical && !world.model) throw ConfigError("dynamical mode needs a trap model");
  return Runner(seq, world, mode).run();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> bit_map(const QubitRegister& state, const std::vector<std::string>& order) {
  const std::size_t n = state.size();
  if (order.size() != n) throw ConfigError("outcome order must list every ion once");
  std::vector<std::size_t> pos;  // register bit position (MSB = 0) for each order slot
  std::set<std::string> seen;
  for (const auto& label : order) {
    if (!seen.insert(label).second) throw ConfigError("outcome order lists '" + label + "' twice");
    pos.push_back(state.index_of(label));
  }
  std::vector<std::size_t> map(std::size_t{1} << n);
  for (std::size_t i = 0; i < map.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool bit = (i >> (n - 1 - pos[k])) & 1;
      if (bit) j |= std::size_t{1} << (n - 1 - k);
    }
    map[i] = j;
  }
  return map;
}

}  // namespace

std::vector<std::uint64_t> sample_outcomes(const QubitRegister& state, const ReadoutModel& readout,
                                           const std::vector<std::string>& order, std::size_t shots,
                                           std::uint64_t seed) {
  const auto map = bit_map(state, order);
  const auto raw = measure_counts(state, readout, shots, seed);
  std::vector<std::uint64_t> out(raw.size(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) out[map[i]] += raw[i];
  return out;
}

std::vector<double> outcome_probabilities(const QubitRegister& state, const ReadoutModel& readout,
                                          const std::vector<std::string>& order) {
  const auto map = bit_map(state, order);
  const auto raw = noisy_probabilities(state, readout);
  std::vector<double> out(raw.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) out[map[i]] += raw[i];
  return out;
}

void write_timeline(std::ostream& out, const SequenceReport& report) {
  out << std::fixed << std::setprecision(1);
  out << " step     t0_us     t1_us  phase    kind        detail\n";
  for (const auto& e : report.timeline)
    out << std::setw(5) << e.step << std::setw(10) << e.t0 << std::setw(10) << e.t1 << "  " << std::left
        << std::setw(8) << to_string(e.phase) << " " << std::setw(11) << to_string(e.kind) << " "
        << e.description << std::right << "\n";
  out << std::setprecision(3) << "process: " << report.duration_us / 1000 << " ms, shuttling "
      << 100 * report.shuttling_fraction() << "%, " << report.transport_hops << " hops\n";
  out.unsetf(std::ios::floatfield);
}

}  // namespace ionswap

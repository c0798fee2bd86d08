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

// Internal unit system: length in um, time in us, mass in u, charge in e.
// Energies are carried in u*um^2/us^2 ("internal energy"); electrostatic
// potentials are in volts.

#include <numbers>

namespace ionswap::units {

// CODATA 2018.
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kAtomicMass = 1.66053906660e-27;       // kg
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;
inline constexpr double kHbarSI = 1.054571817e-34;             // J s
inline constexpr double kBohrMagneton = 9.2740100783e-24;      // J/T
inline constexpr double kElectronG = 2.00231930436256;

// 1 eV expressed in u*um^2/us^2.
inline constexpr double kEvToInternal = kElementaryCharge / kAtomicMass;

// e^2/(4 pi eps0) in u*um^3/us^2.
inline constexpr double kCoulomb =
    kElementaryCharge * kElementaryCharge / (4.0 * std::numbers::pi * kVacuumPermittivity) /
    kAtomicMass * 1e6;

// hbar in u*um^2/us.
inline constexpr double kHbar = kHbarSI / kAtomicMass * 1e6;

// mu_B g_J / hbar in rad/(us T) for the S1/2 ground state.
inline constexpr double kZeemanRate = kBohrMagneton * kElectronG / kHbarSI * 1e-6;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kCalciumMass = 40.0;  // u

/// Converts an ordinary frequency in MHz to angular frequency in rad/us.
constexpr double angular(double mhz) { return kTwoPi * mhz; }

}  // namespace ionswap::units

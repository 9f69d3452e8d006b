// Copyright 2026 The AuthSim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "authsim/geometry.hpp"
#include "authsim/sim.hpp"

#include <algorithm>

namespace authsim {

enum class LateralMode { fixed, dynamic };

/// Kinematic limits of the ego used to size the relative regions. Defaults are
/// the experiment table values; lateral extents are fixed small margins.
struct SafetyParams {
  double a_max_dece = 4.0;
  double a_max_accel = 2.0;
  double a_min_dece = 0.2;
  double rho = 0.3;
  double d_y_danger = 0.3;
  double d_y_boundary = 0.9;
  double d_y_safety = 1.8;

  // Only read when lateral_mode == dynamic; the fixed margins then act as floors.
  LateralMode lateral_mode = LateralMode::fixed;
  double a_y_max_dece = 4.0;
  double a_y_max_accel = 2.0;
  double a_y_min_dece = 0.2;

  void validate() const;
};

/// Relative distance the follower closes on the leader when it spends
/// `response` seconds accelerating at `accel` and then brakes at `brake` until
/// its speed matches the leader's, with the leader at constant speed.
///
/// The braking phase is written term by term as the ego braking distance minus
/// the leader's travel during the braking time; it is only counted while the
/// follower is actually faster, so the result is the maximum closure over the
/// whole maneuver (clamped at zero).
template <typename Scalar>
Scalar relative_closure(Scalar v_follow, Scalar v_lead, Scalar response, Scalar accel,
                        Scalar brake) {
  const Scalar v_react = v_follow + accel * response;
  const Scalar response_part = v_follow * response + Scalar(0.5) * accel * response * response -
                               v_lead * response;
  Scalar braking_part(0);
  if (v_react > v_lead) {
    braking_part = (v_react * v_react - v_lead * v_lead) / (Scalar(2) * brake) -
                   v_lead * (v_react - v_lead) / brake;
  }
  return std::max(Scalar(0), response_part + braking_part);
}

/// Gap below which a collision is unavoidable even under immediate maximum
/// braking. Zero whenever the ego is not faster than the NPC.
template <typename Scalar>
Scalar danger_distance(Scalar v_ego, Scalar v_npc, Scalar max_dece) {
  if (!(v_ego > v_npc)) return Scalar(0);
  return relative_closure<Scalar>(v_ego, v_npc, Scalar(0), Scalar(0), max_dece);
}

template <typename Scalar>
Scalar boundary_distance(Scalar v_ego, Scalar v_npc, Scalar rho, Scalar max_accel,
                         Scalar max_dece) {
  return relative_closure<Scalar>(v_ego, v_npc, rho, max_accel, max_dece);
}

template <typename Scalar>
Scalar safety_distance(Scalar v_ego, Scalar v_npc, Scalar rho, Scalar max_accel,
                       Scalar min_dece) {
  return relative_closure<Scalar>(v_ego, v_npc, rho, max_accel, min_dece);
}

double danger_distance_x(double v_ego, double v_npc, const SafetyParams& params);
double boundary_distance_x(double v_ego, double v_npc, const SafetyParams& params);
double safety_distance_x(double v_ego, double v_npc, const SafetyParams& params);

/// Lateral counterparts. `v_ego_toward` is the ego lateral speed toward the NPC
/// and `v_npc_along` the NPC lateral speed in that same direction.
struct LateralDistances {
  double danger = 0.0;
  double boundary = 0.0;
  double safety = 0.0;
};
LateralDistances lateral_distances(double v_ego_toward, double v_npc_along,
                                   const SafetyParams& params);

struct RegionLayers {
  double d_x_danger = 0.0;
  double d_x_boundary = 0.0;
  double d_x_safety = 0.0;
  double d_y_danger = 0.0;
  double d_y_boundary = 0.0;
  double d_y_safety = 0.0;
  Box danger_rect;
  Box boundary_rect;
  Box safety_rect;
};

struct RegionOverlap {
  double s_danger = 0.0;
  double s_boundary = 0.0;
  double s_safety = 0.0;

  double total() const { return s_danger + s_boundary + s_safety; }
};

/// Builds the three nested regions in the ego frame (origin at the ego rear
/// bumper and lateral center, x forward). `npc` is only used for its speed and,
/// in dynamic lateral mode, its lateral velocity.
RegionLayers build_region_layers(const VehicleState& ego, const VehicleState& npc,
                                 const SafetyParams& params);
RegionLayers build_region_layers(const VehicleState& ego, double v_npc,
                                 const SafetyParams& params);

/// NPC body rectangle expressed in the ego frame.
Box to_ego_frame(const VehicleState& npc, const VehicleState& ego);

/// Overlap of an ego-frame NPC rectangle with the danger rectangle and the two
/// outer annuli. The three parts always sum to area(npc ∩ safety_rect).
RegionOverlap overlap_areas(const Box& npc_rect, const RegionLayers& layers);

}  // namespace authsim

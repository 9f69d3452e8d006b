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

#include "authsim/safety_region.hpp"

#include <stdexcept>

namespace authsim {

void SafetyParams::validate() const {
  if (!(a_max_dece > a_min_dece && a_min_dece > 0.0))
    throw std::invalid_argument("require a_max_dece > a_min_dece > 0");
  if (!(a_max_accel > 0.0)) throw std::invalid_argument("a_max_accel must be > 0");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
  if (!(0.0 <= d_y_danger && d_y_danger <= d_y_boundary && d_y_boundary <= d_y_safety))
    throw std::invalid_argument("require 0 <= d_y_danger <= d_y_boundary <= d_y_safety");
  if (lateral_mode == LateralMode::dynamic &&
      !(a_y_max_dece > a_y_min_dece && a_y_min_dece > 0.0 && a_y_max_accel > 0.0))
    throw std::invalid_argument("invalid lateral acceleration limits");
}

double danger_distance_x(double v_ego, double v_npc, const SafetyParams& p) {
  return danger_distance(v_ego, v_npc, p.a_max_dece);
}

double boundary_distance_x(double v_ego, double v_npc, const SafetyParams& p) {
  return boundary_distance(v_ego, v_npc, p.rho, p.a_max_accel, p.a_max_dece);
}

double safety_distance_x(double v_ego, double v_npc, const SafetyParams& p) {
  return safety_distance(v_ego, v_npc, p.rho, p.a_max_accel, p.a_min_dece);
}

LateralDistances lateral_distances(double v_ego_toward, double v_npc_along,
                                   const SafetyParams& p) {
  LateralDistances d;
  d.danger = danger_distance(v_ego_toward, v_npc_along, p.a_y_max_dece);
  d.boundary = boundary_distance(v_ego_toward, v_npc_along, p.rho, p.a_y_max_accel, p.a_y_max_dece);
  d.safety = safety_distance(v_ego_toward, v_npc_along, p.rho, p.a_y_max_accel, p.a_y_min_dece);
  return d;
}

namespace {

RegionLayers assemble(const VehicleState& ego, double dxd, double dxb, double dxs, double dyd,
                      double dyb, double dys) {
  RegionLayers layers;
  // Each layer extends at least as far as the one inside it.
  layers.d_x_danger = dxd;
  layers.d_x_boundary = std::max(dxb, dxd);
  layers.d_x_safety = std::max(dxs, layers.d_x_boundary);
  layers.d_y_danger = dyd;
  layers.d_y_boundary = std::max(dyb, dyd);
  layers.d_y_safety = std::max(dys, layers.d_y_boundary);

  const double front = ego.length;
  const double half = 0.5 * ego.width;
  auto rect = [&](double depth, double margin) {
    return make_box(front, -(half + margin), front + depth, half + margin);
  };
  layers.danger_rect = rect(layers.d_x_danger, layers.d_y_danger);
  layers.boundary_rect = rect(layers.d_x_boundary, layers.d_y_boundary);
  layers.safety_rect = rect(layers.d_x_safety, layers.d_y_safety);
  return layers;
}

}  // namespace

RegionLayers build_region_layers(const VehicleState& ego, double v_npc, const SafetyParams& p) {
  return assemble(ego, danger_distance_x(ego.v, v_npc, p), boundary_distance_x(ego.v, v_npc, p),
                  safety_distance_x(ego.v, v_npc, p), p.d_y_danger, p.d_y_boundary,
                  p.d_y_safety);
}

RegionLayers build_region_layers(const VehicleState& ego, const VehicleState& npc,
                                 const SafetyParams& p) {
  if (p.lateral_mode == LateralMode::fixed) return build_region_layers(ego, npc.v, p);
  const double direction = npc.y >= ego.y ? 1.0 : -1.0;
  const LateralDistances lat =
      lateral_distances(direction * ego.lateral_v, direction * npc.lateral_v, p);
  return assemble(ego, danger_distance_x(ego.v, npc.v, p), boundary_distance_x(ego.v, npc.v, p),
                  safety_distance_x(ego.v, npc.v, p), std::max(p.d_y_danger, lat.danger),
                  std::max(p.d_y_boundary, lat.boundary), std::max(p.d_y_safety, lat.safety));
}

Box to_ego_frame(const VehicleState& npc, const VehicleState& ego) {
  return make_box(npc.x - ego.x, npc.y_low() - ego.y, npc.front() - ego.x, npc.y_high() - ego.y);
}

RegionOverlap overlap_areas(const Box& npc_rect, const RegionLayers& layers) {
  const double in_danger = intersection_area(npc_rect, layers.danger_rect);
  const double in_boundary = intersection_area(npc_rect, layers.boundary_rect);
  const double in_safety = intersection_area(npc_rect, layers.safety_rect);
  RegionOverlap out;
  out.s_danger = in_danger;
  out.s_boundary = std::max(0.0, in_boundary - in_danger);
  out.s_safety = std::max(0.0, in_safety - in_boundary);
  return out;
}

}  // namespace authsim

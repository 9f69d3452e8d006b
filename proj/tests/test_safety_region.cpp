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

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace authsim;

namespace {

// Literal substitution into the published closed forms (valid when the ego is faster).
double literal_danger(double ve, double vn, double b) { return (ve * ve - vn * vn) / (2 * b) - vn * (ve - vn) / b; }

double literal_response(double ve, double vn, double rho, double a, double b) {
  const double vr = ve + a * rho;
  return ve * rho + 0.5 * a * rho * rho + (vr * vr - vn * vn) / (2 * b) - vn * (rho + (vr - vn) / b);
}

VehicleState ego_at(double v) {
  VehicleState e;
  e.role = Role::ego;
  e.x = 0.0;
  e.y = 6.0;
  e.v = v;
  e.lane = 1;
  return e;
}

}  // namespace

TEST_CASE("longitudinal distances at (20, 10) match the closed forms and integration") {
  const SafetyParams p;
  CHECK(std::abs(danger_distance_x(20, 10, p) - 12.5) < 1e-12);
  CHECK(std::abs(danger_distance_x(20, 10, p) - literal_danger(20, 10, 4)) < 1e-12);
  CHECK(std::abs(boundary_distance_x(20, 10, p) - 17.135) < 1e-3);
  CHECK(std::abs(safety_distance_x(20, 10, p) - 283.99) < 1e-3);
  CHECK(std::abs(boundary_distance_x(20, 10, p) - literal_response(20, 10, 0.3, 2, 4)) < 1e-9);
  CHECK(std::abs(safety_distance_x(20, 10, p) - literal_response(20, 10, 0.3, 2, 0.2)) < 1e-9);

  CHECK(std::abs(danger_distance_x(20, 10, p) - oracle::integrated_closure(20, 10, 0, 0, 4)) < 1e-2);
  CHECK(std::abs(boundary_distance_x(20, 10, p) - oracle::integrated_closure(20, 10, 0.3, 2, 4)) < 1e-2);
  CHECK(std::abs(safety_distance_x(20, 10, p) - oracle::integrated_closure(20, 10, 0.3, 2, 0.2)) < 1e-1);
}

TEST_CASE("degenerate speed pairs") {
  const SafetyParams p;
  CHECK(danger_distance_x(15, 15, p) == 0.0);
  CHECK(danger_distance_x(10, 20, p) == 0.0);
  // Ego slower: even with the response phase it never closes on the NPC.
  CHECK(oracle::integrated_closure(10, 20, 0.3, 2, 4) == 0.0);
  CHECK(boundary_distance_x(10, 20, p) == 0.0);
  CHECK(std::abs(safety_distance_x(15, 15, p) - 0.99) < 1e-9);
  CHECK(std::abs(safety_distance_x(15, 15, p) - literal_response(15, 15, 0.3, 2, 0.2)) < 1e-9);
}

TEST_CASE("parameter reductions") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  SafetyParams no_response;
  no_response.rho = 0.0;
  SafetyParams coincident = no_response;
  coincident.a_min_dece = coincident.a_max_dece;
  for (int i = 0; i < 1000; ++i) {
    const double ve = speed(gen);
    const double vn = speed(gen);
    CHECK(boundary_distance_x(ve, vn, no_response) == doctest::Approx(danger_distance_x(ve, vn, no_response)));
    CHECK(safety_distance_x(ve, vn, coincident) == doctest::Approx(danger_distance_x(ve, vn, coincident)));
  }
}

TEST_CASE("closed forms agree with kinematic integration on random closing pairs") {
  const SafetyParams p;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  int checked = 0;
  while (checked < 1000) {
    double ve = speed(gen);
    double vn = speed(gen);
    if (ve <= vn) continue;
    ++checked;
    CHECK(std::abs(danger_distance_x(ve, vn, p) - oracle::integrated_closure(ve, vn, 0, 0, 4)) < 1e-2);
    CHECK(std::abs(boundary_distance_x(ve, vn, p) - oracle::integrated_closure(ve, vn, 0.3, 2, 4)) < 1e-2);
    CHECK(std::abs(safety_distance_x(ve, vn, p) - oracle::integrated_closure(ve, vn, 0.3, 2, 0.2)) < 1e-1);
  }
}

TEST_CASE("distances are nested and non-decreasing in ego speed") {
  const SafetyParams p;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  for (int i = 0; i < 100000; ++i) {
    const double ve = speed(gen);
    const double vn = speed(gen);
    const double d = danger_distance_x(ve, vn, p);
    const double b = boundary_distance_x(ve, vn, p);
    const double s = safety_distance_x(ve, vn, p);
    REQUIRE(d >= 0.0);
    REQUIRE(d <= b);
    REQUIRE(b <= s);
  }
  for (double vn = 0.0; vn <= 40.0; vn += 2.5) {
    double prev_d = 0.0, prev_b = 0.0, prev_s = 0.0;
    for (double ve = 0.0; ve <= 40.0; ve += 0.25) {
      const double d = danger_distance_x(ve, vn, p);
      const double b = boundary_distance_x(ve, vn, p);
      const double s = safety_distance_x(ve, vn, p);
      CHECK(d >= prev_d);
      CHECK(b >= prev_b);
      CHECK(s >= prev_s);
      prev_d = d;
      prev_b = b;
      prev_s = s;
    }
  }
}

TEST_CASE("region layers at (20, 10)") {
  const SafetyParams p;
  const VehicleState ego = ego_at(20.0);
  const RegionLayers layers = build_region_layers(ego, 10.0, p);
  CHECK(layers.d_x_danger == doctest::Approx(12.5));
  CHECK(std::abs(layers.d_x_boundary - 17.135) < 1e-3);
  CHECK(std::abs(layers.d_x_safety - 283.99) < 1e-3);
  CHECK(layers.danger_rect.min().x() == doctest::Approx(5.0));
  CHECK(layers.danger_rect.max().x() == doctest::Approx(17.5));
  CHECK(layers.danger_rect.max().y() == doctest::Approx(1.3));
  CHECK(layers.boundary_rect.max().y() == doctest::Approx(1.9));
  CHECK(layers.safety_rect.max().y() == doctest::Approx(2.8));
  CHECK(layers.safety_rect.min().y() == doctest::Approx(-2.8));

  const RegionLayers equal = build_region_layers(ego, 20.0, p);
  CHECK(equal.d_x_danger == 0.0);
  CHECK(box_area(equal.danger_rect) == 0.0);
}

TEST_CASE("overlap areas of simple placements") {
  const SafetyParams p;
  const RegionLayers layers = build_region_layers(ego_at(30.0), 10.0, p);  // danger depth 50 m
  const RegionOverlap inside = overlap_areas(make_box(10.0, -1.0, 15.0, 1.0), layers);
  CHECK(inside.s_danger == doctest::Approx(10.0));
  CHECK(inside.s_boundary == 0.0);
  CHECK(inside.s_safety == 0.0);

  const RegionOverlap behind = overlap_areas(make_box(-20.0, -1.0, -15.0, 1.0), layers);
  CHECK(behind.total() == 0.0);
  const RegionOverlap beside = overlap_areas(make_box(-2.0, 3.0, 3.0, 5.0), layers);
  CHECK(beside.total() == 0.0);
}

TEST_CASE("straddling placements agree with a Monte-Carlo area oracle") {
  const SafetyParams p;
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> ve_dist(15.0, 35.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    const double ve = ve_dist(gen);
    const double vn = ve - 5.0 - 5.0 * unit(gen);
    const RegionLayers layers = build_region_layers(ego_at(ve), vn, p);
    // Centre the NPC near the danger/boundary split with a lateral offset.
    const double split = layers.danger_rect.max().x();
    const double x0 = split - 4.0 + 3.0 * unit(gen);
    const double y0 = -1.0 + 1.5 * (unit(gen) - 0.5);
    const oracle::Rect npc{x0, y0, x0 + 5.0, y0 + 2.0};
    const RegionOverlap o = overlap_areas(make_box(npc.x0, npc.y0, npc.x1, npc.y1), layers);

    auto rect_of = [](const Box& b) { return oracle::Rect{b.min().x(), b.min().y(), b.max().x(), b.max().y()}; };
    const oracle::Rect dr = rect_of(layers.danger_rect);
    const oracle::Rect br = rect_of(layers.boundary_rect);
    const oracle::Rect sr = rect_of(layers.safety_rect);
    const auto seed = static_cast<std::uint64_t>(c) * 3;
    const double mc_d = oracle::monte_carlo_area(npc, [&](double x, double y) { return dr.contains(x, y); }, 1000, seed);
    const double mc_b = oracle::monte_carlo_area(
        npc, [&](double x, double y) { return br.contains(x, y) && !dr.contains(x, y); }, 1000, seed + 1);
    const double mc_s = oracle::monte_carlo_area(
        npc, [&](double x, double y) { return sr.contains(x, y) && !br.contains(x, y); }, 1000, seed + 2);
    CHECK(std::abs(o.s_danger - mc_d) < 1e-2);
    CHECK(std::abs(o.s_boundary - mc_b) < 1e-2);
    CHECK(std::abs(o.s_safety - mc_s) < 1e-2);
  }
}

TEST_CASE("overlap partition is exact and translation invariant") {
  const SafetyParams p;
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  std::uniform_real_distribution<double> pos(-20.0, 320.0);
  std::uniform_real_distribution<double> lat(-6.0, 6.0);
  std::uniform_real_distribution<double> size(0.1, 12.0);
  for (int i = 0; i < 100000; ++i) {
    const RegionLayers layers = build_region_layers(ego_at(speed(gen)), speed(gen), p);
    const double x0 = pos(gen);
    const double y0 = lat(gen);
    const Box npc = make_box(x0, y0, x0 + size(gen), y0 + size(gen));
    const RegionOverlap o = overlap_areas(npc, layers);
    const oracle::Rect r{npc.min().x(), npc.min().y(), npc.max().x(), npc.max().y()};
    const oracle::Rect s{layers.safety_rect.min().x(), layers.safety_rect.min().y(),
                         layers.safety_rect.max().x(), layers.safety_rect.max().y()};
    REQUIRE(o.s_danger >= 0.0);
    REQUIRE(o.s_boundary >= 0.0);
    REQUIRE(o.s_safety >= 0.0);
    REQUIRE(std::abs(o.total() - oracle::intersection(r, s)) <= 1e-12 * std::max(1.0, oracle::intersection(r, s)));
    REQUIRE(box_area(layers.danger_rect.intersection(layers.boundary_rect)) == doctest::Approx(box_area(layers.danger_rect)));
    REQUIRE(box_area(layers.boundary_rect.intersection(layers.safety_rect)) == doctest::Approx(box_area(layers.boundary_rect)));

    if (i % 100 == 0) {
      const Eigen::Vector2d shift(0.5 * pos(gen), 0.25 * lat(gen));
      RegionLayers moved = layers;
      moved.danger_rect = translated(layers.danger_rect, shift);
      moved.boundary_rect = translated(layers.boundary_rect, shift);
      moved.safety_rect = translated(layers.safety_rect, shift);
      const RegionOverlap m = overlap_areas(translated(npc, shift), moved);
      CHECK(m.s_danger == doctest::Approx(o.s_danger).epsilon(1e-9));
      CHECK(m.s_boundary == doctest::Approx(o.s_boundary).epsilon(1e-9));
      CHECK(m.s_safety == doctest::Approx(o.s_safety).epsilon(1e-9));
    }
  }
}

TEST_CASE("dynamic lateral mode never narrows the fixed margins") {
  SafetyParams p;
  p.lateral_mode = LateralMode::dynamic;
  VehicleState ego = ego_at(25.0);
  VehicleState npc = ego_at(20.0);
  npc.y = 9.0;
  npc.lateral_v = -2.0;
  const RegionLayers layers = build_region_layers(ego, npc, p);
  CHECK(layers.d_y_danger >= p.d_y_danger);
  CHECK(layers.d_y_boundary >= p.d_y_boundary);
  CHECK(layers.d_y_safety >= p.d_y_safety);
  CHECK(layers.d_y_danger <= layers.d_y_boundary);
  CHECK(layers.d_y_boundary <= layers.d_y_safety);
}

TEST_CASE("invalid safety parameters are rejected") {
  SafetyParams p;
  p.a_min_dece = 5.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SafetyParams{};
  p.d_y_danger = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

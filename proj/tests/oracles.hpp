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

// Reference computations used only by the tests. None of them call into the
// library's closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Forward-integrates the follower (accelerate for `response`, then brake)
/// against a constant-speed leader and returns the largest relative closure.
inline double integrated_closure(double v_follow, double v_lead, double response, double accel,
                                 double brake, double dt = 1e-3) {
  double v = v_follow;
  double closure = 0.0;
  double best = 0.0;
  double t = 0.0;
  for (int guard = 0; guard < 10'000'000; ++guard) {
    const bool reacting = t < response - 1e-12;
    if (!reacting && v <= v_lead) break;
    const double a = reacting ? accel : -brake;
    const double h = reacting ? std::min(dt, response - t) : dt;
    double v_next = v + a * h;
    double step = h;
    if (!reacting && v_next <= v_lead) {
      // Stop exactly when the speeds match.
      step = (v - v_lead) / brake;
      v_next = v_lead;
    }
    closure += 0.5 * (v + v_next) * step - v_lead * step;
    best = std::max(best, closure);
    v = v_next;
    t += step;
  }
  return best;
}

struct Rect {
  double x0, y0, x1, y1;
  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
  bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline double intersection(const Rect& a, const Rect& b) {
  return overlap_1d(a.x0, a.x1, b.x0, b.x1) * overlap_1d(a.y0, a.y1, b.y0, b.y1);
}

/// Stratified Monte-Carlo estimate of area(sample ∩ region): one uniform draw
/// in each cell of an n_side × n_side grid over `sample`.
inline double monte_carlo_area(const Rect& sample, const std::function<bool(double, double)>& region,
                               int n_side, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cw = (sample.x1 - sample.x0) / n_side;
  const double ch = (sample.y1 - sample.y0) / n_side;
  long hits = 0;
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      const double x = sample.x0 + (i + u(gen)) * cw;
      const double y = sample.y0 + (j + u(gen)) * ch;
      hits += region(x, y) ? 1 : 0;
    }
  }
  return sample.area() * static_cast<double>(hits) / (static_cast<double>(n_side) * n_side);
}

/// Central finite difference of `f` with respect to each coordinate of `x`.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Independent count of the placement slots on a lane of length `road` with
/// vehicles of length `len` at pairwise gaps of at least `gap`.
inline int max_vehicles_per_lane(double road, double len, double gap) {
  int count = 0;
  for (double x = 0.0; x + len <= road + 1e-12; x += gap) ++count;
  return count;
}

}  // namespace oracle

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

#include <Eigen/Geometry>

#include <algorithm>

namespace authsim {

template <typename Scalar>
using Box2 = Eigen::AlignedBox<Scalar, 2>;

using Box = Box2<double>;

template <typename Scalar>
Box2<Scalar> make_box(Scalar x_min, Scalar y_min, Scalar x_max, Scalar y_max) {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  return Box2<Scalar>(Vec(x_min, y_min), Vec(x_max, y_max));
}

/// Area of an axis-aligned box; zero for empty or degenerate boxes.
template <typename Scalar>
Scalar box_area(const Box2<Scalar>& box) {
  if (box.isEmpty()) return Scalar(0);
  const auto sizes = box.sizes();
  return std::max(Scalar(0), sizes.x()) * std::max(Scalar(0), sizes.y());
}

template <typename Scalar>
Scalar intersection_area(const Box2<Scalar>& a, const Box2<Scalar>& b) {
  return box_area<Scalar>(a.intersection(b));
}

template <typename Scalar>
Box2<Scalar> translated(const Box2<Scalar>& box, const Eigen::Matrix<Scalar, 2, 1>& offset) {
  return Box2<Scalar>(box.min() + offset, box.max() + offset);
}

}  // namespace authsim

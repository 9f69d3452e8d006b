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

#include "authsim/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace authsim {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct MlpGradients {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;

  Scalar squared_norm() const {
    Scalar total(0);
    for (const auto& w : weights) total += w.squaredNorm();
    for (const auto& b : biases) total += b.squaredNorm();
    return total;
  }

  void scale(Scalar factor) {
    for (auto& w : weights) w *= factor;
    for (auto& b : biases) b *= factor;
  }
};

/// Fully connected ReLU network with a linear output layer. Inputs are column
/// batches: x is (inputs × batch), the result is (outputs × batch).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  struct Cache {
    std::vector<Matrix> activations;  // input, then every hidden post-ReLU
  };

  Mlp() = default;

  /// He-uniform initialization for the hidden layers.
  Mlp(const std::vector<int>& layer_sizes, Rng& rng) : sizes_(layer_sizes) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("an MLP needs at least two layer sizes");
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      const int in = layer_sizes[l];
      const int out = layer_sizes[l + 1];
      const double limit = std::sqrt(6.0 / in);
      Matrix w(out, in);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
          w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
      weights_.push_back(std::move(w));
      biases_.push_back(Vector::Zero(out));
    }
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }
  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Vector>& biases() { return biases_; }

  Matrix forward(const Matrix& x) const {
    Matrix h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Matrix z = weights_[l] * h;
      z.colwise() += biases_[l];
      if (l + 1 < weights_.size()) z = z.cwiseMax(Scalar(0));
      h = std::move(z);
    }
    return h;
  }

  Matrix forward(const Matrix& x, Cache& cache) const {
    cache.activations.clear();
    cache.activations.push_back(x);
    Matrix h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Matrix z = weights_[l] * h;
      z.colwise() += biases_[l];
      if (l + 1 < weights_.size()) {
        z = z.cwiseMax(Scalar(0));
        cache.activations.push_back(z);
      }
      h = std::move(z);
    }
    return h;
  }

  /// Gradients of sum(d_output ⊙ output) with respect to every parameter.
  MlpGradients<Scalar> backward(const Cache& cache, const Matrix& d_output) const {
    MlpGradients<Scalar> grads;
    grads.weights.resize(weights_.size());
    grads.biases.resize(weights_.size());
    Matrix delta = d_output;
    for (std::size_t l = weights_.size(); l-- > 0;) {
      const Matrix& input = cache.activations[l];
      grads.weights[l].noalias() = delta * input.transpose();
      grads.biases[l] = delta.rowwise().sum();
      if (l > 0) {
        Matrix upstream = weights_[l].transpose() * delta;
        // ReLU derivative, read off the post-activation values.
        delta = (input.array() > Scalar(0)).select(upstream, Scalar(0));
      }
    }
    return grads;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
  }

  Vector flat_parameters() const {
    Vector flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      flat.segment(k, weights_[l].size()) = weights_[l].reshaped();
      k += weights_[l].size();
      flat.segment(k, biases_[l].size()) = biases_[l];
      k += biases_[l].size();
    }
    return flat;
  }

  void set_flat_parameters(const Vector& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count()))
      throw std::invalid_argument("parameter vector has the wrong length");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l].reshaped() = flat.segment(k, weights_[l].size());
      k += weights_[l].size();
      biases_[l] = flat.segment(k, biases_[l].size());
      k += biases_[l].size();
    }
  }

  static Vector flatten(const MlpGradients<Scalar>& g) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < g.weights.size(); ++l) n += g.weights[l].size() + g.biases[l].size();
    Vector flat(n);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
      flat.segment(k, g.weights[l].size()) = g.weights[l].reshaped();
      k += g.weights[l].size();
      flat.segment(k, g.biases[l].size()) = g.biases[l];
      k += g.biases[l].size();
    }
    return flat;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out;
    out.sizes_ = sizes_;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.weights_.push_back(weights_[l].template cast<Other>());
      out.biases_.push_back(biases_[l].template cast<Other>());
    }
    return out;
  }

  static Mlp from_parameters(std::vector<int> sizes, std::vector<Matrix> weights,
                             std::vector<Vector> biases) {
    if (weights.size() + 1 != sizes.size() || biases.size() != weights.size())
      throw std::invalid_argument("layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l] ||
          biases[l].size() != sizes[l + 1])
        throw std::invalid_argument("layer shape mismatch");
    }
    Mlp out;
    out.sizes_ = std::move(sizes);
    out.weights_ = std::move(weights);
    out.biases_ = std::move(biases);
    return out;
  }

 private:
  template <typename>
  friend class Mlp;

  std::vector<int> sizes_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

template <typename Scalar>
class Adam {
 public:
  explicit Adam(Scalar learn_rate = Scalar(1e-3), Scalar beta1 = Scalar(0.9),
                Scalar beta2 = Scalar(0.999), Scalar epsilon = Scalar(1e-8))
      : lr_(learn_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(Mlp<Scalar>& net, const MlpGradients<Scalar>& grads) {
    if (m_w_.empty()) {
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        m_w_.push_back(MatrixX<Scalar>::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        v_w_.push_back(m_w_.back());
        m_b_.push_back(VectorX<Scalar>::Zero(net.biases()[l].size()));
        v_b_.push_back(m_b_.back());
      }
    }
    ++t_;
    const Scalar c1 = Scalar(1) - std::pow(beta1_, static_cast<Scalar>(t_));
    const Scalar c2 = Scalar(1) - std::pow(beta2_, static_cast<Scalar>(t_));
    const Scalar step = lr_ * std::sqrt(c2) / c1;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      update(net.weights()[l], m_w_[l], v_w_[l], grads.weights[l], step);
      update(net.biases()[l], m_b_[l], v_b_[l], grads.biases[l], step);
    }
  }

  long steps() const { return t_; }

 private:
  template <typename Param>
  void update(Param& param, Param& m, Param& v, const Param& g, Scalar step) {
    m = beta1_ * m + (Scalar(1) - beta1_) * g;
    v = beta2_ * v + (Scalar(1) - beta2_) * g.cwiseAbs2();
    param.array() -= step * m.array() / (v.array().sqrt() + eps_);
  }

  Scalar lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<MatrixX<Scalar>> m_w_, v_w_;
  std::vector<VectorX<Scalar>> m_b_, v_b_;
};

}  // namespace authsim

/*
 * Copyright 2026 The SelfSHAP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "selfshap/rng.h"
#include "selfshap/tensor.h"

namespace selfshap {

enum class RunMode {
  kTrain,             // batch statistics, running averages updated
  kTrainFrozenStats,  // batch statistics, running averages untouched (pure function)
  kEval,              // running averages
};

/// Named view into a layer-owned flat array.
struct ParamView {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
};

/// Per-layer forward context saved for the matching backward pass.
struct LayerCtx {
  virtual ~LayerCtx() = default;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t in_dim() const = 0;
  virtual std::size_t out_dim() const = 0;

  /// Trainable parameters, in a fixed order matching the flat gradient layout.
  virtual std::vector<ParamView> params() = 0;
  /// Non-trainable state that still persists with the model (e.g. running stats).
  virtual std::vector<ParamView> state() { return {}; }

  std::size_t param_count();

  virtual void init(Rng& rng) = 0;

  /// `out` is resized to [rows, out_dim]. Returns the saved context.
  virtual std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) = 0;

  /// `param_grads` points at this layer's slice of the flat gradient buffer
  /// (same layout as params()); contributions are accumulated, never assigned.
  virtual void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                        double* param_grads) const = 0;
};

struct KanLayerConfig {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t spline_degree = 3;
  std::size_t grid_size = 5;  // interval count
  double grid_low = -1.0;
  double grid_high = 1.0;
  std::size_t rbf_centers = 8;

  void validate() const;
};

/// Sum of learnable univariate functions per (input, output) pair, each a
/// B-spline over a fixed grid plus a weighted silu base branch.
class KanSplineLayer : public Layer {
 public:
  explicit KanSplineLayer(KanLayerConfig cfg);

  std::string kind() const override { return "kan_spline"; }
  std::size_t in_dim() const override { return cfg_.in_dim; }
  std::size_t out_dim() const override { return cfg_.out_dim; }
  std::vector<ParamView> params() override;
  void init(Rng& rng) override;
  std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) override;
  void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                double* param_grads) const override;

  std::size_t n_basis() const { return cfg_.grid_size + cfg_.spline_degree; }
  const KanLayerConfig& config() const { return cfg_; }

  /// Evaluates the n_basis B-spline basis functions at x; used by tests to
  /// build collocation systems. `values` must hold n_basis entries.
  void basis_row(double x, double* values) const;

  double* coef_at(std::size_t p, std::size_t k) { return coef_.data() + (p * n_basis() + k) * cfg_.out_dim; }
  double* base_at(std::size_t p) { return base_w_.data() + p * cfg_.out_dim; }

 private:
  KanLayerConfig cfg_;
  double h_ = 0.0;  // knot spacing
  std::vector<double> coef_;    // [in][n_basis][out]
  std::vector<double> base_w_;  // [in][out]
};

/// Same contract with Gaussian radial bases on evenly spaced centers and no
/// base branch.
class KanRbfLayer : public Layer {
 public:
  explicit KanRbfLayer(KanLayerConfig cfg);

  std::string kind() const override { return "kan_rbf"; }
  std::size_t in_dim() const override { return cfg_.in_dim; }
  std::size_t out_dim() const override { return cfg_.out_dim; }
  std::vector<ParamView> params() override;
  void init(Rng& rng) override;
  std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) override;
  void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                double* param_grads) const override;

  const KanLayerConfig& config() const { return cfg_; }
  double center(std::size_t k) const;
  double bandwidth() const { return h_; }
  double* coef_at(std::size_t p, std::size_t k) { return coef_.data() + (p * cfg_.rbf_centers + k) * cfg_.out_dim; }

 private:
  KanLayerConfig cfg_;
  double h_ = 0.0;  // center spacing == bandwidth
  std::vector<double> coef_;  // [in][centers][out]
};

class LinearLayer : public Layer {
 public:
  /// `with_bias` is off for layers feeding a batch norm, where a bias would
  /// cancel in the normalization.
  LinearLayer(std::size_t in_dim, std::size_t out_dim, bool with_bias = true);

  std::string kind() const override { return "linear"; }
  std::size_t in_dim() const override { return in_; }
  std::size_t out_dim() const override { return out_; }
  std::vector<ParamView> params() override;
  void init(Rng& rng) override;
  std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) override;
  void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                double* param_grads) const override;

  double* weight_at(std::size_t p) { return w_.data() + p * out_; }
  double* bias() { return b_.data(); }
  bool has_bias() const { return with_bias_; }

 private:
  std::size_t in_, out_;
  bool with_bias_;
  std::vector<double> w_;  // [in][out]
  std::vector<double> b_;  // [out]
};

class BatchNormLayer : public Layer {
 public:
  explicit BatchNormLayer(std::size_t dim, double momentum = 0.1, double eps = 1e-5);

  std::string kind() const override { return "batch_norm"; }
  std::size_t in_dim() const override { return dim_; }
  std::size_t out_dim() const override { return dim_; }
  std::vector<ParamView> params() override;
  std::vector<ParamView> state() override;
  void init(Rng& rng) override;
  std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) override;
  void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                double* param_grads) const override;

  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

 private:
  std::size_t dim_;
  double momentum_, eps_;
  std::vector<double> gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
};

class ReluLayer : public Layer {
 public:
  explicit ReluLayer(std::size_t dim) : dim_(dim) {}

  std::string kind() const override { return "relu"; }
  std::size_t in_dim() const override { return dim_; }
  std::size_t out_dim() const override { return dim_; }
  std::vector<ParamView> params() override { return {}; }
  void init(Rng&) override {}
  std::unique_ptr<LayerCtx> forward(const Tensor& in, Tensor& out, RunMode mode) override;
  void backward(const LayerCtx& ctx, const Tensor& grad_out, Tensor& grad_in,
                double* param_grads) const override;

 private:
  std::size_t dim_;
};

double silu(double x);
double silu_grad(double x);

}  // namespace selfshap

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

#include <memory>
#include <string>
#include <vector>

#include "selfshap/layers.h"
#include "selfshap/link.h"
#include "selfshap/rng.h"
#include "selfshap/tensor.h"

namespace selfshap {

enum class BackboneKind { kKanSpline, kKanRbf, kMlp, kMlpMatched };

std::string to_string(BackboneKind k);
BackboneKind backbone_from_string(const std::string& s);

struct NetworkSpec {
  BackboneKind backbone = BackboneKind::kKanSpline;
  std::size_t n_features = 0;
  std::size_t n_outputs = 1;
  std::vector<std::size_t> hidden = {64, 128, 64};
  LinkKind link = LinkKind::kIdentity;
  bool relaxed = false;  // learnable output bias present

  std::size_t spline_degree = 3;
  std::size_t grid_size = 5;
  double grid_low = -1.0;
  double grid_high = 1.0;
  std::size_t rbf_centers = 8;
  double rbf_low = -2.0;
  double rbf_high = 2.0;

  void validate() const;
};

/// Per-instance feature attributions: n features by d outputs.
struct AttributionMatrix {
  std::size_t n = 0, d = 0;
  std::vector<double> values;  // row-major [n][d]
  std::vector<std::string> feature_names;
  std::vector<std::string> output_labels;

  double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * d + j]; }
  std::vector<double> column(std::size_t j) const;
  std::vector<double> column_sums() const;
};

/// Saved forward contexts for one batch; consumed by the matching backward.
struct Tape {
  std::vector<std::unique_ptr<LayerCtx>> ctx;
  std::size_t rows = 0;
  bool live = false;
};

struct ForwardOut {
  Tensor phi;     // [rows, n*d], entry (i,j) at column i*d + j
  Tensor logits;  // [rows, d], column sums of phi plus delta
  Tensor pred;    // [rows, d], link applied
};

/// Predictor whose forward pass emits a full attribution matrix; the logits
/// are the attribution column sums (plus the optional learned bias), so the
/// prediction is additively exact in the attributions by construction.
class ShapNetwork {
 public:
  ShapNetwork() = default;
  static ShapNetwork build(const NetworkSpec& spec, Rng& rng);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t n_features() const { return spec_.n_features; }
  std::size_t n_outputs() const { return spec_.n_outputs; }

  /// Backbone + head in one pass. When `tape` is non-null the forward
  /// contexts are recorded for backward().
  ForwardOut forward(const Tensor& X, RunMode mode, Tape* tape = nullptr);

  /// Attributions for a single instance (eval mode, no tape).
  AttributionMatrix explain(const std::vector<double>& x);

  /// Column sums of phi plus delta; phi is [rows, n*d].
  Tensor logits_from_phi(const Tensor& phi) const;

  /// Accumulates parameter gradients for a recorded batch. `grad_phi` is the
  /// upstream gradient on the backbone output [rows, n*d]; `grad_delta` is the
  /// summed upstream logit gradient (ignored unless the bias is present).
  /// Throws if the tape was not produced by a matching forward.
  void backward(Tape& tape, const Tensor& grad_phi, double grad_delta,
                std::vector<double>& grads);

  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  /// Trainable parameter views in flat-gradient order (delta last, if present).
  std::vector<ParamView> param_views();
  std::size_t param_count();
  std::vector<double> snapshot();
  void restore(const std::vector<double>& flat);

  double delta() const { return delta_; }
  void set_delta(double v) { delta_ = v; }
  bool has_delta() const { return spec_.relaxed; }

  /// Index of delta within the flat parameter layout; only valid when relaxed.
  std::size_t delta_index();

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  double delta_ = 0.0;
};

/// Hidden widths for the parameter-matched MLP: the base MLP shape scaled so
/// its total parameter count lands within 2% of the spline KAN's.
std::vector<std::size_t> matched_mlp_hidden(const NetworkSpec& spec);

/// Analytic parameter count for a spec (must equal the allocated count).
std::size_t expected_param_count(const NetworkSpec& spec);

}  // namespace selfshap

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
#include "selfshap/network.h"

#include <cmath>
#include <stdexcept>

namespace selfshap {

std::string to_string(BackboneKind k) {
  switch (k) {
    case BackboneKind::kKanSpline: return "kan_spline";
    case BackboneKind::kKanRbf: return "kan_rbf";
    case BackboneKind::kMlp: return "mlp";
    case BackboneKind::kMlpMatched: return "mlp_matched";
  }
  return "kan_spline";
}

BackboneKind backbone_from_string(const std::string& s) {
  if (s == "kan_spline" || s == "kan-spline") return BackboneKind::kKanSpline;
  if (s == "kan_rbf" || s == "kan-rbf") return BackboneKind::kKanRbf;
  if (s == "mlp") return BackboneKind::kMlp;
  if (s == "mlp_matched" || s == "mlp-matched") return BackboneKind::kMlpMatched;
  throw std::invalid_argument("unknown backbone: " + s);
}

void NetworkSpec::validate() const {
  if (n_features == 0) throw std::invalid_argument("NetworkSpec: n_features must be positive");
  if (n_outputs == 0) throw std::invalid_argument("NetworkSpec: n_outputs must be positive");
  // An empty hidden list is allowed: the backbone degenerates to one layer
  // mapping features straight to the attribution matrix.
}

std::vector<double> AttributionMatrix::column(std::size_t j) const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = values[i * d + j];
  return out;
}

std::vector<double> AttributionMatrix::column_sums() const {
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[j] += values[i * d + j];
  }
  return out;
}

namespace {

KanLayerConfig kan_cfg(const NetworkSpec& spec, std::size_t in, std::size_t out, bool rbf) {
  KanLayerConfig cfg;
  cfg.in_dim = in;
  cfg.out_dim = out;
  cfg.spline_degree = spec.spline_degree;
  cfg.grid_size = spec.grid_size;
  if (rbf) {
    cfg.grid_low = spec.rbf_low;
    cfg.grid_high = spec.rbf_high;
  } else {
    cfg.grid_low = spec.grid_low;
    cfg.grid_high = spec.grid_high;
  }
  cfg.rbf_centers = spec.rbf_centers;
  return cfg;
}

std::vector<std::size_t> layer_dims(const NetworkSpec& spec, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> dims;
  dims.push_back(spec.n_features);
  for (std::size_t h : hidden) dims.push_back(h);
  dims.push_back(spec.n_features * spec.n_outputs);
  return dims;
}

std::size_t mlp_param_count(const std::vector<std::size_t>& dims) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    bool hidden = l + 2 < dims.size();
    // Hidden linears are bias-free (the following batch norm re-centers);
    // the output linear keeps its bias.
    total += dims[l] * dims[l + 1] + (hidden ? 0 : dims[l + 1]);
    if (hidden) total += 2 * dims[l + 1];  // batch-norm gamma/beta
  }
  return total;
}

}  // namespace

std::size_t expected_param_count(const NetworkSpec& spec) {
  auto dims = layer_dims(spec, spec.backbone == BackboneKind::kMlpMatched
                                   ? matched_mlp_hidden(spec)
                                   : spec.hidden);
  std::size_t total = 0;
  switch (spec.backbone) {
    case BackboneKind::kKanSpline:
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        total += dims[l] * dims[l + 1] * (spec.grid_size + spec.spline_degree) +
                 dims[l] * dims[l + 1];
      }
      break;
    case BackboneKind::kKanRbf:
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        total += dims[l] * dims[l + 1] * spec.rbf_centers;
      }
      break;
    case BackboneKind::kMlp:
    case BackboneKind::kMlpMatched:
      total = mlp_param_count(dims);
      break;
  }
  if (spec.relaxed) total += 1;
  return total;
}

std::vector<std::size_t> matched_mlp_hidden(const NetworkSpec& spec) {
  NetworkSpec kan = spec;
  kan.backbone = BackboneKind::kKanSpline;
  kan.relaxed = false;
  std::size_t target = expected_param_count(kan);

  auto count_for = [&](double scale) {
    std::vector<std::size_t> hid;
    hid.reserve(spec.hidden.size());
    for (std::size_t h : spec.hidden) {
      hid.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(h * scale))));
    }
    return std::pair<std::vector<std::size_t>, std::size_t>(hid, mlp_param_count(layer_dims(spec, hid)));
  };

  // Parameter count grows monotonically with the scale; bisect, then take the
  // closer endpoint.
  double lo = 1.0, hi = 1.0;
  while (count_for(hi).second < target) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_for(mid).second < target) lo = mid; else hi = mid;
  }
  auto a = count_for(lo), b = count_for(hi);
  auto diff = [&](std::size_t c) {
    return c > target ? c - target : target - c;
  };
  return diff(a.second) <= diff(b.second) ? a.first : b.first;
}

ShapNetwork ShapNetwork::build(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  ShapNetwork net;
  net.spec_ = spec;
  net.delta_ = 0.0;

  std::vector<std::size_t> hidden =
      spec.backbone == BackboneKind::kMlpMatched ? matched_mlp_hidden(spec) : spec.hidden;
  auto dims = layer_dims(spec, hidden);

  switch (spec.backbone) {
    case BackboneKind::kKanSpline:
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        net.layers_.push_back(
            std::make_unique<KanSplineLayer>(kan_cfg(spec, dims[l], dims[l + 1], false)));
      }
      break;
    case BackboneKind::kKanRbf:
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        net.layers_.push_back(
            std::make_unique<KanRbfLayer>(kan_cfg(spec, dims[l], dims[l + 1], true)));
      }
      break;
    case BackboneKind::kMlp:
    case BackboneKind::kMlpMatched:
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        bool hidden = l + 2 < dims.size();
        net.layers_.push_back(std::make_unique<LinearLayer>(dims[l], dims[l + 1], !hidden));
        if (hidden) {
          net.layers_.push_back(std::make_unique<BatchNormLayer>(dims[l + 1]));
          net.layers_.push_back(std::make_unique<ReluLayer>(dims[l + 1]));
        }
      }
      break;
  }

  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    Rng layer_rng = rng.split(i);
    net.layers_[i]->init(layer_rng);
  }
  return net;
}

Tensor ShapNetwork::logits_from_phi(const Tensor& phi) const {
  std::size_t rows = phi.rows();
  std::size_t n = spec_.n_features, d = spec_.n_outputs;
  Tensor logits = Tensor::matrix(rows, d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* pr = phi.row_ptr(r);
    double* lr = logits.row_ptr(r);
    for (std::size_t j = 0; j < d; ++j) lr[j] = delta_;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) lr[j] += pr[i * d + j];
    }
  }
  return logits;
}

ForwardOut ShapNetwork::forward(const Tensor& X, RunMode mode, Tape* tape) {
  if (X.cols() != spec_.n_features) {
    throw std::invalid_argument("ShapNetwork::forward: expected " +
                                std::to_string(spec_.n_features) + " features, got " +
                                std::to_string(X.cols()));
  }
  if (tape != nullptr) {
    tape->ctx.clear();
    tape->ctx.reserve(layers_.size());
    tape->rows = X.rows();
    tape->live = true;
  }
  Tensor cur = X;
  Tensor next;
  for (auto& layer : layers_) {
    auto ctx = layer->forward(cur, next, mode);
    if (tape != nullptr) tape->ctx.push_back(std::move(ctx));
    std::swap(cur, next);
  }
  ForwardOut out;
  out.phi = std::move(cur);
  out.logits = logits_from_phi(out.phi);
  out.pred = stable_link(out.logits, spec_.link);
  return out;
}

AttributionMatrix ShapNetwork::explain(const std::vector<double>& x) {
  Tensor X = Tensor::row(x);
  ForwardOut fo = forward(X, RunMode::kEval);
  AttributionMatrix am;
  am.n = spec_.n_features;
  am.d = spec_.n_outputs;
  am.values.assign(fo.phi.data(), fo.phi.data() + am.n * am.d);
  return am;
}

void ShapNetwork::backward(Tape& tape, const Tensor& grad_phi, double grad_delta,
                           std::vector<double>& grads) {
  if (!tape.live || tape.ctx.size() != layers_.size()) {
    throw std::runtime_error("ShapNetwork::backward: no matching forward recorded");
  }
  if (grad_phi.rows() != tape.rows) {
    throw std::invalid_argument("ShapNetwork::backward: gradient row mismatch");
  }
  if (grads.size() != param_count()) {
    throw std::invalid_argument("ShapNetwork::backward: gradient buffer size mismatch");
  }

  // Per-layer offsets into the flat buffer, matching param_views() order.
  std::vector<std::size_t> offsets(layers_.size() + 1, 0);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    offsets[i + 1] = offsets[i] + layers_[i]->param_count();
  }

  Tensor grad_cur = grad_phi;
  Tensor grad_prev;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    layers_[i]->backward(*tape.ctx[i], grad_cur, grad_prev, grads.data() + offsets[i]);
    std::swap(grad_cur, grad_prev);
  }
  if (spec_.relaxed) {
    grads[offsets.back()] += grad_delta;
  }
  tape.live = false;
}

std::vector<ParamView> ShapNetwork::param_views() {
  std::vector<ParamView> views;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& v : layers_[i]->params()) {
      views.push_back({"L" + std::to_string(i) + "." + v.name, v.data, v.size});
    }
  }
  if (spec_.relaxed) views.push_back({"delta", &delta_, 1});
  return views;
}

std::size_t ShapNetwork::param_count() {
  std::size_t n = 0;
  for (const auto& v : param_views()) n += v.size;
  return n;
}

std::size_t ShapNetwork::delta_index() {
  if (!spec_.relaxed) throw std::logic_error("delta_index: network has no bias term");
  return param_count() - 1;
}

std::vector<double> ShapNetwork::snapshot() {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& v : param_views()) flat.insert(flat.end(), v.data, v.data + v.size);
  return flat;
}

void ShapNetwork::restore(const std::vector<double>& flat) {
  std::size_t off = 0;
  for (auto& v : param_views()) {
    if (off + v.size > flat.size()) throw std::invalid_argument("restore: snapshot too small");
    std::copy(flat.begin() + off, flat.begin() + off + v.size, v.data);
    off += v.size;
  }
  if (off != flat.size()) throw std::invalid_argument("restore: snapshot size mismatch");
}

}  // namespace selfshap

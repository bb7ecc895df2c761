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
#include "selfshap/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfshap/adam.h"
#include "selfshap/parallel.h"

namespace selfshap {

namespace {

// Stream tags for derived RNGs.
constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kShuffleTag = 2;
constexpr std::uint64_t kMaskTag = 3;
constexpr std::uint64_t kOversampleTag = 4;
constexpr std::uint64_t kValMaskTag = 5;
constexpr std::uint64_t kOutputPickTag = 6;

// Gradient reduction runs over a fixed number of lanes; lane l owns chunks
// {c : c % kLanes == l} in increasing order, so sums are bit-identical for
// any worker count.
constexpr std::size_t kLanes = 8;
constexpr std::size_t kChunkRows = 8;

struct BatchLoss {
  double pred = 0.0;
  double shap = 0.0;
};

/// Adam over the network's scattered parameter storage via a flat mirror.
void adam_apply(AdamState& adam, ShapNetwork& net, const std::vector<double>& grads) {
  std::vector<double> flat = net.snapshot();
  adam.step(flat.data(), grads.data(), flat.size());
  net.restore(flat);
}

std::vector<double> column_means(const Tensor& phi, std::size_t n, std::size_t d) {
  std::vector<double> g(d, 0.0);
  std::size_t rows = phi.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* pr = phi.row_ptr(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) g[j] += pr[i * d + j];
    }
  }
  for (double& v : g) v /= static_cast<double>(rows);
  return g;
}

Tensor baseline_rows(const ValueFunction& vf, std::size_t n) {
  if (vf.kind == ValueFunctionKind::kBaselineRemoval) {
    Tensor X = Tensor::matrix(1, n);
    std::copy(vf.baseline.begin(), vf.baseline.end(), X.row_ptr(0));
    return X;
  }
  return vf.background;
}

/// One batch of the dual-objective loss. Computes prediction + coalition
/// losses; when `grads` is non-null, accumulates d(total)/d(theta) for the
/// mean-over-batch loss. `x_mode` applies to the unmasked pass only; masked
/// and baseline passes always evaluate with running statistics so the game
/// value is a per-instance function.
BatchLoss run_batch(ShapNetwork& net, const Tensor& Xb, const std::vector<double>& yb,
                    const TrainConfig& cfg, const ValueFunction& vf, Rng mask_root,
                    std::size_t slot_base, RunMode x_mode, std::vector<double>* grads) {
  const std::size_t B = Xb.rows();
  const std::size_t n = net.n_features();
  const std::size_t d = net.n_outputs();
  const std::size_t K = cfg.coalitions;
  const std::size_t bg = vf.kind == ValueFunctionKind::kMarginalExpectation ? vf.background.rows() : 1;
  const bool want_grads = grads != nullptr;
  const std::size_t j_count = cfg.shapley_outputs == ShapleyLossOutputs::kAll ? d : 1;
  const double shap_norm = 1.0 / static_cast<double>(B * K * j_count);

  // Baseline pass: constant within the batch, shared by every residual.
  Tensor X0 = baseline_rows(vf, n);
  Tape tape0;
  ForwardOut f0 = net.forward(X0, RunMode::kEval, want_grads ? &tape0 : nullptr);
  std::vector<double> g0 = column_means(f0.phi, n, d);

  // Unmasked pass: the only one that can advance batch-norm running stats.
  Tape tape_x;
  ForwardOut fx = net.forward(Xb, x_mode, want_grads ? &tape_x : nullptr);
  fx.phi.check_finite("training forward");

  // Prediction loss and its upstream logit gradients.
  BatchLoss loss;
  std::vector<double> up_logits(B * d, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    loss.pred += prediction_loss_grad(fx.pred.row_ptr(b), fx.logits.row_ptr(b), d, yb[b],
                                      cfg.task, net.spec().link, up_logits.data() + b * d);
  }
  loss.pred /= static_cast<double>(B);

  // Column shift applied to phi before the residual when the efficiency
  // constraint is on: phi column sums then equal g(x) - g(0) exactly.
  std::vector<double> shift(d, 0.0);
  if (cfg.efficiency_normalization) {
    for (std::size_t j = 0; j < d; ++j) shift[j] = -g0[j] / static_cast<double>(n);
  }

  const std::size_t n_chunks = (B + kChunkRows - 1) / kChunkRows;
  std::vector<std::vector<double>> lane_grads;
  if (want_grads) lane_grads.assign(kLanes, std::vector<double>(grads->size(), 0.0));
  std::vector<std::vector<double>> lane_ub(kLanes, std::vector<double>(d, 0.0));
  std::vector<double> lane_shap(kLanes, 0.0);
  Tensor up_x = Tensor::matrix(B, n * d);  // coalition-loss upstream on the unmasked pass

  parallel_chunks(kLanes, 1, [&](std::size_t, std::size_t lane, std::size_t) {
    Tensor masked_in, up_masked, grad_in_scratch;
    std::vector<CoalitionMask> masks;
    for (std::size_t c = lane; c < n_chunks; c += kLanes) {
      std::size_t r0 = c * kChunkRows;
      std::size_t r1 = std::min(r0 + kChunkRows, B);
      std::size_t rows = r1 - r0;

      masks.clear();
      masks.reserve(rows * K);
      for (std::size_t b = r0; b < r1; ++b) {
        KernelSampler sampler(n, mask_root.split(slot_base + b));
        for (std::size_t k = 0; k < K; ++k) masks.push_back(sampler.sample());
      }

      masked_in = Tensor::matrix(rows * K * bg, n);
      for (std::size_t b = r0; b < r1; ++b) {
        for (std::size_t k = 0; k < K; ++k) {
          const CoalitionMask& m = masks[(b - r0) * K + k];
          for (std::size_t r = 0; r < bg; ++r) {
            const double* fill = vf.kind == ValueFunctionKind::kBaselineRemoval
                                     ? vf.baseline.data()
                                     : vf.background.row_ptr(r);
            apply_mask_row(Xb.row_ptr(b), m, fill, masked_in.row_ptr(((b - r0) * K + k) * bg + r), n);
          }
        }
      }

      Tape tape_m;
      ForwardOut fm = net.forward(masked_in, RunMode::kEval, want_grads ? &tape_m : nullptr);

      if (want_grads) {
        up_masked = Tensor::matrix(rows * K * bg, n * d);
      }
      for (std::size_t b = r0; b < r1; ++b) {
        const double* phi_b = fx.phi.row_ptr(b);
        double* ux = up_x.row_ptr(b);
        for (std::size_t k = 0; k < K; ++k) {
          const CoalitionMask& m = masks[(b - r0) * K + k];
          std::size_t base_row = ((b - r0) * K + k) * bg;
          for (std::size_t jj = 0; jj < j_count; ++jj) {
            std::size_t j = cfg.shapley_outputs == ShapleyLossOutputs::kAll
                                ? jj
                                : static_cast<std::size_t>(yb[b]);
            double gS = 0.0;
            for (std::size_t r = 0; r < bg; ++r) {
              const double* pr = fm.phi.row_ptr(base_row + r);
              for (std::size_t i = 0; i < n; ++i) gS += pr[i * d + j];
            }
            gS /= static_cast<double>(bg);

            double masked_sum = static_cast<double>(m.cardinality()) * shift[j];
            for (std::size_t i = 0; i < n; ++i) {
              if (m.test(i)) masked_sum += phi_b[i * d + j];
            }
            double resid = gS - g0[j] - masked_sum;
            lane_shap[lane] += resid * resid * shap_norm;

            if (want_grads) {
              double cgrad = 2.0 * cfg.beta * resid * shap_norm;
              double per_row = cgrad / static_cast<double>(bg);
              for (std::size_t r = 0; r < bg; ++r) {
                double* um = up_masked.row_ptr(base_row + r);
                for (std::size_t i = 0; i < n; ++i) um[i * d + j] += per_row;
              }
              for (std::size_t i = 0; i < n; ++i) {
                if (m.test(i)) ux[i * d + j] -= cgrad;
              }
              double card_frac = cfg.efficiency_normalization
                                     ? static_cast<double>(m.cardinality()) / static_cast<double>(n)
                                     : 0.0;
              lane_ub[lane][j] += cgrad * (card_frac - 1.0);
            }
          }
        }
      }

      if (want_grads) {
        net.backward(tape_m, up_masked, 0.0, lane_grads[lane]);
      }
    }
  });

  for (std::size_t l = 0; l < kLanes; ++l) loss.shap += lane_shap[l];

  if (want_grads) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const auto& lg = lane_grads[l];
      for (std::size_t i = 0; i < grads->size(); ++i) (*grads)[i] += lg[i];
    }
    std::vector<double> ub(d, 0.0);
    for (std::size_t l = 0; l < kLanes; ++l) {
      for (std::size_t j = 0; j < d; ++j) ub[j] += lane_ub[l][j];
    }

    // Unmasked pass: prediction-loss upstream broadcast over rows, plus the
    // coalition-loss mask terms.
    double inv_b = 1.0 / static_cast<double>(B);
    double grad_delta = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      double* ux = up_x.row_ptr(b);
      for (std::size_t j = 0; j < d; ++j) {
        double g = up_logits[b * d + j] * inv_b;
        grad_delta += g;
        for (std::size_t i = 0; i < n; ++i) ux[i * d + j] += g;
      }
    }
    net.backward(tape_x, up_x, grad_delta, *grads);

    // Baseline pass: residuals read g0 directly and through the column shift.
    Tensor up0 = Tensor::matrix(X0.rows(), n * d);
    double inv_rows0 = 1.0 / static_cast<double>(X0.rows());
    for (std::size_t r = 0; r < X0.rows(); ++r) {
      double* u0 = up0.row_ptr(r);
      for (std::size_t j = 0; j < d; ++j) {
        double g = ub[j] * inv_rows0;
        for (std::size_t i = 0; i < n; ++i) u0[i * d + j] = g;
      }
    }
    net.backward(tape0, up0, 0.0, *grads);
  }

  return loss;
}

void assert_local_accuracy(const ShapNetwork& net, const ForwardOut& fo, double tol) {
  std::size_t n = net.n_features(), d = net.n_outputs();
  for (std::size_t b = 0; b < fo.phi.rows(); ++b) {
    const double* pr = fo.phi.row_ptr(b);
    for (std::size_t j = 0; j < d; ++j) {
      double sum = net.delta();
      for (std::size_t i = n; i-- > 0;) sum += pr[i * d + j];
      if (std::fabs(fo.logits(b, j) - sum) > tol) {
        throw std::runtime_error("local accuracy violated: logit differs from attribution sum");
      }
    }
  }
}

}  // namespace

LossReport batch_loss(ShapNetwork& net, const Tensor& x_batch, const std::vector<double>& y_batch,
                      const TrainConfig& cfg, const ValueFunction& vf, std::vector<double>* grads,
                      bool use_batch_stats) {
  cfg.validate();
  Rng mask_root = Rng(cfg.seed).split(kMaskTag).split(0);
  RunMode mode = use_batch_stats ? RunMode::kTrainFrozenStats : RunMode::kEval;
  BatchLoss bl = run_batch(net, x_batch, y_batch, cfg, vf, mask_root, 0, mode, grads);
  LossReport report;
  report.prediction = bl.pred;
  report.shapley = bl.shap;
  report.total = bl.pred + cfg.beta * bl.shap;
  return report;
}

void TrainConfig::validate() const {
  if (coalitions < 1) throw std::invalid_argument("TrainConfig: coalitions must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("TrainConfig: beta must be non-negative");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
}

std::vector<std::size_t> oversample_minority(const std::vector<std::size_t>& train_rows,
                                             const std::vector<double>& labels, Rng rng) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t idx : train_rows) {
    double y = labels[idx];
    if (y == 0.0) {
      neg.push_back(idx);
    } else if (y == 1.0) {
      pos.push_back(idx);
    } else {
      throw std::invalid_argument("oversample_minority: labels must be binary 0/1");
    }
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("oversample_minority: both classes must be present");
  }
  std::vector<std::size_t> out = train_rows;
  auto& minority = pos.size() < neg.size() ? pos : neg;
  std::size_t deficit = std::max(pos.size(), neg.size()) - minority.size();
  for (std::size_t i = 0; i < deficit; ++i) {
    out.push_back(minority[rng.uniform_int(minority.size())]);
  }
  return out;
}

TrainResult train(const Tensor& x_train, const std::vector<double>& y_train, const Tensor& x_val,
                  const std::vector<double>& y_val, NetworkSpec spec, const TrainConfig& cfg) {
  cfg.validate();
  if (x_train.rows() == 0 || x_val.rows() == 0) {
    throw std::invalid_argument("train: empty split");
  }
  if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size()) {
    throw std::invalid_argument("train: feature/label row mismatch");
  }
  spec.relaxed = cfg.relaxed;
  validate_task_link(cfg.task, spec.link, spec.n_outputs);
  if (cfg.oversample_minority && cfg.task != TaskKind::kBinary) {
    throw std::invalid_argument("oversampling applies to binary tasks only");
  }

  const std::size_t n = spec.n_features;
  Rng root(cfg.seed);

  ValueFunction vf;
  if (cfg.value_function == ValueFunctionKind::kBaselineRemoval) {
    vf = ValueFunction::baseline_removal(n);
  } else {
    std::size_t m = std::min(cfg.marginal_background, x_val.rows());
    Tensor bg = Tensor::matrix(m, n);
    for (std::size_t r = 0; r < m; ++r) {
      std::copy(x_val.row_ptr(r), x_val.row_ptr(r) + n, bg.row_ptr(r));
    }
    vf = ValueFunction::marginal(std::move(bg));
  }

  Rng init_rng = root.split(kInitTag);
  TrainResult result;
  result.net = ShapNetwork::build(spec, init_rng);
  ShapNetwork& net = result.net;

  std::vector<std::size_t> rows(x_train.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (cfg.oversample_minority) {
    rows = oversample_minority(rows, y_train, root.split(kOversampleTag));
  }

  const std::size_t n_params = net.param_count();
  AdamState adam(n_params, cfg.learning_rate);
  std::vector<double> grads(n_params, 0.0);

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = net.snapshot();
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Seeded shuffle of the (possibly oversampled) row list.
    Rng shuffle_rng = root.split(kShuffleTag).split(epoch);
    std::vector<std::size_t> order = rows;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = shuffle_rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }

    Rng mask_root = root.split(kMaskTag).split(epoch);
    double tr_pred = 0.0, tr_shap = 0.0;
    std::size_t tr_rows = 0;

    for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(start + cfg.batch_size, order.size());
      if (stop - start < 2) break;
      std::size_t B = stop - start;
      Tensor Xb = Tensor::matrix(B, n);
      std::vector<double> yb(B);
      for (std::size_t b = 0; b < B; ++b) {
        std::copy(x_train.row_ptr(order[start + b]), x_train.row_ptr(order[start + b]) + n,
                  Xb.row_ptr(b));
        yb[b] = y_train[order[start + b]];
      }

      std::fill(grads.begin(), grads.end(), 0.0);
      BatchLoss bl = run_batch(net, Xb, yb, cfg, vf, mask_root, start, RunMode::kTrain, &grads);
      if (!std::isfinite(bl.pred) || !std::isfinite(bl.shap)) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(start / cfg.batch_size));
      }
      tr_pred += bl.pred * static_cast<double>(B);
      tr_shap += bl.shap * static_cast<double>(B);
      tr_rows += B;

      adam_apply(adam, net, grads);
    }
    if (tr_rows == 0) throw std::invalid_argument("train: training split too small for one batch");

    // Validation pass (pure function of the parameters).
    Rng val_mask_root = root.split(kValMaskTag).split(epoch);
    double va_pred = 0.0, va_shap = 0.0;
    std::size_t va_rows = 0;
    for (std::size_t start = 0; start < x_val.rows(); start += cfg.batch_size) {
      std::size_t stop = std::min(start + cfg.batch_size, x_val.rows());
      std::size_t B = stop - start;
      Tensor Xb = Tensor::matrix(B, n);
      std::vector<double> yb(B);
      for (std::size_t b = 0; b < B; ++b) {
        std::copy(x_val.row_ptr(start + b), x_val.row_ptr(start + b) + n, Xb.row_ptr(b));
        yb[b] = y_val[start + b];
      }
      BatchLoss bl = run_batch(net, Xb, yb, cfg, vf, val_mask_root, start, RunMode::kEval, nullptr);
      va_pred += bl.pred * static_cast<double>(B);
      va_shap += bl.shap * static_cast<double>(B);
      va_rows += B;
      if (start == 0) {
        ForwardOut fo = net.forward(Xb, RunMode::kEval);
        assert_local_accuracy(net, fo, 1e-9);
      }
    }

    EpochLog log;
    log.train.epoch = epoch;
    log.train.prediction = tr_pred / static_cast<double>(tr_rows);
    log.train.shapley = tr_shap / static_cast<double>(tr_rows);
    log.train.total = log.train.prediction + cfg.beta * log.train.shapley;
    log.val.epoch = epoch;
    log.val.prediction = va_pred / static_cast<double>(va_rows);
    log.val.shapley = va_shap / static_cast<double>(va_rows);
    log.val.total = log.val.prediction + cfg.beta * log.val.shapley;
    result.epochs.push_back(log);

    if (log.val.total < best_val) {
      best_val = log.val.total;
      best_params = net.snapshot();
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  net.restore(best_params);
  return result;
}

TrainResult train_fastshap(ShapNetwork& blackbox, const Tensor& x_train, const Tensor& x_val,
                           NetworkSpec explainer_spec, const TrainConfig& cfg) {
  cfg.validate();
  if (x_train.rows() == 0 || x_val.rows() == 0) {
    throw std::invalid_argument("train_fastshap: empty split");
  }
  const std::size_t n = blackbox.n_features();
  const std::size_t d = blackbox.n_outputs();
  explainer_spec.n_features = n;
  explainer_spec.n_outputs = d;
  explainer_spec.link = LinkKind::kIdentity;
  explainer_spec.relaxed = false;

  Rng root(cfg.seed);
  ValueFunction vf = ValueFunction::baseline_removal(n);
  if (cfg.value_function == ValueFunctionKind::kMarginalExpectation) {
    throw std::invalid_argument("train_fastshap: baseline removal only");
  }

  Rng init_rng = root.split(kInitTag);
  TrainResult result;
  result.net = ShapNetwork::build(explainer_spec, init_rng);
  ShapNetwork& expl = result.net;

  // The frozen model's baseline logits are constant across training.
  Tensor X0 = baseline_rows(vf, n);
  std::vector<double> g0(d, 0.0);
  {
    ForwardOut f0 = blackbox.forward(X0, RunMode::kEval);
    for (std::size_t j = 0; j < d; ++j) g0[j] = f0.logits(0, j);
  }

  const std::size_t n_params = expl.param_count();
  AdamState adam(n_params, cfg.learning_rate);
  std::vector<double> grads(n_params, 0.0);
  const std::size_t K = cfg.coalitions;

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = expl.snapshot();
  std::size_t bad_epochs = 0;

  auto run_fastshap_batch = [&](const Tensor& Xb, Rng mask_root, std::size_t slot_base,
                                bool training, std::vector<double>* out_grads) {
    std::size_t B = Xb.rows();
    double shap_norm = 1.0 / static_cast<double>(B * K);

    Tape tape_e;
    ForwardOut fe = expl.forward(Xb, training ? RunMode::kTrain : RunMode::kEval,
                                 out_grads != nullptr ? &tape_e : nullptr);
    ForwardOut fb = blackbox.forward(Xb, RunMode::kEval);

    Tensor up_e = Tensor::matrix(B, n * d);
    double loss = 0.0;
    std::vector<CoalitionMask> masks;
    masks.reserve(K);
    for (std::size_t b = 0; b < B; ++b) {
      KernelSampler sampler(n, mask_root.split(slot_base + b));
      Rng pick = root.split(kOutputPickTag).split(slot_base + b);
      masks.clear();
      for (std::size_t k = 0; k < K; ++k) masks.push_back(sampler.sample());

      Tensor masked_in = Tensor::matrix(K, n);
      for (std::size_t k = 0; k < K; ++k) {
        apply_mask_row(Xb.row_ptr(b), masks[k], vf.baseline.data(), masked_in.row_ptr(k), n);
      }
      ForwardOut fm = blackbox.forward(masked_in, RunMode::kEval);

      const double* e_b = fe.phi.row_ptr(b);
      double* ue = up_e.row_ptr(b);
      for (std::size_t k = 0; k < K; ++k) {
        std::size_t j = d > 1 ? static_cast<std::size_t>(pick.uniform_int(d)) : 0;
        double esum = 0.0;
        for (std::size_t i = 0; i < n; ++i) esum += e_b[i * d + j];
        double bbdiff = fb.logits(b, j) - g0[j];
        double shift = cfg.efficiency_normalization ? (bbdiff - esum) / static_cast<double>(n) : 0.0;

        double masked_sum = static_cast<double>(masks[k].cardinality()) * shift;
        for (std::size_t i = 0; i < n; ++i) {
          if (masks[k].test(i)) masked_sum += e_b[i * d + j];
        }
        double resid = fm.logits(k, j) - g0[j] - masked_sum;
        loss += resid * resid * shap_norm;

        if (out_grads != nullptr) {
          double cgrad = 2.0 * resid * shap_norm;
          double card_frac = cfg.efficiency_normalization
                                 ? static_cast<double>(masks[k].cardinality()) / static_cast<double>(n)
                                 : 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            double ind = masks[k].test(i) ? 1.0 : 0.0;
            ue[i * d + j] -= cgrad * (ind - card_frac);
          }
        }
      }
    }
    if (out_grads != nullptr) {
      expl.backward(tape_e, up_e, 0.0, *out_grads);
    }
    return loss;
  };

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = root.split(kShuffleTag).split(epoch);
    std::vector<std::size_t> order(x_train.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = shuffle_rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }

    Rng mask_root = root.split(kMaskTag).split(epoch);
    double tr_loss = 0.0;
    std::size_t tr_rows = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(start + cfg.batch_size, order.size());
      if (stop - start < 2) break;
      std::size_t B = stop - start;
      Tensor Xb = Tensor::matrix(B, n);
      for (std::size_t b = 0; b < B; ++b) {
        std::copy(x_train.row_ptr(order[start + b]), x_train.row_ptr(order[start + b]) + n,
                  Xb.row_ptr(b));
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      double l = run_fastshap_batch(Xb, mask_root, start, true, &grads);
      if (!std::isfinite(l)) {
        throw std::runtime_error("fastshap training diverged at epoch " + std::to_string(epoch));
      }
      tr_loss += l * static_cast<double>(B);
      tr_rows += B;
      adam_apply(adam, expl, grads);
    }
    if (tr_rows == 0) throw std::invalid_argument("train_fastshap: training split too small");

    Rng val_mask_root = root.split(kValMaskTag).split(epoch);
    double va_loss = 0.0;
    std::size_t va_rows = 0;
    for (std::size_t start = 0; start < x_val.rows(); start += cfg.batch_size) {
      std::size_t stop = std::min(start + cfg.batch_size, x_val.rows());
      std::size_t B = stop - start;
      Tensor Xb = Tensor::matrix(B, n);
      for (std::size_t b = 0; b < B; ++b) {
        std::copy(x_val.row_ptr(start + b), x_val.row_ptr(start + b) + n, Xb.row_ptr(b));
      }
      va_loss += run_fastshap_batch(Xb, val_mask_root, start, false, nullptr) * static_cast<double>(B);
      va_rows += B;
    }

    EpochLog log;
    log.train.epoch = epoch;
    log.train.shapley = tr_loss / static_cast<double>(tr_rows);
    log.train.total = log.train.shapley;
    log.val.epoch = epoch;
    log.val.shapley = va_loss / static_cast<double>(va_rows);
    log.val.total = log.val.shapley;
    result.epochs.push_back(log);

    if (log.val.total < best_val) {
      best_val = log.val.total;
      best_params = expl.snapshot();
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }
  expl.restore(best_params);
  return result;
}

}  // namespace selfshap

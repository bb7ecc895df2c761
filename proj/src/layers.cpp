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
#include "selfshap/layers.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "selfshap/link.h"

namespace selfshap {

namespace {
constexpr std::size_t kMaxDegree = 8;

void resize_out(Tensor& out, std::size_t rows, std::size_t cols) {
  if (out.rows() != rows || out.cols() != cols || out.rank() != 2) {
    out = Tensor::matrix(rows, cols);
  } else {
    out.fill(0.0);
  }
}
}  // namespace

double silu(double x) { return x * stable_sigmoid(x); }

double silu_grad(double x) {
  double s = stable_sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

std::size_t Layer::param_count() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.size;
  return n;
}

void KanLayerConfig::validate() const {
  if (in_dim == 0 || out_dim == 0) throw std::invalid_argument("KAN layer: zero dimension");
  if (spline_degree < 1) throw std::invalid_argument("KAN layer: spline_degree must be >= 1");
  if (spline_degree > kMaxDegree) throw std::invalid_argument("KAN layer: spline_degree too large");
  if (grid_size < 2) throw std::invalid_argument("KAN layer: grid_size must be >= 2");
  if (!(grid_low < grid_high)) throw std::invalid_argument("KAN layer: grid range empty");
  if (rbf_centers < 2) throw std::invalid_argument("KAN layer: rbf_centers must be >= 2");
}

// ---------------------------------------------------------------------------
// KanSplineLayer

namespace {

// Cox-de Boor triangle over uniform extended knots. On entry x lies in the
// clamped interval `span` (counting from grid_low, spans 0..grid-1); outside
// the grid the boundary interval's polynomial pieces extrapolate.
// Writes the degree-D values N[0..D] (basis indices span..span+D) and the
// degree-(D-1) row into nm1[0..D-1] when nm1 is non-null.
void basis_triangle(double x, double lo, double h, std::size_t degree, long span, double* n_out,
                    double* nm1_out) {
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  n_out[0] = 1.0;
  // Knot i (extended) sits at lo + (i - degree) * h; the interval index in
  // knot coordinates is j = span + degree.
  double xj = lo + static_cast<double>(span) * h;  // knot at the interval start
  for (std::size_t d = 1; d <= degree; ++d) {
    left[d] = x - (xj - static_cast<double>(d - 1) * h);
    right[d] = (xj + static_cast<double>(d) * h) - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double temp = n_out[r] / (right[r + 1] + left[d - r]);
      n_out[r] = saved + right[r + 1] * temp;
      saved = left[d - r] * temp;
    }
    n_out[d] = saved;
    if (nm1_out != nullptr && d == degree - 1) {
      std::copy(n_out, n_out + degree, nm1_out);
    }
  }
  if (nm1_out != nullptr && degree == 1) {
    nm1_out[0] = 1.0;
  }
}

long clamped_span(double x, double lo, double h, std::size_t grid) {
  double t = std::floor((x - lo) / h);
  long s = static_cast<long>(t);
  if (s < 0) s = 0;
  if (s > static_cast<long>(grid) - 1) s = static_cast<long>(grid) - 1;
  return s;
}

struct KanSplineCtx final : LayerCtx {
  std::size_t rows = 0, in = 0, deg = 0;
  std::vector<double> x;       // [rows][in]
  std::vector<long> span;      // [rows][in]
  std::vector<double> basis;   // [rows][in][deg+1]
  std::vector<double> dbasis;  // [rows][in][deg+1]
};

}  // namespace

KanSplineLayer::KanSplineLayer(KanLayerConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  h_ = (cfg_.grid_high - cfg_.grid_low) / static_cast<double>(cfg_.grid_size);
  coef_.assign(cfg_.in_dim * n_basis() * cfg_.out_dim, 0.0);
  base_w_.assign(cfg_.in_dim * cfg_.out_dim, 0.0);
}

std::vector<ParamView> KanSplineLayer::params() {
  return {{"coef", coef_.data(), coef_.size()}, {"base_w", base_w_.data(), base_w_.size()}};
}

void KanSplineLayer::init(Rng& rng) {
  double coef_sd = 0.1 / std::sqrt(static_cast<double>(cfg_.in_dim));
  for (double& c : coef_) c = coef_sd * rng.normal();
  double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.in_dim));
  for (double& w : base_w_) w = bound * (2.0 * rng.uniform() - 1.0);
}

void KanSplineLayer::basis_row(double x, double* values) const {
  std::fill(values, values + n_basis(), 0.0);
  long span = clamped_span(x, cfg_.grid_low, h_, cfg_.grid_size);
  double local[kMaxDegree + 1];
  basis_triangle(x, cfg_.grid_low, h_, cfg_.spline_degree, span, local, nullptr);
  for (std::size_t t = 0; t <= cfg_.spline_degree; ++t) {
    values[static_cast<std::size_t>(span) + t] = local[t];
  }
}

std::unique_ptr<LayerCtx> KanSplineLayer::forward(const Tensor& in, Tensor& out, RunMode) {
  std::size_t rows = in.rows();
  std::size_t nin = cfg_.in_dim;
  std::size_t nout = cfg_.out_dim;
  std::size_t deg = cfg_.spline_degree;
  if (in.cols() != nin) throw std::invalid_argument("kan_spline: input width mismatch");
  resize_out(out, rows, nout);

  auto ctx = std::make_unique<KanSplineCtx>();
  ctx->rows = rows;
  ctx->in = nin;
  ctx->deg = deg;
  ctx->x.assign(in.data(), in.data() + rows * nin);
  ctx->span.resize(rows * nin);
  ctx->basis.resize(rows * nin * (deg + 1));
  ctx->dbasis.resize(rows * nin * (deg + 1));

  double nm1[kMaxDegree + 1];
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.row_ptr(r);
    double* or_ = out.row_ptr(r);
    for (std::size_t p = 0; p < nin; ++p) {
      double xv = xr[p];
      long span = clamped_span(xv, cfg_.grid_low, h_, cfg_.grid_size);
      std::size_t slot = (r * nin + p) * (deg + 1);
      double* B = ctx->basis.data() + slot;
      double* dB = ctx->dbasis.data() + slot;
      basis_triangle(xv, cfg_.grid_low, h_, deg, span, B, nm1);
      for (std::size_t t = 0; t <= deg; ++t) {
        double lower = t > 0 ? nm1[t - 1] : 0.0;
        double upper = t < deg ? nm1[t] : 0.0;
        dB[t] = (lower - upper) / h_;
      }
      ctx->span[r * nin + p] = span;

      double s = silu(xv);
      const double* bw = base_w_.data() + p * nout;
      for (std::size_t q = 0; q < nout; ++q) or_[q] += s * bw[q];
      for (std::size_t t = 0; t <= deg; ++t) {
        double bv = B[t];
        const double* cq = coef_.data() + (p * n_basis() + static_cast<std::size_t>(span) + t) * nout;
        for (std::size_t q = 0; q < nout; ++q) or_[q] += bv * cq[q];
      }
    }
  }
  return ctx;
}

void KanSplineLayer::backward(const LayerCtx& ctx_in, const Tensor& grad_out, Tensor& grad_in,
                              double* param_grads) const {
  const auto& ctx = static_cast<const KanSplineCtx&>(ctx_in);
  std::size_t rows = ctx.rows;
  std::size_t nin = cfg_.in_dim;
  std::size_t nout = cfg_.out_dim;
  std::size_t deg = cfg_.spline_degree;
  resize_out(grad_in, rows, nin);

  double* g_coef = param_grads;                                    // [in][n_basis][out]
  double* g_base = param_grads + nin * n_basis() * nout;           // [in][out]

  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = grad_out.row_ptr(r);
    double* gi = grad_in.row_ptr(r);
    for (std::size_t p = 0; p < nin; ++p) {
      double xv = ctx.x[r * nin + p];
      long span = ctx.span[r * nin + p];
      std::size_t slot = (r * nin + p) * (deg + 1);
      const double* B = ctx.basis.data() + slot;
      const double* dB = ctx.dbasis.data() + slot;

      double s = silu(xv);
      double ds = silu_grad(xv);
      const double* bw = base_w_.data() + p * nout;
      double* gbw = g_base + p * nout;
      double dot_base = 0.0;
      for (std::size_t q = 0; q < nout; ++q) {
        dot_base += bw[q] * g[q];
        gbw[q] += s * g[q];
      }
      double dx = ds * dot_base;

      for (std::size_t t = 0; t <= deg; ++t) {
        std::size_t k = static_cast<std::size_t>(span) + t;
        const double* cq = coef_.data() + (p * n_basis() + k) * nout;
        double* gc = g_coef + (p * n_basis() + k) * nout;
        double bv = B[t];
        double dot = 0.0;
        for (std::size_t q = 0; q < nout; ++q) {
          dot += cq[q] * g[q];
          gc[q] += bv * g[q];
        }
        dx += dB[t] * dot;
      }
      gi[p] = dx;
    }
  }
}

// ---------------------------------------------------------------------------
// KanRbfLayer

namespace {
struct KanRbfCtx final : LayerCtx {
  std::size_t rows = 0, in = 0, centers = 0;
  std::vector<double> x;    // [rows][in]
  std::vector<double> phi;  // [rows][in][centers]
};
}  // namespace

KanRbfLayer::KanRbfLayer(KanLayerConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  h_ = (cfg_.grid_high - cfg_.grid_low) / static_cast<double>(cfg_.rbf_centers - 1);
  coef_.assign(cfg_.in_dim * cfg_.rbf_centers * cfg_.out_dim, 0.0);
}

double KanRbfLayer::center(std::size_t k) const {
  return cfg_.grid_low + static_cast<double>(k) * h_;
}

std::vector<ParamView> KanRbfLayer::params() {
  return {{"coef", coef_.data(), coef_.size()}};
}

void KanRbfLayer::init(Rng& rng) {
  double sd = 0.1 / std::sqrt(static_cast<double>(cfg_.in_dim));
  for (double& c : coef_) c = sd * rng.normal();
}

std::unique_ptr<LayerCtx> KanRbfLayer::forward(const Tensor& in, Tensor& out, RunMode) {
  std::size_t rows = in.rows();
  std::size_t nin = cfg_.in_dim;
  std::size_t nout = cfg_.out_dim;
  std::size_t nc = cfg_.rbf_centers;
  if (in.cols() != nin) throw std::invalid_argument("kan_rbf: input width mismatch");
  resize_out(out, rows, nout);

  auto ctx = std::make_unique<KanRbfCtx>();
  ctx->rows = rows;
  ctx->in = nin;
  ctx->centers = nc;
  ctx->x.assign(in.data(), in.data() + rows * nin);
  ctx->phi.resize(rows * nin * nc);

  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.row_ptr(r);
    double* or_ = out.row_ptr(r);
    for (std::size_t p = 0; p < nin; ++p) {
      double xv = xr[p];
      double* phi = ctx->phi.data() + (r * nin + p) * nc;
      for (std::size_t k = 0; k < nc; ++k) {
        double z = (xv - center(k)) / h_;
        phi[k] = std::exp(-z * z);
      }
      for (std::size_t k = 0; k < nc; ++k) {
        double bv = phi[k];
        const double* cq = coef_.data() + (p * nc + k) * nout;
        for (std::size_t q = 0; q < nout; ++q) or_[q] += bv * cq[q];
      }
    }
  }
  return ctx;
}

void KanRbfLayer::backward(const LayerCtx& ctx_in, const Tensor& grad_out, Tensor& grad_in,
                           double* param_grads) const {
  const auto& ctx = static_cast<const KanRbfCtx&>(ctx_in);
  std::size_t rows = ctx.rows;
  std::size_t nin = cfg_.in_dim;
  std::size_t nout = cfg_.out_dim;
  std::size_t nc = cfg_.rbf_centers;
  resize_out(grad_in, rows, nin);

  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = grad_out.row_ptr(r);
    double* gi = grad_in.row_ptr(r);
    for (std::size_t p = 0; p < nin; ++p) {
      double xv = ctx.x[r * nin + p];
      const double* phi = ctx.phi.data() + (r * nin + p) * nc;
      double dx = 0.0;
      for (std::size_t k = 0; k < nc; ++k) {
        const double* cq = coef_.data() + (p * nc + k) * nout;
        double* gc = param_grads + (p * nc + k) * nout;
        double bv = phi[k];
        double dot = 0.0;
        for (std::size_t q = 0; q < nout; ++q) {
          dot += cq[q] * g[q];
          gc[q] += bv * g[q];
        }
        double z = (xv - center(k)) / h_;
        dx += dot * bv * (-2.0 * z / h_);
      }
      gi[p] = dx;
    }
  }
}

// ---------------------------------------------------------------------------
// LinearLayer

namespace {
struct LinearCtx final : LayerCtx {
  std::vector<double> x;  // [rows][in]
  std::size_t rows = 0;
};
}  // namespace

LinearLayer::LinearLayer(std::size_t in_dim, std::size_t out_dim, bool with_bias)
    : in_(in_dim),
      out_(out_dim),
      with_bias_(with_bias),
      w_(in_dim * out_dim, 0.0),
      b_(with_bias ? out_dim : 0, 0.0) {}

std::vector<ParamView> LinearLayer::params() {
  if (!with_bias_) return {{"weight", w_.data(), w_.size()}};
  return {{"weight", w_.data(), w_.size()}, {"bias", b_.data(), b_.size()}};
}

void LinearLayer::init(Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  for (double& w : w_) w = bound * (2.0 * rng.uniform() - 1.0);
  for (double& b : b_) b = bound * (2.0 * rng.uniform() - 1.0);
}

std::unique_ptr<LayerCtx> LinearLayer::forward(const Tensor& in, Tensor& out, RunMode) {
  std::size_t rows = in.rows();
  if (in.cols() != in_) throw std::invalid_argument("linear: input width mismatch");
  resize_out(out, rows, out_);
  auto ctx = std::make_unique<LinearCtx>();
  ctx->rows = rows;
  ctx->x.assign(in.data(), in.data() + rows * in_);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.row_ptr(r);
    double* or_ = out.row_ptr(r);
    if (with_bias_) std::copy(b_.begin(), b_.end(), or_);
    for (std::size_t p = 0; p < in_; ++p) {
      double xv = xr[p];
      const double* wp = w_.data() + p * out_;
      for (std::size_t q = 0; q < out_; ++q) or_[q] += xv * wp[q];
    }
  }
  return ctx;
}

void LinearLayer::backward(const LayerCtx& ctx_in, const Tensor& grad_out, Tensor& grad_in,
                           double* param_grads) const {
  const auto& ctx = static_cast<const LinearCtx&>(ctx_in);
  std::size_t rows = ctx.rows;
  resize_out(grad_in, rows, in_);
  double* gw = param_grads;  // [in][out]
  double* gb = with_bias_ ? param_grads + in_ * out_ : nullptr;  // [out]
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = grad_out.row_ptr(r);
    double* gi = grad_in.row_ptr(r);
    if (gb != nullptr) {
      for (std::size_t q = 0; q < out_; ++q) gb[q] += g[q];
    }
    for (std::size_t p = 0; p < in_; ++p) {
      double xv = ctx.x[r * in_ + p];
      const double* wp = w_.data() + p * out_;
      double* gwp = gw + p * out_;
      double dot = 0.0;
      for (std::size_t q = 0; q < out_; ++q) {
        dot += wp[q] * g[q];
        gwp[q] += xv * g[q];
      }
      gi[p] = dot;
    }
  }
}

// ---------------------------------------------------------------------------
// BatchNormLayer

namespace {
struct BatchNormCtx final : LayerCtx {
  bool batch_stats = false;
  std::size_t rows = 0;
  std::vector<double> xhat;    // [rows][dim]
  std::vector<double> invstd;  // [dim]
};
}  // namespace

BatchNormLayer::BatchNormLayer(std::size_t dim, double momentum, double eps)
    : dim_(dim),
      momentum_(momentum),
      eps_(eps),
      gamma_(dim, 1.0),
      beta_(dim, 0.0),
      running_mean_(dim, 0.0),
      running_var_(dim, 1.0) {}

std::vector<ParamView> BatchNormLayer::params() {
  return {{"gamma", gamma_.data(), gamma_.size()}, {"beta", beta_.data(), beta_.size()}};
}

std::vector<ParamView> BatchNormLayer::state() {
  return {{"running_mean", running_mean_.data(), running_mean_.size()},
          {"running_var", running_var_.data(), running_var_.size()}};
}

void BatchNormLayer::init(Rng&) {
  std::fill(gamma_.begin(), gamma_.end(), 1.0);
  std::fill(beta_.begin(), beta_.end(), 0.0);
  std::fill(running_mean_.begin(), running_mean_.end(), 0.0);
  std::fill(running_var_.begin(), running_var_.end(), 1.0);
}

std::unique_ptr<LayerCtx> BatchNormLayer::forward(const Tensor& in, Tensor& out, RunMode mode) {
  std::size_t rows = in.rows();
  if (in.cols() != dim_) throw std::invalid_argument("batch_norm: input width mismatch");
  bool batch_stats = mode != RunMode::kEval;
  if (batch_stats && rows < 2) {
    throw std::invalid_argument("batch_norm: training mode needs a batch of at least 2");
  }
  resize_out(out, rows, dim_);

  auto ctx = std::make_unique<BatchNormCtx>();
  ctx->batch_stats = batch_stats;
  ctx->rows = rows;
  ctx->xhat.resize(rows * dim_);
  ctx->invstd.resize(dim_);

  std::vector<double> mean(dim_, 0.0), var(dim_, 0.0);
  if (batch_stats) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = in.row_ptr(r);
      for (std::size_t j = 0; j < dim_; ++j) mean[j] += xr[j];
    }
    for (std::size_t j = 0; j < dim_; ++j) mean[j] /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = in.row_ptr(r);
      for (std::size_t j = 0; j < dim_; ++j) {
        double dx = xr[j] - mean[j];
        var[j] += dx * dx;
      }
    }
    for (std::size_t j = 0; j < dim_; ++j) var[j] /= static_cast<double>(rows);
    if (mode == RunMode::kTrain) {
      double unbias = static_cast<double>(rows) / static_cast<double>(rows - 1);
      for (std::size_t j = 0; j < dim_; ++j) {
        running_mean_[j] = (1.0 - momentum_) * running_mean_[j] + momentum_ * mean[j];
        running_var_[j] = (1.0 - momentum_) * running_var_[j] + momentum_ * var[j] * unbias;
      }
    }
  } else {
    mean = running_mean_;
    var = running_var_;
  }

  for (std::size_t j = 0; j < dim_; ++j) ctx->invstd[j] = 1.0 / std::sqrt(var[j] + eps_);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.row_ptr(r);
    double* or_ = out.row_ptr(r);
    double* xh = ctx->xhat.data() + r * dim_;
    for (std::size_t j = 0; j < dim_; ++j) {
      xh[j] = (xr[j] - mean[j]) * ctx->invstd[j];
      or_[j] = gamma_[j] * xh[j] + beta_[j];
    }
  }
  return ctx;
}

void BatchNormLayer::backward(const LayerCtx& ctx_in, const Tensor& grad_out, Tensor& grad_in,
                              double* param_grads) const {
  const auto& ctx = static_cast<const BatchNormCtx&>(ctx_in);
  std::size_t rows = ctx.rows;
  resize_out(grad_in, rows, dim_);
  double* ggamma = param_grads;
  double* gbeta = param_grads + dim_;

  if (!ctx.batch_stats) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* g = grad_out.row_ptr(r);
      const double* xh = ctx.xhat.data() + r * dim_;
      double* gi = grad_in.row_ptr(r);
      for (std::size_t j = 0; j < dim_; ++j) {
        ggamma[j] += g[j] * xh[j];
        gbeta[j] += g[j];
        gi[j] = g[j] * gamma_[j] * ctx.invstd[j];
      }
    }
    return;
  }

  std::vector<double> sum_g(dim_, 0.0), sum_gx(dim_, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = grad_out.row_ptr(r);
    const double* xh = ctx.xhat.data() + r * dim_;
    for (std::size_t j = 0; j < dim_; ++j) {
      sum_g[j] += g[j];
      sum_gx[j] += g[j] * xh[j];
    }
  }
  double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t j = 0; j < dim_; ++j) {
    ggamma[j] += sum_gx[j];
    gbeta[j] += sum_g[j];
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = grad_out.row_ptr(r);
    const double* xh = ctx.xhat.data() + r * dim_;
    double* gi = grad_in.row_ptr(r);
    for (std::size_t j = 0; j < dim_; ++j) {
      gi[j] = gamma_[j] * ctx.invstd[j] *
              (g[j] - inv_rows * sum_g[j] - xh[j] * inv_rows * sum_gx[j]);
    }
  }
}

// ---------------------------------------------------------------------------
// ReluLayer

namespace {
struct ReluCtx final : LayerCtx {
  std::vector<unsigned char> active;  // [rows][dim]
  std::size_t rows = 0;
};
}  // namespace

std::unique_ptr<LayerCtx> ReluLayer::forward(const Tensor& in, Tensor& out, RunMode) {
  std::size_t rows = in.rows();
  if (in.cols() != dim_) throw std::invalid_argument("relu: input width mismatch");
  resize_out(out, rows, dim_);
  auto ctx = std::make_unique<ReluCtx>();
  ctx->rows = rows;
  ctx->active.resize(rows * dim_);
  for (std::size_t i = 0; i < rows * dim_; ++i) {
    double v = in.data()[i];
    bool on = v > 0.0;
    ctx->active[i] = on ? 1 : 0;
    out.data()[i] = on ? v : 0.0;
  }
  return ctx;
}

void ReluLayer::backward(const LayerCtx& ctx_in, const Tensor& grad_out, Tensor& grad_in,
                         double*) const {
  const auto& ctx = static_cast<const ReluCtx&>(ctx_in);
  resize_out(grad_in, ctx.rows, dim_);
  for (std::size_t i = 0; i < ctx.rows * dim_; ++i) {
    grad_in.data()[i] = ctx.active[i] ? grad_out.data()[i] : 0.0;
  }
}

}  // namespace selfshap

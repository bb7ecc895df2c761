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
#include "selfshap/kernelshap.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace selfshap {

namespace {

std::string mask_to_string(const CoalitionMask& m) {
  std::string s(m.n(), '0');
  for (std::size_t i = 0; i < m.n(); ++i) {
    if (m.test(i)) s[i] = '1';
  }
  return s;
}

/// Running mean/covariance summaries of one stream of u vectors. Only the
/// covariance diagonal, the covariance against the coordinate total, and the
/// total's variance are needed to propagate standard errors through the
/// linear solve.
struct Accumulator {
  void init(std::size_t n) {
    mean.assign(n, 0.0);
    m2.assign(n, 0.0);
    cov_t.assign(n, 0.0);
    mean_t = m2_t = 0.0;
    count = 0;
  }

  std::size_t count = 0;
  std::vector<double> mean, m2, cov_t;
  double mean_t = 0.0, m2_t = 0.0;

  void add(const std::vector<double>& u) {
    ++count;
    double t = 0.0;
    for (double v : u) t += v;
    double dt = t - mean_t;
    mean_t += dt / static_cast<double>(count);
    double dt2 = t - mean_t;
    m2_t += dt * dt2;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double d = u[i] - mean[i];
      mean[i] += d / static_cast<double>(count);
      double d2 = u[i] - mean[i];
      m2[i] += d * d2;
      cov_t[i] += d * dt2;
    }
  }
};

struct Moments {
  std::vector<double> b;      // estimated E[u]
  std::vector<double> var_b;  // Var(b_i)
  std::vector<double> cov_bt; // Cov(b_i, sum_j b_j)
  double var_t = 0.0;         // Var(sum_j b_j)
  bool se_ready = false;
};

}  // namespace

ShapleyEstimate unbiased_kernelshap(
    const BatchGame& game, std::size_t n, const KernelShapConfig& cfg,
    const std::function<void(const ShapleyEstimate&)>& on_round) {
  if (n < 2) throw std::invalid_argument("unbiased_kernelshap: needs at least 2 features");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("unbiased_kernelshap: tolerance must be positive");

  KernelSampler sampler(n, Rng(cfg.seed));

  auto eval = [&](const std::vector<CoalitionMask>& masks) {
    std::vector<double> vals = game(masks);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!std::isfinite(vals[i])) {
        throw std::runtime_error("unbiased_kernelshap: non-finite game value for mask " +
                                 mask_to_string(masks[i]));
      }
    }
    return vals;
  };

  std::vector<double> boundary = eval({CoalitionMask(n), CoalitionMask::full(n)});
  double v0 = boundary[0];
  double vdiff = boundary[1] - v0;

  // Second moments of a kernel-distributed mask: diagonal 1/2 by the size
  // symmetry, off-diagonal sum_s p(s) s(s-1) / (n(n-1)).
  double c = 0.0;
  const auto& p = sampler.size_probs();
  for (std::size_t s = 1; s <= n - 1; ++s) {
    c += p[s] * static_cast<double>(s) * static_cast<double>(s - 1) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
  }
  double alpha = 0.5 - c;
  double denom = alpha + static_cast<double>(n) * c;  // eigenvalue along the ones direction
  // phi depends on the sampled moments through L = (1/alpha) I - gamma 11^T.
  double gamma = c / (alpha * denom) + 1.0 / (static_cast<double>(n) * denom);

  // Antithetic mode pairs every subset with its complement and
  // post-stratifies the pairs by min(|S|, n-|S|): the between-size variation
  // of u is removed exactly, and the estimate stays unbiased because the
  // stratum weights are the exact size probabilities.
  const bool paired = cfg.antithetic;
  std::size_t n_strata = paired ? n / 2 : 1;
  std::vector<double> stratum_w(n_strata + 1, 0.0);
  if (paired) {
    for (std::size_t s = 1; s <= n_strata; ++s) {
      stratum_w[s] = s == n - s ? p[s] : p[s] + p[n - s];
    }
  } else {
    stratum_w[1] = 1.0;  // single pooled stratum
  }

  std::vector<Accumulator> acc(n_strata + 1);
  for (auto& a : acc) a.init(n);
  std::vector<double> credit(n_strata + 1, 0.0);  // fractional pair allocation

  // Additive control variate: after a pilot fraction of the budget the
  // running values become a surrogate lin(S) = sum_{i in S} w_i whose
  // per-size statistic expectations are exact:
  //   E[1_i lin(S) | |S|=s] = w_i s/n + (W - w_i) s(s-1)/(n(n-1)).
  // Subtracting the centered statistic leaves the mean untouched (the
  // surrogate is fixed before the samples it corrects) and cancels most of
  // the subset-composition variance; for near-additive games almost all of it.
  std::vector<double> cv_w(n, 0.0);
  std::vector<std::vector<double>> cv_mean(n + 1, std::vector<double>(n, 0.0));
  bool cv_active = false;
  const std::size_t pilot_budget =
      std::min<std::size_t>(cfg.max_samples / 5, std::max<std::size_t>(64 * n, 2048));

  auto activate_control = [&](const std::vector<double>& values) {
    cv_w = values;
    double total = 0.0;
    for (double w : cv_w) total += w;
    for (std::size_t s = 1; s <= n - 1; ++s) {
      double p1 = static_cast<double>(s) / static_cast<double>(n);
      double p2 = static_cast<double>(s) * static_cast<double>(s - 1) /
                  (static_cast<double>(n) * static_cast<double>(n - 1));
      for (std::size_t i = 0; i < n; ++i) {
        cv_mean[s][i] = cv_w[i] * p1 + (total - cv_w[i]) * p2;
      }
    }
    for (auto& a : acc) a.init(n);  // estimate restarts on the corrected stream
    cv_active = true;
  };

  ShapleyEstimate est;
  est.values.assign(n, 0.0);
  est.std_errors.assign(n, 0.0);

  std::vector<CoalitionMask> masks;
  std::vector<std::size_t> mask_stratum;
  std::vector<double> u(n);

  auto add_correction = [&](const CoalitionMask& m, double weight) {
    if (!cv_active) return;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m.test(i)) lin += cv_w[i];
    }
    const std::vector<double>& mu = cv_mean[m.cardinality()];
    for (std::size_t i = 0; i < n; ++i) {
      double stat = m.test(i) ? lin : 0.0;
      u[i] -= weight * (stat - mu[i]);
    }
  };

  auto compute_moments = [&]() {
    Moments m;
    m.b.assign(n, 0.0);
    m.var_b.assign(n, 0.0);
    m.cov_bt.assign(n, 0.0);
    m.var_t = 0.0;
    m.se_ready = true;
    for (std::size_t s = 1; s <= n_strata; ++s) {
      const Accumulator& a = acc[s];
      double w = stratum_w[s];
      if (w <= 0.0) continue;
      if (a.count == 0) {
        m.se_ready = false;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) m.b[i] += w * a.mean[i];
      if (a.count < 2) {
        m.se_ready = false;
        continue;
      }
      double mcount = static_cast<double>(a.count);
      double f = w * w / ((mcount - 1.0) * mcount);
      for (std::size_t i = 0; i < n; ++i) {
        m.var_b[i] += f * a.m2[i];
        m.cov_bt[i] += f * a.cov_t[i];
      }
      m.var_t += f * a.m2_t;
    }
    return m;
  };

  while (est.samples_used < cfg.max_samples) {
    masks.clear();
    mask_stratum.clear();
    std::size_t budget = std::min<std::size_t>(std::max<std::size_t>(cfg.batch, 2),
                                               cfg.max_samples - est.samples_used);
    if (paired) {
      std::size_t pairs = std::max<std::size_t>(1, budget / 2);
      for (std::size_t s = 1; s <= n_strata; ++s) {
        credit[s] += stratum_w[s] * static_cast<double>(pairs);
        auto take = static_cast<std::size_t>(credit[s]);
        credit[s] -= static_cast<double>(take);
        for (std::size_t k = 0; k < take; ++k) {
          CoalitionMask m = sampler.sample_of_size(s);
          masks.push_back(m.complement());
          masks.push_back(std::move(m));
          mask_stratum.push_back(s);
        }
      }
      if (masks.empty()) {  // tiny round: keep progress with one pair
        CoalitionMask m = sampler.sample_of_size(1);
        masks.push_back(m.complement());
        masks.push_back(std::move(m));
        mask_stratum.push_back(1);
      }
    } else {
      for (std::size_t k = 0; k < std::max<std::size_t>(1, budget); ++k) {
        masks.push_back(sampler.sample());
        mask_stratum.push_back(1);
      }
    }

    std::vector<double> vals = eval(masks);
    est.samples_used += masks.size();

    if (paired) {
      for (std::size_t k = 0; k < mask_stratum.size(); ++k) {
        const CoalitionMask& mc = masks[2 * k];
        const CoalitionMask& ms = masks[2 * k + 1];
        for (std::size_t i = 0; i < n; ++i) {
          double a = ms.test(i) ? (vals[2 * k + 1] - v0) : 0.0;
          double b = mc.test(i) ? (vals[2 * k] - v0) : 0.0;
          u[i] = 0.5 * (a + b);
        }
        add_correction(ms, 0.5);
        add_correction(mc, 0.5);
        acc[mask_stratum[k]].add(u);
      }
    } else {
      for (std::size_t k = 0; k < masks.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          u[i] = masks[k].test(i) ? (vals[k] - v0) : 0.0;
        }
        add_correction(masks[k], 1.0);
        acc[1].add(u);
      }
    }

    Moments m = compute_moments();

    // phi = A^{-1} b - A^{-1} 1 (1^T A^{-1} b - vdiff) / (1^T A^{-1} 1)
    double bsum = 0.0;
    for (double v : m.b) bsum += v;
    double correction = (bsum - vdiff * denom) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ainv_b = (m.b[i] - (c / denom) * bsum) / alpha;
      est.values[i] = ainv_b - correction / denom;
    }
    // Pin the constraint exactly against accumulated rounding.
    {
      double sum = 0.0;
      for (double v : est.values) sum += v;
      double fix = (vdiff - sum) / static_cast<double>(n);
      for (double& v : est.values) v += fix;
    }

    if (m.se_ready) {
      for (std::size_t i = 0; i < n; ++i) {
        double var = m.var_b[i] / (alpha * alpha) - 2.0 * (gamma / alpha) * m.cov_bt[i] +
                     gamma * gamma * m.var_t;
        est.std_errors[i] = std::sqrt(std::max(0.0, var));
      }
    }

    double lo = est.values[0], hi = est.values[0], mx = 0.0, max_se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, est.values[i]);
      hi = std::max(hi, est.values[i]);
      mx = std::max(mx, std::fabs(est.values[i]));
      max_se = std::max(max_se, est.std_errors[i]);
    }
    double scale = std::max(hi - lo, mx);
    est.converged = m.se_ready && scale > 0.0 && max_se <= cfg.tolerance * scale;

    if (on_round) on_round(est);
    if (est.converged) break;

    if (!cv_active && est.samples_used >= pilot_budget &&
        cfg.max_samples - est.samples_used > pilot_budget) {
      activate_control(est.values);
    }
  }
  return est;
}

}  // namespace selfshap

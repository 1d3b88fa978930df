#pragma once

// Differentiable predicate regression.
//
// A predicate over M dimensions is relaxed to the bump
//
//     f(x | a, mu, b) = 1 / (1 + sum_j |a_j (x_j - mu_j)|^b)
//
// whose 0.5 level set along any single active dimension sits exactly on the
// box face mu_j +- 1/a_j. The parameters (a, mu) of one bump per brush step
// are fit jointly by minimizing
//
//     sum_t BCE_t + gamma_1 sum_t |a_t|_1
//       + sum_{t>=2} gamma_a |a_t - a_{t-1}|^2 + gamma_mu |mu_t - mu_{t-1}|^2
//
// over normalized ([0,1]) data, then the box is read back out. A dimension
// whose box covers its whole extent is vacuous and dropped from the result.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/metrics.hpp"

namespace predind {

/// Optimizer-side predicate: midpoints `mu` and inverse half-ranges `a` in
/// normalized units, plus the fixed steepness exponent `b`.
struct SoftPredicate {
  std::vector<double> mu;
  std::vector<double> a;
  double b = 7.0;

  std::size_t n_dims() const noexcept { return mu.size(); }

  void validate() const {
    if (mu.size() != a.size()) throw Error(ErrorCode::InvalidInput, "mu and a differ in length");
    if (!(b > 1.0)) throw Error(ErrorCode::InvalidInput, "steepness b must exceed 1");
    for (double v : a) {
      if (!(v >= 0.0)) throw Error(ErrorCode::InvalidInput, "inverse ranges must be non-negative");
    }
  }

  friend bool operator==(const SoftPredicate&, const SoftPredicate&) = default;
};

struct RegressionConfig {
  double gamma_1 = 0.006;
  double gamma_a = 1.0;
  double gamma_mu = 1.0;
  double b = 7.0;
  double learning_rate = 0.05;
  int max_iters = 500;
  double convergence_tol = 1e-6;
  int convergence_window = 10;
  double prob_clip = 1e-7;
  std::uint64_t seed = 0;
  /// Wall-clock budget; not part of the serialized configuration.
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();

  void validate() const {
    if (!(gamma_1 >= 0.0 && gamma_a >= 0.0 && gamma_mu >= 0.0)) {
      throw Error(ErrorCode::InvalidInput, "loss weights must be non-negative");
    }
    if (!(b > 1.0)) throw Error(ErrorCode::InvalidInput, "steepness b must exceed 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidInput, "learning_rate must be positive");
    if (max_iters < 1) throw Error(ErrorCode::InvalidInput, "max_iters must be at least 1");
    if (convergence_window < 1) throw Error(ErrorCode::InvalidInput, "convergence_window must be at least 1");
    if (!(convergence_tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "convergence_tol must be non-negative");
    if (!(prob_clip > 0.0 && prob_clip < 0.5)) throw Error(ErrorCode::InvalidInput, "prob_clip must lie in (0, 0.5)");
  }
};

/// Gradient of the objective with respect to one step's parameters.
struct StepGradient {
  std::vector<double> d_a;
  std::vector<double> d_mu;
};

struct ExtractedPredicate {
  Predicate predicate;
  std::vector<std::size_t> dropped_dims;
};

struct RegressionResult {
  Predicate hard;
  SoftPredicate soft;
  std::vector<double> loss_trace;
  double f1 = 0.0;
  Confusion confusion;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::size_t> dropped_dims;
};

/// Bump value in (0, 1]; equals 1 at x = mu and 0.5 on a single-dimension box face.
inline double proxy(std::span<const double> x, const SoftPredicate& soft) {
  double s = 0.0;
  for (std::size_t j = 0; j < soft.a.size(); ++j) {
    if (soft.a[j] == 0.0) continue;
    s += std::pow(std::abs(soft.a[j] * (x[j] - soft.mu[j])), soft.b);
  }
  return 1.0 / (1.0 + s);
}

namespace detail {

inline void check_x(const Matrix& x, const SoftPredicate& soft) {
  if (x.cols() != soft.n_dims()) {
    throw Error(ErrorCode::InvalidInput, "data width does not match predicate dimensions");
  }
}

/// Mean negative log-likelihood over one selection. When the gradient spans
/// are non-empty the gradient is accumulated into them.
inline double bce_step(const SoftPredicate& soft, const Matrix& x, const LabeledSelection& sel,
                       double eps, std::span<double> d_a, std::span<double> d_mu) {
  const std::size_t m = soft.n_dims();
  const bool want_grad = !d_a.empty();
  const double inv_n = 1.0 / static_cast<double>(sel.size());
  std::vector<double> ds_da(want_grad ? m : 0);
  std::vector<double> ds_dmu(want_grad ? m : 0);

  double total = 0.0;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const auto row = x.row(sel.row(k));
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double a = soft.a[j];
      if (a == 0.0) {
        if (want_grad) ds_da[j] = ds_dmu[j] = 0.0;
        continue;
      }
      const double d = row[j] - soft.mu[j];
      const double u = std::abs(a * d);
      const double p = std::pow(u, soft.b - 1.0);
      s += p * u;
      if (want_grad) {
        // d|a d|/da = sign(a)|d|, d|a d|/dmu = -a sign(a d)
        const double sgn_a = a > 0.0 ? 1.0 : -1.0;
        const double sgn_ad = (a * d > 0.0) ? 1.0 : (a * d < 0.0 ? -1.0 : 0.0);
        ds_da[j] = soft.b * p * sgn_a * std::abs(d);
        ds_dmu[j] = -soft.b * p * sgn_ad * a;
      }
    }
    const double f = 1.0 / (1.0 + s);
    const double fc = std::clamp(f, eps, 1.0 - eps);
    const bool y = sel.labels()[k] != 0;
    total -= y ? std::log(fc) : std::log1p(-fc);

    if (want_grad && f == fc) {
      const double dl_df = y ? -1.0 / fc : 1.0 / (1.0 - fc);
      const double coef = inv_n * dl_df * (-f * f);
      for (std::size_t j = 0; j < m; ++j) {
        d_a[j] += coef * ds_da[j];
        d_mu[j] += coef * ds_dmu[j];
      }
    }
  }
  return total * inv_n;
}

inline void check_sequence(std::span<const SoftPredicate> seq, std::span<const LabeledSelection> brushes,
                           const Matrix& x) {
  if (seq.empty()) throw Error(ErrorCode::InvalidInput, "empty predicate sequence");
  if (seq.size() != brushes.size()) {
    throw Error(ErrorCode::InvalidInput, "predicate sequence and brush count differ",
                std::to_string(seq.size()) + " vs " + std::to_string(brushes.size()));
  }
  for (const auto& s : seq) {
    if (s.n_dims() != seq.front().n_dims() || s.a.size() != s.mu.size()) {
      throw Error(ErrorCode::InvalidInput, "inconsistent predicate dimensions in sequence");
    }
    check_x(x, s);
  }
  for (const auto& sel : brushes) {
    if (sel.covers_all_rows() && sel.size() != x.rows()) {
      throw Error(ErrorCode::InvalidInput, "selection length does not match data rows");
    }
    for (auto r : sel.rows()) {
      if (r >= x.rows()) throw Error(ErrorCode::InvalidInput, "selection row out of range");
    }
  }
}

/// Full objective, optionally with its gradient.
inline double objective(std::span<const SoftPredicate> seq, std::span<const LabeledSelection> brushes,
                        const Matrix& x, const RegressionConfig& cfg, std::vector<StepGradient>* grads) {
  const std::size_t t_count = seq.size();
  const std::size_t m = seq.front().n_dims();
  if (grads) {
    grads->assign(t_count, StepGradient{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)});
  }

  double loss = 0.0;
  for (std::size_t t = 0; t < t_count; ++t) {
    std::span<double> ga, gm;
    if (grads) {
      ga = (*grads)[t].d_a;
      gm = (*grads)[t].d_mu;
    }
    loss += bce_step(seq[t], x, brushes[t], cfg.prob_clip, ga, gm);
  }

  double l1 = 0.0;
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = seq[t].a[j];
      l1 += std::abs(a);
      if (grads && a != 0.0) (*grads)[t].d_a[j] += cfg.gamma_1 * (a > 0.0 ? 1.0 : -1.0);
    }
  }
  loss += cfg.gamma_1 * l1;

  double smooth = 0.0;
  for (std::size_t t = 1; t < t_count; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double da = seq[t].a[j] - seq[t - 1].a[j];
      const double dm = seq[t].mu[j] - seq[t - 1].mu[j];
      smooth += cfg.gamma_a * da * da + cfg.gamma_mu * dm * dm;
      if (grads) {
        (*grads)[t].d_a[j] += 2.0 * cfg.gamma_a * da;
        (*grads)[t - 1].d_a[j] -= 2.0 * cfg.gamma_a * da;
        (*grads)[t].d_mu[j] += 2.0 * cfg.gamma_mu * dm;
        (*grads)[t - 1].d_mu[j] -= 2.0 * cfg.gamma_mu * dm;
      }
    }
  }
  return loss + smooth;
}

}  // namespace detail

/// Mean binary cross-entropy of the bump against `labels`, with probabilities
/// clipped to [eps, 1 - eps]. Labels cover every row of `x`.
inline double bce_loss(const SoftPredicate& soft, const Matrix& x, std::span<const std::uint8_t> labels,
                       double eps = 1e-7) {
  detail::check_x(x, soft);
  if (labels.size() != x.rows()) throw Error(ErrorCode::InvalidInput, "labels and rows differ in length");
  if (labels.empty()) throw Error(ErrorCode::InvalidInput, "bce_loss needs at least one row");
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double f = std::clamp(proxy(x.row(i), soft), eps, 1.0 - eps);
    total -= labels[i] ? std::log(f) : std::log1p(-f);
  }
  return total * inv_n;
}

inline double bce_loss(const SoftPredicate& soft, const Matrix& x, const LabeledSelection& sel,
                       double eps = 1e-7) {
  detail::check_x(x, soft);
  return detail::bce_step(soft, x, sel, eps, {}, {});
}

inline double smoothness_loss(std::span<const SoftPredicate> seq, double gamma_a, double gamma_mu) {
  double total = 0.0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    if (seq[t].n_dims() != seq[t - 1].n_dims()) {
      throw Error(ErrorCode::InvalidInput, "inconsistent predicate dimensions in sequence");
    }
    for (std::size_t j = 0; j < seq[t].n_dims(); ++j) {
      const double da = seq[t].a[j] - seq[t - 1].a[j];
      const double dm = seq[t].mu[j] - seq[t - 1].mu[j];
      total += gamma_a * da * da + gamma_mu * dm * dm;
    }
  }
  return total;
}

inline double total_loss(std::span<const SoftPredicate> seq, std::span<const LabeledSelection> brushes,
                         const Matrix& x, const RegressionConfig& cfg) {
  detail::check_sequence(seq, brushes, x);
  return detail::objective(seq, brushes, x, cfg, nullptr);
}

/// Analytic gradient of total_loss. The L1 subgradient at a_j = 0 is taken as 0,
/// and points whose probability is clipped contribute no gradient.
inline std::vector<StepGradient> gradients(std::span<const SoftPredicate> seq,
                                           std::span<const LabeledSelection> brushes, const Matrix& x,
                                           const RegressionConfig& cfg) {
  detail::check_sequence(seq, brushes, x);
  std::vector<StepGradient> grads;
  detail::objective(seq, brushes, x, cfg, &grads);
  return grads;
}

/// Reads the box [mu - 1/a, mu + 1/a] back out in original units. A dimension
/// whose box contains the whole normalized extent [0,1] is dropped; constant
/// dimensions never appear.
inline ExtractedPredicate extract_hard(const SoftPredicate& soft, const NormalizedView& view) {
  if (soft.n_dims() != view.n_dims() || soft.a.size() != soft.mu.size()) {
    throw Error(ErrorCode::InvalidInput, "predicate dimensions do not match the data");
  }
  ExtractedPredicate out;
  std::vector<Clause> clauses;
  for (std::size_t j = 0; j < soft.n_dims(); ++j) {
    if (view.constant(j)) continue;
    const double a = soft.a[j];
    if (!(a > 0.0)) {
      out.dropped_dims.push_back(j);
      continue;
    }
    const double r = 1.0 / a;
    const double lo = soft.mu[j] - r;
    const double hi = soft.mu[j] + r;
    if (lo <= 0.0 && hi >= 1.0) {
      out.dropped_dims.push_back(j);
      continue;
    }
    const double lo_n = std::clamp(lo, 0.0, 1.0);
    const double hi_n = std::clamp(hi, 0.0, 1.0);
    clauses.push_back({j, view.denormalize(j, lo_n), view.denormalize(j, hi_n)});
  }
  out.predicate = Predicate(std::move(clauses));
  return out;
}

/// Starting point: bump centered on the positives' mean with half-range equal
/// to their half-extent (at least 0.05) in every non-constant dimension.
inline SoftPredicate initial_soft_predicate(const NormalizedView& view, const LabeledSelection& sel, double b) {
  const std::size_t m = view.n_dims();
  SoftPredicate soft{std::vector<double>(m, 0.5), std::vector<double>(m, 0.0), b};
  for (std::size_t j = 0; j < m; ++j) {
    if (view.constant(j)) continue;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < sel.size(); ++k) {
      if (!sel.labels()[k]) continue;
      const double v = view.values()(sel.row(k), j);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    soft.mu[j] = sum / static_cast<double>(sel.n_positive());
    soft.a[j] = 1.0 / std::max(0.5 * (hi - lo), 0.05);
  }
  return soft;
}

/// Jointly fits one bump per brush step with Adam (0.9 / 0.999 / 1e-8),
/// projecting a >= 0 and mu into [-0.5, 1.5] after every update. Returns one
/// result per step; all share the joint loss trace.
inline std::vector<RegressionResult> fit(const Dataset& ds, const NormalizedView& view,
                                         std::span<const LabeledSelection> brushes,
                                         const RegressionConfig& cfg = {}) {
  cfg.validate();
  if (brushes.empty()) throw Error(ErrorCode::EmptySelection, "no brushes to fit");
  if (view.n_rows() != ds.n_rows() || view.n_dims() != ds.n_dims()) {
    throw Error(ErrorCode::InvalidInput, "normalized view does not belong to the dataset");
  }
  for (const auto& sel : brushes) sel.check_against(ds);

  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double adam_eps = 1e-8;
  constexpr double mu_lo = -0.5;
  constexpr double mu_hi = 1.5;

  const std::size_t t_count = brushes.size();
  const std::size_t m = view.n_dims();
  const Matrix& x = view.values();

  std::vector<SoftPredicate> params;
  params.reserve(t_count);
  for (const auto& sel : brushes) params.push_back(initial_soft_predicate(view, sel, cfg.b));

  std::vector<std::vector<double>> m_a(t_count, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> v_a = m_a;
  std::vector<std::vector<double>> m_mu = m_a;
  std::vector<std::vector<double>> v_mu = m_a;

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.max_iters));
  std::vector<StepGradient> grads;
  bool converged = false;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  auto adam = [&](double& p, double g, double& mom, double& vel) {
    mom = beta1 * mom + (1.0 - beta1) * g;
    vel = beta2 * vel + (1.0 - beta2) * g * g;
    const double mhat = mom / (1.0 - beta1_pow);
    const double vhat = vel / (1.0 - beta2_pow);
    p -= cfg.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
  };

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (std::chrono::steady_clock::now() > cfg.deadline) {
      throw Error(ErrorCode::Timeout, "regression exceeded its compute budget",
                  "iteration " + std::to_string(iter));
    }
    const double loss = detail::objective(params, brushes, x, cfg, &grads);
    if (!std::isfinite(loss)) {
      const double last = trace.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.back();
      throw Error(ErrorCode::Divergence, "loss became non-finite",
                  "iteration " + std::to_string(iter) + ", last finite loss " + std::to_string(last));
    }
    trace.push_back(loss);

    const auto window = static_cast<std::size_t>(cfg.convergence_window);
    if (trace.size() > window) {
      const double ref = trace[trace.size() - 1 - window];
      if (std::abs(loss - ref) <= cfg.convergence_tol * std::max(std::abs(ref), 1e-300)) {
        converged = true;
        break;
      }
    }
    if (iter + 1 == cfg.max_iters) break;

    beta1_pow *= beta1;
    beta2_pow *= beta2;
    for (std::size_t t = 0; t < t_count; ++t) {
      for (std::size_t j = 0; j < m; ++j) {
        if (view.constant(j)) continue;
        const double ga = grads[t].d_a[j];
        const double gm = grads[t].d_mu[j];
        if (!std::isfinite(ga) || !std::isfinite(gm)) {
          throw Error(ErrorCode::Divergence, "gradient became non-finite",
                      "iteration " + std::to_string(iter) + ", last finite loss " + std::to_string(loss));
        }
        adam(params[t].a[j], ga, m_a[t][j], v_a[t][j]);
        adam(params[t].mu[j], gm, m_mu[t][j], v_mu[t][j]);
        params[t].a[j] = std::max(params[t].a[j], 0.0);
        params[t].mu[j] = std::clamp(params[t].mu[j], mu_lo, mu_hi);
      }
    }
  }

  std::vector<RegressionResult> results;
  results.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    ExtractedPredicate hard = extract_hard(params[t], view);
    RegressionResult r;
    r.confusion = confusion(evaluate_predicate(hard.predicate, ds, brushes[t]), brushes[t].labels());
    r.f1 = r.confusion.f1();
    r.hard = std::move(hard.predicate);
    r.dropped_dims = std::move(hard.dropped_dims);
    r.soft = params[t];
    r.loss_trace = trace;
    r.converged = converged;
    r.iterations = trace.size();
    results.push_back(std::move(r));
  }
  return results;
}

inline RegressionResult fit(const Dataset& ds, const NormalizedView& view, const LabeledSelection& sel,
                            const RegressionConfig& cfg = {}) {
  return fit(ds, view, std::span<const LabeledSelection>(&sel, 1), cfg).front();
}

}  // namespace predind

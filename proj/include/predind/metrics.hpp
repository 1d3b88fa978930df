#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "predind/error.hpp"

namespace predind {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  /// 2TP / (2TP + FP + FN), or 0 when nothing is predicted or labeled.
  double f1() const noexcept {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
  }

  double accuracy() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const std::uint8_t> predicted,
                           std::span<const std::uint8_t> labels) {
  if (predicted.size() != labels.size()) {
    throw Error(ErrorCode::InvalidInput, "predicted and label vectors differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double f1_score(std::span<const std::uint8_t> predicted,
                       std::span<const std::uint8_t> labels) {
  return confusion(predicted, labels).f1();
}

struct SequenceStats {
  double mean_f1 = 0.0;
  double min_f1 = 0.0;
  /// Unweighted sum over consecutive steps of squared inverse-range differences.
  double a_energy = 0.0;
  /// Unweighted sum over consecutive steps of squared midpoint differences.
  double mu_energy = 0.0;
};

/// Per-step parameter vectors for one brush step (inverse ranges and midpoints).
struct StepParams {
  std::span<const double> a;
  std::span<const double> mu;
};

inline SequenceStats sequence_stats(std::span<const double> f1s, std::span<const StepParams> params) {
  if (f1s.empty()) throw Error(ErrorCode::InvalidInput, "sequence_stats needs at least one step");
  SequenceStats s;
  double sum = 0.0;
  s.min_f1 = f1s.front();
  for (double f : f1s) {
    sum += f;
    s.min_f1 = std::min(s.min_f1, f);
  }
  s.mean_f1 = sum / static_cast<double>(f1s.size());

  for (std::size_t t = 1; t < params.size(); ++t) {
    const auto& prev = params[t - 1];
    const auto& cur = params[t];
    if (prev.a.size() != cur.a.size() || prev.mu.size() != cur.mu.size()) {
      throw Error(ErrorCode::InvalidInput, "step parameter sizes differ");
    }
    for (std::size_t j = 0; j < cur.a.size(); ++j) {
      const double d = cur.a[j] - prev.a[j];
      s.a_energy += d * d;
    }
    for (std::size_t j = 0; j < cur.mu.size(); ++j) {
      const double d = cur.mu[j] - prev.mu[j];
      s.mu_energy += d * d;
    }
  }
  return s;
}

}  // namespace predind

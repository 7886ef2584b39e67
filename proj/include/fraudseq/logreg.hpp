#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraudseq/tree.hpp"

namespace fraudseq {

enum class Penalty : std::uint8_t { l1, l2 };

struct LogRegParams {
  double C = 1.0;  // inverse regularization strength
  Penalty penalty = Penalty::l2;
  double tolerance = 10.0;  // gradient-norm stopping threshold
  std::size_t max_iter = 1000;

  void check() const {
    if (C <= 0.0) throw std::invalid_argument("logreg: C must be positive");
    if (tolerance <= 0.0) throw std::invalid_argument("logreg: tolerance must be positive");
  }
};

// Regularized logistic regression on internally z-scored features.
// L2 by plain gradient steps, L1 by proximal (soft-threshold) steps; the
// step size comes from a power-iteration bound on the data Gram spectrum.
// The intercept is never penalized.
class LogisticRegression {
public:
  void fit(const Dataset& ds, const LogRegParams& params) {
    params.check();
    params_ = params;
    const std::size_t n = ds.n();
    const std::size_t d = ds.d();
    if (n == 0 || d == 0) throw std::invalid_argument("logreg: empty dataset");

    // freeze standardization from the training data
    mean_.assign(d, 0.0);
    scale_.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0;
      for (double v : ds.cols[j]) m += v;
      m /= n;
      double var = 0.0;
      for (double v : ds.cols[j]) var += (v - m) * (v - m);
      var /= n;
      mean_[j] = m;
      scale_[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    std::vector<std::vector<double>> z(d, std::vector<double>(n));
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < n; ++i)
        z[j][i] = (ds.cols[j][i] - mean_[j]) / scale_[j];

    weights_.assign(d, 0.0);
    intercept_ = 0.0;

    const double lipschitz = 0.25 * (spectral_bound(z, n, d) + 1.0) + 1.0 / params.C;
    const double step = 1.0 / lipschitz;
    const double lambda = 1.0 / params.C;

    std::vector<double> margin(n), grad(d);
    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
      for (std::size_t i = 0; i < n; ++i) {
        double m = intercept_;
        for (std::size_t j = 0; j < d; ++j) m += weights_[j] * z[j][i];
        margin[i] = m;
      }
      double loss = 0.0;
      double grad0 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ym = ds.y[i] != 0 ? margin[i] : -margin[i];
        loss += ym > 0 ? std::log1p(std::exp(-ym)) : -ym + std::log1p(std::exp(ym));
        const double p = 1.0 / (1.0 + std::exp(-margin[i]));
        const double r = p - (ds.y[i] != 0 ? 1.0 : 0.0);
        grad0 += r;
        margin[i] = r;  // reuse as residual
      }
      if (!std::isfinite(loss))
        throw std::runtime_error("logreg: non-finite loss at iteration " +
                                 std::to_string(iter));
      double grad_norm2 = grad0 * grad0;
      for (std::size_t j = 0; j < d; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += margin[i] * z[j][i];
        if (params.penalty == Penalty::l2) g += lambda * weights_[j];
        grad[j] = g;
      }

      intercept_ -= step * grad0;
      if (params.penalty == Penalty::l2) {
        for (std::size_t j = 0; j < d; ++j) {
          weights_[j] -= step * grad[j];
          grad_norm2 += grad[j] * grad[j];
        }
        if (std::sqrt(grad_norm2) < params.tolerance) {
          converged_ = true;
          break;
        }
      } else {
        double residual2 = grad0 * grad0;
        for (std::size_t j = 0; j < d; ++j) {
          const double prev = weights_[j];
          const double u = prev - step * grad[j];
          const double thr = step * lambda;
          double next = 0.0;
          if (u > thr)
            next = u - thr;
          else if (u < -thr)
            next = u + thr;
          weights_[j] = next;
          const double r = (prev - next) / step;
          residual2 += r * r;
        }
        if (std::sqrt(residual2) < params.tolerance) {
          converged_ = true;
          break;
        }
      }
      n_iterations_ = iter + 1;
    }
  }

  double predict_proba(const std::vector<double>& row) const {
    double m = intercept_;
    for (std::size_t j = 0; j < weights_.size(); ++j)
      m += weights_[j] * (row[j] - mean_[j]) / scale_[j];
    return 1.0 / (1.0 + std::exp(-m));
  }

  std::vector<double> predict_proba_all(const Dataset& ds) const {
    std::vector<double> out(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      double m = intercept_;
      for (std::size_t j = 0; j < weights_.size(); ++j)
        m += weights_[j] * (ds.cols[j][i] - mean_[j]) / scale_[j];
      out[i] = 1.0 / (1.0 + std::exp(-m));
    }
    return out;
  }

  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  bool converged() const { return converged_; }
  const std::vector<double>& feature_means() const { return mean_; }
  const std::vector<double>& feature_scales() const { return scale_; }

  // deserialization hook
  void restore(std::vector<double> mean, std::vector<double> scale,
               std::vector<double> weights, double intercept) {
    mean_ = std::move(mean);
    scale_ = std::move(scale);
    weights_ = std::move(weights);
    intercept_ = intercept;
  }

private:
  // Upper estimate of the largest eigenvalue of Z^T Z by power iteration.
  static double spectral_bound(const std::vector<std::vector<double>>& z,
                               std::size_t n, std::size_t d) {
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> zu(n), next(d);
    double eig = static_cast<double>(n);
    for (int it = 0; it < 20; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += z[j][i] * v[j];
        zu[i] = s;
      }
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += z[j][i] * zu[i];
        next[j] = s;
        norm2 += s * s;
      }
      const double norm = std::sqrt(norm2);
      if (norm <= 0.0) break;
      eig = norm;
      for (std::size_t j = 0; j < d; ++j) v[j] = next[j] / norm;
    }
    return 1.05 * eig;  // slack keeps the step below 1/L
  }

  LogRegParams params_;
  std::vector<double> mean_, scale_, weights_;
  double intercept_ = 0.0;
  bool converged_ = false;
  std::size_t n_iterations_ = 0;
};

}  // namespace fraudseq

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fraudseq/common.hpp"
#include "fraudseq/corpus.hpp"

namespace fraudseq {

constexpr double kVarianceFloor = 1e-3;  // minimum emission std, transformed scale
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// K-state HMM with univariate Gaussian emissions.
struct GaussianHmm {
  int n_states = 0;
  std::vector<double> pi;     // K
  std::vector<double> trans;  // K*K row-major, row-stochastic
  std::vector<double> means;  // K
  std::vector<double> stds;   // K, >= kVarianceFloor

  std::string transform_tag = kSignalTransform;
  // training metadata
  std::string perspective;
  std::size_t window = 0;
  std::size_t corpus_size = 0;
  std::uint64_t seed = 0;

  double at(int i, int j) const { return trans[static_cast<std::size_t>(i) * n_states + j]; }

  void check() const {
    const int k = n_states;
    if (k <= 0 || pi.size() != static_cast<std::size_t>(k) ||
        trans.size() != static_cast<std::size_t>(k) * k ||
        means.size() != static_cast<std::size_t>(k) ||
        stds.size() != static_cast<std::size_t>(k))
      throw std::invalid_argument("hmm: inconsistent parameter sizes");
    double s = std::accumulate(pi.begin(), pi.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("hmm: pi does not sum to 1");
    for (int i = 0; i < k; ++i) {
      double row = 0.0;
      for (int j = 0; j < k; ++j) row += at(i, j);
      if (std::abs(row - 1.0) > 1e-9)
        throw std::invalid_argument("hmm: transition row " + std::to_string(i) +
                                    " does not sum to 1");
    }
    for (int i = 0; i < k; ++i) {
      if (!(stds[i] >= kVarianceFloor))
        throw std::invalid_argument("hmm: std below variance floor");
      if (!std::isfinite(means[i]) || !std::isfinite(stds[i]))
        throw std::invalid_argument("hmm: non-finite parameter");
    }
  }
};

inline double gaussian_pdf(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * M_PI));
}

struct FitReport {
  std::vector<double> loglik_trajectory;
  int n_iterations = 0;
  bool converged = false;
};

// Quantile-based deterministic-per-seed initialization: means at the
// (k+0.5)/K quantiles of the pooled corpus, pooled std, uniform pi, uniform
// transitions with <=1% seeded perturbation.
inline GaussianHmm init_hmm(int n_states, const PerspectiveCorpus& corpus,
                            std::uint64_t seed) {
  if (n_states < 1) throw std::invalid_argument("init_hmm: n_states must be >= 1");
  if (corpus.sequences.empty()) throw std::invalid_argument("init_hmm: empty corpus");
  std::vector<double> pooled;
  pooled.reserve(corpus.total_observations());
  for (const auto& s : corpus.sequences) pooled.insert(pooled.end(), s.begin(), s.end());
  std::sort(pooled.begin(), pooled.end());

  const std::size_t n = pooled.size();
  const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
  double var = 0.0;
  for (double v : pooled) var += (v - mean) * (v - mean);
  var /= n;
  double std = std::sqrt(var);
  if (std < kVarianceFloor) std = kVarianceFloor;  // constant corpus

  GaussianHmm hmm;
  hmm.n_states = n_states;
  hmm.perspective = perspective_name(corpus.perspective);
  hmm.corpus_size = corpus.sequences.size();
  hmm.seed = seed;
  const int k = n_states;
  hmm.pi.assign(k, 1.0 / k);
  hmm.means.resize(k);
  hmm.stds.assign(k, std);
  for (int i = 0; i < k; ++i) {
    const double q = (i + 0.5) / k;
    std::size_t idx = static_cast<std::size_t>(q * n);
    if (idx >= n) idx = n - 1;
    hmm.means[i] = pooled[idx];
  }
  Rng rng(seed);
  hmm.trans.resize(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      const double v = (1.0 / k) * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0));
      hmm.trans[static_cast<std::size_t>(i) * k + j] = v;
      row += v;
    }
    for (int j = 0; j < k; ++j) hmm.trans[static_cast<std::size_t>(i) * k + j] /= row;
  }
  hmm.check();
  return hmm;
}

// Scaled forward pass (per-step normalization); log-likelihood accumulated
// from the scaling coefficients. alpha holds the normalized variables.
struct ForwardResult {
  double loglik = 0.0;
  std::vector<double> alpha;       // T*K, normalized
  std::vector<double> log_scales;  // T; loglik = sum
  bool underflow = false;
};

inline ForwardResult log_forward(const GaussianHmm& hmm, std::span<const double> obs) {
  const int k = hmm.n_states;
  const std::size_t t_len = obs.size();
  if (t_len == 0) throw std::invalid_argument("log_forward: empty observation sequence");
  ForwardResult r;
  r.alpha.assign(t_len * k, 0.0);
  r.log_scales.assign(t_len, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    double norm = 0.0;
    for (int j = 0; j < k; ++j) {
      double pred;
      if (t == 0) {
        pred = hmm.pi[j];
      } else {
        pred = 0.0;
        for (int i = 0; i < k; ++i)
          pred += r.alpha[(t - 1) * k + i] * hmm.at(i, j);
      }
      const double v = pred * gaussian_pdf(obs[t], hmm.means[j], hmm.stds[j]);
      r.alpha[t * k + j] = v;
      norm += v;
    }
    if (!(norm > 0.0)) {
      r.loglik = kNegInf;
      r.underflow = true;
      return r;
    }
    for (int j = 0; j < k; ++j) r.alpha[t * k + j] /= norm;
    r.log_scales[t] = std::log(norm);
    r.loglik += r.log_scales[t];
  }
  return r;
}

// Backward variables scaled by the forward pass coefficients, so that
// sum_j alpha_t(j) * beta_t(j) == 1 at every step.
inline std::vector<double> log_backward(const GaussianHmm& hmm,
                                        std::span<const double> obs,
                                        const ForwardResult& fwd) {
  const int k = hmm.n_states;
  const std::size_t t_len = obs.size();
  if (fwd.underflow) throw std::runtime_error("log_backward: forward pass underflowed");
  std::vector<double> beta(t_len * k, 0.0);
  for (int j = 0; j < k; ++j) beta[(t_len - 1) * k + j] = 1.0;
  for (std::size_t t = t_len - 1; t-- > 0;) {
    const double inv_scale = std::exp(-fwd.log_scales[t + 1]);
    for (int i = 0; i < k; ++i) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j)
        acc += hmm.at(i, j) * gaussian_pdf(obs[t + 1], hmm.means[j], hmm.stds[j]) *
               beta[(t + 1) * k + j];
      beta[t * k + i] = acc * inv_scale;
    }
  }
  return beta;
}

inline double sequence_loglik(const GaussianHmm& hmm, std::span<const double> obs) {
  return log_forward(hmm, obs).loglik;
}

struct ViterbiResult {
  std::vector<int> path;
  double log_prob = 0.0;
};

inline ViterbiResult viterbi(const GaussianHmm& hmm, std::span<const double> obs) {
  const int k = hmm.n_states;
  const std::size_t t_len = obs.size();
  if (t_len == 0) throw std::invalid_argument("viterbi: empty observation sequence");
  std::vector<double> delta(t_len * k, kNegInf);
  std::vector<int> back(t_len * k, 0);
  std::vector<double> log_pi(k), log_trans(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) log_pi[i] = std::log(hmm.pi[i]);
  for (std::size_t i = 0; i < log_trans.size(); ++i) log_trans[i] = std::log(hmm.trans[i]);
  auto log_emit = [&](std::size_t t, int j) {
    const double z = (obs[t] - hmm.means[j]) / hmm.stds[j];
    return -0.5 * z * z - std::log(hmm.stds[j]) - 0.5 * std::log(2.0 * M_PI);
  };
  for (int j = 0; j < k; ++j) delta[j] = log_pi[j] + log_emit(0, j);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < k; ++i) {
        const double v = delta[(t - 1) * k + i] + log_trans[static_cast<std::size_t>(i) * k + j];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta[t * k + j] = best + log_emit(t, j);
      back[t * k + j] = arg;
    }
  }
  ViterbiResult r;
  r.path.resize(t_len);
  double best = kNegInf;
  int arg = 0;
  for (int j = 0; j < k; ++j) {
    if (delta[(t_len - 1) * k + j] > best) {
      best = delta[(t_len - 1) * k + j];
      arg = j;
    }
  }
  r.log_prob = best;
  r.path[t_len - 1] = arg;
  for (std::size_t t = t_len - 1; t-- > 0;) r.path[t] = back[(t + 1) * k + r.path[t + 1]];
  return r;
}

// Explicit sum over all K^T hidden paths. Test oracle only.
inline double brute_force_loglik(const GaussianHmm& hmm, std::span<const double> obs) {
  const int k = hmm.n_states;
  const std::size_t t_len = obs.size();
  if (t_len == 0) throw std::invalid_argument("brute_force_loglik: empty sequence");
  double paths = std::pow(static_cast<double>(k), static_cast<double>(t_len));
  if (paths > 1e6) throw std::invalid_argument("brute_force_loglik: instance too large");
  const std::uint64_t n_paths = static_cast<std::uint64_t>(paths);
  // accumulate in log space for robustness on longer sequences
  double log_total = kNegInf;
  std::vector<int> path(t_len);
  for (std::uint64_t code = 0; code < n_paths; ++code) {
    std::uint64_t c = code;
    for (std::size_t t = 0; t < t_len; ++t) {
      path[t] = static_cast<int>(c % k);
      c /= k;
    }
    double lp = std::log(hmm.pi[path[0]]) +
                std::log(gaussian_pdf(obs[0], hmm.means[path[0]], hmm.stds[path[0]]));
    for (std::size_t t = 1; t < t_len; ++t)
      lp += std::log(hmm.at(path[t - 1], path[t])) +
            std::log(gaussian_pdf(obs[t], hmm.means[path[t]], hmm.stds[path[t]]));
    if (lp == kNegInf) continue;
    if (log_total == kNegInf) {
      log_total = lp;
    } else {
      const double hi = std::max(log_total, lp);
      log_total = hi + std::log(std::exp(log_total - hi) + std::exp(lp - hi));
    }
  }
  return log_total;
}

inline double viterbi_brute_force_best(const GaussianHmm& hmm,
                                       std::span<const double> obs,
                                       std::vector<int>* best_path = nullptr) {
  const int k = hmm.n_states;
  const std::size_t t_len = obs.size();
  double paths = std::pow(static_cast<double>(k), static_cast<double>(t_len));
  if (paths > 1e6) throw std::invalid_argument("viterbi oracle: instance too large");
  const std::uint64_t n_paths = static_cast<std::uint64_t>(paths);
  double best = kNegInf;
  std::vector<int> path(t_len);
  for (std::uint64_t code = 0; code < n_paths; ++code) {
    std::uint64_t c = code;
    for (std::size_t t = 0; t < t_len; ++t) {
      path[t] = static_cast<int>(c % k);
      c /= k;
    }
    double lp = std::log(hmm.pi[path[0]]) +
                std::log(gaussian_pdf(obs[0], hmm.means[path[0]], hmm.stds[path[0]]));
    for (std::size_t t = 1; t < t_len; ++t)
      lp += std::log(hmm.at(path[t - 1], path[t])) +
            std::log(gaussian_pdf(obs[t], hmm.means[path[t]], hmm.stds[path[t]]));
    if (lp > best) {
      best = lp;
      if (best_path) *best_path = path;
    }
  }
  return best;
}

// Multi-sequence Baum-Welch. E-step accumulates state/transition posteriors
// over every corpus sequence; M-step re-estimates all parameters with the
// variance floor applied. Stops on relative log-likelihood improvement < tol.
inline std::pair<GaussianHmm, FitReport> baum_welch(const GaussianHmm& hmm0,
                                                    const PerspectiveCorpus& corpus,
                                                    int max_iter = 200,
                                                    double tol = 1e-4) {
  if (corpus.sequences.empty()) throw std::invalid_argument("baum_welch: empty corpus");
  for (const auto& s : corpus.sequences)
    if (s.size() < 2)
      throw std::invalid_argument("baum_welch: corpus sequence shorter than 2");
  GaussianHmm hmm = hmm0;
  hmm.check();
  const int k = hmm.n_states;
  FitReport report;
  double prev_ll = kNegInf;

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<double> pi_acc(k, 0.0);
    std::vector<double> trans_acc(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> gamma_from_acc(k, 0.0);  // sum of gamma over t < T-1
    std::vector<double> gamma_acc(k, 0.0);       // sum of gamma over all t
    std::vector<double> mean_acc(k, 0.0);
    std::vector<double> var_acc(k, 0.0);
    double total_ll = 0.0;

    for (const auto& obs : corpus.sequences) {
      const std::size_t t_len = obs.size();
      const ForwardResult fwd = log_forward(hmm, obs);
      if (fwd.underflow)
        throw std::runtime_error("baum_welch: emission underflow on a training sequence");
      total_ll += fwd.loglik;
      const std::vector<double> beta = log_backward(hmm, obs, fwd);

      for (std::size_t t = 0; t < t_len; ++t) {
        for (int j = 0; j < k; ++j) {
          const double g = fwd.alpha[t * k + j] * beta[t * k + j];
          gamma_acc[j] += g;
          mean_acc[j] += g * obs[t];
          const double d = obs[t] - hmm.means[j];
          var_acc[j] += g * d * d;
          if (t == 0) pi_acc[j] += g;
          if (t + 1 < t_len) gamma_from_acc[j] += g;
        }
      }
      for (std::size_t t = 0; t + 1 < t_len; ++t) {
        const double inv_scale = std::exp(-fwd.log_scales[t + 1]);
        for (int i = 0; i < k; ++i) {
          const double a = fwd.alpha[t * k + i];
          if (a == 0.0) continue;
          for (int j = 0; j < k; ++j) {
            const double xi = a * hmm.at(i, j) *
                              gaussian_pdf(obs[t + 1], hmm.means[j], hmm.stds[j]) *
                              beta[(t + 1) * k + j] * inv_scale;
            trans_acc[static_cast<std::size_t>(i) * k + j] += xi;
          }
        }
      }
    }

    report.loglik_trajectory.push_back(total_ll);
    report.n_iterations = iter + 1;

    // M-step
    const double n_seqs = static_cast<double>(corpus.sequences.size());
    for (int j = 0; j < k; ++j) hmm.pi[j] = pi_acc[j] / n_seqs;
    for (int i = 0; i < k; ++i) {
      const double denom = gamma_from_acc[i];
      for (int j = 0; j < k; ++j) {
        double v = denom > 0.0 ? trans_acc[static_cast<std::size_t>(i) * k + j] / denom
                               : 1.0 / k;
        hmm.trans[static_cast<std::size_t>(i) * k + j] = v;
      }
      // renormalize against accumulated rounding
      double row = 0.0;
      for (int j = 0; j < k; ++j) row += hmm.at(i, j);
      for (int j = 0; j < k; ++j) hmm.trans[static_cast<std::size_t>(i) * k + j] /= row;
    }
    {
      double pisum = std::accumulate(hmm.pi.begin(), hmm.pi.end(), 0.0);
      for (int j = 0; j < k; ++j) hmm.pi[j] /= pisum;
    }
    for (int j = 0; j < k; ++j) {
      if (gamma_acc[j] > 0.0) {
        hmm.means[j] = mean_acc[j] / gamma_acc[j];
        double var = var_acc[j] / gamma_acc[j];
        hmm.stds[j] = std::sqrt(std::max(var, kVarianceFloor * kVarianceFloor));
      } else {
        hmm.stds[j] = std::max(hmm.stds[j], kVarianceFloor);
      }
      if (!std::isfinite(hmm.means[j]) || !std::isfinite(hmm.stds[j]))
        throw std::runtime_error("baum_welch: non-finite parameter update at iteration " +
                                 std::to_string(iter));
    }

    if (prev_ll != kNegInf) {
      const double rel = (total_ll - prev_ll) / std::abs(prev_ll);
      if (rel < tol) {
        report.converged = true;
        break;
      }
    }
    prev_ll = total_ll;
    if (tol == std::numeric_limits<double>::infinity()) break;  // single-iteration mode
  }
  hmm.check();
  return {hmm, report};
}

// Runs EM from `restarts` seeded initializations, keeps the best final
// log-likelihood. restarts = 1 reproduces plain baum_welch from init_hmm.
inline std::pair<GaussianHmm, FitReport> train_hmm(int n_states,
                                                   const PerspectiveCorpus& corpus,
                                                   std::uint64_t seed, int restarts = 1,
                                                   int max_iter = 200, double tol = 1e-4) {
  std::pair<GaussianHmm, FitReport> best;
  double best_ll = kNegInf;
  for (int r = 0; r < restarts; ++r) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(r));
    auto fitted = baum_welch(init_hmm(n_states, corpus, s), corpus, max_iter, tol);
    const double ll = fitted.second.loglik_trajectory.back();
    if (ll > best_ll) {
      best_ll = ll;
      best = std::move(fitted);
    }
  }
  best.first.seed = seed;
  return best;
}

// --- serialization: self-describing text, exact round trip ---------------

inline void save_hmm(const std::string& path, const GaussianHmm& hmm) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << "fraudseq-hmm 1\n";
  out << "n_states " << hmm.n_states << '\n';
  out << "transform " << hmm.transform_tag << '\n';
  out << "perspective " << (hmm.perspective.empty() ? "-" : hmm.perspective) << '\n';
  out << "window " << hmm.window << '\n';
  out << "corpus_size " << hmm.corpus_size << '\n';
  out << "seed " << hmm.seed << '\n';
  auto write_vec = [&](const char* name, const std::vector<double>& v) {
    out << name;
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
  };
  write_vec("pi", hmm.pi);
  write_vec("means", hmm.means);
  write_vec("stds", hmm.stds);
  for (int i = 0; i < hmm.n_states; ++i) {
    out << "trans";
    for (int j = 0; j < hmm.n_states; ++j) out << ' ' << format_double(hmm.at(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline GaussianHmm load_hmm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "fraudseq-hmm" || version != 1)
    throw std::runtime_error(path + ": not a fraudseq HMM model file");
  GaussianHmm hmm;
  std::string key;
  int trans_rows = 0;
  while (in >> key) {
    if (key == "n_states") {
      in >> hmm.n_states;
      hmm.pi.assign(hmm.n_states, 0.0);
      hmm.means.assign(hmm.n_states, 0.0);
      hmm.stds.assign(hmm.n_states, 0.0);
      hmm.trans.assign(static_cast<std::size_t>(hmm.n_states) * hmm.n_states, 0.0);
    } else if (key == "transform") {
      in >> hmm.transform_tag;
    } else if (key == "perspective") {
      in >> hmm.perspective;
      if (hmm.perspective == "-") hmm.perspective.clear();
    } else if (key == "window") {
      in >> hmm.window;
    } else if (key == "corpus_size") {
      in >> hmm.corpus_size;
    } else if (key == "seed") {
      in >> hmm.seed;
    } else if (key == "pi" || key == "means" || key == "stds") {
      std::vector<double>& v = key == "pi" ? hmm.pi : key == "means" ? hmm.means : hmm.stds;
      std::string tok;
      for (auto& x : v) {
        in >> tok;
        x = parse_double(tok);
      }
    } else if (key == "trans") {
      std::string tok;
      for (int j = 0; j < hmm.n_states; ++j) {
        in >> tok;
        hmm.trans[static_cast<std::size_t>(trans_rows) * hmm.n_states + j] = parse_double(tok);
      }
      ++trans_rows;
    } else {
      throw std::runtime_error(path + ": unknown model field '" + key + "'");
    }
  }
  if (trans_rows != hmm.n_states)
    throw std::runtime_error(path + ": truncated transition matrix");
  hmm.check();
  return hmm;
}

}  // namespace fraudseq

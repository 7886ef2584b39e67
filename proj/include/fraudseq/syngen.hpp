#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fraudseq/common.hpp"
#include "fraudseq/transaction.hpp"

namespace fraudseq {

// Shape of the planted test-then-spend fraud episode: a few small probe
// payments followed by large spends, minutes apart, on a compromised card.
struct EpisodeShape {
  int n_probe = 2;
  double probe_amount_min = 0.5;
  double probe_amount_max = 2.0;
  int n_spend = 2;
  double spend_multiplier = 8.0;   // versus the card's typical amount
  double delay_mean_seconds = 300;  // exponential inter-tx delay within an episode
};

struct GeneratorConfig {
  std::size_t n_cards = 1000;
  std::size_t n_terminals = 200;
  int days = 92;
  double fraud_rate = 3.7;  // frauds per 1000 transactions
  double channel_mix = 1.0;  // fraction e-commerce
  std::uint64_t seed = 1;
  EpisodeShape episode;
  double compromised_terminal_fraction = 0.05;
  std::string start_date = "2015-03-01";

  void check() const {
    if (n_cards == 0 || n_terminals == 0 || days <= 0)
      throw std::invalid_argument("generator: counts and horizon must be positive");
    if (fraud_rate < 0) throw std::invalid_argument("generator: fraud_rate must be >= 0");
    if (episode.n_probe < 1 || episode.n_spend < 1)
      throw std::invalid_argument("generator: episode needs n_probe >= 1 and n_spend >= 1");
    if (channel_mix < 0 || channel_mix > 1)
      throw std::invalid_argument("generator: channel_mix must be in [0,1]");
  }
};

namespace detail {

inline double round_cents(double v) {
  double r = std::round(v * 100.0) / 100.0;
  return r < 0.01 ? 0.01 : r;
}

struct CardProfile {
  double mu;         // log-amount location
  double sigma;      // log-amount scale
  double gap_mean;   // mean genuine inter-arrival, seconds
  std::int64_t first_active;  // newcomer cards start mid-horizon
  std::vector<std::uint32_t> home_terminals;
};

struct RawTx {
  std::int64_t timestamp;
  std::uint32_t card;
  std::uint32_t terminal;
  double amount;
  bool fraud;
};

}  // namespace detail

// Deterministic synthetic stream: per-card log-normal amount regimes with
// exponential inter-arrival times, plus probe-then-spend fraud episodes
// concentrated on a small set of compromised terminals. Identical
// (config, seed) gives bit-identical output.
inline std::vector<Transaction> generate(const GeneratorConfig& cfg) {
  cfg.check();
  Rng rng(cfg.seed);
  const std::int64_t t0 = parse_date_utc(cfg.start_date);
  const std::int64_t t1 = t0 + static_cast<std::int64_t>(cfg.days) * kSecondsPerDay;

  // terminal attributes
  const char* countries[] = {"BE", "FR", "NL", "DE", "LU", "GB", "US"};
  std::vector<std::string> term_country(cfg.n_terminals);
  std::vector<std::string> term_mcc(cfg.n_terminals);
  for (std::size_t i = 0; i < cfg.n_terminals; ++i) {
    term_country[i] = rng.bernoulli(0.85) ? "BE"
                                          : countries[1 + rng.uniform_index(6)];
    term_mcc[i] = std::to_string(5000 + 10 * rng.uniform_index(20));
  }
  std::vector<std::uint32_t> term_ids(cfg.n_terminals);
  for (std::size_t i = 0; i < cfg.n_terminals; ++i) term_ids[i] = static_cast<std::uint32_t>(i);
  rng.shuffle(term_ids);
  const std::size_t n_compromised_terms = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.compromised_terminal_fraction * cfg.n_terminals));
  std::vector<std::uint32_t> hot_terminals(term_ids.begin(),
                                           term_ids.begin() + n_compromised_terms);

  // card profiles from global hyper-priors
  std::vector<detail::CardProfile> cards(cfg.n_cards);
  for (auto& c : cards) {
    c.mu = rng.normal(3.0, 0.9);
    c.sigma = 0.4 + 0.6 * rng.uniform();
    c.gap_mean = std::exp(rng.normal(std::log(1.3 * kSecondsPerDay), 0.5));
    // a slice of the population are newcomers whose first activity falls
    // somewhere inside the horizon, so late periods see short histories
    c.first_active =
        rng.bernoulli(0.15)
            ? t0 + static_cast<std::int64_t>(rng.uniform() *
                                             static_cast<double>(t1 - t0))
            : t0;
    const std::size_t n_home = 3 + rng.uniform_index(6);
    for (std::size_t i = 0; i < n_home; ++i)
      c.home_terminals.push_back(
          static_cast<std::uint32_t>(rng.uniform_index(cfg.n_terminals)));
  }

  // genuine streams
  std::vector<detail::RawTx> txs;
  for (std::uint32_t ci = 0; ci < cfg.n_cards; ++ci) {
    const auto& c = cards[ci];
    double t = static_cast<double>(c.first_active) + rng.exponential(c.gap_mean);
    while (t < static_cast<double>(t1)) {
      detail::RawTx tx;
      tx.timestamp = static_cast<std::int64_t>(t);
      tx.card = ci;
      tx.terminal = c.home_terminals[rng.uniform_index(c.home_terminals.size())];
      tx.amount = detail::round_cents(std::exp(rng.normal(c.mu, c.sigma)));
      tx.fraud = false;
      txs.push_back(tx);
      t += rng.exponential(c.gap_mean);
    }
  }
  const std::size_t n_genuine = txs.size();

  // fraud episodes sized to hit the target prevalence
  const double rate = cfg.fraud_rate / 1000.0;
  const int episode_len = cfg.episode.n_probe + cfg.episode.n_spend;
  std::size_t n_episodes = 0;
  if (rate > 0.0 && n_genuine > 0) {
    const double target_frauds = rate * static_cast<double>(n_genuine) / (1.0 - rate);
    n_episodes = static_cast<std::size_t>(
        std::llround(target_frauds / static_cast<double>(episode_len)));
    if (n_episodes == 0) n_episodes = 1;
  }
  std::vector<std::uint32_t> card_order(cfg.n_cards);
  for (std::uint32_t i = 0; i < cfg.n_cards; ++i) card_order[i] = i;
  rng.shuffle(card_order);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    const std::uint32_t ci = card_order[e % cfg.n_cards];
    const auto& c = cards[ci];
    // keep a margin so episodes stay inside the horizon
    double t = static_cast<double>(t0) +
               rng.uniform() * static_cast<double>(t1 - t0 - 2 * kSecondsPerDay) +
               kSecondsPerDay;
    const bool on_hot = rng.bernoulli(0.8);
    const std::uint32_t term =
        on_hot ? hot_terminals[rng.uniform_index(hot_terminals.size())]
               : static_cast<std::uint32_t>(rng.uniform_index(cfg.n_terminals));
    const double typical = std::exp(c.mu + 0.5 * c.sigma * c.sigma);
    for (int i = 0; i < episode_len; ++i) {
      detail::RawTx tx;
      tx.timestamp = static_cast<std::int64_t>(t);
      tx.card = ci;
      tx.terminal = term;
      if (i < cfg.episode.n_probe) {
        tx.amount = detail::round_cents(
            rng.uniform(cfg.episode.probe_amount_min, cfg.episode.probe_amount_max));
      } else {
        tx.amount = detail::round_cents(cfg.episode.spend_multiplier * typical *
                                        rng.uniform(0.8, 1.2));
      }
      tx.fraud = true;
      txs.push_back(tx);
      t += std::max(10.0, rng.exponential(cfg.episode.delay_mean_seconds));
    }
  }

  // final ordering and id assignment; ids follow time order so the
  // (timestamp, tx_id) tie-break is stable
  std::stable_sort(txs.begin(), txs.end(),
                   [](const detail::RawTx& a, const detail::RawTx& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::vector<Transaction> out;
  out.reserve(txs.size());
  char idbuf[32];
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& r = txs[i];
    Transaction tx;
    std::snprintf(idbuf, sizeof(idbuf), "t%08zu", i);
    tx.tx_id = idbuf;
    tx.card_id = "c" + std::to_string(r.card);
    tx.terminal_id = "m" + std::to_string(r.terminal);
    tx.timestamp = r.timestamp;
    tx.amount = r.amount;
    tx.country = term_country[r.terminal];
    tx.mcc = term_mcc[r.terminal];
    // channel derived deterministically from ids, not the RNG stream, so the
    // label sequence is independent of the mix knob
    const std::uint64_t h = derive_seed(cfg.seed ^ 0xc0ffee, i);
    tx.channel = (static_cast<double>(h >> 11) * 0x1.0p-53) < cfg.channel_mix
                     ? Channel::ecommerce
                     : Channel::face_to_face;
    tx.label = r.fraud ? Label::fraud : Label::genuine;
    out.push_back(std::move(tx));
  }
  return out;
}

// Presets mirroring the two reported prevalence regimes.
inline GeneratorConfig ecommerce_preset(std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.fraud_rate = 3.7;
  cfg.channel_mix = 1.0;
  cfg.seed = seed;
  return cfg;
}

inline GeneratorConfig face_to_face_preset(std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.fraud_rate = 0.2;
  cfg.channel_mix = 0.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace fraudseq

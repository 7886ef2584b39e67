#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fraudseq/config.hpp"
#include "fraudseq/ensembles.hpp"
#include "fraudseq/eval.hpp"
#include "fraudseq/features.hpp"
#include "fraudseq/gridsearch.hpp"
#include "fraudseq/hmm.hpp"
#include "fraudseq/syngen.hpp"
#include "fraudseq/transaction.hpp"

namespace fraudseq {

struct HmmTrainConfig {
  int n_states = 5;
  int max_iter = 100;
  double tol = 1e-4;
  int restarts = 1;
  std::uint64_t seed = 7;
};

struct ClassifierConfig {
  std::string family = "rf";  // rf | logreg | adaboost
  bool use_reference_grid = false;
  RfParams rf{60, 4, 20, 12, 0};
  AdaParams ada{100, 1.0, 10.0, 4, 0};
  LogRegParams lr{1.0, Penalty::l2, 10.0, 300};
};

struct PipelineConfig {
  // data source: either an input CSV or the generator
  std::string data_path;  // empty -> generate
  GeneratorConfig generator;
  DatasetSplit split = DatasetSplit::reference_2015();

  HmmTrainConfig hmm;
  std::vector<std::size_t> windows = {3};      // feature windows to build
  std::vector<int> sweep_states = {3, 5, 7};   // sweep grid
  std::vector<std::size_t> sweep_windows = {3, 5, 7};

  ClassifierConfig classifier;
  std::vector<std::string> feature_sets = {"raw", "raw+aggCH", "raw+allagg"};
  bool compare_hmm = true;  // evaluate each feature set with and without HMM
  MissingStrategy strategy = MissingStrategy::default0;
  std::size_t feature_window = 3;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string out_dir = "out";
  bool write_features = true;
};

// --- config file loading --------------------------------------------------

inline GeneratorConfig generator_from_ini(const IniConfig& ini) {
  GeneratorConfig g;
  const std::string preset = ini.get("generator", "preset", "");
  if (preset == "ecommerce")
    g = ecommerce_preset();
  else if (preset == "face_to_face")
    g = face_to_face_preset();
  else if (!preset.empty() && preset != "none")
    throw std::runtime_error("unknown generator preset: " + preset);
  g.n_cards = static_cast<std::size_t>(ini.get_int("generator", "n_cards", static_cast<std::int64_t>(g.n_cards)));
  g.n_terminals = static_cast<std::size_t>(ini.get_int("generator", "n_terminals", static_cast<std::int64_t>(g.n_terminals)));
  g.days = static_cast<int>(ini.get_int("generator", "days", g.days));
  g.fraud_rate = ini.get_double("generator", "fraud_rate", g.fraud_rate);
  g.channel_mix = ini.get_double("generator", "channel_mix", g.channel_mix);
  g.seed = static_cast<std::uint64_t>(ini.get_int("generator", "seed", static_cast<std::int64_t>(g.seed)));
  g.episode.n_probe = static_cast<int>(ini.get_int("generator", "n_probe", g.episode.n_probe));
  g.episode.probe_amount_min = ini.get_double("generator", "probe_amount_min", g.episode.probe_amount_min);
  g.episode.probe_amount_max = ini.get_double("generator", "probe_amount_max", g.episode.probe_amount_max);
  g.episode.n_spend = static_cast<int>(ini.get_int("generator", "n_spend", g.episode.n_spend));
  g.episode.spend_multiplier = ini.get_double("generator", "spend_multiplier", g.episode.spend_multiplier);
  g.episode.delay_mean_seconds = ini.get_double("generator", "delay_mean_seconds", g.episode.delay_mean_seconds);
  g.compromised_terminal_fraction =
      ini.get_double("generator", "compromised_terminal_fraction", g.compromised_terminal_fraction);
  g.start_date = ini.get("generator", "start_date", g.start_date);
  return g;
}

inline PipelineConfig pipeline_from_ini(const IniConfig& ini) {
  PipelineConfig cfg;
  cfg.data_path = ini.get("data", "path", "");
  cfg.generator = generator_from_ini(ini);
  cfg.split = DatasetSplit::from_dates(
      ini.get("split", "train_begin", "2015-03-01"),
      ini.get("split", "train_end", "2015-04-26"),
      ini.get("split", "validation_end", "2015-04-30"),
      ini.get("split", "test_begin", "2015-05-08"),
      ini.get("split", "test_end", "2015-05-31"),
      static_cast<int>(ini.get_int("split", "gap_days", 7)));

  cfg.hmm.n_states = static_cast<int>(ini.get_int("hmm", "hidden_states", 5));
  cfg.hmm.max_iter = static_cast<int>(ini.get_int("hmm", "max_iter", 100));
  cfg.hmm.tol = ini.get_double("hmm", "tol", 1e-4);
  cfg.hmm.restarts = static_cast<int>(ini.get_int("hmm", "restarts", 1));
  cfg.hmm.seed = static_cast<std::uint64_t>(ini.get_int("hmm", "seed", 7));
  cfg.windows.clear();
  for (const auto& w : ini.get_list("hmm", "windows", "3"))
    cfg.windows.push_back(static_cast<std::size_t>(parse_int64(w)));
  cfg.sweep_states.clear();
  for (const auto& s : ini.get_list("sweep", "hidden_states", "3,5,7"))
    cfg.sweep_states.push_back(static_cast<int>(parse_int64(s)));
  cfg.sweep_windows.clear();
  for (const auto& w : ini.get_list("sweep", "windows", "3,5,7"))
    cfg.sweep_windows.push_back(static_cast<std::size_t>(parse_int64(w)));

  auto& cc = cfg.classifier;
  cc.family = ini.get("classifier", "family", "rf");
  cc.use_reference_grid = ini.get_bool("classifier", "reference_grid", false);
  cc.rf.n_trees = static_cast<std::size_t>(ini.get_int("classifier", "n_trees", 60));
  cc.rf.n_features_per_split = static_cast<std::size_t>(ini.get_int("classifier", "n_features_per_split", 4));
  cc.rf.min_samples_leaf = static_cast<std::size_t>(ini.get_int("classifier", "min_samples_leaf", 20));
  cc.rf.max_depth = static_cast<std::size_t>(ini.get_int("classifier", "max_depth", 12));
  cc.ada.n_trees = static_cast<std::size_t>(ini.get_int("classifier", "ada_n_trees", 100));
  cc.ada.learning_rate = ini.get_double("classifier", "ada_learning_rate", 1.0);
  cc.ada.stop_tolerance = ini.get_double("classifier", "ada_stop_tolerance", 10.0);
  cc.ada.max_tree_depth = static_cast<std::size_t>(ini.get_int("classifier", "ada_max_depth", 4));
  cc.lr.C = ini.get_double("classifier", "logreg_C", 1.0);
  cc.lr.penalty = ini.get("classifier", "logreg_penalty", "l2") == "l1" ? Penalty::l1 : Penalty::l2;
  cc.lr.tolerance = ini.get_double("classifier", "logreg_tolerance", 10.0);
  cc.lr.max_iter = static_cast<std::size_t>(ini.get_int("classifier", "logreg_max_iter", 300));

  cfg.feature_sets = ini.get_list("experiment", "feature_sets", "raw,raw+aggCH,raw+allagg");
  cfg.compare_hmm = ini.get_bool("experiment", "compare_hmm", true);
  cfg.strategy = parse_missing_strategy(ini.get("experiment", "strategy", "default0"));
  cfg.feature_window = static_cast<std::size_t>(ini.get_int("experiment", "window", 3));
  cfg.seeds.clear();
  for (const auto& s : ini.get_list("experiment", "seeds", "1,2,3"))
    cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int64(s)));
  if (cfg.seeds.empty()) throw std::runtime_error("config: experiment.seeds must be non-empty");
  cfg.out_dir = ini.get("experiment", "out", "out");
  cfg.write_features = ini.get_bool("experiment", "write_features", true);
  return cfg;
}

// --- stage helpers --------------------------------------------------------

struct PreparedData {
  std::vector<Transaction> txs;
  Partition part;
};

inline PreparedData prepare_data(const PipelineConfig& cfg) {
  PreparedData d;
  d.txs = cfg.data_path.empty() ? generate(cfg.generator)
                                : load_transactions(cfg.data_path);
  d.part = partition(d.txs, cfg.split);
  return d;
}

// Trains the 8-model bank for one (window, n_states) cell.
inline ModelBank train_model_bank(const std::array<PerspectiveCorpus, 8>& corpora,
                                  const HmmTrainConfig& hc, int n_states,
                                  std::size_t window,
                                  std::array<FitReport, 8>* reports = nullptr) {
  ModelBank bank;
  for (std::size_t i = 0; i < 8; ++i) {
    const std::uint64_t seed = derive_seed(hc.seed, i * 1000 + window * 10 +
                                                        static_cast<std::size_t>(n_states));
    auto [hmm, report] =
        train_hmm(n_states, corpora[i], seed, hc.restarts, hc.max_iter, hc.tol);
    hmm.window = window;
    bank[i] = std::move(hmm);
    if (reports) (*reports)[i] = std::move(report);
  }
  return bank;
}

struct FeaturizedData {
  HistoryIndex index;
  Encoders encoders;
  std::map<std::size_t, ModelBank> banks;  // by window
  std::vector<TxFeatureRecord> train, validation, test;
};

inline FeaturizedData featurize_all(const PreparedData& d,
                                    const std::map<std::size_t, ModelBank>& banks) {
  FeaturizedData f{HistoryIndex(d.txs), Encoders::fit(d.part.train), banks, {}, {}, {}};
  f.train = compute_feature_records(d.part.train, f.index, banks);
  f.validation = compute_feature_records(d.part.validation, f.index, banks);
  f.test = compute_feature_records(d.part.test, f.index, banks);
  return f;
}

inline void write_feature_csv(const std::string& path, const FeatureMatrix& m,
                              const std::vector<Transaction>& subset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write feature matrix: " + path);
  out << "tx_id";
  for (const auto& c : m.column_names) out << ',' << c;
  out << ",label\n";
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out << subset[m.tx_indices[r]].tx_id;
    for (double v : m.rows[r]) out << ',' << format_double(v);
    out << ',' << m.labels[r] << '\n';
  }
}

// Trains the configured classifier family and returns test scores. When the
// reference grid is enabled the best cell is chosen on validation PR-AUC.
struct ScoredRun {
  std::vector<double> test_scores;
  double test_auc = 0.0;
  std::string params_description;
  std::string grid_csv;  // non-empty when a grid search ran
};

namespace detail {

template <typename P, typename Model>
ScoredRun run_family(std::vector<P> grid, bool search, const Dataset& train,
                     const Dataset& validation, const std::vector<int>& val_labels,
                     const Dataset& test, const std::vector<int>& test_labels) {
  ScoredRun out;
  P chosen = grid.front();
  if (search && grid.size() > 1) {
    auto result = grid_search(grid, [&](const P& p) {
      Model m;
      m.fit(train, p);
      return pr_auc(m.predict_proba_all(validation), val_labels);
    });
    chosen = result.best_params();
    std::string csv = "cell,params,validation_pr_auc,selected\n";
    for (std::size_t i = 0; i < result.cells.size(); ++i)
      csv += std::to_string(i) + "," + describe(result.cells[i].params) + "," +
             format_double(result.cells[i].validation_auc) + "," +
             (i == result.best_index ? "1" : "0") + "\n";
    out.grid_csv = csv;
  }
  Model m;
  m.fit(train, chosen);
  out.test_scores = m.predict_proba_all(test);
  out.test_auc = pr_auc(out.test_scores, test_labels);
  out.params_description = describe(chosen);
  return out;
}

}  // namespace detail

inline ScoredRun train_and_score(const ClassifierConfig& cc, const FeatureMatrix& train_m,
                                 const FeatureMatrix& val_m, const FeatureMatrix& test_m,
                                 std::uint64_t seed) {
  const Dataset train = Dataset::from_matrix(train_m);
  const Dataset validation = Dataset::from_matrix(val_m);
  const Dataset test = Dataset::from_matrix(test_m);
  const std::size_t d = train.d();
  if (cc.family == "rf") {
    std::vector<RfParams> grid;
    if (cc.use_reference_grid) {
      grid = rf_reference_grid(seed);
      for (auto& p : grid)
        if (p.n_features_per_split > d) p.n_features_per_split = d;
    } else {
      RfParams p = cc.rf;
      p.seed = seed;
      if (p.n_features_per_split > d) p.n_features_per_split = d;
      grid.push_back(p);
    }
    return detail::run_family<RfParams, RandomForest>(grid, cc.use_reference_grid, train,
                                                      validation, val_m.labels, test,
                                                      test_m.labels);
  }
  if (cc.family == "adaboost") {
    std::vector<AdaParams> grid;
    if (cc.use_reference_grid) {
      grid = ada_reference_grid(seed);
    } else {
      AdaParams p = cc.ada;
      p.seed = seed;
      grid.push_back(p);
    }
    return detail::run_family<AdaParams, AdaBoost>(grid, cc.use_reference_grid, train,
                                                   validation, val_m.labels, test,
                                                   test_m.labels);
  }
  if (cc.family == "logreg") {
    std::vector<LogRegParams> grid =
        cc.use_reference_grid ? logreg_reference_grid() : std::vector<LogRegParams>{cc.lr};
    return detail::run_family<LogRegParams, LogisticRegression>(
        grid, cc.use_reference_grid, train, validation, val_m.labels, test, test_m.labels);
  }
  throw std::runtime_error("unknown classifier family: " + cc.family);
}

// --- experiment orchestration --------------------------------------------

struct VariantResult {
  std::string feature_set;
  bool with_hmm = false;
  RunSummary summary;
  std::vector<double> per_seed_auc;
  std::string params_description;
  std::string grid_csv;
  std::vector<double> first_seed_scores;
  std::vector<int> first_seed_labels;
};

struct ExperimentResult {
  std::vector<VariantResult> variants;
  std::vector<ComparisonRow> comparison;
  std::size_t test_rows_total = 0;
  std::size_t test_rows_evaluated = 0;
};

// Restricts a subset to rows whose HMM features at `window` are all present.
inline std::vector<std::size_t> full_history_rows(const std::vector<TxFeatureRecord>& records,
                                                  std::size_t window) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& fs = records[i].hmm_by_window.at(window);
    bool all = true;
    for (bool p : fs.present) all = all && p;
    if (all) rows.push_back(i);
  }
  return rows;
}

inline FeatureMatrix select_rows(const FeatureMatrix& m, const std::vector<std::size_t>& subset_rows) {
  std::set<std::size_t> keep(subset_rows.begin(), subset_rows.end());
  FeatureMatrix out;
  out.column_names = m.column_names;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    if (!keep.count(m.tx_indices[r])) continue;
    out.rows.push_back(m.rows[r]);
    out.labels.push_back(m.labels[r]);
    out.tx_indices.push_back(m.tx_indices[r]);
  }
  return out;
}

// Runs the feature-set comparison: each requested feature set with and
// without the HMM block, over the configured seeds (classifier randomness
// only; HMM training held fixed).
inline ExperimentResult run_experiment(const PipelineConfig& cfg, const PreparedData& d,
                                       const FeaturizedData& f) {
  ExperimentResult result;
  result.test_rows_total = d.part.test.size();

  const bool exclude = cfg.strategy == MissingStrategy::exclude;
  const MissingStrategy assemble_strategy =
      exclude ? MissingStrategy::exclude : MissingStrategy::default0;
  const bool ensemble_strategy = cfg.strategy == MissingStrategy::weighted_pr ||
                                 cfg.strategy == MissingStrategy::stacked_rf;

  // under exclude, all variants are paired on the full-history rows
  std::vector<std::size_t> train_rows, val_rows, test_rows;
  if (exclude) {
    train_rows = full_history_rows(f.train, cfg.feature_window);
    val_rows = full_history_rows(f.validation, cfg.feature_window);
    test_rows = full_history_rows(f.test, cfg.feature_window);
  }

  for (const std::string& set_name : cfg.feature_sets) {
    for (int hmm_pass = 0; hmm_pass < (cfg.compare_hmm ? 2 : 1); ++hmm_pass) {
      const bool with_hmm = hmm_pass == 1;
      VariantResult var;
      var.feature_set = set_name;
      var.with_hmm = with_hmm;

      if (with_hmm && ensemble_strategy) {
        // the HMM-side model is the specialist ensemble over windows {3,5,7}
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
          RfParams base = cfg.classifier.rf;
          base.seed = cfg.seeds[si];
          SpecialistBank bank = train_specialists(d.part.train, f.train, d.part.validation,
                                                  f.validation, f.encoders, base);
          std::vector<double> scores;
          if (cfg.strategy == MissingStrategy::weighted_pr) {
            WeightedPrEnsemble ens(std::move(bank), f.encoders);
            scores = ens.predict_all(d.part.test, f.test);
          } else {
            StackedRfEnsemble ens(std::move(bank), f.encoders);
            RfParams meta = base;
            meta.seed = derive_seed(base.seed, 99);
            ens.fit_meta(d.part.validation, f.validation, meta);
            scores = ens.predict_all(d.part.test, f.test);
          }
          std::vector<int> labels;
          for (const auto& tx : d.part.test) labels.push_back(tx.is_fraud() ? 1 : 0);
          var.per_seed_auc.push_back(pr_auc(scores, labels));
          if (si == 0) {
            var.first_seed_scores = std::move(scores);
            var.first_seed_labels = std::move(labels);
          }
        }
        var.params_description = cfg.strategy == MissingStrategy::weighted_pr
                                     ? "weighted_pr ensemble"
                                     : "stacked_rf ensemble";
      } else {
        const FeatureSetSpec spec =
            parse_feature_set(with_hmm ? set_name + "+HMM" : set_name);
        FeatureMatrix train_m = assemble(d.part.train, f.train, f.encoders, spec,
                                         assemble_strategy, cfg.feature_window);
        FeatureMatrix val_m = assemble(d.part.validation, f.validation, f.encoders, spec,
                                       assemble_strategy, cfg.feature_window);
        FeatureMatrix test_m = assemble(d.part.test, f.test, f.encoders, spec,
                                        assemble_strategy, cfg.feature_window);
        if (exclude && !spec.hmm) {
          train_m = select_rows(train_m, train_rows);
          val_m = select_rows(val_m, val_rows);
          test_m = select_rows(test_m, test_rows);
        }
        result.test_rows_evaluated = test_m.rows.size();
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
          ScoredRun run =
              train_and_score(cfg.classifier, train_m, val_m, test_m, cfg.seeds[si]);
          var.per_seed_auc.push_back(run.test_auc);
          if (si == 0) {
            var.first_seed_scores = std::move(run.test_scores);
            var.first_seed_labels = test_m.labels;
            var.params_description = run.params_description;
            var.grid_csv = std::move(run.grid_csv);
          }
        }
      }
      var.summary = summarize_runs(set_name + (with_hmm ? "+HMM" : ""), var.per_seed_auc);
      result.variants.push_back(std::move(var));
    }
  }

  if (cfg.compare_hmm) {
    for (std::size_t i = 0; i + 1 < result.variants.size(); i += 2)
      result.comparison.push_back(compare_feature_set(result.variants[i].feature_set,
                                                      result.variants[i].summary,
                                                      result.variants[i + 1].summary));
  }
  if (result.test_rows_evaluated == 0) result.test_rows_evaluated = d.part.test.size();
  return result;
}

// Table of test-set sizes under increasing history requirements.
struct HistoryCountsRow {
  std::string constraint;
  std::size_t n_transactions = 0;
  std::size_t n_frauds = 0;
};

inline std::vector<HistoryCountsRow> history_counts(const std::vector<Transaction>& test,
                                                    const std::vector<TxFeatureRecord>& records) {
  std::vector<HistoryCountsRow> rows;
  auto count = [&](const char* name, std::size_t min_hist) {
    HistoryCountsRow r{name, 0, 0};
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (records[i].ch_history >= min_hist && records[i].tm_history >= min_hist) {
        ++r.n_transactions;
        r.n_frauds += test[i].is_fraud();
      }
    }
    rows.push_back(r);
  };
  count("all", 0);
  count("history>=3", 3);
  count("history>=7", 7);
  return rows;
}

// 3x3 hyperparameter sweep: mean +- std test PR-AUC of raw+HMM per
// (hidden states x window) cell.
struct SweepResult {
  std::vector<int> states;
  std::vector<std::size_t> windows;
  std::vector<std::vector<RunSummary>> cells;  // [state][window]
  RunSummary raw_baseline;
};

inline SweepResult run_sweep(const PipelineConfig& cfg, const PreparedData& d) {
  SweepResult sr;
  sr.states = cfg.sweep_states;
  sr.windows = cfg.sweep_windows;
  if (sr.states.size() * sr.windows.size() < 2)
    throw std::runtime_error("sweep: needs at least 2 cells");

  const auto card_seqs = group_by_actor(d.part.train, ActorKind::card_holder);
  const auto term_seqs = group_by_actor(d.part.train, ActorKind::terminal);

  // raw baseline is sweep-cell independent
  {
    PipelineConfig base = cfg;
    base.feature_sets = {"raw"};
    base.compare_hmm = false;
    base.strategy = MissingStrategy::default0;
    std::map<std::size_t, ModelBank> no_banks;
    FeaturizedData f = featurize_all(d, no_banks);
    ExperimentResult r = run_experiment(base, d, f);
    sr.raw_baseline = r.variants[0].summary;
  }

  for (int k : sr.states) {
    std::vector<RunSummary> row;
    for (std::size_t w : sr.windows) {
      const auto corpora = build_corpora(card_seqs, term_seqs, w);
      std::map<std::size_t, ModelBank> banks;
      banks[w] = train_model_bank(corpora, cfg.hmm, k, w);
      FeaturizedData f = featurize_all(d, banks);
      PipelineConfig cell = cfg;
      cell.feature_sets = {"raw"};
      cell.compare_hmm = true;
      cell.strategy = MissingStrategy::default0;
      cell.feature_window = w;
      ExperimentResult r = run_experiment(cell, d, f);
      // variants: raw, raw+HMM
      row.push_back(r.variants[1].summary);
    }
    sr.cells.push_back(std::move(row));
  }
  return sr;
}

inline void save_sweep(const std::string& csv_path, const std::string& text_path,
                       const SweepResult& sr) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write sweep report: " + csv_path);
  csv << "hidden_states";
  for (std::size_t w : sr.windows) csv << ",w" << w << "_mean,w" << w << "_std";
  csv << '\n';
  for (std::size_t i = 0; i < sr.states.size(); ++i) {
    csv << sr.states[i];
    for (std::size_t j = 0; j < sr.windows.size(); ++j)
      csv << ',' << format_double(sr.cells[i][j].mean_auc) << ','
          << format_double(sr.cells[i][j].std_auc);
    csv << '\n';
  }
  std::ofstream txt(text_path);
  txt << "raw+HMM test PR-AUC, rows = hidden states, columns = window size\n";
  txt << "(raw baseline: " << format_mean_std(sr.raw_baseline) << ")\n\n";
  txt << "        ";
  for (std::size_t w : sr.windows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "w=%-18zu", w);
    txt << buf;
  }
  txt << '\n';
  for (std::size_t i = 0; i < sr.states.size(); ++i) {
    char head[16];
    std::snprintf(head, sizeof(head), "K=%-6d", sr.states[i]);
    txt << head;
    for (std::size_t j = 0; j < sr.windows.size(); ++j) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%-20s", format_mean_std(sr.cells[i][j]).c_str());
      txt << buf;
    }
    txt << '\n';
  }
}

// --- full run -------------------------------------------------------------

struct PipelineArtifacts {
  ExperimentResult experiment;
  std::vector<HistoryCountsRow> counts;
  std::string out_dir;
};

inline void write_manifest(const PipelineConfig& cfg, const IniConfig& ini,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << "{\n";
  out << "  \"config_hash\": \"" << std::hex << ini.hash() << std::dec << "\",\n";
  out << "  \"seeds\": [";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    out << (i ? "," : "") << cfg.seeds[i];
  out << "],\n";
  out << "  \"config\": [\n";
  std::istringstream lines(ini.raw_text());
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    std::string esc;
    for (char c : line) {
      if (c == '"' || c == '\\') esc += '\\';
      if (c != '\r') esc += c;
    }
    out << (first ? "" : ",\n") << "    \"" << esc << "\"";
    first = false;
  }
  out << "\n  ]\n}\n";
}

inline PipelineArtifacts run_pipeline(const IniConfig& ini,
                                      const std::string& out_override = "") {
  namespace fs = std::filesystem;
  PipelineConfig cfg = pipeline_from_ini(ini);
  if (!out_override.empty()) cfg.out_dir = out_override;
  PipelineArtifacts artifacts;
  artifacts.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/split");
  fs::create_directories(cfg.out_dir + "/models");
  fs::create_directories(cfg.out_dir + "/features");
  fs::create_directories(cfg.out_dir + "/reports");
  write_manifest(cfg, ini, cfg.out_dir + "/manifest.json");

  PreparedData d = prepare_data(cfg);
  if (cfg.data_path.empty())
    save_transactions(cfg.out_dir + "/transactions.csv", d.txs);
  save_transactions(cfg.out_dir + "/split/train.csv", d.part.train);
  save_transactions(cfg.out_dir + "/split/validation.csv", d.part.validation);
  save_transactions(cfg.out_dir + "/split/gap.csv", d.part.gap);
  save_transactions(cfg.out_dir + "/split/test.csv", d.part.test);
  {
    std::ofstream sum(cfg.out_dir + "/split/summary.txt");
    sum << "train " << d.part.train.size() << "\nvalidation " << d.part.validation.size()
        << "\ngap " << d.part.gap.size() << "\ntest " << d.part.test.size()
        << "\ndropped " << d.part.dropped << '\n';
    for (const auto& w : d.part.warnings) sum << "warning: " << w << '\n';
  }

  // windows needed: the experiment window plus {3,5,7} for ensembles
  std::set<std::size_t> windows(cfg.windows.begin(), cfg.windows.end());
  windows.insert(cfg.feature_window);
  if (cfg.strategy == MissingStrategy::weighted_pr ||
      cfg.strategy == MissingStrategy::stacked_rf)
    windows.insert({3, 5, 7});

  const auto card_seqs = group_by_actor(d.part.train, ActorKind::card_holder);
  const auto term_seqs = group_by_actor(d.part.train, ActorKind::terminal);
  std::map<std::size_t, ModelBank> banks;
  for (std::size_t w : windows) {
    const auto corpora = build_corpora(card_seqs, term_seqs, w);
    std::array<FitReport, 8> reports;
    banks[w] = train_model_bank(corpora, cfg.hmm, cfg.hmm.n_states, w, &reports);
    for (std::size_t i = 0; i < 8; ++i) {
      const std::string stem = perspective_name(corpora[i].perspective) + "_w" +
                               std::to_string(w) + "_K" +
                               std::to_string(cfg.hmm.n_states);
      save_hmm(cfg.out_dir + "/models/hmm_" + stem + ".txt", banks[w][i]);
      std::ofstream fit(cfg.out_dir + "/models/fit_" + stem + ".csv");
      fit << "iteration,loglik\n";
      for (std::size_t it = 0; it < reports[i].loglik_trajectory.size(); ++it)
        fit << it << ',' << format_double(reports[i].loglik_trajectory[it]) << '\n';
    }
  }

  FeaturizedData f = featurize_all(d, banks);

  if (cfg.write_features) {
    for (const std::string& set_name : cfg.feature_sets) {
      for (int hmm_pass = 0; hmm_pass < (cfg.compare_hmm ? 2 : 1); ++hmm_pass) {
        const FeatureSetSpec spec =
            parse_feature_set(hmm_pass ? set_name + "+HMM" : set_name);
        const MissingStrategy st = cfg.strategy == MissingStrategy::exclude
                                       ? MissingStrategy::exclude
                                       : MissingStrategy::default0;
        auto emit = [&](const char* tag, const std::vector<Transaction>& subset,
                        const std::vector<TxFeatureRecord>& records) {
          write_feature_csv(cfg.out_dir + "/features/" + spec.name + "_w" +
                                std::to_string(cfg.feature_window) + "_" + tag + ".csv",
                            assemble(subset, records, f.encoders, spec, st,
                                     cfg.feature_window),
                            subset);
        };
        emit("train", d.part.train, f.train);
        emit("validation", d.part.validation, f.validation);
        emit("test", d.part.test, f.test);
      }
    }
    std::ofstream meta(cfg.out_dir + "/features/metadata.txt");
    meta << "window " << cfg.feature_window << "\ntransform " << kSignalTransform
         << "\nstrategy " << static_cast<int>(cfg.strategy) << "\ncountry_codes";
    for (const auto& [v, c] : f.encoders.country.table()) meta << ' ' << v << '=' << c;
    meta << "\nmcc_codes";
    for (const auto& [v, c] : f.encoders.mcc.table()) meta << ' ' << v << '=' << c;
    meta << '\n';
  }

  artifacts.experiment = run_experiment(cfg, d, f);
  artifacts.counts = history_counts(d.part.test, f.test);

  // reports
  {
    std::ofstream counts(cfg.out_dir + "/reports/counts.csv");
    counts << "constraint,n_transactions,n_frauds\n";
    for (const auto& r : artifacts.counts)
      counts << r.constraint << ',' << r.n_transactions << ',' << r.n_frauds << '\n';
  }
  {
    std::ofstream summary(cfg.out_dir + "/reports/variants.csv");
    summary << "feature_set,with_hmm,mean_auc,std_auc,n_runs,params\n";
    for (const auto& v : artifacts.experiment.variants)
      summary << v.feature_set << ',' << (v.with_hmm ? 1 : 0) << ','
              << format_double(v.summary.mean_auc) << ','
              << format_double(v.summary.std_auc) << ',' << v.summary.n_runs << ",\""
              << v.params_description << "\"\n";
  }
  for (const auto& v : artifacts.experiment.variants) {
    const std::string stem = v.feature_set + (v.with_hmm ? "+HMM" : "");
    save_pr_curve(cfg.out_dir + "/reports/pr_" + stem + ".csv",
                  pr_curve(v.first_seed_scores, v.first_seed_labels));
    if (!v.grid_csv.empty()) {
      std::ofstream grid(cfg.out_dir + "/reports/grid_" + stem + ".csv");
      grid << v.grid_csv;
    }
  }
  if (!artifacts.experiment.comparison.empty()) {
    save_comparison_csv(cfg.out_dir + "/reports/comparison.csv",
                        artifacts.experiment.comparison);
    std::ofstream txt(cfg.out_dir + "/reports/comparison.txt");
    txt << render_comparison_text(artifacts.experiment.comparison);
  }
  return artifacts;
}

}  // namespace fraudseq
